#include "fdloss/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fdloss/error.hpp"

namespace fdloss {

namespace {

void require_batch(const Matrix& batch, std::size_t dim, const char* op) {
  if (batch.rows() == 0) throw Error(ErrorKind::kInvalidArgument, std::string(op) + ": empty batch");
  if (batch.cols() != dim) {
    throw Error(ErrorKind::kDimensionMismatch,
                std::string(op) + ": batch has " + std::to_string(batch.cols()) +
                    " columns, estimator dim is " + std::to_string(dim));
  }
}

void require_grads(std::span<const double> d_mu, const Matrix& d_sigma, std::size_t dim,
                   const char* op) {
  if (d_mu.size() != dim || d_sigma.rows() != dim || d_sigma.cols() != dim) {
    throw Error(ErrorKind::kDimensionMismatch,
                std::string(op) + ": statistic gradients do not match dim " + std::to_string(dim));
  }
}

void require_finite_rows(const Matrix& m, const char* op) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (double v : m.row(r))
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::kNonFinite,
                    std::string(op) + ": non-finite value in row " + std::to_string(r));
      }
}

}  // namespace

// ---------------------------------------------------------------------------
// Queue

QueueState::QueueState(std::size_t capacity, std::size_t dim)
    : capacity_(capacity), dim_(dim), buffer_(capacity, dim) {
  if (capacity == 0) throw Error(ErrorKind::kInvalidArgument, "queue capacity must be positive");
  if (dim == 0) throw Error(ErrorKind::kInvalidArgument, "queue dim must be positive");
}

void QueueState::warm_start(const Matrix& samples) {
  if (samples.cols() != dim_) {
    throw Error(ErrorKind::kDimensionMismatch, "queue warm_start: sample dim mismatch");
  }
  if (samples.rows() < capacity_) {
    throw Error(ErrorKind::kInvalidArgument,
                "queue warm_start needs at least " + std::to_string(capacity_) +
                    " rows, got " + std::to_string(samples.rows()));
  }
  require_finite_rows(samples, "queue warm_start");
  const std::size_t offset = samples.rows() - capacity_;
  for (std::size_t r = 0; r < capacity_; ++r) {
    auto src = samples.row(offset + r);
    std::copy(src.begin(), src.end(), buffer_.row(r).begin());
  }
  fill_ = capacity_;
  cursor_ = 0;
}

GaussianStats QueueState::stats_with_batch(const Matrix& batch) const {
  if (!warm()) {
    throw Error(ErrorKind::kNotInitialized,
                "queue holds " + std::to_string(fill_) + " of " + std::to_string(capacity_) +
                    " rows; call warm_start first");
  }
  require_batch(batch, dim_, "queue stats");
  return stats_from_features(vstack(buffer_, batch));
}

void QueueState::commit(const Matrix& batch) {
  require_batch(batch, dim_, "queue commit");
  if (batch.rows() > capacity_) {
    throw Error(ErrorKind::kInvalidArgument,
                "queue commit of " + std::to_string(batch.rows()) + " rows exceeds capacity " +
                    std::to_string(capacity_));
  }
  require_finite_rows(batch, "queue commit");
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    auto src = batch.row(r);
    std::copy(src.begin(), src.end(), buffer_.row(cursor_).begin());
    cursor_ = (cursor_ + 1) % capacity_;
  }
}

Matrix QueueState::backprop(const Matrix& batch, std::span<const double> d_mu,
                            const Matrix& d_sigma) const {
  if (!warm()) throw Error(ErrorKind::kNotInitialized, "queue backprop before warm_start");
  require_batch(batch, dim_, "queue backprop");
  require_grads(d_mu, d_sigma, dim_, "queue backprop");

  const double m = static_cast<double>(fill_ + batch.rows());
  Vector mean(dim_, 0.0);
  for (std::size_t r = 0; r < fill_; ++r)
    for (std::size_t j = 0; j < dim_; ++j) mean[j] += buffer_(r, j);
  for (std::size_t r = 0; r < batch.rows(); ++r)
    for (std::size_t j = 0; j < dim_; ++j) mean[j] += batch(r, j);
  for (double& v : mean) v /= m;

  Matrix grads(batch.rows(), dim_);
  Vector centered(dim_);
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    for (std::size_t j = 0; j < dim_; ++j) centered[j] = batch(r, j) - mean[j];
    const Vector g = matvec(d_sigma, centered);
    for (std::size_t j = 0; j < dim_; ++j) grads(r, j) = (d_mu[j] + 2.0 * g[j]) / m;
  }
  return grads;
}

Matrix QueueState::rows_in_order() const {
  Matrix out(fill_, dim_);
  const std::size_t start = fill_ == capacity_ ? cursor_ : 0;
  for (std::size_t r = 0; r < fill_; ++r) {
    auto src = buffer_.row((start + r) % capacity_);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

// ---------------------------------------------------------------------------
// EMA

BatchMoments ema_batch_moments(const Matrix& batch) {
  if (batch.rows() == 0) throw Error(ErrorKind::kInvalidArgument, "ema_batch_moments: empty batch");
  const std::size_t d = batch.cols();
  BatchMoments out{Vector(d, 0.0), Matrix(d, d)};
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    auto x = batch.row(r);
    for (std::size_t i = 0; i < d; ++i) {
      out.mu[i] += x[i];
      for (std::size_t j = i; j < d; ++j) out.second(i, j) += x[i] * x[j];
    }
  }
  const double inv_b = 1.0 / static_cast<double>(batch.rows());
  for (double& v : out.mu) v *= inv_b;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      out.second(i, j) *= inv_b;
      out.second(j, i) = out.second(i, j);
    }
  }
  return out;
}

EmaState::EmaState(double beta, std::size_t dim)
    : beta_(beta), dim_(dim), mu_(dim, 0.0), second_(dim, dim) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "EMA beta must lie in [0, 1)");
  }
  if (dim == 0) throw Error(ErrorKind::kInvalidArgument, "EMA dim must be positive");
}

void EmaState::warm_start(const Matrix& samples) {
  require_batch(samples, dim_, "ema warm_start");
  require_finite_rows(samples, "ema warm_start");
  BatchMoments m = ema_batch_moments(samples);
  mu_ = std::move(m.mu);
  second_ = std::move(m.second);
  mass_ = static_cast<double>(samples.rows());
  initialized_ = true;
}

EmaBlend EmaState::blend(std::span<const double> mu_b, const Matrix& m_b) const {
  if (!initialized_) throw Error(ErrorKind::kNotInitialized, "EMA state used before warm_start");
  require_grads(mu_b, m_b, dim_, "ema blend");
  const double keep = beta_;
  const double take = 1.0 - beta_;
  EmaBlend out{Vector(dim_), Matrix(dim_, dim_), Matrix(dim_, dim_)};
  for (std::size_t i = 0; i < dim_; ++i) out.mu[i] = keep * mu_[i] + take * mu_b[i];
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) {
      out.second(i, j) = keep * second_(i, j) + take * m_b(i, j);
      out.sigma(i, j) = out.second(i, j) - out.mu[i] * out.mu[j];
    }
  }
  return out;
}

void EmaState::commit(std::span<const double> mu_g, const Matrix& m_g) {
  require_grads(mu_g, m_g, dim_, "ema commit");
  mu_.assign(mu_g.begin(), mu_g.end());
  second_ = m_g;
  initialized_ = true;
}

GaussianStats EmaState::stats_with_batch(const Matrix& batch) const {
  require_batch(batch, dim_, "ema stats");
  const BatchMoments m = ema_batch_moments(batch);
  const double weight = beta_ * mass_ + (1.0 - beta_) * static_cast<double>(batch.rows());
  return blend(m.mu, m.second).as_stats(weight);
}

void EmaState::commit(const Matrix& batch) {
  require_batch(batch, dim_, "ema commit");
  const BatchMoments m = ema_batch_moments(batch);
  const EmaBlend b = blend(m.mu, m.second);
  commit(b.mu, b.second);
  mass_ = beta_ * mass_ + (1.0 - beta_) * static_cast<double>(batch.rows());
}

Matrix EmaState::backprop(const Matrix& batch, std::span<const double> d_mu,
                          const Matrix& d_sigma) const {
  require_batch(batch, dim_, "ema backprop");
  require_grads(d_mu, d_sigma, dim_, "ema backprop");
  const BatchMoments m = ema_batch_moments(batch);
  const EmaBlend b = blend(m.mu, m.second);

  const double a = (1.0 - beta_) / static_cast<double>(batch.rows());
  const Vector g_mu = matvec(d_sigma, b.mu);
  Vector shift(dim_);
  for (std::size_t j = 0; j < dim_; ++j) shift[j] = a * (d_mu[j] - 2.0 * g_mu[j]);

  Matrix grads(batch.rows(), dim_);
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    const Vector gx = matvec(d_sigma, batch.row(r));
    for (std::size_t j = 0; j < dim_; ++j) grads(r, j) = shift[j] + 2.0 * a * gx[j];
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Dispatch

void Estimator::warm_start(const Matrix& samples) {
  std::visit([&](auto& s) { s.warm_start(samples); }, state_);
}

GaussianStats Estimator::stats_with_batch(const Matrix& batch) const {
  return std::visit([&](const auto& s) { return s.stats_with_batch(batch); }, state_);
}

Matrix Estimator::backprop(const Matrix& batch, std::span<const double> d_mu,
                           const Matrix& d_sigma) const {
  return std::visit([&](const auto& s) { return s.backprop(batch, d_mu, d_sigma); }, state_);
}

void Estimator::commit(const Matrix& batch) {
  std::visit([&](auto& s) { s.commit(batch); }, state_);
}

GaussianStats Estimator::current_stats() const {
  if (const auto* q = queue()) {
    if (!q->warm()) throw Error(ErrorKind::kNotInitialized, "queue read before warm_start");
    GaussianStats s = stats_from_features(q->rows_in_order());
    return s;
  }
  const EmaState& e = *ema();
  if (!e.initialized()) throw Error(ErrorKind::kNotInitialized, "EMA read before warm_start");
  GaussianStats s{e.mu(), e.second_moment(), e.mass()};
  for (std::size_t i = 0; i < e.dim(); ++i)
    for (std::size_t j = 0; j < e.dim(); ++j) s.sigma(i, j) -= e.mu()[i] * e.mu()[j];
  return s;
}

}  // namespace fdloss
