#pragma once

#include <variant>

#include "fdloss/frechet.hpp"
#include "fdloss/matrix.hpp"

namespace fdloss {

// Population estimators that decouple the number of samples behind the generated-side
// statistics from the batch that carries gradients. Both follow the same step protocol:
//
//   stats = estimator.stats_with_batch(batch)      // live batch + detached history
//   grads = estimator.backprop(batch, d_mu, d_sigma)
//   estimator.commit(batch)                        // history update, no gradient
//
// Multi-device gathering is the identity here: `batch` is the union of all per-device
// batches, and statistics are formed after the union.

// FIFO ring of the most recent `capacity` feature rows.
class QueueState {
 public:
  QueueState(std::size_t capacity, std::size_t dim);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t fill() const noexcept { return fill_; }
  std::size_t cursor() const noexcept { return cursor_; }
  bool warm() const noexcept { return fill_ == capacity_; }

  // Fills the buffer with the last `capacity` rows of `samples`, preserving their order.
  void warm_start(const Matrix& samples);

  // Statistics over the stored rows followed by the live batch (fill + B rows).
  GaussianStats stats_with_batch(const Matrix& batch) const;

  // Replaces the B oldest rows with `batch`.
  void commit(const Matrix& batch);

  // Per-row gradients for the live batch only, with M = fill + B and mu the combined mean:
  //   grad(x_i) = d_mu / M + (2 / M) d_sigma (x_i - mu)
  Matrix backprop(const Matrix& batch, std::span<const double> d_mu, const Matrix& d_sigma) const;

  // Stored rows, oldest first.
  Matrix rows_in_order() const;

 private:
  std::size_t capacity_;
  std::size_t dim_;
  Matrix buffer_;
  std::size_t fill_ = 0;
  std::size_t cursor_ = 0;
};

struct BatchMoments {
  Vector mu;
  Matrix second;  // (1/B) sum x xᵀ
};

BatchMoments ema_batch_moments(const Matrix& batch);

struct EmaBlend {
  Vector mu;
  Matrix second;
  Matrix sigma;  // second - mu muᵀ

  GaussianStats as_stats(double weight) const { return {mu, sigma, weight}; }
};

// Exponential moving averages of the first and second feature moments.
class EmaState {
 public:
  EmaState(double beta, std::size_t dim);

  double beta() const noexcept { return beta_; }
  std::size_t dim() const noexcept { return dim_; }
  bool initialized() const noexcept { return initialized_; }
  const Vector& mu() const noexcept { return mu_; }
  const Matrix& second_moment() const noexcept { return second_; }

  // Sets the moments to the plain mean and second moment of all rows.
  void warm_start(const Matrix& samples);

  // mu_g = beta mu_ema + (1 - beta) mu_b;  M_g = beta M_ema + (1 - beta) M_b;
  // sigma_g = M_g - mu_g mu_gᵀ. Does not modify the state.
  EmaBlend blend(std::span<const double> mu_b, const Matrix& m_b) const;

  // Replaces the stored moments.
  void commit(std::span<const double> mu_g, const Matrix& m_g);

  GaussianStats stats_with_batch(const Matrix& batch) const;
  void commit(const Matrix& batch);

  // With a = (1 - beta) / B:
  //   grad(x_i) = a (d_mu - 2 d_sigma mu_g) + 2 a d_sigma x_i
  Matrix backprop(const Matrix& batch, std::span<const double> d_mu, const Matrix& d_sigma) const;

  // Sample mass behind the moments: the warm-start count, then beta * mass + (1 - beta) * B
  // per committed batch. Reported as GaussianStats::weight.
  double mass() const noexcept { return mass_; }

 private:
  double beta_;
  std::size_t dim_;
  Vector mu_;
  Matrix second_;
  bool initialized_ = false;
  double mass_ = 0.0;
};

enum class EstimatorKind { kQueue, kEma };

// Either estimator behind the common step protocol.
class Estimator {
 public:
  explicit Estimator(QueueState q) : state_(std::move(q)) {}
  explicit Estimator(EmaState e) : state_(std::move(e)) {}

  EstimatorKind kind() const noexcept {
    return std::holds_alternative<QueueState>(state_) ? EstimatorKind::kQueue
                                                       : EstimatorKind::kEma;
  }

  void warm_start(const Matrix& samples);
  GaussianStats stats_with_batch(const Matrix& batch) const;
  Matrix backprop(const Matrix& batch, std::span<const double> d_mu, const Matrix& d_sigma) const;
  void commit(const Matrix& batch);

  // Statistics of the stored population alone (queue rows, or the EMA moments).
  GaussianStats current_stats() const;

  const QueueState* queue() const noexcept { return std::get_if<QueueState>(&state_); }
  const EmaState* ema() const noexcept { return std::get_if<EmaState>(&state_); }

 private:
  std::variant<QueueState, EmaState> state_;
};

}  // namespace fdloss
