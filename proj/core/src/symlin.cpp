#include "fdloss/symlin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "fdloss/error.hpp"

namespace fdloss {

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

// Diagonalizes `a` in place by cyclic Jacobi rotations; accumulates rotations into `v` when
// non-null.
void jacobi_diagonalize(Matrix& a, Matrix* v, const JacobiOptions& options) {
  const std::size_t n = a.rows();
  const double threshold = options.tolerance * frobenius_norm(a);
  const std::size_t budget = options.max_rotations_per_dim2 * n * n;
  std::size_t rotations = 0;

  double off = off_diagonal_norm(a);
  while (off > threshold) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        if (++rotations > budget) {
          std::ostringstream msg;
          msg << "eig_sym: Jacobi did not converge within " << budget
              << " rotations (off-diagonal norm " << off << ", threshold " << threshold << ")";
          throw NoConvergenceError(msg.str(), off);
        }
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::hypot(theta, 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - s * akq;
          a(k, q) = a(q, k) = s * akp + c * akq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;

        if (v != nullptr) {
          for (std::size_t k = 0; k < n; ++k) {
            const double vkp = (*v)(k, p);
            const double vkq = (*v)(k, q);
            (*v)(k, p) = c * vkp - s * vkq;
            (*v)(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
    off = off_diagonal_norm(a);
  }
}

Matrix reconstruct(const SymEigen& e, auto&& transform) {
  const std::size_t n = e.values.size();
  Matrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = transform(e.values[k]);
    if (lam == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double vik = lam * e.vectors(i, k);
      for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * e.vectors(j, k);
    }
  }
  return symmetrized(out);
}

}  // namespace

void validate_symmetric(const Matrix& a) {
  if (!a.square() || a.rows() == 0) {
    throw Error(ErrorKind::kDimensionMismatch,
                "expected a non-empty square matrix, got " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()));
  }
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (!std::isfinite(a(i, j))) {
        std::ostringstream msg;
        msg << "non-finite entry " << a(i, j) << " at (" << i << ", " << j << ")";
        throw Error(ErrorKind::kNonFinite, msg.str());
      }
    }
  }
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      if (std::abs(a(i, j) - a(j, i)) > 1e-10 * std::max(1.0, std::abs(a(i, j)))) {
        std::ostringstream msg;
        msg << "matrix not symmetric at (" << i << ", " << j << "): " << a(i, j) << " vs "
            << a(j, i);
        throw Error(ErrorKind::kAsymmetric, msg.str());
      }
    }
  }
}

SymEigen eig_sym(const Matrix& a, const JacobiOptions& options) {
  validate_symmetric(a);
  const std::size_t n = a.rows();
  Matrix work = symmetrized(a);
  Matrix v = Matrix::identity(n);
  jacobi_diagonalize(work, &v, options);

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t lead = 0;
    while (lead + 1 < n && std::abs(v(lead, k)) <= 1e-12) ++lead;
    if (v(lead, k) < 0.0)
      for (std::size_t i = 0; i < n; ++i) v(i, k) = -v(i, k);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (work(x, x) != work(y, y)) return work(x, x) < work(y, y);
    for (std::size_t i = 0; i < n; ++i)
      if (v(i, x) != v(i, y)) return v(i, x) < v(i, y);
    return x < y;
  });

  SymEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = work(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

Vector eigvals_sym(const Matrix& a, const JacobiOptions& options) {
  validate_symmetric(a);
  Matrix work = symmetrized(a);
  jacobi_diagonalize(work, nullptr, options);
  Vector values(a.rows());
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = work(k, k);
  std::sort(values.begin(), values.end());
  return values;
}

Matrix psd_project(const Matrix& a, double floor) {
  if (!(floor >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "psd_project: floor must be >= 0");
  const SymEigen e = eig_sym(a);
  return reconstruct(e, [floor](double lam) { return std::max(lam, floor); });
}

Matrix sqrt_psd(const Matrix& a, ComputationLog* log) {
  const SymEigen e = eig_sym(a);
  const double limit = -1e-8 * std::abs(trace(a)) / static_cast<double>(a.rows());
  if (log != nullptr && e.values.front() < limit) {
    std::ostringstream msg;
    msg << "sqrt_psd: clamped eigenvalue " << e.values.front() << " below tolerance " << limit;
    log->warn(msg.str());
  }
  return reconstruct(e, [](double lam) { return lam > 0.0 ? std::sqrt(lam) : 0.0; });
}

double trace_sqrt_product(const Matrix& ref_root, const Matrix& gen_cov, ComputationLog* log) {
  if (!ref_root.square() || !gen_cov.square() || ref_root.rows() != gen_cov.rows()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "trace_sqrt_product: reference root is " + std::to_string(ref_root.rows()) +
                    "x" + std::to_string(ref_root.cols()) + ", covariance is " +
                    std::to_string(gen_cov.rows()) + "x" + std::to_string(gen_cov.cols()));
  }
  const Matrix product = symmetrized(matmul(matmul(ref_root, gen_cov), ref_root));
  const Vector values = eigvals_sym(product);
  const double limit = 1e-8 * std::abs(trace(product));
  double sum = 0.0;
  for (double lam : values) {
    if (lam > 0.0) {
      sum += std::sqrt(lam);
    } else if (log != nullptr && -lam > limit) {
      std::ostringstream msg;
      msg << "trace_sqrt_product: clamped eigenvalue " << lam << " (tolerance " << limit << ")";
      log->warn(msg.str());
    }
  }
  return sum;
}

}  // namespace fdloss
