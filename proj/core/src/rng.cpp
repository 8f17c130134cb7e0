#include "fdloss/rng.hpp"

#include <cmath>
#include <numbers>

namespace fdloss {

double SplitMix64::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Matrix SplitMix64::normal_matrix(std::size_t rows, std::size_t cols, double stddev) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = stddev * normal();
  return m;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) noexcept {
  SplitMix64 g(base ^ (salt * 0xD1B54A32D192ED03ULL));
  g.next();
  return g.next();
}

}  // namespace fdloss
