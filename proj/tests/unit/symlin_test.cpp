#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "fdloss/error.hpp"
#include "fdloss/symlin.hpp"
#include "oracles.hpp"

namespace fdloss {
namespace {

double reconstruction_error(const Matrix& a, const SymEigen& e) {
  const Matrix rebuilt =
      matmul(matmul(e.vectors, Matrix::diagonal(e.values)), e.vectors.transposed());
  return frobenius_norm(a - rebuilt) / std::max(1.0, frobenius_norm(a));
}

TEST(EigSym, DiagonalInputIsSortedAscending) {
  const SymEigen e = eig_sym(Matrix{{3.0, 0.0}, {0.0, 1.0}});
  EXPECT_EQ(e.values, (Vector{1.0, 3.0}));
  EXPECT_EQ(e.vectors, (Matrix{{0.0, 1.0}, {1.0, 0.0}}));
}

TEST(EigSym, IdentityHasUnitSpectrum) {
  const SymEigen e = eig_sym(Matrix::identity(4));
  EXPECT_EQ(e.values, (Vector{1.0, 1.0, 1.0, 1.0}));
  // Equal eigenvalues: columns in ascending lexicographic order, so e_4 comes first.
  Matrix reversed(4, 4);
  for (std::size_t k = 0; k < 4; ++k) reversed(3 - k, k) = 1.0;
  EXPECT_EQ(e.vectors, reversed);
}

TEST(EigSym, SeededEightByEightReconstructs) {
  SplitMix64 rng(8);
  const Matrix a = oracle::random_symmetric(8, rng);
  const SymEigen e = eig_sym(a);
  EXPECT_LT(reconstruction_error(a, e), 1e-8);
  EXPECT_LT(max_abs(matmul(e.vectors.transposed(), e.vectors) - Matrix::identity(8)), 1e-10);
  EXPECT_TRUE(std::is_sorted(e.values.begin(), e.values.end()));
}

TEST(EigSym, ThousandRandomMatricesReconstruct) {
  SplitMix64 rng(1000);
  double worst = 0.0;
  double worst_orth = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 1 + static_cast<std::size_t>(trial % 16);
    const Matrix a = oracle::random_symmetric(d, rng, 1.0 + static_cast<double>(trial % 7));
    const SymEigen e = eig_sym(a);
    worst = std::max(worst, reconstruction_error(a, e));
    worst_orth = std::max(
        worst_orth, max_abs(matmul(e.vectors.transposed(), e.vectors) - Matrix::identity(d)));
    ASSERT_TRUE(std::is_sorted(e.values.begin(), e.values.end()));
  }
  EXPECT_LT(worst, 1e-8);
  EXPECT_LT(worst_orth, 1e-10);
}

TEST(EigSym, EigenvectorSignConvention) {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const SymEigen e = eig_sym(oracle::random_symmetric(5, rng));
    for (std::size_t k = 0; k < 5; ++k) {
      std::size_t lead = 0;
      while (std::abs(e.vectors(lead, k)) <= 1e-12) ++lead;
      EXPECT_GT(e.vectors(lead, k), 0.0);
    }
  }
}

TEST(EigSym, EigvalsMatchFullDecomposition) {
  SplitMix64 rng(4);
  const Matrix a = oracle::random_symmetric(9, rng);
  const Vector full = eig_sym(a).values;
  const Vector only = eigvals_sym(a);
  for (std::size_t i = 0; i < full.size(); ++i) EXPECT_NEAR(full[i], only[i], 1e-12);
}

TEST(EigSym, RejectsNonFiniteEntryByPosition) {
  Matrix a = Matrix::identity(3);
  a(2, 1) = std::numeric_limits<double>::quiet_NaN();
  try {
    eig_sym(a);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonFinite);
    EXPECT_NE(std::string(e.what()).find("(2, 1)"), std::string::npos) << e.what();
  }
}

TEST(EigSym, RejectsAsymmetricAndNonSquare) {
  Matrix a{{1.0, 2.0}, {2.1, 1.0}};
  try {
    eig_sym(a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kAsymmetric);
  }
  // Within the relative tolerance.
  Matrix b{{1.0, 1e6}, {1e6 + 1e-5, 1.0}};
  EXPECT_NO_THROW(eig_sym(b));
  try {
    eig_sym(Matrix(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimensionMismatch);
  }
}

TEST(EigSym, ExhaustedBudgetReportsResidual) {
  SplitMix64 rng(5);
  const Matrix a = oracle::random_symmetric(6, rng);
  JacobiOptions tight;
  tight.max_rotations_per_dim2 = 0;
  try {
    eig_sym(a, tight);
    FAIL();
  } catch (const NoConvergenceError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNoConvergence);
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(EigSym, TiedEigenvaluesAreOrderedReproducibly) {
  const Matrix a{{2.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 2.0}};
  const SymEigen e = eig_sym(a);
  EXPECT_EQ(e.values, (Vector{1.0, 2.0, 2.0}));
  // Ties sorted by lexicographic comparison of the eigenvectors: e3 < e1.
  EXPECT_EQ(e.vectors(2, 1), 1.0);
  EXPECT_EQ(e.vectors(0, 2), 1.0);
}

TEST(PsdProject, ClampsNegativeEigenvalue) {
  const Matrix p = psd_project(Matrix{{4.0, 0.0}, {0.0, -0.001}}, 0.0);
  EXPECT_EQ(p, (Matrix{{4.0, 0.0}, {0.0, 0.0}}));
}

TEST(PsdProject, LeavesPsdInputUnchanged) {
  SplitMix64 rng(6);
  const Matrix a = oracle::random_psd(6, rng, 0.1);
  EXPECT_LT(max_abs(psd_project(a) - a), 1e-10);
}

TEST(PsdProject, IndefiniteInputBecomesPsdAndIsIdempotent) {
  SplitMix64 rng(7);
  const Matrix a = oracle::random_symmetric(6, rng);
  ASSERT_LT(eigvals_sym(a).front(), 0.0);
  const Matrix p = psd_project(a);
  EXPECT_GE(eigvals_sym(p).front(), -1e-12);
  EXPECT_LT(max_abs(psd_project(p) - p), 1e-10);
}

TEST(PsdProject, RaisesSpectrumToFloor) {
  SplitMix64 rng(8);
  const Matrix p = psd_project(oracle::random_symmetric(5, rng), 0.5);
  EXPECT_GE(eigvals_sym(p).front(), 0.5 - 1e-10);
}

TEST(PsdProject, RejectsNegativeFloor) {
  EXPECT_THROW(psd_project(Matrix::identity(2), -1.0), Error);
}

TEST(SqrtPsd, DiagonalAndIdentity) {
  EXPECT_EQ(sqrt_psd(Matrix{{4.0, 0.0}, {0.0, 9.0}}), (Matrix{{2.0, 0.0}, {0.0, 3.0}}));
  EXPECT_EQ(sqrt_psd(Matrix::identity(3)), Matrix::identity(3));
}

TEST(SqrtPsd, SquaresBackAndAgreesWithDenmanBeavers) {
  SplitMix64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = oracle::random_psd(8, rng, 0.05);
    const Matrix r = sqrt_psd(a);
    EXPECT_LT(frobenius_norm(matmul(r, r) - a) / frobenius_norm(a), 1e-7);
    EXPECT_GE(eigvals_sym(r).front(), 0.0);
    const Matrix db = oracle::denman_beavers_sqrt(a);
    EXPECT_LT(frobenius_norm(r - db) / frobenius_norm(db), 1e-8);
  }
}

TEST(SqrtPsd, WarnsOnlyForMaterialNegativeEigenvalues) {
  ComputationLog log;
  sqrt_psd(Matrix{{1.0, 0.0}, {0.0, -1e-12}}, &log);
  EXPECT_EQ(log.warning_count(), 0u);
  const Matrix r = sqrt_psd(Matrix{{1.0, 0.0}, {0.0, -0.5}}, &log);
  EXPECT_EQ(log.warning_count(), 1u);
  EXPECT_EQ(r, (Matrix{{1.0, 0.0}, {0.0, 0.0}}));
}

TEST(TraceSqrtProduct, IdentityRootAndDiagonalCovariance) {
  EXPECT_DOUBLE_EQ(trace_sqrt_product(Matrix::identity(2), Matrix{{4.0, 0.0}, {0.0, 9.0}}), 5.0);
}

TEST(TraceSqrtProduct, RootOfSigmaWithSigmaGivesTrace) {
  SplitMix64 rng(10);
  const Matrix s = oracle::random_psd(5, rng, 0.1);
  EXPECT_NEAR(trace_sqrt_product(sqrt_psd(s), s), trace(s), 1e-10 * trace(s));
}

TEST(TraceSqrtProduct, MatchesCongruenceOracle) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix sr = oracle::random_psd(6, rng, 0.05);
    const Matrix sg = oracle::random_psd(6, rng, 0.05);
    const Matrix root = oracle::denman_beavers_sqrt(sr);
    const Matrix product = oracle::multiply(oracle::multiply(root, sg), root);
    const double expected = oracle::trace_of(oracle::denman_beavers_sqrt(symmetrized(product)));
    EXPECT_NEAR(trace_sqrt_product(sqrt_psd(sr), sg), expected, 1e-9 * expected);
  }
}

TEST(TraceSqrtProduct, InvariantUnderCommonRotation) {
  SplitMix64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 2 + static_cast<std::size_t>(trial % 7);
    const Matrix sr = oracle::random_psd(d, rng, 0.01);
    const Matrix sg = oracle::random_psd(d, rng, 0.01);
    const Matrix q = oracle::random_orthogonal(d, rng);
    const Matrix sr_rot = symmetrized(matmul(matmul(q, sr), q.transposed()));
    const Matrix sg_rot = symmetrized(matmul(matmul(q, sg), q.transposed()));
    const double a = trace_sqrt_product(sqrt_psd(sr), sg);
    const double b = trace_sqrt_product(sqrt_psd(sr_rot), sg_rot);
    EXPECT_NEAR(a, b, 1e-8 * std::max(1.0, a));
    EXPECT_GE(a, 0.0);
  }
}

TEST(TraceSqrtProduct, NonNegativeForIndefiniteCovariance) {
  SplitMix64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix root = sqrt_psd(oracle::random_psd(4, rng));
    EXPECT_GE(trace_sqrt_product(root, oracle::random_symmetric(4, rng)), 0.0);
  }
}

TEST(TraceSqrtProduct, DimensionMismatch) {
  try {
    trace_sqrt_product(Matrix::identity(2), Matrix::identity(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimensionMismatch);
  }
}

TEST(TraceSqrtProduct, WarnsWhenClampingLargeNegativeEigenvalue) {
  ComputationLog log;
  const double t = trace_sqrt_product(Matrix::identity(2), Matrix{{1.0, 0.0}, {0.0, -1.0}}, &log);
  EXPECT_DOUBLE_EQ(t, 1.0);
  EXPECT_EQ(log.warning_count(), 1u);
}

TEST(EigSym, ToleranceScalesWithTheMatrix) {
  SplitMix64 rng(31);
  const Matrix a = oracle::random_psd(6, rng, 0.1);
  const Vector base = eigvals_sym(a);
  for (double s : {1e-9, 1e-4, 1e5}) {
    const Vector scaled = eigvals_sym(a * s);
    for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(scaled[i] / s, base[i], 1e-10 * base[i]);
  }
}

}  // namespace
}  // namespace fdloss
