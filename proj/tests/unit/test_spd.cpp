#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "spdkit/error.hpp"
#include "spdkit/spd.hpp"
#include "support.hpp"

namespace spdkit {
namespace {

using testing::random_spd;
using testing::random_symmetric;
using testing::rel_err;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no spdkit::Error thrown";
  return ErrorCode::InvalidInput;
}

void expect_valid_eig(const Matrix& a, const SymEig& eig) {
  const auto d = a.rows();
  const Matrix back = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
  EXPECT_LE((back - a).norm(), 1e-10 * a.norm());
  EXPECT_LE((eig.vectors.transpose() * eig.vectors - Matrix::Identity(d, d)).norm(), 1e-12 * static_cast<double>(d));
  for (Eigen::Index i = 1; i < d; ++i) EXPECT_LE(eig.values(i - 1), eig.values(i));
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::Index arg = 0;
    eig.vectors.col(j).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(eig.vectors(arg, j), 0.0);
  }
}

TEST(SpdMatrix, CheckedRejectsBadInput) {
  EXPECT_EQ(code_of([] { SpdMatrix::checked(Matrix{{1.0, 2.0}, {0.0, 1.0}}); }), ErrorCode::InvalidInput);
  EXPECT_EQ(code_of([] { SpdMatrix::checked(Matrix{{1.0, 2.0}, {2.0, 1.0}}); }), ErrorCode::NotPositiveDefinite);
  EXPECT_EQ(code_of([] { SpdMatrix::checked(Matrix{{1.0, 0.0}, {0.0, 1e-12}}); }), ErrorCode::NotPositiveDefinite);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(code_of([&] { SpdMatrix::checked(Matrix{{nan, 0.0}, {0.0, 1.0}}); }), ErrorCode::InvalidInput);
  EXPECT_EQ(code_of([] { SpdMatrix::checked(Matrix(2, 3)); }), ErrorCode::InvalidInput);
}

TEST(SpdMatrix, CheckedAcceptsRoundingLevelAsymmetry) {
  Matrix m{{2.0, 0.5}, {0.5 + 1e-14, 3.0}};
  const SpdMatrix s = SpdMatrix::checked(m);
  EXPECT_EQ(s(0, 1), s(1, 0));
}

TEST(SymEig, Identity) {
  const SymEig eig = sym_eig(Matrix::Identity(3, 3));
  EXPECT_EQ(eig.values, Vector::Ones(3));
}

TEST(SymEig, DiagonalGivesPermutedIdentity) {
  const SymEig eig = sym_eig(Matrix{{2.0, 0.0}, {0.0, 1.0}});
  EXPECT_EQ(eig.values, (Vector{{1.0, 2.0}}));
  EXPECT_EQ(eig.vectors, (Matrix{{0.0, 1.0}, {1.0, 0.0}}));
}

TEST(SymEig, RandomSymmetricReconstructs) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix a = random_symmetric(5, rng);
    expect_valid_eig(a, sym_eig(a));
    expect_valid_eig(a, schur_sym(a));
  }
}

TEST(SymEig, RejectsNonFinite) {
  Matrix a = Matrix::Identity(2, 2);
  a(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_EQ(code_of([&] { sym_eig(a); }), ErrorCode::InvalidInput);
}

TEST(SymEig, SignConventionIsStableUnderNegation) {
  std::mt19937_64 rng(2);
  const Matrix a = random_symmetric(4, rng);
  const SymEig e1 = sym_eig(a);
  const SymEig e2 = sym_eig(Matrix(a));
  EXPECT_EQ(e1.vectors, e2.vectors);
}

TEST(SpdPower, DiagonalSquareRoot) {
  const SpdMatrix r = spd_power(SpdMatrix::diagonal(Vector{{4.0, 9.0}}), 0.5);
  EXPECT_LE((r.matrix() - Matrix(Vector{{2.0, 3.0}}.asDiagonal())).norm(), 1e-14);
}

TEST(SpdPower, MinusOneMatchesLinearSolve) {
  std::mt19937_64 rng(3);
  const SpdMatrix a = random_spd(5, rng);
  const Matrix inv = a.matrix().partialPivLu().solve(Matrix::Identity(5, 5));
  EXPECT_LE(rel_err(spd_power(a, -1.0).matrix(), inv), 1e-10);
  EXPECT_LE(rel_err(spd_inverse(a).matrix(), inv), 1e-10);
}

TEST(SpdPower, TwoMatchesProduct) {
  std::mt19937_64 rng(4);
  const SpdMatrix a = random_spd(5, rng);
  EXPECT_LE(rel_err(spd_power(a, 2.0).matrix(), a.matrix() * a.matrix()), 1e-10);
}

TEST(SpdPower, OneAndZeroAreExact) {
  std::mt19937_64 rng(5);
  const SpdMatrix a = random_spd(4, rng);
  EXPECT_EQ(spd_power(a, 1.0), a);
  EXPECT_EQ(spd_power(a, 0.0), SpdMatrix::identity(4));
}

TEST(SpdPower, ComposesMultiplicatively) {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 20; ++rep) {
    const SpdMatrix a = random_spd(4, rng);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    const double p = unif(rng);
    const double q = unif(rng);
    EXPECT_LE(rel_err(spd_power(spd_power(a, p), q).matrix(), spd_power(a, p * q).matrix()), 1e-8);
  }
}

TEST(MatrixFunctions, LogOfIdentityIsZero) { EXPECT_EQ(spd_log(SpdMatrix::identity(3)).norm(), 0.0); }

TEST(MatrixFunctions, ExpOfZeroIsIdentity) { EXPECT_EQ(spd_exp(Matrix::Zero(3, 3)), SpdMatrix::identity(3)); }

TEST(MatrixFunctions, ExpLogRoundTrip) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    const SpdMatrix a = random_spd(6, rng, 2.0);
    EXPECT_LE(rel_err(spd_exp(spd_log(a)).matrix(), a.matrix()), 1e-9);
  }
}

TEST(MatrixFunctions, SquareRootsAreConsistent) {
  std::mt19937_64 rng(8);
  const SpdMatrix a = random_spd(5, rng);
  const Matrix r = spd_sqrt(a).matrix();
  const Matrix ri = spd_invsqrt(a).matrix();
  EXPECT_LE(rel_err(r * r, a.matrix()), 1e-12);
  EXPECT_LE((r * ri - Matrix::Identity(5, 5)).norm(), 1e-12);
}

TEST(MatrixFunctions, ExpOverflowIsReported) {
  EXPECT_EQ(code_of([] { spd_exp(Matrix::Identity(2, 2) * 800.0); }), ErrorCode::StepOverflow);
  EXPECT_EQ(code_of([] { spd_exp(Matrix::Identity(2, 2) * -40.0); }), ErrorCode::StepOverflow);
}

TEST(LogDet, MatchesEigenvalueSum) {
  std::mt19937_64 rng(9);
  const SpdMatrix a = random_spd(5, rng);
  EXPECT_NEAR(log_det(a), sym_eig(a.matrix()).values.array().log().sum(), 1e-12);
}

TEST(Regularize, DefaultShiftIsTraceScaled) {
  const Matrix a{{2.0, 2.0}, {2.0, 2.0}};
  const SpdMatrix r = regularize(a);
  EXPECT_NEAR(r(0, 0) - 2.0, 1e-8 * 2.0, 1e-15);
  EXPECT_EQ(code_of([&] { regularize(a, 1e-14); }), ErrorCode::NotPositiveDefinite);
}

TEST(GenEigvals, EqualArgumentsGiveOnes) {
  std::mt19937_64 rng(10);
  const SpdMatrix x = random_spd(4, rng);
  EXPECT_LE((gen_eigvals(x, x) - Vector::Ones(4)).norm(), 1e-12);
}

TEST(GenEigvals, DiagonalCase) {
  const Vector l = gen_eigvals(SpdMatrix::diagonal(Vector{{2.0, 1.0}}), SpdMatrix::identity(2));
  EXPECT_NEAR(l(0), 1.0, 1e-15);
  EXPECT_NEAR(l(1), 2.0, 1e-15);
}

TEST(GenEigvals, MatchesNonsymmetricEigensolve) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const SpdMatrix x = random_spd(5, rng, 1.5);
    const SpdMatrix y = random_spd(5, rng, 1.5);
    const Matrix m = y.matrix().partialPivLu().solve(x.matrix());
    Eigen::EigenSolver<Matrix> es(m);
    Vector oracle = es.eigenvalues().real();
    std::sort(oracle.data(), oracle.data() + oracle.size());
    const Vector l = gen_eigvals(x, y);
    EXPECT_LE((l - oracle).norm(), 1e-9 * oracle.norm());
  }
}

TEST(GenEigvals, SwappingArgumentsInvertsAndReverses) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const SpdMatrix x = random_spd(4, rng, 1.5);
    const SpdMatrix y = random_spd(4, rng, 1.5);
    const Vector a = gen_eigvals(x, y);
    const Vector b = gen_eigvals(y, x);
    const Vector inv_rev = a.reverse().cwiseInverse();
    EXPECT_LE((inv_rev - b).norm(), 1e-9 * b.norm());
  }
}

TEST(GenEigvals, SolverReusesFactorization) {
  std::mt19937_64 rng(13);
  const SpdMatrix y = random_spd(4, rng);
  const GenEigSolver solver(y);
  for (int rep = 0; rep < 5; ++rep) {
    const SpdMatrix x = random_spd(4, rng);
    EXPECT_EQ(solver.eigvals(x), gen_eigvals(x, y));
  }
}

TEST(GenEigvals, DimensionMismatch) {
  EXPECT_EQ(code_of([] { gen_eigvals(SpdMatrix::identity(2), SpdMatrix::identity(3)); }),
            ErrorCode::DimensionMismatch);
}

TEST(Errors, NumericalClassification) {
  EXPECT_TRUE(is_numerical(ErrorCode::NotPositiveDefinite));
  EXPECT_TRUE(is_numerical(ErrorCode::StepOverflow));
  EXPECT_FALSE(is_numerical(ErrorCode::InvalidDataset));
  EXPECT_FALSE(is_numerical(ErrorCode::CorruptFile));
  EXPECT_EQ(to_string(ErrorCode::SingularSystem), "SingularSystem");
}

}  // namespace
}  // namespace spdkit
