#include <gtest/gtest.h>

#include <random>

#include "stablab/core.hpp"

using namespace stablab;

namespace {

Matrix random_orthonormal(std::size_t d, std::size_t k, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix g(d, k);
  for (Eigen::Index r = 0; r < g.rows(); ++r)
    for (Eigen::Index c = 0; c < g.cols(); ++c) g(r, c) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(d, k);
}

}  // namespace

TEST(SpectralMatrix, SingleEigenvector) {
  SpectralMatrix A(basis_vector(2, 0), Vector::Constant(1, 2.0));
  EXPECT_TRUE(A.apply(basis_vector(2, 0)).isApprox(2.0 * basis_vector(2, 0)));
}

TEST(SpectralMatrix, Linearity) {
  Matrix U(3, 2);
  U << 1, 0, 0, 1, 0, 0;
  SpectralMatrix A(U, Vector::LinSpaced(2, 2.0, 1.0));
  const Vector v = basis_vector(3, 0) + basis_vector(3, 1);
  Vector expected(3);
  expected << 2, 1, 0;
  EXPECT_LT((A.apply(v) - expected).norm(), 1e-15);
}

TEST(SpectralMatrix, RejectsNonOrthonormalBasis) {
  Matrix U = Matrix::Zero(3, 1);
  U(0, 0) = 0.5;
  try {
    SpectralMatrix A(U, Vector::Ones(1));
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("norm 0.5"), std::string::npos) << e.what();
  }
}

TEST(SpectralMatrix, ApplyIsSymmetric) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix U = random_orthonormal(6, 4, rng);
    Vector eig(4);
    for (auto& x : eig) x = normal(rng);
    SpectralMatrix A(U, eig);
    Vector u(6), v(6);
    for (auto& x : u) x = normal(rng);
    for (auto& x : v) x = normal(rng);
    EXPECT_NEAR(u.dot(A.apply(v)), v.dot(A.apply(u)), 1e-10);
  }
}

TEST(SpectralMatrix, NormAndExtremes) {
  Matrix U = Matrix::Identity(3, 2);
  SpectralMatrix A(U, (Vector(2) << -3.0, 1.0).finished());
  EXPECT_DOUBLE_EQ(A.norm(), 3.0);
  EXPECT_DOUBLE_EQ(A.max_eigenvalue(), 1.0);
  EXPECT_DOUBLE_EQ(A.min_eigenvalue(), -3.0);
  SpectralMatrix B(U, (Vector(2) << 2.0, 1.0).finished());
  EXPECT_DOUBLE_EQ(B.min_eigenvalue(), 0.0);  // rank-deficient
  EXPECT_DOUBLE_EQ(B.min_stored_eigenvalue(), 1.0);
}

TEST(EigenMinNonzero, Examples) {
  std::vector<Vector> a = {basis_vector(2, 0), basis_vector(2, 1)};
  EXPECT_NEAR(eigen_min_nonzero(a), 0.5, 1e-12);
  std::vector<Vector> b = {basis_vector(2, 0), basis_vector(2, 0)};
  EXPECT_NEAR(eigen_min_nonzero(b), 1.0, 1e-12);
  const double r = 3.0;
  std::vector<Vector> c = {r * basis_vector(4, 2)};
  EXPECT_NEAR(eigen_min_nonzero(c), r * r, 1e-12);
}

TEST(EigenMinNonzero, EmptySpanRejected) {
  std::vector<Vector> zeros = {Vector::Zero(3), Vector::Zero(3)};
  EXPECT_THROW(eigen_min_nonzero(zeros), NumericalError);
  std::vector<Vector> none;
  EXPECT_THROW(eigen_min_nonzero(none), std::invalid_argument);
}

TEST(EigenMinNonzero, ScaleCovariant) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  std::vector<Vector> xs(5, Vector(4));
  for (auto& x : xs)
    for (auto& v : x) v = normal(rng);
  const double base = eigen_min_nonzero(xs);
  for (double s : {0.1, 2.0, 7.5}) {
    std::vector<Vector> scaled;
    for (const auto& x : xs) scaled.push_back(s * x);
    EXPECT_NEAR(eigen_min_nonzero(scaled), s * s * base, 1e-10 * s * s);
  }
}

TEST(Dataset, Invariants) {
  EXPECT_THROW(Dataset({}), std::invalid_argument);
  EXPECT_THROW(Dataset({{Vector::Zero(2), 0.0}, {Vector::Zero(3), 0.0}}), std::invalid_argument);
  EXPECT_THROW(Dataset({{Vector::Constant(2, NAN), 0.0}}), std::invalid_argument);
}

TEST(TwinPair, DetectsExtraDifference) {
  Dataset s({{basis_vector(2, 0), 1.0}, {basis_vector(2, 1), 1.0}});
  Dataset sp({{basis_vector(2, 1), 1.0}, {basis_vector(2, 0), 1.0}});
  EXPECT_THROW(TwinPair(s, sp, 0), std::invalid_argument);
  const auto twins = TwinPair::replace(s, 1, {Vector::Zero(2), 2.0});
  EXPECT_EQ(twins.differing_index(), 1u);
  EXPECT_DOUBLE_EQ(twins.s_prime()[1].y, 2.0);
}

TEST(StepSchedule, Forms) {
  const auto c = StepSchedule::constant(0.05);
  EXPECT_DOUBLE_EQ(c.at(1), 0.05);
  EXPECT_DOUBLE_EQ(c.at(77), 0.05);
  EXPECT_NEAR(c.sum(100), 5.0, 1e-12);
  const auto inv = StepSchedule::inverse_t(0.05, 0.5);
  EXPECT_DOUBLE_EQ(inv.c(), 0.99);
  EXPECT_DOUBLE_EQ(inv.at(4), 0.05 / (0.99 * 0.5 * 4.0));
  EXPECT_DOUBLE_EQ(StepSchedule::harmonic(0.3).at(3), 0.1);
  EXPECT_THROW(c.at(0), std::invalid_argument);
  EXPECT_THROW(StepSchedule::harmonic(0.0), std::invalid_argument);
  EXPECT_THROW(StepSchedule::constant(-1.0), std::invalid_argument);
}

TEST(FiniteDiff, GenericFunction) {
  const auto f = [](const Vector& w) { return 0.5 * 2.0 * w.squaredNorm(); };
  const Vector g = finite_diff_gradient(f, basis_vector(3, 0), 1e-5);
  EXPECT_LT((g - 2.0 * basis_vector(3, 0)).norm(), 1e-6 * 2.0);
  const Vector zero = finite_diff_gradient([](const Vector&) { return 0.0; }, Vector::Ones(2), 1e-5);
  EXPECT_EQ(zero, Vector::Zero(2));
  EXPECT_THROW(finite_diff_gradient(f, Vector::Ones(2), 0.0), std::invalid_argument);
}

TEST(SymmetricEigenvalues, Ascending) {
  Matrix m(2, 2);
  m << 2, 1, 1, 2;
  const Vector e = symmetric_eigenvalues(m);
  EXPECT_NEAR(e(0), 1.0, 1e-12);
  EXPECT_NEAR(e(1), 3.0, 1e-12);
}
