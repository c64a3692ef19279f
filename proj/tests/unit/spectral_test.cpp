#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "stablab/spectral.hpp"

using namespace stablab;

namespace {

Dataset from_features(const std::vector<Vector>& xs) {
  std::vector<LabeledSample> samples;
  for (const auto& x : xs) samples.push_back({x, 0.0});
  return Dataset(samples);
}

}  // namespace

TEST(RayleighXi, Examples) {
  EXPECT_NEAR(rayleigh_xi(from_features({basis_vector(2, 0), basis_vector(2, 1)})), 0.5, 1e-12);
  EXPECT_NEAR(rayleigh_xi(from_features({basis_vector(2, 0), basis_vector(2, 0)})), 1.0, 1e-12);
  std::mt19937_64 rng(1);
  auto xs = draw_features(SphericalGaussian{4}, 9, rng);
  const double base = rayleigh_xi(std::span<const Vector>(xs));
  for (auto& x : xs) x *= 2.0;
  EXPECT_NEAR(rayleigh_xi(std::span<const Vector>(xs)), 4.0 * base, 1e-10);
  EXPECT_THROW(rayleigh_xi(from_features({Vector::Zero(3)})), NumericalError);
}

TEST(RayleighXi, RandomSearchNeverBeatsEigenMinimum) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  // Rank-3 data in R^5, so the span is a proper subspace.
  Matrix U = Matrix::Identity(5, 3);
  const auto xs = draw_features(TransformedGaussian{U, Vector::Constant(3, 1.0)}, 6, rng);
  const double xi = rayleigh_xi(std::span<const Vector>(xs));
  Matrix second = Matrix::Zero(5, 5);
  for (const auto& x : xs) second += x * x.transpose() / 6.0;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 10000; ++k) {
    Vector c(static_cast<Eigen::Index>(xs.size()));
    for (auto& v : c) v = normal(rng);
    Vector u = Vector::Zero(5);
    for (std::size_t j = 0; j < xs.size(); ++j) u += c(static_cast<Eigen::Index>(j)) * xs[j];
    u.normalize();
    best = std::min(best, u.dot(second * u));
  }
  EXPECT_GE(best, xi - 1e-8);
  EXPECT_LE(best, xi * 1.5);  // the search gets reasonably close
}

TEST(RayleighXi, FullSpanMatchesGlobalMinimumEigenvalue) {
  std::mt19937_64 rng(3);
  const auto xs = draw_features(SphericalGaussian{4}, 12, rng);
  Matrix second = Matrix::Zero(4, 4);
  for (const auto& x : xs) second += x * x.transpose() / 12.0;
  EXPECT_NEAR(rayleigh_xi(std::span<const Vector>(xs)), symmetric_eigenvalues(second)(0), 1e-10);
}

TEST(Certificate, CycledBasisIsExact) {
  const double mu = 0.01;
  const auto cert = inverse_rayleigh_expectation(CycledBasis{5}, 5, mu, 100, 0, 0.2);
  EXPECT_NEAR(cert.xi_s, 0.2, 1e-12);
  EXPECT_NEAR(cert.estimate, 1.0 / (0.2 + mu), 1e-10);
  EXPECT_NEAR(cert.stderr_, 0.0, 1e-12);
  EXPECT_NEAR(cert.target, 1.0 / (0.2 + mu), 1e-15);
}

TEST(Certificate, LargeRegularizerDominates) {
  const double mu = 1e8;
  const auto cert = inverse_rayleigh_expectation(SphericalGaussian{3}, 6, mu, 100, 4, 0.2);
  EXPECT_NEAR(cert.estimate * mu, 1.0, 1e-6);
  EXPECT_TRUE(cert.verdict);
}

TEST(Certificate, RequiresEnoughDraws) {
  EXPECT_THROW(inverse_rayleigh_expectation(SphericalGaussian{3}, 6, 0.1, 99, 0, 0.2), std::invalid_argument);
}

TEST(Certificate, VerdictMonotoneInRegularizer) {
  for (double xi : {0.05, 0.1, 0.2, 0.3}) {
    bool passed = false;
    for (double mu : {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
      const auto cert = inverse_rayleigh_expectation(SphericalGaussian{4}, 16, mu, 300, 5, xi);
      if (passed) EXPECT_TRUE(cert.verdict) << "xi=" << xi << " mu=" << mu;
      passed = passed || cert.verdict;
    }
  }
}

TEST(Certificate, DeterministicAcrossWorkers) {
  const auto a = inverse_rayleigh_expectation(SphericalGaussian{5}, 10, 1e-3, 200, 8, 0.2, 1);
  const auto b = inverse_rayleigh_expectation(SphericalGaussian{5}, 10, 1e-3, 200, 8, 0.2, 3);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.stderr_, b.stderr_);
}

TEST(Prop1, Preconditions) {
  try {
    prop1_check(11, 20, 200, 0);
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("n >= 2d"), std::string::npos) << e.what();
  }
  try {
    prop1_check(10, 40, 200, 0);
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("d > 10"), std::string::npos) << e.what();
  }
}

TEST(Prop1, LargerSampleCertifies) {
  const auto cert = prop1_check(16, 64, 2000, 0, 2);
  EXPECT_DOUBLE_EQ(cert.mu, 1.0 / (64.0 * 64.0 * 64.0 * 64.0));
  EXPECT_DOUBLE_EQ(cert.candidate_xi, 0.2);
  EXPECT_TRUE(cert.verdict) << "estimate " << cert.estimate << " target " << cert.target;
  EXPECT_GT(cert.margin, 0.0);
}

TEST(TransformedGaussian, FeaturesStayInColumnSpace) {
  std::mt19937_64 rng(6);
  Matrix U = Matrix::Zero(4, 2);
  U(0, 0) = 1.0;
  U(3, 1) = 1.0;
  const auto xs = draw_features(TransformedGaussian{U, (Vector(2) << 3.0, 0.5).finished()}, 50, rng);
  for (const auto& x : xs) {
    EXPECT_EQ(x(1), 0.0);
    EXPECT_EQ(x(2), 0.0);
  }
}

TEST(DelimitedReader, ParsesSeparatorsCommentsAndHeader) {
  std::istringstream in("# comment\nx1,x2,y\n1,0,0.5\n0;1;1.5\n\n2\t2\t-1\n3 4 0\n");
  const auto s = read_delimited_dataset(in);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s.dimension(), 2u);
  EXPECT_DOUBLE_EQ(s[1].y, 1.5);
  EXPECT_DOUBLE_EQ(s[2].x(1), 2.0);
  EXPECT_DOUBLE_EQ(s[3].x(0), 3.0);
}

TEST(DelimitedReader, RejectsBadRows) {
  std::istringstream ragged("1,2,3\n1,2\n");
  EXPECT_THROW(read_delimited_dataset(ragged), std::invalid_argument);
  std::istringstream text("1,2,3\n1,x,3\n");
  EXPECT_THROW(read_delimited_dataset(text), std::invalid_argument);
  std::istringstream empty("# nothing\n");
  EXPECT_THROW(read_delimited_dataset(empty), std::invalid_argument);
  EXPECT_THROW(read_delimited_dataset(std::string("/nonexistent/file.csv")), std::invalid_argument);
}
