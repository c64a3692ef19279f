#pragma once

// Shared numerical types: small dense vectors, spectral matrices, labeled
// datasets, twin pairs and step-size schedules.

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stablab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Tolerance for identities that hold exactly in real arithmetic.
inline constexpr double kExactTolerance = 1e-10;
/// Relative threshold below which an eigenvalue counts as zero.
inline constexpr double kRankTolerance = 1e-10;

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

bool all_finite(const Vector& v);

/// Unit vector e_k in R^d (zero-based k).
Vector basis_vector(std::size_t d, std::size_t k);

/// Symmetric matrix A = U diag(lambda) U^T held in factored form.
///
/// The basis must have orthonormal columns (U^T U = I to 1e-10). Ranks below
/// the ambient dimension are allowed; the complement of col(U) is the null
/// space of A.
class SpectralMatrix {
 public:
  SpectralMatrix(Matrix basis, Vector eigenvalues);

  /// Diagonal matrix with the given entries on the standard basis.
  static SpectralMatrix diagonal(const Vector& entries);

  std::size_t dimension() const { return static_cast<std::size_t>(basis_.rows()); }
  std::size_t rank() const { return static_cast<std::size_t>(basis_.cols()); }
  const Matrix& basis() const { return basis_; }
  const Vector& eigenvalues() const { return eigenvalues_; }

  Vector apply(const Vector& v) const;
  /// U^T v: coordinates of v in the eigenbasis.
  Vector project(const Vector& v) const { return basis_.transpose() * v; }
  Matrix dense() const;

  /// Spectral norm max_k |lambda_k|.
  double norm() const;
  double max_eigenvalue() const;
  /// Smallest eigenvalue of A on the whole space (0 if rank < dimension).
  double min_eigenvalue() const;
  /// Smallest eigenvalue among the stored (column-space) eigenvalues.
  double min_stored_eigenvalue() const;

 private:
  Matrix basis_;
  Vector eigenvalues_;
};

struct LabeledSample {
  Vector x;
  double y = 0.0;
};

class Dataset {
 public:
  explicit Dataset(std::vector<LabeledSample> samples);

  std::size_t size() const { return samples_.size(); }
  std::size_t dimension() const { return static_cast<std::size_t>(samples_.front().x.size()); }
  const LabeledSample& operator[](std::size_t j) const { return samples_[j]; }
  const std::vector<LabeledSample>& samples() const { return samples_; }
  std::vector<Vector> features() const;

 private:
  std::vector<LabeledSample> samples_;
};

/// Datasets S and S' that agree everywhere except at differing_index.
class TwinPair {
 public:
  TwinPair(Dataset s, Dataset s_prime, std::size_t differing_index);

  /// Builds S' from S by replacing sample i.
  static TwinPair replace(const Dataset& s, std::size_t i, LabeledSample replacement);

  const Dataset& s() const { return s_; }
  const Dataset& s_prime() const { return s_prime_; }
  std::size_t differing_index() const { return index_; }
  std::size_t size() const { return s_.size(); }
  std::size_t dimension() const { return s_.dimension(); }

 private:
  Dataset s_;
  Dataset s_prime_;
  std::size_t index_;
};

/// Step-size rule alpha_t for t = 1, 2, ...
class StepSchedule {
 public:
  enum class Kind { Constant, InverseT, Harmonic };

  /// alpha_t = alpha. alpha = 0 is accepted as the frozen-iterate degenerate case.
  static StepSchedule constant(double alpha);
  /// alpha_t = a / (c * beta * t).
  static StepSchedule inverse_t(double a, double beta, double c = 0.99);
  /// alpha_t = b / t.
  static StepSchedule harmonic(double b);

  Kind kind() const { return kind_; }
  double at(std::size_t t) const;
  double sum(std::size_t T) const;
  std::string describe() const;

  double alpha() const { return alpha_; }
  double a() const { return a_; }
  double beta() const { return beta_; }
  double c() const { return c_; }
  double b() const { return b_; }

 private:
  StepSchedule() = default;
  Kind kind_ = Kind::Constant;
  double alpha_ = 0.0;
  double a_ = 0.0;
  double beta_ = 1.0;
  double c_ = 0.99;
  double b_ = 0.0;
};

/// Smallest nonzero eigenvalue of (1/n) sum_j x_j x_j^T, restricted to its range.
/// Eigenvalues below 1e-10 times the largest are treated as zero.
double eigen_min_nonzero(std::span<const Vector> samples);

/// Central differences (f(w + h e_k) - f(w - h e_k)) / 2h for every coordinate k.
Vector finite_diff_gradient(const std::function<double(const Vector&)>& f, const Vector& w,
                            double h);

/// Symmetric eigenvalues in ascending order.
Vector symmetric_eigenvalues(const Matrix& m);

}  // namespace stablab
