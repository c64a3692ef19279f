#include "stablab/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stablab {

bool all_finite(const Vector& v) { return v.allFinite(); }

Vector basis_vector(std::size_t d, std::size_t k) {
  if (k >= d) throw std::invalid_argument("basis_vector: index out of range");
  Vector e = Vector::Zero(static_cast<Eigen::Index>(d));
  e(static_cast<Eigen::Index>(k)) = 1.0;
  return e;
}

// ---------------------------------------------------------------------------
// SpectralMatrix

SpectralMatrix::SpectralMatrix(Matrix basis, Vector eigenvalues)
    : basis_(std::move(basis)), eigenvalues_(std::move(eigenvalues)) {
  if (basis_.rows() == 0 || basis_.cols() == 0) {
    throw std::invalid_argument("SpectralMatrix: empty basis");
  }
  if (basis_.cols() != eigenvalues_.size()) {
    throw std::invalid_argument("SpectralMatrix: basis has " + std::to_string(basis_.cols()) +
                                " columns but " + std::to_string(eigenvalues_.size()) +
                                " eigenvalues were given");
  }
  if (basis_.cols() > basis_.rows()) {
    throw std::invalid_argument("SpectralMatrix: more basis columns than dimensions");
  }
  if (!basis_.allFinite() || !eigenvalues_.allFinite()) {
    throw std::invalid_argument("SpectralMatrix: non-finite entries");
  }
  const Matrix gram = basis_.transpose() * basis_;
  const Matrix identity = Matrix::Identity(gram.rows(), gram.cols());
  const double defect = (gram - identity).cwiseAbs().maxCoeff();
  if (defect > kExactTolerance) {
    Eigen::Index worst_col = 0;
    (gram.diagonal().array() - 1.0).abs().maxCoeff(&worst_col);
    std::ostringstream msg;
    msg << "SpectralMatrix: basis is not orthonormal (max |U^T U - I| = " << defect
        << ", column " << worst_col << " has norm " << std::sqrt(gram(worst_col, worst_col))
        << ")";
    throw std::invalid_argument(msg.str());
  }
}

SpectralMatrix SpectralMatrix::diagonal(const Vector& entries) {
  const auto d = entries.size();
  return SpectralMatrix(Matrix::Identity(d, d), entries);
}

Vector SpectralMatrix::apply(const Vector& v) const {
  if (v.size() != basis_.rows()) throw std::invalid_argument("SpectralMatrix::apply: dimension mismatch");
  return basis_ * (eigenvalues_.asDiagonal() * (basis_.transpose() * v));
}

Matrix SpectralMatrix::dense() const {
  return basis_ * eigenvalues_.asDiagonal() * basis_.transpose();
}

double SpectralMatrix::norm() const { return eigenvalues_.cwiseAbs().maxCoeff(); }

double SpectralMatrix::max_eigenvalue() const {
  const double top = eigenvalues_.maxCoeff();
  return rank() < dimension() ? std::max(top, 0.0) : top;
}

double SpectralMatrix::min_eigenvalue() const {
  const double bottom = eigenvalues_.minCoeff();
  return rank() < dimension() ? std::min(bottom, 0.0) : bottom;
}

double SpectralMatrix::min_stored_eigenvalue() const { return eigenvalues_.minCoeff(); }

// ---------------------------------------------------------------------------
// Dataset / TwinPair

Dataset::Dataset(std::vector<LabeledSample> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw std::invalid_argument("Dataset: needs at least one sample");
  const auto d = samples_.front().x.size();
  if (d == 0) throw std::invalid_argument("Dataset: features must have dimension > 0");
  for (std::size_t j = 0; j < samples_.size(); ++j) {
    const auto& z = samples_[j];
    if (z.x.size() != d) {
      throw std::invalid_argument("Dataset: sample " + std::to_string(j) + " has dimension " +
                                  std::to_string(z.x.size()) + ", expected " + std::to_string(d));
    }
    if (!z.x.allFinite() || !std::isfinite(z.y)) {
      throw std::invalid_argument("Dataset: sample " + std::to_string(j) + " is not finite");
    }
  }
}

std::vector<Vector> Dataset::features() const {
  std::vector<Vector> xs;
  xs.reserve(samples_.size());
  for (const auto& z : samples_) xs.push_back(z.x);
  return xs;
}

TwinPair::TwinPair(Dataset s, Dataset s_prime, std::size_t differing_index)
    : s_(std::move(s)), s_prime_(std::move(s_prime)), index_(differing_index) {
  if (s_.size() != s_prime_.size()) throw std::invalid_argument("TwinPair: datasets differ in size");
  if (s_.dimension() != s_prime_.dimension()) {
    throw std::invalid_argument("TwinPair: datasets differ in dimension");
  }
  if (index_ >= s_.size()) throw std::invalid_argument("TwinPair: differing index out of range");
  for (std::size_t j = 0; j < s_.size(); ++j) {
    if (j == index_) continue;
    if (s_[j].x != s_prime_[j].x || s_[j].y != s_prime_[j].y) {
      throw std::invalid_argument("TwinPair: datasets also differ at index " + std::to_string(j));
    }
  }
}

TwinPair TwinPair::replace(const Dataset& s, std::size_t i, LabeledSample replacement) {
  if (i >= s.size()) throw std::invalid_argument("TwinPair::replace: index out of range");
  std::vector<LabeledSample> other = s.samples();
  other[i] = std::move(replacement);
  return TwinPair(s, Dataset(std::move(other)), i);
}

// ---------------------------------------------------------------------------
// StepSchedule

StepSchedule StepSchedule::constant(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("StepSchedule: constant step must be finite and >= 0");
  }
  StepSchedule s;
  s.kind_ = Kind::Constant;
  s.alpha_ = alpha;
  return s;
}

StepSchedule StepSchedule::inverse_t(double a, double beta, double c) {
  if (!(a > 0.0) || !(beta > 0.0) || !(c > 0.0)) {
    throw std::invalid_argument("StepSchedule: a/(c beta t) needs a, beta, c > 0");
  }
  StepSchedule s;
  s.kind_ = Kind::InverseT;
  s.a_ = a;
  s.beta_ = beta;
  s.c_ = c;
  return s;
}

StepSchedule StepSchedule::harmonic(double b) {
  if (!(b > 0.0)) throw std::invalid_argument("StepSchedule: b/t needs b > 0");
  StepSchedule s;
  s.kind_ = Kind::Harmonic;
  s.b_ = b;
  return s;
}

double StepSchedule::at(std::size_t t) const {
  if (t == 0) throw std::invalid_argument("StepSchedule: steps are indexed from t = 1");
  const auto td = static_cast<double>(t);
  switch (kind_) {
    case Kind::Constant:
      return alpha_;
    case Kind::InverseT:
      return a_ / (c_ * beta_ * td);
    case Kind::Harmonic:
      return b_ / td;
  }
  return 0.0;
}

double StepSchedule::sum(std::size_t T) const {
  double total = 0.0;
  for (std::size_t t = 1; t <= T; ++t) total += at(t);
  return total;
}

std::string StepSchedule::describe() const {
  std::ostringstream out;
  out.precision(10);
  switch (kind_) {
    case Kind::Constant:
      out << "constant(" << alpha_ << ")";
      break;
    case Kind::InverseT:
      out << "inverse_t(a=" << a_ << ";beta=" << beta_ << ";c=" << c_ << ")";
      break;
    case Kind::Harmonic:
      out << "harmonic(b=" << b_ << ")";
      break;
  }
  return out.str();
}

// ---------------------------------------------------------------------------

Vector symmetric_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigen-decomposition did not converge");
  return solver.eigenvalues();
}

double eigen_min_nonzero(std::span<const Vector> samples) {
  if (samples.empty()) throw std::invalid_argument("eigen_min_nonzero: empty sample list");
  const auto d = samples.front().size();
  Matrix second_moment = Matrix::Zero(d, d);
  for (const auto& x : samples) {
    if (x.size() != d) throw std::invalid_argument("eigen_min_nonzero: dimension mismatch");
    second_moment.selfadjointView<Eigen::Lower>().rankUpdate(x);
  }
  second_moment = second_moment.selfadjointView<Eigen::Lower>();
  second_moment /= static_cast<double>(samples.size());

  const Vector eig = symmetric_eigenvalues(second_moment);
  const double top = eig(eig.size() - 1);
  if (!(top > 0.0)) throw NumericalError("eigen_min_nonzero: empty span (all samples are zero)");
  const double cutoff = kRankTolerance * top;
  for (Eigen::Index k = 0; k < eig.size(); ++k) {
    if (eig(k) > cutoff) return eig(k);
  }
  return top;
}

Vector finite_diff_gradient(const std::function<double(const Vector&)>& f, const Vector& w,
                            double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: h must be positive");
  Vector grad(w.size());
  Vector probe = w;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    probe(k) = w(k) + h;
    const double up = f(probe);
    probe(k) = w(k) - h;
    const double down = f(probe);
    probe(k) = w(k);
    grad(k) = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace stablab
