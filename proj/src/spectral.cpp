#include "stablab/spectral.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "stablab/engine.hpp"

namespace stablab {

double rayleigh_xi(const Dataset& s) {
  const auto xs = s.features();
  return rayleigh_xi(std::span<const Vector>(xs));
}

double rayleigh_xi(std::span<const Vector> features) { return eigen_min_nonzero(features); }

std::vector<Vector> draw_features(const FeatureSampler& sampler, std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> xs;
  xs.reserve(n);
  if (const auto* g = std::get_if<SphericalGaussian>(&sampler)) {
    for (std::size_t j = 0; j < n; ++j) {
      Vector x(g->d);
      for (auto& v : x) v = normal(rng);
      xs.push_back(std::move(x));
    }
  } else if (const auto* c = std::get_if<CycledBasis>(&sampler)) {
    for (std::size_t j = 0; j < n; ++j) xs.push_back(basis_vector(c->d, j % c->d));
  } else {
    const auto& t = std::get<TransformedGaussian>(sampler);
    if (t.U.cols() != t.scales.size()) throw std::invalid_argument("TransformedGaussian: U and D disagree");
    for (std::size_t j = 0; j < n; ++j) {
      Vector g(t.scales.size());
      for (auto& v : g) v = normal(rng);
      xs.push_back(t.U * (t.scales.asDiagonal() * g));
    }
  }
  return xs;
}

RayleighCertificate inverse_rayleigh_expectation(const FeatureSampler& sampler, std::size_t n, double mu,
                                                 std::size_t M, std::uint64_t seed, double candidate_xi,
                                                 unsigned workers) {
  if (M < kMinCertificateDraws) throw std::invalid_argument("inverse_rayleigh_expectation: need M >= 100");
  if (n == 0) throw std::invalid_argument("inverse_rayleigh_expectation: need n >= 1");
  if (!(mu >= 0.0)) throw std::invalid_argument("inverse_rayleigh_expectation: need mu >= 0");

  std::vector<double> inv(M), xis(M);
  auto draw = [&](std::size_t k) {
    std::mt19937_64 rng(derive_seed(seed, k));
    const auto xs = draw_features(sampler, n, rng);
    xis[k] = rayleigh_xi(std::span<const Vector>(xs));
    inv[k] = 1.0 / (xis[k] + mu);
  };
  parallel_for_index(M, workers, draw);

  RayleighCertificate cert;
  cert.xi_s = xis.front();
  cert.mu = mu;
  cert.draws = M;
  cert.n = n;
  double mean = 0.0;
  for (double v : inv) mean += v;
  mean /= static_cast<double>(M);
  double ss = 0.0;
  for (double v : inv) ss += (v - mean) * (v - mean);
  cert.estimate = mean;
  cert.stderr_ = std::sqrt(ss / static_cast<double>(M - 1)) / std::sqrt(static_cast<double>(M));
  cert.candidate_xi = candidate_xi;
  cert.target = 1.0 / (candidate_xi + mu);
  cert.margin = cert.target - (cert.estimate + 2.0 * cert.stderr_);
  cert.verdict = cert.margin >= 0.0;
  return cert;
}

RayleighCertificate prop1_check(std::size_t d, std::size_t n, std::size_t M, std::uint64_t seed, unsigned workers) {
  if (!(d > 10)) throw std::invalid_argument("prop1: hypothesis d > 10 violated (d = " + std::to_string(d) + ")");
  if (n < 2 * d) {
    throw std::invalid_argument("prop1: hypothesis n >= 2d violated (n = " + std::to_string(n) +
                                ", d = " + std::to_string(d) + ")");
  }
  const double nd = static_cast<double>(n);
  return inverse_rayleigh_expectation(SphericalGaussian{d}, n, 1.0 / (nd * nd * nd * nd), M, seed, 0.2, workers);
}

Dataset read_delimited_dataset(std::istream& in) {
  std::vector<LabeledSample> samples;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    for (char& ch : line) {
      if (ch == ',' || ch == ';' || ch == '\t' || ch == '\r') ch = ' ';
    }
    std::istringstream fields(line);
    std::vector<double> values;
    std::string token;
    bool numeric = true;
    while (fields >> token) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(token, &used));
        if (used != token.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (samples.empty() && width == 0) {
        width = static_cast<std::size_t>(-1);  // header seen
        continue;
      }
      throw std::invalid_argument("dataset line " + std::to_string(lineno) + ": non-numeric field");
    }
    if (values.size() < 2) {
      throw std::invalid_argument("dataset line " + std::to_string(lineno) + ": need features and a label");
    }
    if (!samples.empty() && values.size() != static_cast<std::size_t>(samples.front().x.size()) + 1) {
      throw std::invalid_argument("dataset line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(samples.front().x.size() + 1) + " fields, got " +
                                  std::to_string(values.size()));
    }
    Vector x(static_cast<Eigen::Index>(values.size() - 1));
    for (std::size_t k = 0; k + 1 < values.size(); ++k) x(static_cast<Eigen::Index>(k)) = values[k];
    samples.push_back({std::move(x), values.back()});
  }
  if (samples.empty()) throw std::invalid_argument("dataset: no samples");
  return Dataset(std::move(samples));
}

Dataset read_delimited_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open dataset file '" + path + "'");
  return read_delimited_dataset(in);
}

}  // namespace stablab
