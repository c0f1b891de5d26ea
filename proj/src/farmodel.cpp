#include "farpt/farmodel.hpp"

#include "farpt/error.hpp"
#include "farpt/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace farpt {

void validate(const FarConfig& cfg) {
  if (cfg.M < 1 || cfg.N < 1) throw DomainError("FarConfig: M and N must be >= 1");
  if (!(cfg.freq_ratio > 0.0)) throw DomainError("FarConfig: freq_ratio must be positive");
}

CodeSequence generate_codes(const FarConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  CodeSequence out;
  out.codes.resize(static_cast<std::size_t>(cfg.N));
  out.eps.resize(static_cast<std::size_t>(cfg.N));
  for (int n = 0; n < cfg.N; ++n) {
    const auto c = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.M)));
    out.codes[static_cast<std::size_t>(n)] = c;
    out.eps[static_cast<std::size_t>(n)] = 1.0 + c * cfg.freq_ratio;
  }
  return out;
}

Eigen::MatrixXcd build_theta(const FarConfig& cfg, const CodeSequence& codes) {
  validate(cfg);
  if (static_cast<int>(codes.codes.size()) != cfg.N || static_cast<int>(codes.eps.size()) != cfg.N) {
    throw ShapeError("build_theta: code sequence length must equal N");
  }
  const int M = cfg.M;
  const int N = cfg.N;
  Eigen::MatrixXcd theta(N, static_cast<Eigen::Index>(M) * N);
  for (int n = 0; n < N; ++n) {
    const int c = codes.codes[static_cast<std::size_t>(n)];
    if (c < 0 || c >= M) throw DomainError("build_theta: code out of range");
    const double eps = codes.eps[static_cast<std::size_t>(n)];
    for (int q = 0; q < N; ++q) {
      // Phases in cycles, wrapped to [0, 1) before scaling by 2 pi.
      const double doppler = std::fmod(static_cast<double>(q) * n * eps / N, 1.0);
      for (int p = 0; p < M; ++p) {
        const double range = static_cast<double>((p * c) % M) / M;
        const double cycles = range + doppler;
        theta(n, static_cast<Eigen::Index>(q) * M + p) = std::polar(1.0, 2.0 * std::numbers::pi * cycles);
      }
    }
  }
  return theta;
}

Scene generate_scene(const FarConfig& cfg, int K, std::uint64_t seed, int occupied_bins) {
  validate(cfg);
  if (K < 0 || K > cfg.N) {
    throw RangeError("generate_scene: K = " + std::to_string(K) + " outside [0, " + std::to_string(cfg.N) + "]");
  }
  if (occupied_bins < 0) occupied_bins = cfg.M;
  if (occupied_bins < 1 || occupied_bins > cfg.M) throw RangeError("generate_scene: occupied_bins outside [1, M]");

  Rng rng(seed);
  Scene scene;
  scene.M = cfg.M;
  scene.N = cfg.N;
  scene.coefficients = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(cfg.M) * cfg.N);
  scene.support = sample_without_replacement(rng, cfg.N, K);
  for (int q : scene.support) {
    std::vector<bool> mask(static_cast<std::size_t>(cfg.M), occupied_bins == cfg.M);
    if (occupied_bins < cfg.M) {
      for (int p : sample_without_replacement(rng, cfg.M, occupied_bins)) mask[static_cast<std::size_t>(p)] = true;
    }
    for (int p = 0; p < cfg.M; ++p) {
      if (!mask[static_cast<std::size_t>(p)]) continue;
      scene.coefficients(static_cast<Eigen::Index>(q) * cfg.M + p) =
          std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
    }
    scene.occupancy.push_back(std::move(mask));
  }
  return scene;
}

MeasurementSet subsample_and_measure(const Eigen::MatrixXcd& theta, const Scene& scene, int n, std::uint64_t seed) {
  const auto N = static_cast<int>(theta.rows());
  if (theta.cols() != scene.coefficients.size()) throw ShapeError("subsample_and_measure: theta/scene size mismatch");
  if (n < 1 || n > N) throw RangeError("subsample_and_measure: n = " + std::to_string(n) + " outside [1, N]");

  Rng rng(seed);
  MeasurementSet out;
  out.rows = sample_without_replacement(rng, N, n);
  out.matrix.resize(n, theta.cols());
  for (int i = 0; i < n; ++i) out.matrix.row(i) = theta.row(out.rows[static_cast<std::size_t>(i)]);
  out.y = out.matrix * scene.coefficients;
  return out;
}

int count_nonzero_blocks(const Eigen::VectorXcd& x, int m) {
  int count = 0;
  for (Eigen::Index q = 0; q + m <= x.size(); q += m) {
    if (x.segment(q, m).cwiseAbs().maxCoeff() > 0.0) ++count;
  }
  return count;
}

} // namespace farpt
