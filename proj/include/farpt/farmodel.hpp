#pragma once

// Discrete frequency-agile radar model.
//
// Pulse n uses carrier index C_n drawn uniformly from {0, ..., M-1}. The scene is an
// M x N grid of range frequency p/M and Doppler frequency q/N; column q of that grid
// (the HRR profile at Doppler bin q) is block q of the coefficient vector x, so
// x = [x_0; x_1; ...; x_{N-1}] has N blocks of width M. The echo is y = Theta x with
//
//   Theta = [Theta_0, ..., Theta_{N-1}],
//   [Theta_q]_{n,p} = exp(j 2 pi (p / M) C_n + j 2 pi (q / N) eps_n n),
//   eps_n = 1 + C_n * freq_ratio.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

namespace farpt {

struct FarConfig {
  int M = 4;
  int N = 128;
  double freq_ratio = 0.02; ///< Delta f / f_c
  std::uint64_t seed = 0;
};

struct CodeSequence {
  std::vector<int> codes;  ///< C_n in {0, ..., M-1}
  std::vector<double> eps; ///< 1 + C_n * freq_ratio
};

struct Scene {
  int M = 0;
  int N = 0;
  std::vector<int> support;                  ///< occupied Doppler blocks, sorted
  std::vector<std::vector<bool>> occupancy;  ///< occupancy[i][p]: bin p of block support[i] is nonzero
  Eigen::VectorXcd coefficients;             ///< length M N, block q at rows [q M, (q+1) M)
};

struct MeasurementSet {
  Eigen::MatrixXcd matrix; ///< rows of Theta selected by `rows`
  std::vector<int> rows;   ///< sorted distinct pulse indices
  Eigen::VectorXcd y;
};

void validate(const FarConfig& cfg);

CodeSequence generate_codes(const FarConfig& cfg);

/// Full N x (M N) matrix Theta.
Eigen::MatrixXcd build_theta(const FarConfig& cfg, const CodeSequence& codes);

/// K distinct blocks, each bin set to a unit-modulus phasor with phase uniform on [0, 2 pi).
/// occupied_bins < M selects that many bins per block uniformly (partial targets).
Scene generate_scene(const FarConfig& cfg, int K, std::uint64_t seed, int occupied_bins = -1);

/// n distinct rows of theta chosen uniformly, y = rows * x.
MeasurementSet subsample_and_measure(const Eigen::MatrixXcd& theta, const Scene& scene, int n, std::uint64_t seed);

/// Number of blocks of `x` (width m) with a nonzero entry.
int count_nonzero_blocks(const Eigen::VectorXcd& x, int m);

} // namespace farpt
