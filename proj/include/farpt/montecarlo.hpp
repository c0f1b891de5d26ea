#pragma once

#include "farpt/recovery.hpp"
#include "farpt/statdim.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace farpt {

enum class EnsembleKind { GaussianReal, GaussianComplex, FAR };
enum class SignalModel { PlusMinusOne, UnitPhase };

/// Random instance family for success-rate experiments.
///
/// Gaussian kinds draw an n x (m d) matrix with i.i.d. N(0, 1) entries (real and imaginary
/// parts independently for the complex kind). FAR draws codes, Theta and n of its N rows;
/// `sparsity` then counts targets, each occupying all M bins of its block, and
/// `far_recovery` selects the recovery program (block width M or plain l1).
struct Ensemble {
  EnsembleKind kind = EnsembleKind::GaussianReal;
  SignalModel signal = SignalModel::PlusMinusOne;
  int d = 100; ///< Gaussian: number of blocks
  int m = 1;   ///< Gaussian: block width
  int M = 4;   ///< FAR: frequencies
  int N = 128; ///< FAR: pulses
  double freq_ratio = 0.02;
  BudgetKind far_recovery = BudgetKind::Block;
  bool resample_codes = true; ///< FAR: draw fresh codes per trial, else one code set per base seed
  SolverConfig solver;

  static Ensemble gaussian_real(int d, int m);
  static Ensemble gaussian_complex(int d, int m);
  static Ensemble far(int M, int N, BudgetKind recovery, double freq_ratio = 0.02);

  /// Largest admissible measurement count (N for FAR, m d otherwise).
  int max_measurements() const;
  /// Largest admissible sparsity (N for FAR, d otherwise).
  int max_sparsity() const;
  /// Block width handed to the solver for the original (possibly complex) problem.
  int recovery_block_width() const;
  /// Predicted transition location in measurement units for this sparsity.
  double theoretical_curve(double sparsity) const;
  std::string describe() const;
};

struct GridSpec {
  std::vector<int> sparsity;
  std::vector<int> measurements;
  int trials = 50;
  std::uint64_t base_seed = 1;
};

void validate(const Ensemble& ensemble);
void validate(const GridSpec& spec, const Ensemble& ensemble);

struct CellResult {
  int sparsity = 0;
  int n = 0;
  int trials = 0;
  int successes = 0;
  int factorization_failures = 0;
  double fraction() const { return trials > 0 ? static_cast<double>(successes) / trials : 0.0; }
};

struct SuccessGrid {
  Ensemble ensemble;
  GridSpec spec;
  std::vector<CellResult> cells; ///< row-major: sparsity outer, measurements inner
  std::vector<std::string> diagnostics;
  double wall_seconds = 0.0;

  const CellResult& at(std::size_t s_index, std::size_t n_index) const {
    return cells[s_index * spec.measurements.size() + n_index];
  }
};

/// Per-trial seed: stable hash of (base seed, sparsity value, n value, trial index).
std::uint64_t trial_seed(std::uint64_t base_seed, int sparsity, int n, int trial);

/// Outcome of a single seeded trial: true when the recovery adjudicates as exact.
/// Factorization failures count as unsuccessful and set *factorization_failed.
bool run_trial(const Ensemble& ensemble, int sparsity, int n, std::uint64_t seed, std::uint64_t base_seed,
               bool* factorization_failed = nullptr);

CellResult run_cell(const Ensemble& ensemble, int sparsity, int n, int trials, std::uint64_t base_seed);

/// All cells, distributed over `threads` workers (0 = hardware concurrency). Output does not
/// depend on the thread count or on the order of the axes.
SuccessGrid run_grid(const Ensemble& ensemble, const GridSpec& spec, int threads = 0);

/// Linear interpolation in n of the success column through 0.5, using the first
/// bracketing pair of measurement counts. Throws NoCrossingError otherwise.
double locate_transition(const SuccessGrid& grid, int sparsity);

/// Default worker count: FARPT_THREADS if set and positive, else hardware concurrency.
int default_thread_count();

} // namespace farpt
