#include "farpt/montecarlo.hpp"

#include "farpt/farmodel.hpp"
#include "farpt/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace farpt {
namespace {

constexpr std::uint64_t kMatrixStream = 1;
constexpr std::uint64_t kSignalStream = 2;
constexpr std::uint64_t kRowStream = 3;
constexpr std::uint64_t kFixedCodesTag = 0xc0de5ULL;

Eigen::MatrixXd gaussian_matrix(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd a(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) a(i, j) = rng.normal();
  }
  return a;
}

bool gaussian_real_trial(const Ensemble& e, int s, int n, std::uint64_t seed) {
  Rng mat_rng(derive_seed(seed, {kMatrixStream}));
  Rng sig_rng(derive_seed(seed, {kSignalStream}));
  RecoveryProblem<double> p;
  p.block_width = e.m;
  p.matrix = gaussian_matrix(mat_rng, n, e.m * e.d);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(e.m) * e.d);
  for (int q : sample_without_replacement(sig_rng, e.d, s)) {
    for (int i = 0; i < e.m; ++i) x(q * e.m + i) = sig_rng.sign();
  }
  p.y = p.matrix * x;
  return adjudicate(x, solve(p, e.solver).x_hat);
}

bool gaussian_complex_trial(const Ensemble& e, int s, int n, std::uint64_t seed) {
  Rng mat_rng(derive_seed(seed, {kMatrixStream}));
  Rng sig_rng(derive_seed(seed, {kSignalStream}));
  const int D = e.m * e.d;
  RecoveryProblem<std::complex<double>> p;
  p.block_width = e.m;
  p.matrix.resize(n, D);
  for (int j = 0; j < D; ++j) {
    for (int i = 0; i < n; ++i) {
      const double re = mat_rng.normal();
      const double im = mat_rng.normal();
      p.matrix(i, j) = {re, im};
    }
  }
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(D);
  for (int q : sample_without_replacement(sig_rng, e.d, s)) {
    for (int i = 0; i < e.m; ++i) x(q * e.m + i) = std::polar(1.0, 2.0 * std::numbers::pi * sig_rng.uniform());
  }
  p.y = p.matrix * x;
  return adjudicate(x, solve(p, e.solver).x_hat);
}

bool far_trial(const Ensemble& e, int K, int n, std::uint64_t seed, std::uint64_t base_seed) {
  FarConfig cfg{e.M, e.N, e.freq_ratio, 0};
  cfg.seed = e.resample_codes ? derive_seed(seed, {kMatrixStream}) : derive_seed(base_seed, {kFixedCodesTag});
  const CodeSequence codes = generate_codes(cfg);
  const Eigen::MatrixXcd theta = build_theta(cfg, codes);
  const Scene scene = generate_scene(cfg, K, derive_seed(seed, {kSignalStream}));
  MeasurementSet meas = subsample_and_measure(theta, scene, n, derive_seed(seed, {kRowStream}));

  RecoveryProblem<std::complex<double>> p;
  p.block_width = e.recovery_block_width();
  p.matrix = std::move(meas.matrix);
  p.y = std::move(meas.y);
  return adjudicate(scene.coefficients, solve(p, e.solver).x_hat);
}

} // namespace

Ensemble Ensemble::gaussian_real(int d, int m) {
  Ensemble e;
  e.kind = EnsembleKind::GaussianReal;
  e.signal = SignalModel::PlusMinusOne;
  e.d = d;
  e.m = m;
  return e;
}

Ensemble Ensemble::gaussian_complex(int d, int m) {
  Ensemble e;
  e.kind = EnsembleKind::GaussianComplex;
  e.signal = SignalModel::UnitPhase;
  e.d = d;
  e.m = m;
  return e;
}

Ensemble Ensemble::far(int M, int N, BudgetKind recovery, double freq_ratio) {
  Ensemble e;
  e.kind = EnsembleKind::FAR;
  e.signal = SignalModel::UnitPhase;
  e.M = M;
  e.N = N;
  e.far_recovery = recovery;
  e.freq_ratio = freq_ratio;
  return e;
}

int Ensemble::max_measurements() const { return kind == EnsembleKind::FAR ? N : m * d; }

int Ensemble::max_sparsity() const { return kind == EnsembleKind::FAR ? N : d; }

int Ensemble::recovery_block_width() const {
  if (kind == EnsembleKind::FAR) return far_recovery == BudgetKind::Block ? M : 1;
  return m;
}

double Ensemble::theoretical_curve(double sparsity) const {
  switch (kind) {
  case EnsembleKind::GaussianReal:
    return curve_value_real(sparsity, d, m).value;
  case EnsembleKind::GaussianComplex:
    return 0.5 * curve_value_real(sparsity, d, 2 * m).value;
  case EnsembleKind::FAR:
    return far_budget({M, N, sparsity, far_recovery}).value;
  }
  return 0.0;
}

std::string Ensemble::describe() const {
  std::ostringstream os;
  switch (kind) {
  case EnsembleKind::GaussianReal:
    os << "gauss-real d=" << d << " m=" << m;
    break;
  case EnsembleKind::GaussianComplex:
    os << "gauss-complex d=" << d << " m=" << m;
    break;
  case EnsembleKind::FAR:
    os << "far M=" << M << " N=" << N << " freq_ratio=" << freq_ratio
       << " recovery=" << (far_recovery == BudgetKind::Block ? "block" : "standard")
       << (resample_codes ? " codes=per-trial" : " codes=fixed");
    break;
  }
  return os.str();
}

void validate(const Ensemble& e) {
  if (e.kind == EnsembleKind::FAR) {
    validate(FarConfig{e.M, e.N, e.freq_ratio, 0});
    if (e.signal != SignalModel::UnitPhase) throw DomainError("FAR ensembles use unit-phase signals");
  } else {
    if (e.d < 1 || e.m < 1) throw DomainError("ensemble: d and m must be >= 1");
    if (e.kind == EnsembleKind::GaussianReal && e.signal != SignalModel::PlusMinusOne) {
      throw DomainError("real Gaussian ensembles use +/-1 signals");
    }
    if (e.kind == EnsembleKind::GaussianComplex && e.signal != SignalModel::UnitPhase) {
      throw DomainError("complex Gaussian ensembles use unit-phase signals");
    }
  }
  validate(e.solver);
}

void validate(const GridSpec& spec, const Ensemble& e) {
  auto strictly_increasing = [](const std::vector<int>& v) {
    return !v.empty() && std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
  };
  if (!strictly_increasing(spec.sparsity)) throw DomainError("grid: sparsity axis must be non-empty and strictly increasing");
  if (!strictly_increasing(spec.measurements)) {
    throw DomainError("grid: measurement axis must be non-empty and strictly increasing");
  }
  if (spec.trials < 1) throw DomainError("grid: trials must be >= 1");
  if (spec.sparsity.front() < 0 || spec.sparsity.back() > e.max_sparsity()) {
    throw RangeError("grid: sparsity outside [0, " + std::to_string(e.max_sparsity()) + "]");
  }
  if (spec.measurements.front() < 1 || spec.measurements.back() > e.max_measurements()) {
    throw RangeError("grid: measurements outside [1, " + std::to_string(e.max_measurements()) + "]");
  }
}

std::uint64_t trial_seed(std::uint64_t base_seed, int sparsity, int n, int trial) {
  return derive_seed(base_seed, {static_cast<std::uint64_t>(sparsity), static_cast<std::uint64_t>(n),
                                 static_cast<std::uint64_t>(trial)});
}

bool run_trial(const Ensemble& e, int sparsity, int n, std::uint64_t seed, std::uint64_t base_seed,
               bool* factorization_failed) {
  if (factorization_failed) *factorization_failed = false;
  try {
    switch (e.kind) {
    case EnsembleKind::GaussianReal:
      return gaussian_real_trial(e, sparsity, n, seed);
    case EnsembleKind::GaussianComplex:
      return gaussian_complex_trial(e, sparsity, n, seed);
    case EnsembleKind::FAR:
      return far_trial(e, sparsity, n, seed, base_seed);
    }
  } catch (const FactorizationError&) {
    if (factorization_failed) *factorization_failed = true;
  }
  return false;
}

CellResult run_cell(const Ensemble& e, int sparsity, int n, int trials, std::uint64_t base_seed) {
  GridSpec spec{{sparsity}, {n}, trials, base_seed};
  return run_grid(e, spec, 1).cells.front();
}

SuccessGrid run_grid(const Ensemble& e, const GridSpec& spec, int threads) {
  validate(e);
  validate(spec, e);
  const auto start = std::chrono::steady_clock::now();

  SuccessGrid grid;
  grid.ensemble = e;
  grid.spec = spec;
  const std::size_t n_cells = spec.sparsity.size() * spec.measurements.size();
  const std::size_t n_tasks = n_cells * static_cast<std::size_t>(spec.trials);

  std::vector<std::uint8_t> success(n_tasks, 0);
  std::vector<std::uint8_t> fact_fail(n_tasks, 0);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t task = next.fetch_add(1); task < n_tasks; task = next.fetch_add(1)) {
      const std::size_t cell = task / static_cast<std::size_t>(spec.trials);
      const int trial = static_cast<int>(task % static_cast<std::size_t>(spec.trials));
      const int s = spec.sparsity[cell / spec.measurements.size()];
      const int n = spec.measurements[cell % spec.measurements.size()];
      bool failed = false;
      success[task] = run_trial(e, s, n, trial_seed(spec.base_seed, s, n, trial), spec.base_seed, &failed) ? 1 : 0;
      fact_fail[task] = failed ? 1 : 0;
    }
  };

  if (threads <= 0) threads = default_thread_count();
  threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), n_tasks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  grid.cells.reserve(n_cells);
  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    CellResult r;
    r.sparsity = spec.sparsity[cell / spec.measurements.size()];
    r.n = spec.measurements[cell % spec.measurements.size()];
    r.trials = spec.trials;
    for (int t = 0; t < spec.trials; ++t) {
      const std::size_t task = cell * static_cast<std::size_t>(spec.trials) + static_cast<std::size_t>(t);
      r.successes += success[task];
      r.factorization_failures += fact_fail[task];
    }
    if (r.factorization_failures > 0) {
      grid.diagnostics.push_back("s=" + std::to_string(r.sparsity) + " n=" + std::to_string(r.n) + ": " +
                                 std::to_string(r.factorization_failures) +
                                 " trial(s) had a singular Psi Psi^T and were counted as failures");
    }
    grid.cells.push_back(r);
  }
  grid.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return grid;
}

double locate_transition(const SuccessGrid& grid, int sparsity) {
  const auto& axis = grid.spec.sparsity;
  const auto it = std::find(axis.begin(), axis.end(), sparsity);
  if (it == axis.end()) throw DomainError("locate_transition: sparsity not on the grid");
  const auto s_index = static_cast<std::size_t>(it - axis.begin());
  const auto& ns = grid.spec.measurements;
  for (std::size_t i = 0; i + 1 < ns.size(); ++i) {
    const double f0 = grid.at(s_index, i).fraction();
    const double f1 = grid.at(s_index, i + 1).fraction();
    if (f0 == 0.5) return ns[i];
    if (f0 < 0.5 && f1 >= 0.5) {
      return ns[i] + (0.5 - f0) / (f1 - f0) * (ns[i + 1] - ns[i]);
    }
  }
  if (!ns.empty() && grid.at(s_index, ns.size() - 1).fraction() == 0.5) return ns.back();
  throw NoCrossingError("locate_transition: success column for s=" + std::to_string(sparsity) +
                        " never crosses 0.5");
}

int default_thread_count() {
  if (const char* env = std::getenv("FARPT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace farpt
