#include "farpt/approx.hpp"

#include "farpt/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace farpt {
namespace {

double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

void require_mn(int M, int N) {
  if (M < 1 || N < 1) throw DomainError("M and N must be >= 1");
}

void require_k(int N, double K) {
  if (!(K >= 0.0) || K > N) throw DomainError("K must lie in [0, N]");
}

Approximation finish(double raw, int M, int N, int which) {
  return {raw, std::clamp(raw, 0.0, static_cast<double>(M) * N), which};
}

double nb_case1(int M, int N, double K) {
  const double root = std::sqrt(4.0 * M - 1.0);
  const double arg = (N - K) / (K * root);
  if (!(arg > 1.0)) {
    throw DomainError("N_b1: (N-K)/(K sqrt(4M-1)) = " + std::to_string(arg) + " must exceed 1");
  }
  return 2.0 * M * K - 0.25 * K + 0.5 * std::numbers::sqrt2 * K * std::sqrt((4.0 * M - 1.0) * std::log(arg));
}

double nb_case2(int M, int N, double K) {
  const double pi = std::numbers::pi;
  const double x_b = 2.0 * M - 0.75 + N / (4.0 * K) - (4.0 * M - 1.0) * K / (N + K) +
                     (N - K) * (N - K) / (2.0 * K * pi * (N + K)) -
                     (std::numbers::sqrt2 + 1.0) * (N - K) / (2.0 * (N + K)) * std::sqrt((4.0 * M - 1.0) / pi);
  return K * M + 0.5 * K * x_b;
}

double nb_case3(int M, int N, double K) {
  return static_cast<double>(M) * N - (4.0 * M - 1.0) * (N - K) * (N - K) / (4.0 * N);
}

} // namespace

double chi_mean(int dof) {
  if (dof < 1) throw DomainError("chi_mean: degrees of freedom must be >= 1");
  return std::numbers::sqrt2 * std::exp(log_gamma(0.5 * (dof + 1)) - log_gamma(0.5 * dof));
}

ChiMoments chi_moments(int M) {
  if (M < 1) throw DomainError("chi_moments: M must be >= 1");
  ChiMoments out;
  out.M = M;
  out.mu = chi_mean(2 * M);
  out.sigma2 = 2.0 * M - out.mu * out.mu;
  out.mu_approx2 = 2.0 * M - 0.5;
  out.sigma2_approx = 0.5;
  return out;
}

RegimeReport classify_regime(int M, int N, double K, RegimeThresholds thresholds) {
  require_mn(M, N);
  if (!(K > 0.0) || K > N) throw DomainError("classify_regime: K must lie in (0, N]");
  const ChiMoments mom = chi_moments(M);
  RegimeReport out;
  out.thresholds = thresholds;
  out.ratio = (N / K) / (mom.mu / std::sqrt(mom.sigma2));
  if (out.ratio > thresholds.hi) {
    out.regime = Regime::Sparse;
  } else if (out.ratio < thresholds.lo) {
    out.regime = Regime::Dense;
  } else {
    out.regime = Regime::Critical;
  }
  return out;
}

Approximation nb_approx(int M, int N, double K, BlockCase which, RegimeThresholds thresholds) {
  require_mn(M, N);
  require_k(N, K);
  if (which == BlockCase::Auto) {
    if (K == 0.0) return {0.0, 0.0, 0};
    switch (classify_regime(M, N, K, thresholds).regime) {
    case Regime::Sparse:
      which = BlockCase::Case1;
      break;
    case Regime::Critical:
      which = BlockCase::Case2;
      break;
    case Regime::Dense:
      which = BlockCase::Case3;
      break;
    }
  }
  switch (which) {
  case BlockCase::Case1:
    if (K == 0.0) throw DomainError("N_b1 requires K > 0");
    return finish(nb_case1(M, N, K), M, N, 1);
  case BlockCase::Case2:
    if (K == 0.0) throw DomainError("N_b2 requires K > 0");
    return finish(nb_case2(M, N, K), M, N, 2);
  case BlockCase::Case3:
  default:
    return finish(nb_case3(M, N, K), M, N, 3);
  }
}

Approximation ns_approx(int M, int N, double K, StandardCase which) {
  require_mn(M, N);
  require_k(N, K);
  if (which == StandardCase::Auto) {
    if (K == 0.0) return {0.0, 0.0, 0};
    which = (N / K > 4.0) ? StandardCase::Case1 : StandardCase::Case2;
  }
  if (which == StandardCase::Case1) {
    if (!(N > 2.0 * K)) throw DomainError("N_s1 requires N > 2K");
    const TauStar ts = solve_tau_star(N, K);
    return finish(2.0 * M * K + 0.5 * M * K * ts.tau * ts.tau, M, N, 1);
  }
  const double raw = static_cast<double>(M) * N - std::numbers::pi * M * (N - K) * (N - K) / (4.0 * N);
  return finish(raw, M, N, 2);
}

TauStar solve_tau_star(int N, double K) {
  if (N < 1) throw DomainError("solve_tau_star: N must be >= 1");
  if (!(K > 0.0) || K > N) throw DomainError("solve_tau_star: K must lie in (0, N]");
  const double level = std::log((N - K) / K);
  auto g = [level](double t) { return std::log1p(t * t) + 0.5 * t * t - level; };

  if (!(N > 2.0 * K)) return {0.0, true, g(0.0)};

  double lo = 0.0;
  double hi = std::sqrt(2.0 * level) + 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  const double tau = 0.5 * (lo + hi);
  return {tau, false, g(tau)};
}

const char* to_string(Regime r) {
  switch (r) {
  case Regime::Sparse:
    return "sparse";
  case Regime::Critical:
    return "critical";
  case Regime::Dense:
    return "dense";
  }
  return "?";
}

} // namespace farpt
