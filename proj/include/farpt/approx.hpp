#pragma once

// Elementary approximations of the FAR sample budgets.
//
// For large M the chi density with 2M degrees of freedom is close to a normal density
// with mean mu_M and variance sigma_M^2. The minimizer of the block objective is then
// written tau = mu_M - alpha * sigma_M and three regimes of N/K against mu_M / sigma_M
// (roughly 2 sqrt(M)) give the closed forms N_b1 (alpha << -1, sparse scenes),
// N_b2 (alpha near 0) and N_b3 (alpha >> 1, dense scenes). alpha itself never needs
// to be evaluated: each case substitutes its asymptotic value symbolically.
//
// For standard recovery the m = 2 integrals have closed forms; N_s1 uses the root
// tau_star of log(tau^2 + 1) = log((N - K) / K) - tau^2 / 2 and N_s2 the expansion
// around tau = 0.

#include <optional>

namespace farpt {

struct ChiMoments {
  int M = 1;
  double mu = 0.0;      ///< mean of chi with 2M degrees of freedom
  double sigma2 = 0.0;  ///< variance, 2M - mu^2
  double mu_approx2 = 0.0;    ///< large-M approximation of mu^2: 2M - 1/2
  double sigma2_approx = 0.5; ///< large-M approximation of sigma^2
};

/// Mean of the chi distribution with dof degrees of freedom.
double chi_mean(int dof);

ChiMoments chi_moments(int M);

enum class Regime { Sparse, Critical, Dense };

struct RegimeThresholds {
  double hi = 4.0;
  double lo = 0.25;
};

struct RegimeReport {
  double ratio = 0.0; ///< (N / K) / (mu_M / sigma_M)
  Regime regime = Regime::Critical;
  RegimeThresholds thresholds;
};

RegimeReport classify_regime(int M, int N, double K, RegimeThresholds thresholds = {});

enum class BlockCase { Auto, Case1, Case2, Case3 };
enum class StandardCase { Auto, Case1, Case2 };

struct Approximation {
  double raw = 0.0;
  double clamped = 0.0; ///< raw capped to [0, M N]
  int used_case = 0;    ///< 1, 2 or 3
};

Approximation nb_approx(int M, int N, double K, BlockCase which = BlockCase::Auto, RegimeThresholds thresholds = {});
Approximation ns_approx(int M, int N, double K, StandardCase which = StandardCase::Auto);

struct TauStar {
  double tau = 0.0;
  bool clamped = false; ///< true when N <= 2K and the root was pinned to 0
  double residual = 0.0;
};

TauStar solve_tau_star(int N, double K);

const char* to_string(Regime r);

} // namespace farpt
