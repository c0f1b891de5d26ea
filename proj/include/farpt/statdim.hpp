#pragma once

// Phase-transition curves of l1 / l2,1 minimization under Gaussian measurements.
//
// The curve for a block-sparse signal with d blocks of width m, s_B of them nonzero, is
//
//   phi_m(s_B, d) = inf_{tau >= 0}  s_B (m + tau^2) + (d - s_B) * T2(tau, m),
//   T_k(tau, m)   = int_tau^inf (u - tau)^k chi_m(u) du,
//
// with chi_m the chi density with m degrees of freedom. Values are in units of real
// measurements; the complex-field curve is phi_{2m} / 2 in units of complex measurements.

#include <cstdint>
#include <limits>

namespace farpt {

struct CurveQuery {
  int m = 1;   ///< block width
  int d = 1;   ///< number of blocks
  int s_b = 0; ///< number of nonzero blocks, 0 <= s_b <= d
};

struct CurveValue {
  double value = 0.0;
  /// Minimizing tau; +infinity when s_B = 0 (infimum approached only as tau grows).
  double tau_star = 0.0;
  bool converged = true;
  /// tau * s_B - (d - s_B) * T1(tau) at tau_star.
  double residual = 0.0;
};

enum class BudgetKind { Block, Standard };

struct FarBudget {
  int M = 1;
  int N = 1;
  double K = 0.0; ///< real-valued so fractional target counts can be evaluated
  BudgetKind kind = BudgetKind::Block;
};

enum class MomentOrder { Zero = 0, One = 1, Two = 2 };

/// log of the chi density with m degrees of freedom. Returns -inf at u = 0 for m > 1.
double chi_log_pdf(double u, int m);

/// int_tau^inf (u - tau)^order chi_m(u) du. Closed forms for m = 2, quadrature otherwise.
double tail_moment(double tau, int m, MomentOrder order);

/// Quadrature path of tail_moment regardless of m.
double tail_moment_numeric(double tau, int m, MomentOrder order);

/// Objective s (m + tau^2) + (d - s) T2(tau, m); s may be fractional.
double curve_objective(double tau, double s, double d, int m);

/// phi_m(s_B, d) and its minimizer.
CurveValue curve_value(const CurveQuery& q);

/// phi_{2m}(s_B, d) / 2.
CurveValue complex_curve_value(const CurveQuery& q);

/// Same minimization as curve_value with a real-valued sparsity s in [0, d].
CurveValue curve_value_real(double s, int d, int m);

/// N_b = phi_{2M}(K, N) / 2 for Block, N_s = M * phi_2(K, N) / 2 for Standard.
CurveValue far_budget(const FarBudget& b);

/// Largest real K in [0, N] with far_budget(M, N, K) = budget (to 1e-3 in K).
double solve_for_k(int M, int N, double budget, BudgetKind kind);

namespace statdim_tolerance {
inline constexpr double kTauRoot = 1e-10;
inline constexpr double kKRoot = 1e-3;
inline constexpr int kMaxIterations = 200;
inline constexpr double kQuadratureAbs = 1e-12;
} // namespace statdim_tolerance

} // namespace farpt
