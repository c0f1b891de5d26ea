#include "farpt/statdim.hpp"

#include "farpt/approx.hpp"
#include "farpt/error.hpp"
#include "farpt/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace farpt {
namespace {

double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double chi_log_normalizer(int m) {
  return (0.5 * m - 1.0) * std::numbers::ln2 + log_gamma(0.5 * m);
}

void require_dof(int m) {
  if (m < 1) throw DomainError("chi degrees of freedom must be >= 1, got " + std::to_string(m));
}

// Quadrature cut-off: beyond max(tau, mean) + 16 the chi tail is below e^-100.
double upper_limit(double tau, int m) {
  return std::max(tau, chi_mean(m)) + 16.0;
}

double closed_form_m2(double tau, MomentOrder order) {
  const double tail = std::erfc(tau / std::numbers::sqrt2);
  switch (order) {
  case MomentOrder::Zero:
    return std::exp(-0.5 * tau * tau);
  case MomentOrder::One:
    return std::sqrt(0.5 * std::numbers::pi) * tail;
  case MomentOrder::Two:
    return 2.0 * std::exp(-0.5 * tau * tau) - std::sqrt(2.0 * std::numbers::pi) * tau * tail;
  }
  return 0.0;
}

double stationarity(double tau, double s, double d, int m) {
  return tau * s - (d - s) * tail_moment(tau, m, MomentOrder::One);
}

} // namespace

double chi_log_pdf(double u, int m) {
  require_dof(m);
  if (u < 0.0 || std::isnan(u)) throw DomainError("chi_log_pdf: u must be >= 0");
  if (u == 0.0) {
    return m == 1 ? -chi_log_normalizer(1) : -std::numeric_limits<double>::infinity();
  }
  return (m - 1) * std::log(u) - 0.5 * u * u - chi_log_normalizer(m);
}

double tail_moment_numeric(double tau, int m, MomentOrder order) {
  require_dof(m);
  if (tau < 0.0 || std::isnan(tau)) throw DomainError("tail_moment: tau must be >= 0");
  const double norm = chi_log_normalizer(m);
  const int k = static_cast<int>(order);
  auto integrand = [=](double u) {
    if (u <= 0.0) return m == 1 ? std::exp(-norm) * std::pow(u - tau, k) : 0.0;
    const double w = std::exp((m - 1) * std::log(u) - 0.5 * u * u - norm);
    const double du = u - tau;
    return k == 0 ? w : (k == 1 ? du * w : du * du * w);
  };
  const double hi = upper_limit(tau, m);
  return integrate_gk15(integrand, tau, hi, statdim_tolerance::kQuadratureAbs, 0.0, 2000).value;
}

double tail_moment(double tau, int m, MomentOrder order) {
  require_dof(m);
  if (tau < 0.0 || std::isnan(tau)) throw DomainError("tail_moment: tau must be >= 0");
  if (m == 2) return closed_form_m2(tau, order);
  return tail_moment_numeric(tau, m, order);
}

double curve_objective(double tau, double s, double d, int m) {
  return s * (m + tau * tau) + (d - s) * tail_moment(tau, m, MomentOrder::Two);
}

CurveValue curve_value_real(double s, int d, int m) {
  require_dof(m);
  if (d < 1) throw DomainError("curve: block count d must be >= 1");
  if (!(s >= 0.0) || s > d) throw DomainError("curve: sparsity must lie in [0, d]");

  if (s == 0.0) return {0.0, std::numeric_limits<double>::infinity(), true, 0.0};
  if (s == static_cast<double>(d)) return {static_cast<double>(m) * d, 0.0, true, 0.0};

  const double dd = d;
  const double mean = chi_mean(m);
  const double sd = std::sqrt(std::max(0.0, m - mean * mean));

  double lo = 0.0;
  double hi = mean + 12.0 * sd;
  double h_lo = stationarity(lo, s, dd, m);
  double h_hi = stationarity(hi, s, dd, m);
  if (!(h_lo < 0.0 && h_hi > 0.0)) {
    throw NonConvergenceError("curve: stationarity root not bracketed in [0, " + std::to_string(hi) + "]");
  }

  int iter = 0;
  while (hi - lo > statdim_tolerance::kTauRoot) {
    if (++iter > statdim_tolerance::kMaxIterations) {
      throw NonConvergenceError("curve: tau bisection exceeded iteration cap");
    }
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double h_mid = stationarity(mid, s, dd, m);
    if (h_mid < 0.0) {
      lo = mid;
      h_lo = h_mid;
    } else {
      hi = mid;
      h_hi = h_mid;
    }
  }
  // Secant step inside the final bracket.
  const double tau = lo - h_lo * (hi - lo) / (h_hi - h_lo);

  CurveValue out;
  out.tau_star = tau;
  out.residual = stationarity(tau, s, dd, m);
  out.value = std::min(curve_objective(tau, s, dd, m), static_cast<double>(m) * d);
  out.converged = true;
  return out;
}

CurveValue curve_value(const CurveQuery& q) {
  if (q.s_b < 0 || q.s_b > q.d) throw DomainError("curve: s_B must lie in [0, d]");
  return curve_value_real(q.s_b, q.d, q.m);
}

CurveValue complex_curve_value(const CurveQuery& q) {
  CurveValue cv = curve_value({2 * q.m, q.d, q.s_b});
  cv.value *= 0.5;
  return cv;
}

CurveValue far_budget(const FarBudget& b) {
  if (b.M < 1 || b.N < 1) throw DomainError("far_budget: M and N must be >= 1");
  if (!(b.K >= 0.0) || b.K > b.N) throw DomainError("far_budget: K must lie in [0, N]");
  const double cap = static_cast<double>(b.M) * b.N;
  if (b.kind == BudgetKind::Block) {
    CurveValue cv = curve_value_real(b.K, b.N, 2 * b.M);
    cv.value = std::min(0.5 * cv.value, cap);
    return cv;
  }
  CurveValue cv = curve_value_real(b.K, b.N, 2);
  cv.value = std::min(0.5 * b.M * cv.value, cap);
  return cv;
}

double solve_for_k(int M, int N, double budget, BudgetKind kind) {
  if (M < 1 || N < 1) throw DomainError("solve_for_k: M and N must be >= 1");
  if (!(budget > 0.0)) throw DomainError("solve_for_k: budget must be positive");
  const double cap = static_cast<double>(M) * N;
  if (budget > cap) {
    throw RangeError("solve_for_k: budget " + std::to_string(budget) + " exceeds the maximum M*N = " +
                     std::to_string(cap));
  }
  if (budget == cap) return N;

  double lo = 0.0;
  double hi = N;
  int iter = 0;
  while (hi - lo > statdim_tolerance::kKRoot) {
    if (++iter > statdim_tolerance::kMaxIterations) {
      throw NonConvergenceError("solve_for_k: bisection exceeded iteration cap");
    }
    const double mid = 0.5 * (lo + hi);
    if (far_budget({M, N, mid, kind}).value < budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

} // namespace farpt
