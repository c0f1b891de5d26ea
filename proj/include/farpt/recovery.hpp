#pragma once

// Equality-constrained l1 / l2,1 minimization
//
//   minimize  sum_q ||x_q||_2   subject to  Psi x = y,
//
// where x_q are consecutive blocks of width m (m = 1 gives plain l1). Complex problems
// are solved through the real embedding: Psi_r = [Re -Im; Im Re] with columns permuted
// so that every real block is [Re x_q; Im x_q] of width 2m. The l2,1 norm is preserved
// by that permutation, so complex l1 and complex l2,1 share the real solver.

#include "farpt/error.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <type_traits>
#include <vector>

namespace farpt {

enum class Field { Real, Complex };

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct RecoveryProblem {
  Matrix<Scalar> matrix;
  Vector<Scalar> y;
  int block_width = 1;

  static constexpr Field field() {
    return std::is_same_v<Scalar, std::complex<double>> ? Field::Complex : Field::Real;
  }
  Eigen::Index blocks() const { return matrix.cols() / block_width; }
};

/// Throws ShapeError unless D % m == 0, y.size() == n and n <= D.
template <typename Scalar>
void validate(const RecoveryProblem<Scalar>& p) {
  if (p.block_width < 1) throw ShapeError("block width must be >= 1");
  if (p.matrix.cols() % p.block_width != 0) throw ShapeError("column count must be divisible by block width");
  if (p.y.size() != p.matrix.rows()) throw ShapeError("observation length must equal matrix rows");
  if (p.matrix.rows() > p.matrix.cols()) throw ShapeError("more measurements than unknowns");
}

/// sum over blocks of the Euclidean block norm.
template <typename Derived>
double norm21(const Eigen::MatrixBase<Derived>& x, Eigen::Index m) {
  double total = 0.0;
  for (Eigen::Index q = 0; q + m <= x.size(); q += m) total += x.segment(q, m).norm();
  return total;
}

/// In place: each block b becomes max(0, 1 - radius / ||b||) b.
template <typename Derived>
void block_soft_threshold(Eigen::MatrixBase<Derived>& v, Eigen::Index m, double radius) {
  for (Eigen::Index q = 0; q + m <= v.size(); q += m) {
    auto block = v.segment(q, m);
    const double nrm = block.norm();
    if (nrm <= radius) {
      block.setZero();
    } else {
      block *= (1.0 - radius / nrm);
    }
  }
}

/// Real block layout of a complex vector: block q becomes [Re x_q; Im x_q].
Eigen::VectorXd to_block_real(const Eigen::VectorXcd& x, int m);
/// Inverse of to_block_real.
Eigen::VectorXcd from_block_real(const Eigen::VectorXd& x, int m);

/// Real embedding with block width 2m and observation [Re y; Im y].
RecoveryProblem<double> complexify_to_real(const RecoveryProblem<std::complex<double>>& problem);

struct SolverConfig {
  double penalty = 1.0; ///< rho; the shrinkage radius is 1 / rho
  int max_iters = 20000;
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double over_relaxation = 1.6;
  int trace_every = 0; ///< record norm21 of the consensus iterate every k iterations (0 = off)
};

void validate(const SolverConfig& cfg);

enum class SolveStatus { Converged, MaxIters };

template <typename Scalar>
struct SolveResult {
  Vector<Scalar> x_hat;
  int iters = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  SolveStatus status = SolveStatus::MaxIters;
  std::vector<double> objective_trace;
};

/// Projection onto {x : Psi x = y} via a Cholesky factor L of Psi Psi^T:
/// P(v) = v - W^T (W v - L^{-1} y) with W = L^{-1} Psi.
class AffineProjector {
public:
  /// Throws FactorizationError when Psi Psi^T is numerically singular.
  explicit AffineProjector(const Eigen::MatrixXd& psi);

  Eigen::Index rows() const { return whitened_.rows(); }
  Eigen::Index cols() const { return whitened_.cols(); }

  /// L^{-1} y, the constant part of the projection for observation y.
  Eigen::VectorXd whiten(const Eigen::VectorXd& y) const;
  /// P(v) for whitened observation c = whiten(y); `work` is caller-owned scratch.
  void project(const Eigen::VectorXd& v, const Eigen::VectorXd& c, Eigen::VectorXd& out,
               Eigen::VectorXd& work) const;
  /// Minimum-norm point of the affine set.
  Eigen::VectorXd least_norm(const Eigen::VectorXd& c) const;

private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::MatrixXd whitened_;
};

/// Projectors keyed by matrix content; concurrent lookups, exclusive inserts.
class FactorizationCache {
public:
  std::shared_ptr<const AffineProjector> get(const Eigen::MatrixXd& psi);
  std::size_t size() const;

private:
  struct Key {
    std::uint64_t hash;
    Eigen::Index rows;
    Eigen::Index cols;
    auto operator<=>(const Key&) const = default;
  };
  static std::uint64_t content_hash(const Eigen::MatrixXd& psi);

  mutable std::shared_mutex mutex_;
  std::map<Key, std::vector<std::pair<Eigen::MatrixXd, std::shared_ptr<const AffineProjector>>>> entries_;
};

/// Projection-shrinkage splitting (ADMM on x = z with f = indicator of Psi x = y and
/// g = ||.||_{2,1}). Returns the shrinkage iterate z.
SolveResult<double> solve(const RecoveryProblem<double>& problem, const SolverConfig& config = {});
SolveResult<double> solve(const RecoveryProblem<double>& problem, const AffineProjector& projector,
                          const SolverConfig& config = {});
SolveResult<double> solve(const RecoveryProblem<double>& problem, FactorizationCache& cache,
                          const SolverConfig& config = {});

/// complexify_to_real, solve, map back.
SolveResult<std::complex<double>> solve(const RecoveryProblem<std::complex<double>>& problem,
                                        const SolverConfig& config = {});

inline constexpr double kSuccessThreshold = 1e-5;

/// ||x_hat - x_true||_2 <= 1e-5.
template <typename Derived1, typename Derived2>
bool adjudicate(const Eigen::MatrixBase<Derived1>& x_true, const Eigen::MatrixBase<Derived2>& x_hat) {
  if (x_true.size() != x_hat.size()) throw ShapeError("adjudicate: length mismatch");
  return (x_hat - x_true).norm() <= kSuccessThreshold;
}

} // namespace farpt
