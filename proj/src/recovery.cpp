#include "farpt/recovery.hpp"

#include <cmath>
#include <cstring>
#include <mutex>
#include <string>

namespace farpt {

Eigen::VectorXd to_block_real(const Eigen::VectorXcd& x, int m) {
  if (m < 1 || x.size() % m != 0) throw ShapeError("to_block_real: length not divisible by block width");
  Eigen::VectorXd out(2 * x.size());
  for (Eigen::Index q = 0; q < x.size() / m; ++q) {
    for (int i = 0; i < m; ++i) {
      out(2 * m * q + i) = x(m * q + i).real();
      out(2 * m * q + m + i) = x(m * q + i).imag();
    }
  }
  return out;
}

Eigen::VectorXcd from_block_real(const Eigen::VectorXd& x, int m) {
  if (m < 1 || x.size() % (2 * m) != 0) throw ShapeError("from_block_real: length not divisible by 2m");
  Eigen::VectorXcd out(x.size() / 2);
  for (Eigen::Index q = 0; q < out.size() / m; ++q) {
    for (int i = 0; i < m; ++i) out(m * q + i) = {x(2 * m * q + i), x(2 * m * q + m + i)};
  }
  return out;
}

RecoveryProblem<double> complexify_to_real(const RecoveryProblem<std::complex<double>>& problem) {
  validate(problem);
  const Eigen::Index n = problem.matrix.rows();
  const Eigen::Index D = problem.matrix.cols();
  const int m = problem.block_width;

  RecoveryProblem<double> out;
  out.block_width = 2 * m;
  out.matrix.resize(2 * n, 2 * D);
  for (Eigen::Index j = 0; j < D; ++j) {
    const Eigen::Index q = j / m;
    const Eigen::Index i = j % m;
    const Eigen::Index re_col = 2 * m * q + i;
    const Eigen::Index im_col = re_col + m;
    const auto a = problem.matrix.col(j);
    out.matrix.col(re_col).head(n) = a.real();
    out.matrix.col(re_col).tail(n) = a.imag();
    out.matrix.col(im_col).head(n) = -a.imag();
    out.matrix.col(im_col).tail(n) = a.real();
  }
  out.y.resize(2 * n);
  out.y.head(n) = problem.y.real();
  out.y.tail(n) = problem.y.imag();
  return out;
}

void validate(const SolverConfig& cfg) {
  if (!(cfg.penalty > 0.0)) throw DomainError("solver: penalty must be positive");
  if (cfg.max_iters < 1) throw DomainError("solver: max_iters must be >= 1");
  if (!(cfg.primal_tol > 0.0) || !(cfg.dual_tol > 0.0)) throw DomainError("solver: tolerances must be positive");
  if (!(cfg.over_relaxation >= 1.0 && cfg.over_relaxation <= 1.9)) {
    throw DomainError("solver: over_relaxation must lie in [1, 1.9]");
  }
}

AffineProjector::AffineProjector(const Eigen::MatrixXd& psi) {
  if (psi.rows() == 0) {
    whitened_.resize(0, psi.cols());
    return;
  }
  const Eigen::MatrixXd gram = psi * psi.transpose();
  llt_.compute(gram);
  if (llt_.info() != Eigen::Success || !(llt_.rcond() > 1e-13)) {
    throw FactorizationError("Psi Psi^T is numerically singular (rcond = " + std::to_string(llt_.rcond()) + ")");
  }
  whitened_ = llt_.matrixL().solve(psi);
}

Eigen::VectorXd AffineProjector::whiten(const Eigen::VectorXd& y) const {
  if (y.size() != rows()) throw ShapeError("projector: observation length mismatch");
  if (rows() == 0) return y;
  return llt_.matrixL().solve(y);
}

void AffineProjector::project(const Eigen::VectorXd& v, const Eigen::VectorXd& c, Eigen::VectorXd& out,
                              Eigen::VectorXd& work) const {
  if (rows() == 0) {
    out = v;
    return;
  }
  work.noalias() = whitened_ * v;
  work -= c;
  out = v;
  out.noalias() -= whitened_.transpose() * work;
}

Eigen::VectorXd AffineProjector::least_norm(const Eigen::VectorXd& c) const {
  if (rows() == 0) return Eigen::VectorXd::Zero(cols());
  return whitened_.transpose() * c;
}

std::uint64_t FactorizationCache::content_hash(const Eigen::MatrixXd& psi) {
  // FNV-1a over the raw bytes.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(psi.data());
  const std::size_t count = static_cast<std::size_t>(psi.size()) * sizeof(double);
  for (std::size_t i = 0; i < count; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::shared_ptr<const AffineProjector> FactorizationCache::get(const Eigen::MatrixXd& psi) {
  const Key key{content_hash(psi), psi.rows(), psi.cols()};
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      for (const auto& [stored, proj] : it->second) {
        if (stored == psi) return proj;
      }
    }
  }
  auto proj = std::make_shared<const AffineProjector>(psi);
  std::unique_lock lock(mutex_);
  auto& bucket = entries_[key];
  for (const auto& [stored, existing] : bucket) {
    if (stored == psi) return existing;
  }
  bucket.emplace_back(psi, proj);
  return proj;
}

std::size_t FactorizationCache::size() const {
  std::shared_lock lock(mutex_);
  std::size_t total = 0;
  for (const auto& [key, bucket] : entries_) total += bucket.size();
  return total;
}

SolveResult<double> solve(const RecoveryProblem<double>& problem, const AffineProjector& projector,
                          const SolverConfig& config) {
  validate(problem);
  validate(config);
  if (projector.rows() != problem.matrix.rows() || projector.cols() != problem.matrix.cols()) {
    throw ShapeError("solve: projector does not match the problem matrix");
  }
  const Eigen::Index D = problem.matrix.cols();
  const Eigen::Index m = problem.block_width;
  const double rho = config.penalty;
  const double alpha = config.over_relaxation;
  const double radius = 1.0 / rho;

  const Eigen::VectorXd c = projector.whiten(problem.y);
  Eigen::VectorXd z = projector.least_norm(c);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(D);
  Eigen::VectorXd x(D), x_relaxed(D), z_old(D), v(D), work(problem.matrix.rows());

  SolveResult<double> result;
  if (config.trace_every > 0) result.objective_trace.push_back(norm21(z, m));

  for (int k = 1; k <= config.max_iters; ++k) {
    v = z - u;
    projector.project(v, c, x, work);
    x_relaxed = alpha * x + (1.0 - alpha) * z;
    z_old = z;
    z = x_relaxed + u;
    block_soft_threshold(z, m, radius);
    u += x_relaxed - z;

    const double primal = (x - z).norm();
    const double dual = rho * (z - z_old).norm();
    result.iters = k;
    result.primal_residual = primal;
    result.dual_residual = dual;
    if (config.trace_every > 0 && k % config.trace_every == 0) result.objective_trace.push_back(norm21(z, m));

    const double primal_scale = std::max({1.0, x.norm(), z.norm()});
    const double dual_scale = std::max(1.0, rho * u.norm());
    if (primal <= config.primal_tol * primal_scale && dual <= config.dual_tol * dual_scale) {
      result.status = SolveStatus::Converged;
      break;
    }
  }
  result.x_hat = std::move(z);
  return result;
}

SolveResult<double> solve(const RecoveryProblem<double>& problem, const SolverConfig& config) {
  validate(problem);
  const AffineProjector projector(problem.matrix);
  return solve(problem, projector, config);
}

SolveResult<double> solve(const RecoveryProblem<double>& problem, FactorizationCache& cache,
                          const SolverConfig& config) {
  validate(problem);
  const auto projector = cache.get(problem.matrix);
  return solve(problem, *projector, config);
}

SolveResult<std::complex<double>> solve(const RecoveryProblem<std::complex<double>>& problem,
                                        const SolverConfig& config) {
  const RecoveryProblem<double> real = complexify_to_real(problem);
  SolveResult<double> r = solve(real, config);
  SolveResult<std::complex<double>> out;
  out.x_hat = from_block_real(r.x_hat, problem.block_width);
  out.iters = r.iters;
  out.primal_residual = r.primal_residual;
  out.dual_residual = r.dual_residual;
  out.status = r.status;
  out.objective_trace = std::move(r.objective_trace);
  return out;
}

} // namespace farpt
