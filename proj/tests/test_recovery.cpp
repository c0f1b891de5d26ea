#include "farpt/error.hpp"
#include "farpt/montecarlo.hpp"
#include "farpt/recovery.hpp"
#include "farpt/rng.hpp"
#include "farpt/statdim.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <complex>
#include <thread>
#include <vector>

using namespace farpt;
using cd = std::complex<double>;

namespace {

Eigen::MatrixXd gaussian(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd a(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) a(i, j) = rng.normal();
  }
  return a;
}

Eigen::MatrixXcd gaussian_c(Rng& rng, int rows, int cols) {
  Eigen::MatrixXcd a(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) a(i, j) = cd(rng.normal(), rng.normal());
  }
  return a;
}

} // namespace

TEST_CASE("complex embedding") {
  RecoveryProblem<cd> p{Eigen::MatrixXcd::Constant(1, 1, cd(2.0, 3.0)), Eigen::VectorXcd::Constant(1, cd(1.0, -1.0)), 1};
  const RecoveryProblem<double> r = complexify_to_real(p);
  CHECK(r.block_width == 2);
  REQUIRE(r.matrix.rows() == 2);
  REQUIRE(r.matrix.cols() == 2);
  CHECK(r.matrix(0, 0) == 2.0);
  CHECK(r.matrix(0, 1) == -3.0);
  CHECK(r.matrix(1, 0) == 3.0);
  CHECK(r.matrix(1, 1) == 2.0);
  CHECK(r.y(0) == 1.0);
  CHECK(r.y(1) == -1.0);

  Rng rng(8);
  for (int m : {1, 3}) {
    Eigen::VectorXcd x(m * 5);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = cd(rng.normal(), rng.normal());
    const Eigen::VectorXd xr = to_block_real(x, m);
    for (int q = 0; q < 5; ++q) CHECK(std::abs(xr.segment(2 * m * q, 2 * m).norm() - x.segment(m * q, m).norm()) < 1e-14);
    CHECK(std::abs(norm21(xr, 2 * m) - norm21(x, m)) < 1e-12);
    CHECK(from_block_real(xr, m) == x);

    // the embedded matrix acts on the embedded vector as the complex one does
    RecoveryProblem<cd> cp{gaussian_c(rng, 3, m * 5), Eigen::VectorXcd::Zero(3), m};
    cp.y = cp.matrix * x;
    const RecoveryProblem<double> rp = complexify_to_real(cp);
    const Eigen::VectorXd yr = rp.matrix * xr;
    CHECK((yr.head(3) - cp.y.real()).norm() < 1e-12);
    CHECK((yr.tail(3) - cp.y.imag()).norm() < 1e-12);
  }
}

TEST_CASE("shrinkage") {
  Eigen::VectorXd v(6);
  v << 0.3, 0.4, 3.0, 4.0, -1.0, 0.0;
  block_soft_threshold(v, 2, 1.0);
  CHECK(v(0) == 0.0);
  CHECK(v(1) == 0.0);
  CHECK(v(2) == doctest::Approx(3.0 * 0.8));
  CHECK(v(3) == doctest::Approx(4.0 * 0.8));
  CHECK(v(4) == 0.0);
  CHECK(v(5) == 0.0);

  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd b(3);
    for (int i = 0; i < 3; ++i) b(i) = 2 * rng.normal();
    const double radius = 3 * rng.uniform();
    Eigen::VectorXd s = b;
    block_soft_threshold(s, 3, radius);
    if (b.norm() <= radius) {
      CHECK(s.isZero());
    } else {
      CHECK((s - (1 - radius / b.norm()) * b).norm() < 1e-14);
    }
  }
}

TEST_CASE("solver trivial cases") {
  Rng rng(4);
  const Eigen::MatrixXd A = gaussian(rng, 5, 5);
  Eigen::VectorXd y(5);
  y << 1, -2, 0.5, 3, 0;
  const auto r = solve(RecoveryProblem<double>{A, y, 1});
  CHECK(r.status == SolveStatus::Converged);
  CHECK((r.x_hat - A.partialPivLu().solve(y)).norm() < 1e-8);

  const Eigen::MatrixXd B = gaussian(rng, 4, 12);
  const auto z = solve(RecoveryProblem<double>{B, Eigen::VectorXd::Zero(4), 3});
  CHECK(z.x_hat.isZero());

  Eigen::MatrixXd rank_deficient = gaussian(rng, 3, 8);
  rank_deficient.row(2) = rank_deficient.row(0);
  CHECK_THROWS_AS(solve(RecoveryProblem<double>{rank_deficient, Eigen::VectorXd::Ones(3), 1}), FactorizationError);
  CHECK_THROWS_AS(solve(RecoveryProblem<double>{B, Eigen::VectorXd::Zero(3), 1}), ShapeError);
  CHECK_THROWS_AS(solve(RecoveryProblem<double>{B, Eigen::VectorXd::Zero(4), 5}), ShapeError);

  SolverConfig bad;
  bad.over_relaxation = 2.0;
  CHECK_THROWS_AS(solve(RecoveryProblem<double>{B, Eigen::VectorXd::Zero(4), 1}, bad), DomainError);
}

TEST_CASE("1-sparse recovery matches the enumeration oracle") {
  Rng rng(6);
  const Eigen::MatrixXd A = gaussian(rng, 4, 6);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(6);
  x(2) = -1.3;
  const Eigen::VectorXd y = A * x;
  const oracle::LpSolution ref = oracle::l1_by_enumeration(A, y);
  REQUIRE(ref.unique);
  const auto r = solve(RecoveryProblem<double>{A, y, 1});
  CHECK((r.x_hat - ref.x).norm() < 1e-6);
  CHECK((ref.x - x).norm() < 1e-9);
}

TEST_CASE("randomized oracle equivalence") {
  Rng rng(12);
  int compared = 0;
  for (int t = 0; t < 50; ++t) {
    const int m = 1 + static_cast<int>(rng.below(2));
    const int blocks = (m == 1 ? 3 : 2) + static_cast<int>(rng.below(m == 1 ? 6 : 3));
    const int D = m * blocks;
    const int n = 1 + static_cast<int>(rng.below(std::min(6, D - 1)));
    const Eigen::MatrixXd A = gaussian(rng, n, D);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(D);
    const int active = 1 + static_cast<int>(rng.below(2));
    for (int q : sample_without_replacement(rng, blocks, std::min(active, blocks))) {
      for (int i = 0; i < m; ++i) x(q * m + i) = rng.normal();
    }
    const Eigen::VectorXd y = A * x;
    const auto r = solve(RecoveryProblem<double>{A, y, m});
    CAPTURE(t);
    CAPTURE(m);
    CAPTURE(n);
    CAPTURE(D);
    REQUIRE(r.status == SolveStatus::Converged);
    CHECK((A * r.x_hat - y).norm() <= 1e-6 * std::max(1.0, y.norm()));
    if (m == 1) {
      const oracle::LpSolution ref = oracle::l1_by_enumeration(A, y);
      CHECK(norm21(r.x_hat, 1) <= ref.objective + 1e-7);
      if (!ref.unique) continue;
      CHECK((r.x_hat - ref.x).norm() < 1e-6);
    } else {
      const Eigen::VectorXd ref = oracle::l21_irls<double>(A, y, m);
      CHECK(norm21(r.x_hat, m) <= oracle::l21(ref, m) + 1e-7);
      if (!oracle::l21_unique(A, ref, m)) continue;
      CHECK((r.x_hat - ref).norm() < 1e-6);
    }
    ++compared;
  }
  CHECK(compared >= 25);
}

TEST_CASE("complex problem through the embedding matches a complex reference") {
  Rng rng(21);
  const Eigen::MatrixXcd A = gaussian_c(rng, 3, 6);
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(6);
  x(4) = std::polar(1.0, 0.7);
  const Eigen::VectorXcd y = A * x;
  const auto r = solve(RecoveryProblem<cd>{A, y, 1});
  REQUIRE(r.status == SolveStatus::Converged);
  const Eigen::VectorXcd ref = oracle::l21_irls<cd>(A, y, 1);
  CHECK((r.x_hat - ref).norm() < 1e-6);
  CHECK((A * r.x_hat - y).norm() < 1e-6);

  // width-2 complex blocks
  const Eigen::MatrixXcd B = gaussian_c(rng, 3, 8);
  Eigen::VectorXcd xb = Eigen::VectorXcd::Zero(8);
  xb(2) = cd(0.5, -1.0);
  xb(3) = cd(1.0, 0.2);
  const Eigen::VectorXcd yb = B * xb;
  const auto rb = solve(RecoveryProblem<cd>{B, yb, 2});
  CHECK((rb.x_hat - oracle::l21_irls<cd>(B, yb, 2)).norm() < 1e-6);
}

TEST_CASE("sampled objective does not increase") {
  Rng rng(31);
  SolverConfig cfg;
  cfg.trace_every = 50;
  int violations = 0;
  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXd A = gaussian(rng, 20, 40);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(40);
    for (int q : sample_without_replacement(rng, 10, 2)) x.segment(q * 4, 4).setConstant(1.0);
    const auto r = solve(RecoveryProblem<double>{A, A * x, 4}, cfg);
    REQUIRE(r.objective_trace.size() >= 2);
    for (std::size_t i = 2; i < r.objective_trace.size(); ++i) {
      if (r.objective_trace[i] > r.objective_trace[i - 1] + 1e-9) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("adjudicate") {
  Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(5, 0, 1);
  CHECK(adjudicate(a, a));
  Eigen::VectorXd b = a;
  b(3) += 1e-4;
  CHECK_FALSE(adjudicate(a, b));
  b(3) = a(3) + 5e-6;
  CHECK(adjudicate(a, b));
  CHECK_THROWS_AS(adjudicate(a, Eigen::VectorXd::Zero(4)), ShapeError);
}

TEST_CASE("recovery well above the curve almost always succeeds") {
  const Ensemble e = Ensemble::gaussian_real(100, 1);
  REQUIRE(curve_value({1, 100, 5}).value < 30);
  const CellResult cell = run_cell(e, 5, 45, 50, 123);
  CHECK(cell.fraction() >= 0.95);
}

TEST_CASE("factorization cache") {
  Rng rng(41);
  const Eigen::MatrixXd A = gaussian(rng, 6, 12);
  const Eigen::MatrixXd B = gaussian(rng, 6, 12);
  FactorizationCache cache;
  const auto pa = cache.get(A);
  CHECK(cache.get(A) == pa);
  CHECK(cache.get(B) != pa);
  CHECK(cache.size() == 2);

  std::vector<std::shared_ptr<const AffineProjector>> seen(4);
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < 4; ++t) {
      pool.emplace_back([&, t] {
        for (int i = 0; i < 50; ++i) seen[static_cast<std::size_t>(t)] = cache.get(i % 2 ? A : B);
      });
    }
  }
  CHECK(cache.size() == 2);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(12);
  x(1) = 1;
  const auto cached = solve(RecoveryProblem<double>{A, A * x, 1}, cache);
  const auto direct = solve(RecoveryProblem<double>{A, A * x, 1});
  CHECK(cached.x_hat == direct.x_hat);
}
