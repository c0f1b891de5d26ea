#include "farpt/io.hpp"

#include "farpt/error.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <system_error>

namespace farpt {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

std::string format_fixed(double v, int decimals) {
  if (!std::isfinite(v)) return format_double(v);
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, decimals);
  return {buf, res.ptr};
}

void write_grid_csv(std::ostream& os, const SuccessGrid& grid) {
  os << "s,n,trials,successes,fraction\n";
  for (const CellResult& c : grid.cells) {
    os << c.sparsity << ',' << c.n << ',' << c.trials << ',' << c.successes << ',' << format_double(c.fraction())
       << '\n';
  }
}

nlohmann::json ensemble_to_json(const Ensemble& e) {
  nlohmann::json j;
  switch (e.kind) {
  case EnsembleKind::GaussianReal:
    j["kind"] = "gauss-real";
    break;
  case EnsembleKind::GaussianComplex:
    j["kind"] = "gauss-complex";
    break;
  case EnsembleKind::FAR:
    j["kind"] = "far";
    break;
  }
  j["signal"] = e.signal == SignalModel::PlusMinusOne ? "plus-minus-one" : "unit-phase";
  if (e.kind == EnsembleKind::FAR) {
    j["M"] = e.M;
    j["N"] = e.N;
    j["freq_ratio"] = e.freq_ratio;
    j["recovery"] = e.far_recovery == BudgetKind::Block ? "block" : "standard";
    j["codes"] = e.resample_codes ? "per-trial" : "fixed";
  } else {
    j["d"] = e.d;
    j["m"] = e.m;
  }
  j["block_width"] = e.recovery_block_width();
  j["solver"] = {{"penalty", e.solver.penalty},
                 {"max_iters", e.solver.max_iters},
                 {"primal_tol", e.solver.primal_tol},
                 {"dual_tol", e.solver.dual_tol},
                 {"over_relaxation", e.solver.over_relaxation}};
  return j;
}

nlohmann::json grid_to_json(const SuccessGrid& grid) {
  nlohmann::json j;
  j["schema"] = kGridSchema;
  j["ensemble"] = ensemble_to_json(grid.ensemble);
  j["base_seed"] = grid.spec.base_seed;
  j["trials"] = grid.spec.trials;
  j["seed_derivation"] = "trial seed = derive_seed(base_seed, {s, n, trial}) (SplitMix64 chain)";
  j["success_threshold"] = kSuccessThreshold;
  j["sparsity"] = grid.spec.sparsity;
  j["measurements"] = grid.spec.measurements;
  nlohmann::json cells = nlohmann::json::array();
  for (const CellResult& c : grid.cells) {
    cells.push_back({{"s", c.sparsity},
                     {"n", c.n},
                     {"trials", c.trials},
                     {"successes", c.successes},
                     {"fraction", c.fraction()},
                     {"factorization_failures", c.factorization_failures}});
  }
  j["cells"] = std::move(cells);
  j["diagnostics"] = grid.diagnostics;
  return j;
}

nlohmann::json complex_to_json(const Eigen::VectorXcd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    arr.push_back(v(i).real());
    arr.push_back(v(i).imag());
  }
  return arr;
}

Eigen::VectorXcd complex_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() % 2 != 0) throw ShapeError("interleaved complex array must have even length");
  Eigen::VectorXcd v(static_cast<Eigen::Index>(j.size() / 2));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = {j.at(static_cast<std::size_t>(2 * i)).get<double>(), j.at(static_cast<std::size_t>(2 * i + 1)).get<double>()};
  }
  return v;
}

FarInstance make_far_instance(const FarConfig& cfg, int K, std::uint64_t scene_seed, int n, std::uint64_t row_seed) {
  FarInstance inst;
  inst.config = cfg;
  inst.codes = generate_codes(cfg);
  inst.K = K;
  inst.scene_seed = scene_seed;
  inst.scene = generate_scene(cfg, K, scene_seed);
  inst.row_seed = row_seed;
  inst.measurement = subsample_and_measure(build_theta(cfg, inst.codes), inst.scene, n, row_seed);
  return inst;
}

nlohmann::json instance_to_json(const FarInstance& inst) {
  nlohmann::json j;
  j["schema"] = kInstanceSchema;
  j["config"] = {{"M", inst.config.M},
                 {"N", inst.config.N},
                 {"freq_ratio", inst.config.freq_ratio},
                 {"seed", inst.config.seed}};
  j["codes"] = inst.codes.codes;
  j["scene"] = {{"K", inst.K},
                {"seed", inst.scene_seed},
                {"support", inst.scene.support},
                {"coefficients", complex_to_json(inst.scene.coefficients)}};
  j["measurement"] = {{"n", static_cast<int>(inst.measurement.rows.size())},
                      {"seed", inst.row_seed},
                      {"rows", inst.measurement.rows},
                      {"y", complex_to_json(inst.measurement.y)}};
  return j;
}

FarInstance instance_from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != kInstanceSchema) throw ShapeError("not a farpt.far_instance/1 document");
  FarConfig cfg;
  const auto& c = j.at("config");
  cfg.M = c.at("M").get<int>();
  cfg.N = c.at("N").get<int>();
  cfg.freq_ratio = c.at("freq_ratio").get<double>();
  cfg.seed = c.at("seed").get<std::uint64_t>();
  const auto& s = j.at("scene");
  const auto& m = j.at("measurement");
  FarInstance inst = make_far_instance(cfg, s.at("K").get<int>(), s.at("seed").get<std::uint64_t>(),
                                       m.at("n").get<int>(), m.at("seed").get<std::uint64_t>());

  if (j.at("codes").get<std::vector<int>>() != inst.codes.codes) throw ShapeError("stored codes disagree with seed");
  if (s.at("support").get<std::vector<int>>() != inst.scene.support) {
    throw ShapeError("stored support disagrees with seed");
  }
  if (m.at("rows").get<std::vector<int>>() != inst.measurement.rows) throw ShapeError("stored rows disagree with seed");
  if (complex_from_json(s.at("coefficients")) != inst.scene.coefficients) {
    throw ShapeError("stored coefficients disagree with seed");
  }
  return inst;
}

} // namespace farpt
