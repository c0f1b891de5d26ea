#include "cli.hpp"

#include "farpt/approx.hpp"
#include "farpt/error.hpp"
#include "farpt/farmodel.hpp"
#include "farpt/io.hpp"
#include "farpt/montecarlo.hpp"
#include "farpt/recovery.hpp"
#include "farpt/rng.hpp"
#include "farpt/statdim.hpp"
#include "farpt/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace farpt::cli {
namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// JSON config files: top-level keys are global options, nested objects are subcommands.
//   {"grid": {"ensemble": "far", "M": 4, "s-range": "8:16:2"}}
class JsonConfig : public CLI::Config {
public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json doc;
    try {
      doc = json::parse(input);
    } catch (const json::parse_error& e) {
      throw CLI::ConversionError(std::string("config: ") + e.what());
    }
    if (!doc.is_object()) throw CLI::ConversionError("config: top level must be an object");
    std::vector<CLI::ConfigItem> items;
    collect(doc, {}, items);
    return items;
  }

private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) return format_double(v.get<double>());
    return v.dump();
  }

  static void collect(const json& obj, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : obj.items()) {
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(key);
        collect(value, nested, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

struct IntRange {
  int lo = 0;
  int hi = 0;
  int step = 1;

  std::vector<int> values() const {
    std::vector<int> v;
    for (int x = lo; x <= hi; x += step) v.push_back(x);
    return v;
  }
};

IntRange parse_range(const std::string& text, const char* flag) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.empty() || parts.size() > 3) throw UsageError(std::string(flag) + ": expected lo:hi[:step], got '" + text + "'");
  auto to_int = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": not an integer: '" + s + "'");
    }
  };
  IntRange r;
  r.lo = to_int(parts[0]);
  r.hi = parts.size() > 1 ? to_int(parts[1]) : r.lo;
  r.step = parts.size() > 2 ? to_int(parts[2]) : 1;
  if (r.step < 1) throw UsageError(std::string(flag) + ": step must be >= 1");
  if (r.hi < r.lo) throw UsageError(std::string(flag) + ": hi < lo");
  return r;
}

BudgetKind parse_kind(const std::string& s) {
  if (s == "block") return BudgetKind::Block;
  if (s == "standard") return BudgetKind::Standard;
  throw UsageError("--kind must be block or standard");
}

const char* kind_name(BudgetKind k) { return k == BudgetKind::Block ? "block" : "standard"; }

// Writes to `path.part` and renames on commit; files of an uncommitted set are removed.
class OutputSet {
public:
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : paths_) std::filesystem::remove(p + ".part", ec);
  }

  void write(const std::string& path, const std::function<void(std::ostream&)>& body) {
    paths_.push_back(path);
    std::ofstream os(path + ".part", std::ios::binary);
    if (!os) throw IoError("cannot open " + path + ".part for writing");
    body(os);
    os.flush();
    if (!os) throw IoError("write failed: " + path);
  }

  void commit() {
    for (const auto& p : paths_) {
      std::error_code ec;
      std::filesystem::rename(p + ".part", p, ec);
      if (ec) throw IoError("cannot rename " + p + ".part: " + ec.message());
    }
    committed_ = true;
  }

  const std::vector<std::string>& paths() const { return paths_; }

private:
  std::vector<std::string> paths_;
  bool committed_ = false;
};

// Data sink: stdout or a file given by --out.
void emit(const std::string& out_path, std::ostream& out, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    out << text;
    return;
  }
  OutputSet set;
  set.write(out_path, [&](std::ostream& os) { os << text; });
  set.commit();
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---- curve ---------------------------------------------------------------------------------

struct CurveArgs {
  int m = 1;
  int d = 0;
  std::string s_range;
  bool complex = false;
  std::string out;
};

void cmd_curve(const CurveArgs& a, std::ostream& out) {
  if (a.m < 1 || a.d < 1) throw UsageError("--m and --d must be >= 1");
  const IntRange r = parse_range(a.s_range, "--s-range");
  if (r.lo < 0 || r.hi > a.d) throw UsageError("--s-range must lie in [0, d]");
  std::ostringstream os;
  os << "s_B,value,tau_star\n";
  for (int s : r.values()) {
    const CurveQuery q{a.m, a.d, s};
    const CurveValue v = a.complex ? complex_curve_value(q) : curve_value(q);
    os << s << ',' << format_double(v.value) << ',' << format_double(v.tau_star) << '\n';
  }
  emit(a.out, out, os.str());
}

// ---- budget --------------------------------------------------------------------------------

struct BudgetArgs {
  int M = 4;
  int N = 128;
  std::string k_range;
  std::string kind = "block";
  std::string approx = "all";
  double regime_hi = 4.0;
  double regime_lo = 0.25;
  std::string out;
};

std::vector<int> parse_case_list(const std::string& s, int max_case) {
  if (s == "all") {
    std::vector<int> v;
    for (int c = 1; c <= max_case; ++c) v.push_back(c);
    return v;
  }
  if (s == "none") return {};
  std::vector<int> v;
  std::stringstream ss(s);
  for (std::string p; std::getline(ss, p, ',');) {
    int c = 0;
    if (p == "case1" || p == "1") c = 1;
    else if (p == "case2" || p == "2") c = 2;
    else if (p == "case3" || p == "3") c = 3;
    if (c < 1 || c > max_case) throw UsageError("--approx: unknown case '" + p + "'");
    v.push_back(c);
  }
  return v;
}

void cmd_budget(const BudgetArgs& a, std::ostream& out, std::ostream& err) {
  if (a.M < 1 || a.N < 1) throw UsageError("--M and --N must be >= 1");
  const BudgetKind kind = parse_kind(a.kind);
  const IntRange r = parse_range(a.k_range, "--K-range");
  if (r.lo < 0 || r.hi > a.N) throw UsageError("--K-range must lie in [0, N]");
  const RegimeThresholds th{a.regime_hi, a.regime_lo};
  if (!(th.hi > th.lo && th.lo > 0)) throw UsageError("regime thresholds need hi > lo > 0");
  const std::vector<int> cases = parse_case_list(a.approx, kind == BudgetKind::Block ? 3 : 2);
  const char* prefix = kind == BudgetKind::Block ? "N_b" : "N_s";

  std::ostringstream os;
  os << "K," << prefix;
  for (int c : cases) os << ',' << prefix << c;
  os << ",regime,ratio\n";
  for (int K : r.values()) {
    const double exact = far_budget({a.M, a.N, static_cast<double>(K), kind}).value;
    os << K << ',' << format_double(exact);
    for (int c : cases) {
      os << ',';
      if (K == 0) continue;
      try {
        const Approximation ap = kind == BudgetKind::Block
                                     ? nb_approx(a.M, a.N, K, static_cast<BlockCase>(c), th)
                                     : ns_approx(a.M, a.N, K, static_cast<StandardCase>(c));
        os << format_double(ap.clamped);
      } catch (const DomainError&) {
        // outside the case's domain: empty cell
      }
    }
    if (K == 0) {
      os << ",,\n";
      continue;
    }
    const RegimeReport rep = classify_regime(a.M, a.N, K, th);
    os << ',' << to_string(rep.regime) << ',' << format_double(rep.ratio) << '\n';
    if (kind == BudgetKind::Block && rep.regime == Regime::Critical) {
      try {
        const double nb2 = nb_approx(a.M, a.N, K, BlockCase::Case2, th).clamped;
        const double rel = std::abs(nb2 - exact) / exact;
        if (rel > 0.10) {
          err << "note: K=" << K << " critical regime, N_b2 differs from N_b by " << format_fixed(100 * rel, 1)
              << "%\n";
        }
      } catch (const DomainError&) {
      }
    }
  }
  emit(a.out, out, os.str());
}

// ---- solve-k -------------------------------------------------------------------------------

struct SolveKArgs {
  int M = 4;
  int N = 128;
  double budget = 0.0;
  std::string kind = "block";
  bool precise = false;
};

void cmd_solve_k(const SolveKArgs& a, std::ostream& out) {
  if (a.M < 1 || a.N < 1) throw UsageError("--M and --N must be >= 1");
  const BudgetKind kind = parse_kind(a.kind);
  const double K = solve_for_k(a.M, a.N, a.budget, kind);
  out << "M,N,budget,kind,K\n"
      << a.M << ',' << a.N << ',' << format_double(a.budget) << ',' << kind_name(kind) << ','
      << (a.precise ? format_double(K) : format_fixed(K, 1)) << '\n';
}

// ---- grid ----------------------------------------------------------------------------------

struct GridArgs {
  std::string ensemble = "gauss-real";
  int m = 1;
  int d = 100;
  int M = 4;
  int N = 128;
  std::string kind = "block";
  bool block = false;
  bool standard = false;
  double freq_ratio = 0.02;
  bool fix_codes = false;
  std::string s_range;
  std::string n_range;
  int trials = 50;
  std::uint64_t seed = 1;
  int threads = 0;
  int max_iters = SolverConfig{}.max_iters;
  double penalty = SolverConfig{}.penalty;
  bool svg = false;
  std::string out = "farpt_grid";
  bool quiet = false;
};

Ensemble make_ensemble(const GridArgs& a) {
  Ensemble e;
  if (a.ensemble == "gauss-real") {
    e = Ensemble::gaussian_real(a.d, a.m);
  } else if (a.ensemble == "gauss-complex") {
    e = Ensemble::gaussian_complex(a.d, a.m);
  } else if (a.ensemble == "far") {
    if (a.block && a.standard) throw UsageError("--block and --standard are exclusive");
    BudgetKind k = parse_kind(a.kind);
    if (a.block) k = BudgetKind::Block;
    if (a.standard) k = BudgetKind::Standard;
    e = Ensemble::far(a.M, a.N, k, a.freq_ratio);
    e.resample_codes = !a.fix_codes;
  } else {
    throw UsageError("--ensemble must be gauss-real, gauss-complex or far");
  }
  e.solver.max_iters = a.max_iters;
  e.solver.penalty = a.penalty;
  return e;
}

void cmd_grid(const GridArgs& a, const std::string& argv_line, std::ostream& out, std::ostream& err) {
  const Ensemble e = make_ensemble(a);
  GridSpec spec;
  spec.sparsity = parse_range(a.s_range, "--s-range").values();
  spec.measurements = parse_range(a.n_range, "--n-range").values();
  spec.trials = a.trials;
  spec.base_seed = a.seed;
  validate(e);
  validate(spec, e);
  if (a.out.empty()) throw UsageError("--out must not be empty");
  const int threads = a.threads > 0 ? a.threads : default_thread_count();

  const SuccessGrid grid = run_grid(e, spec, threads);
  for (const auto& d : grid.diagnostics) err << "diagnostic: " << d << '\n';

  const std::string csv_path = a.out + ".csv";
  const std::string json_path = a.out + ".json";
  const std::string manifest_path = a.out + ".manifest.json";
  const std::string svg_path = a.out + ".svg";
  const std::string manifest_ref = std::filesystem::path(manifest_path).filename().string();

  OutputSet outputs;
  outputs.write(csv_path, [&](std::ostream& os) { write_grid_csv(os, grid); });
  outputs.write(json_path, [&](std::ostream& os) {
    json j = grid_to_json(grid);
    j["manifest"] = manifest_ref;
    os << j.dump(2) << '\n';
  });
  if (a.svg) outputs.write(svg_path, [&](std::ostream& os) { write_grid_svg(os, grid, manifest_ref); });

  json manifest;
  manifest["schema"] = kManifestSchema;
  manifest["tool"] = "farpt";
  manifest["version"] = FARPT_VERSION;
  manifest["subcommand"] = "grid";
  manifest["command_line"] = argv_line;
  manifest["parameters"] = {{"ensemble", ensemble_to_json(e)},
                            {"sparsity", spec.sparsity},
                            {"measurements", spec.measurements},
                            {"trials", spec.trials},
                            {"threads", threads}};
  manifest["seeds"] = {{"base_seed", spec.base_seed},
                       {"derivation", "derive_seed(base_seed, {s, n, trial})"}};
  json paths = json::array();
  for (const auto& p : outputs.paths()) paths.push_back(p);
  manifest["outputs"] = paths;
  manifest["wall_seconds"] = grid.wall_seconds;
  manifest["finished_utc"] = iso_now();
  outputs.write(manifest_path, [&](std::ostream& os) { os << manifest.dump(2) << '\n'; });
  outputs.commit();

  if (a.quiet) return;
  out << "s,theory,transition\n";
  for (int s : spec.sparsity) {
    out << s << ',' << format_double(e.theoretical_curve(s)) << ',';
    try {
      out << format_double(locate_transition(grid, s));
    } catch (const NoCrossingError&) {
    }
    out << '\n';
  }
}

// ---- recover -------------------------------------------------------------------------------

struct RecoverArgs {
  int M = 4;
  int N = 128;
  int K = 1;
  int n = 0;
  std::string kind = "block";
  double freq_ratio = 0.02;
  std::uint64_t seed = 1;
  std::string dump;
  std::string replay;
};

void cmd_recover(const RecoverArgs& a, std::ostream& out) {
  const BudgetKind kind = parse_kind(a.kind);
  FarInstance inst;
  if (!a.replay.empty()) {
    std::ifstream is(a.replay);
    if (!is) throw IoError("cannot open " + a.replay);
    json j;
    try {
      j = json::parse(is);
    } catch (const json::parse_error& e) {
      throw IoError(std::string("cannot parse ") + a.replay + ": " + e.what());
    }
    inst = instance_from_json(j);
  } else {
    const FarConfig cfg{a.M, a.N, a.freq_ratio, derive_seed(a.seed, {1})};
    const int n = a.n > 0 ? a.n : a.N;
    inst = make_far_instance(cfg, a.K, derive_seed(a.seed, {2}), n, derive_seed(a.seed, {3}));
  }
  const int width = kind == BudgetKind::Block ? inst.config.M : 1;
  RecoveryProblem<std::complex<double>> problem{inst.measurement.matrix, inst.measurement.y, width};
  const auto result = solve(problem);
  const double error = (result.x_hat - inst.scene.coefficients).norm();
  out << "M,N,K,n,kind,success,error,iters,status\n"
      << inst.config.M << ',' << inst.config.N << ',' << inst.K << ',' << inst.measurement.rows.size() << ','
      << kind_name(kind) << ',' << (adjudicate(inst.scene.coefficients, result.x_hat) ? 1 : 0) << ','
      << format_double(error) << ',' << result.iters << ','
      << (result.status == SolveStatus::Converged ? "converged" : "max-iters") << '\n';
  if (!a.dump.empty()) {
    json j = instance_to_json(inst);
    j["recovery"] = {{"kind", kind_name(kind)}, {"x_hat", complex_to_json(result.x_hat)}};
    OutputSet set;
    set.write(a.dump, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    set.commit();
  }
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phase-transition curves, FAR sample budgets and recovery experiments", "farpt"};
  app.set_version_flag("--version", FARPT_VERSION);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file supplying any flag; command-line values win");
  app.require_subcommand(1);

  CurveArgs curve;
  auto* c = app.add_subcommand("curve", "phi_m(s_B, d) over a sparsity range");
  c->add_option("--m", curve.m, "block width")->capture_default_str();
  c->add_option("--d", curve.d, "number of blocks")->required();
  c->add_option("--s-range", curve.s_range, "sparsities lo:hi[:step]")->required();
  c->add_flag("--complex", curve.complex, "complex field, units of complex measurements");
  c->add_option("--out", curve.out, "output file (default stdout)");

  BudgetArgs budget;
  auto* b = app.add_subcommand("budget", "exact FAR budget and its approximations over K");
  b->add_option("--M", budget.M, "frequencies")->capture_default_str();
  b->add_option("--N", budget.N, "pulses")->capture_default_str();
  b->add_option("--K-range", budget.k_range, "targets lo:hi[:step]")->required();
  b->add_option("--kind", budget.kind, "block or standard")->capture_default_str();
  b->add_option("--approx", budget.approx, "all, none or a comma list of case1,case2,case3")->capture_default_str();
  b->add_option("--regime-hi", budget.regime_hi, "sparse when ratio exceeds this")->capture_default_str();
  b->add_option("--regime-lo", budget.regime_lo, "dense when ratio is below this")->capture_default_str();
  b->add_option("--out", budget.out, "output file (default stdout)");

  SolveKArgs solvek;
  auto* k = app.add_subcommand("solve-k", "recoverable targets for a measurement budget");
  k->add_option("--M", solvek.M, "frequencies")->capture_default_str();
  k->add_option("--N", solvek.N, "pulses")->capture_default_str();
  k->add_option("--budget", solvek.budget, "measurements")->required();
  k->add_option("--kind", solvek.kind, "block or standard")->capture_default_str();
  k->add_flag("--precise", solvek.precise, "full precision instead of one decimal");

  GridArgs grid;
  auto* g = app.add_subcommand("grid", "Monte Carlo success-rate grid");
  g->add_option("--ensemble", grid.ensemble, "gauss-real, gauss-complex or far")->capture_default_str();
  g->add_option("--m", grid.m, "Gaussian block width")->capture_default_str();
  g->add_option("--d", grid.d, "Gaussian block count")->capture_default_str();
  g->add_option("--M", grid.M, "FAR frequencies")->capture_default_str();
  g->add_option("--N", grid.N, "FAR pulses")->capture_default_str();
  g->add_option("--kind", grid.kind, "FAR recovery: block or standard")->capture_default_str();
  g->add_flag("--block", grid.block, "shorthand for --kind block");
  g->add_flag("--standard", grid.standard, "shorthand for --kind standard");
  g->add_option("--freq-ratio", grid.freq_ratio, "FAR frequency step over carrier")->capture_default_str();
  g->add_flag("--fix-codes", grid.fix_codes, "one code sequence per grid instead of per trial");
  g->add_option("--s-range", grid.s_range, "sparsities lo:hi[:step]")->required();
  g->add_option("--n-range", grid.n_range, "measurement counts lo:hi[:step]")->required();
  g->add_option("--trials", grid.trials, "trials per cell")->capture_default_str();
  g->add_option("--seed", grid.seed, "base seed")->capture_default_str();
  g->add_option("--threads", grid.threads, "workers (default FARPT_THREADS or all cores)");
  g->add_option("--max-iters", grid.max_iters, "solver iteration cap")->capture_default_str();
  g->add_option("--penalty", grid.penalty, "solver penalty rho")->capture_default_str();
  g->add_flag("--svg", grid.svg, "also write a heatmap");
  g->add_option("--out", grid.out, "output prefix for .csv, .json, .manifest.json, .svg")->capture_default_str();
  g->add_flag("--quiet", grid.quiet, "no transition summary on stdout");

  RecoverArgs rec;
  auto* r = app.add_subcommand("recover", "single FAR recovery");
  r->add_option("--M", rec.M, "frequencies")->capture_default_str();
  r->add_option("--N", rec.N, "pulses")->capture_default_str();
  r->add_option("--K", rec.K, "targets")->capture_default_str();
  r->add_option("--n", rec.n, "measurements (default N)");
  r->add_option("--kind", rec.kind, "block or standard")->capture_default_str();
  r->add_option("--freq-ratio", rec.freq_ratio, "frequency step over carrier")->capture_default_str();
  r->add_option("--seed", rec.seed, "seed")->capture_default_str();
  r->add_option("--dump", rec.dump, "write the instance and estimate as JSON");
  r->add_option("--replay", rec.replay, "read an instance written by --dump");

  std::string argv_line;
  for (int i = 0; i < argc; ++i) argv_line += (i ? " " : "") + std::string(argv[i]);

  try {
    app.parse(argc, argv);
    if (c->parsed()) cmd_curve(curve, out);
    if (b->parsed()) cmd_budget(budget, out, err);
    if (k->parsed()) cmd_solve_k(solvek, out);
    if (g->parsed()) cmd_grid(grid, argv_line, out, err);
    if (r->parsed()) cmd_recover(rec, out);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const UsageError& e) {
    err << "usage: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const RangeError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const NonConvergenceError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const FactorizationError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const NoCrossingError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
  return kOk;
}

} // namespace farpt::cli
