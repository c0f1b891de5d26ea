#include "cli.hpp"
#include "farpt/approx.hpp"
#include "farpt/io.hpp"
#include "farpt/statdim.hpp"

#include <doctest.h>
#include <json.hpp>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace farpt;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "farpt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("farpt_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

} // namespace

TEST_CASE("cli curve") {
  auto r = run({"curve", "--m", "1", "--d", "100", "--s-range", "0:0"});
  REQUIRE(r.code == 0);
  auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"s_B", "value", "tau_star"});
  CHECK(std::stod(rows[1][1]) == 0.0);

  r = run({"curve", "--m", "4", "--d", "32", "--s-range", "32:32"});
  CHECK(std::stod(csv_rows(r.out)[1][1]) == 128.0);

  r = run({"curve", "--m", "4", "--d", "128", "--complex", "--s-range", "1:20"});
  rows = csv_rows(r.out);
  REQUIRE(rows.size() == 21);
  for (int s = 1; s <= 20; ++s) {
    const CurveValue v = complex_curve_value({4, 128, s});
    CHECK(rows[static_cast<std::size_t>(s)][1] == format_double(v.value));
    CHECK(rows[static_cast<std::size_t>(s)][2] == format_double(v.tau_star));
  }

  CHECK(run({"curve", "--d", "10", "--s-range", "5:3"}).code == cli::kUsage);
  CHECK(run({"curve", "--d", "10", "--s-range", "0:11"}).code == cli::kUsage);
  CHECK(run({"curve", "--d", "10", "--s-range", "a:b"}).code == cli::kUsage);
  CHECK(run({"curve", "--d", "10"}).code == cli::kUsage);
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("cli budget") {
  auto r = run({"budget", "--M", "4", "--N", "128", "--kind", "block", "--K-range", "128:128"});
  REQUIRE(r.code == 0);
  auto rows = csv_rows(r.out);
  CHECK(rows[0] == std::vector<std::string>{"K", "N_b", "N_b1", "N_b2", "N_b3", "regime", "ratio"});
  CHECK(std::stod(rows[1][1]) == 512.0);
  CHECK(rows[1][2].empty()); // sparse-scene form undefined at K = N

  r = run({"budget", "--M", "4", "--N", "128", "--kind", "standard", "--K-range", "1:24"});
  REQUIRE(r.code == 0);
  rows = csv_rows(r.out);
  REQUIRE(rows.size() == 25);
  for (int K = 1; K <= 24; ++K) {
    const auto& row = rows[static_cast<std::size_t>(K)];
    CHECK(row[1] == format_double(far_budget({4, 128, static_cast<double>(K), BudgetKind::Standard}).value));
    CHECK(row[2] == format_double(ns_approx(4, 128, K, StandardCase::Case1).clamped));
    CHECK(row[3] == format_double(ns_approx(4, 128, K, StandardCase::Case2).clamped));
  }

  r = run({"budget", "--M", "12", "--N", "256", "--K-range", "0:256:32", "--approx", "case2"});
  REQUIRE(r.code == 0);
  rows = csv_rows(r.out);
  CHECK(rows[0] == std::vector<std::string>{"K", "N_b", "N_b2", "regime", "ratio"});
  CHECK(r.err.find("critical regime") != std::string::npos);

  CHECK(run({"budget", "--K-range", "1:4", "--kind", "diagonal"}).code == cli::kUsage);
  CHECK(run({"budget", "--K-range", "1:4", "--approx", "case7"}).code == cli::kUsage);
}

TEST_CASE("cli solve-k") {
  auto last = [](const Run& r) { return csv_rows(r.out).back().back(); };
  CHECK(last(run({"solve-k", "--M", "4", "--N", "128", "--budget", "128", "--kind", "block"})) == "14.7");
  CHECK(last(run({"solve-k", "--M", "4", "--N", "128", "--budget", "128", "--kind", "standard"})) == "11.1");
  CHECK(last(run({"solve-k", "--M", "3", "--N", "50", "--budget", "150", "--kind", "block"})) == "50.0");
  const auto precise = run({"solve-k", "--M", "4", "--N", "128", "--budget", "128", "--precise"});
  CHECK(last(precise) == format_double(solve_for_k(4, 128, 128, BudgetKind::Block)));
  CHECK(run({"solve-k", "--M", "4", "--N", "128", "--budget", "600"}).code == cli::kUsage);
}

TEST_CASE("cli grid outputs") {
  TempDir dir;
  const std::string prefix = (dir.path / "g").string();
  auto r = run({"grid", "--ensemble", "gauss-real", "--d", "10", "--s-range", "0:0", "--n-range", "3:3", "--trials",
                "4", "--out", prefix});
  REQUIRE(r.code == 0);
  CHECK(slurp(prefix + ".csv") == "s,n,trials,successes,fraction\n0,3,4,4,1\n");
  const auto manifest = nlohmann::json::parse(slurp(prefix + ".manifest.json"));
  CHECK(manifest["schema"] == kManifestSchema);
  CHECK(manifest["subcommand"] == "grid");
  CHECK(manifest.contains("wall_seconds"));
  const auto grid = nlohmann::json::parse(slurp(prefix + ".json"));
  CHECK(grid["manifest"] == "g.manifest.json");
  CHECK_FALSE(fs::exists(prefix + ".svg"));

  const std::vector<std::string> args{"grid", "--ensemble", "far", "--M", "2", "--N", "16", "--block", "--s-range",
                                      "1:5:2", "--n-range", "8:16:4", "--trials", "3", "--seed", "9", "--threads", "2",
                                      "--out"};
  auto with = [&](const std::string& p, bool svg) {
    auto a = args;
    a.push_back(p);
    if (svg) a.emplace_back("--svg");
    return run(a);
  };
  const std::string a = (dir.path / "a").string();
  const std::string b = (dir.path / "b").string();
  const std::string c = (dir.path / "c").string();
  REQUIRE(with(a, false).code == 0);
  REQUIRE(with(b, false).code == 0);
  REQUIRE(with(c, true).code == 0);
  CHECK(slurp(a + ".csv") == slurp(b + ".csv"));
  CHECK(slurp(a + ".csv") == slurp(c + ".csv"));
  CHECK(nlohmann::json::parse(slurp(a + ".json"))["cells"] == nlohmann::json::parse(slurp(b + ".json"))["cells"]);
  CHECK(fs::exists(c + ".svg"));
  CHECK(slurp(c + ".svg").find("c.manifest.json") != std::string::npos);
}

TEST_CASE("cli grid failures leave no files") {
  TempDir dir;
  const std::string prefix = (dir.path / "bad").string();
  auto r = run({"grid", "--ensemble", "gauss-real", "--d", "10", "--s-range", "0:20", "--n-range", "3:3", "--out",
                prefix});
  CHECK(r.code == cli::kUsage);
  CHECK(fs::is_empty(dir.path));

  r = run({"grid", "--ensemble", "gauss-real", "--d", "10", "--s-range", "0:0", "--n-range", "3:3", "--out",
           (dir.path / "missing" / "x").string()});
  CHECK(r.code == cli::kIo);
  CHECK(fs::is_empty(dir.path));

  CHECK(run({"grid", "--ensemble", "cubic", "--s-range", "0:0", "--n-range", "3:3"}).code == cli::kUsage);
}

TEST_CASE("cli config file") {
  TempDir dir;
  const fs::path cfg = dir.path / "cfg.json";
  std::ofstream(cfg) << R"({"solve-k": {"M": 4, "N": 128, "budget": 128, "kind": "standard"}})";
  auto r = run({"--config", cfg.string(), "solve-k"});
  REQUIRE(r.code == 0);
  CHECK(csv_rows(r.out).back().back() == "11.1");
  r = run({"--config", cfg.string(), "solve-k", "--kind", "block"});
  CHECK(csv_rows(r.out).back().back() == "14.7");

  std::ofstream(dir.path / "broken.json") << "{ not json";
  CHECK(run({"--config", (dir.path / "broken.json").string(), "solve-k"}).code == cli::kUsage);
}

TEST_CASE("cli recover dump and replay") {
  TempDir dir;
  const std::string dump = (dir.path / "inst.json").string();
  auto r = run({"recover", "--M", "2", "--N", "16", "--K", "2", "--n", "12", "--seed", "4", "--dump", dump});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(slurp(dump));
  CHECK(doc["schema"] == kInstanceSchema);
  CHECK(doc["recovery"]["x_hat"].size() == 64);
  auto replay = run({"recover", "--replay", dump});
  REQUIRE(replay.code == 0);
  CHECK(replay.out == r.out);
  CHECK(run({"recover", "--replay", (dir.path / "none.json").string()}).code == cli::kIo);
}
