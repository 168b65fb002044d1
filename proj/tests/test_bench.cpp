#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <prsolve/bench.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using prsolve::BenchConfig;
using prsolve::BenchRow;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / "prsolve-bench-test" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// Blanks the CPU-derived fields (cpu_seconds, speedup_percent) of a bench
/// CSV so two runs can be compared for byte equality elsewhere.
std::string strip_timing_columns(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    while (cells.size() < 8) cells.emplace_back();
    cells[4] = "-";
    cells[6] = "-";
    for (std::size_t i = 0; i < cells.size(); ++i)
      out << (i ? "," : "") << cells[i];
    out << '\n';
  }
  return out.str();
}

BenchConfig<double> synthetic_config(const fs::path& out_dir) {
  BenchConfig<double> config;
  prsolve::GraphSpec spec;
  spec.n = 120;
  spec.dangling_fraction = 0.1;
  spec.seed = 7;
  config.synthetic = spec;
  config.methods = {"power", "iio", "miio", "arnoldi", "garnoldi", "arnoldi-miio",
                    "garnoldi-miio"};
  config.alphas = {0.9};
  config.output_dir = out_dir.string();
  config.formats = {"csv", "markdown", "json"};
  config.trace = true;
  return config;
}

}  // namespace

TEST_CASE("config validation rejects malformed requests") {
  BenchConfig<double> config;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);  // no input at all
  prsolve::GraphSpec spec;
  spec.n = 10;
  config.synthetic = spec;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);  // no methods
  config.methods = {"power"};
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);  // no alphas
  config.alphas = {0.9};
  config.validate();
  config.methods = {"gradient-descent"};
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.methods = {"power"};
  config.alphas = {1.0};
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.alphas = {0.9};
  config.formats = {"yaml"};
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.formats = {"csv"};
  config.threads = 0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("speedup is relative to the IIO row of the same matrix and alpha") {
  std::vector<BenchRow<double>> rows(3);
  rows[0].matrix = rows[1].matrix = rows[2].matrix = "g";
  rows[0].alpha = rows[1].alpha = rows[2].alpha = 0.99;
  rows[0].method = "iio";
  rows[0].cpu_seconds = 26.3442;
  rows[1].method = "miio";
  rows[1].cpu_seconds = 14.9823;
  rows[2].method = "power";
  rows[2].cpu_seconds = 30.0;
  prsolve::compute_speedup(rows);
  CHECK_FALSE(rows[0].speedup_percent.has_value());  // the baseline itself
  REQUIRE(rows[1].speedup_percent.has_value());
  CHECK(*rows[1].speedup_percent == doctest::Approx(43.128657).epsilon(1e-6));
  REQUIRE(rows[2].speedup_percent.has_value());
  CHECK(*rows[2].speedup_percent < 0.0);  // slower than the baseline, not clamped

  std::vector<BenchRow<double>> lone(1);
  lone[0].matrix = "g";
  lone[0].alpha = 0.9;
  lone[0].method = "miio";
  lone[0].cpu_seconds = 1.0;
  prsolve::compute_speedup(lone);
  CHECK_FALSE(lone[0].speedup_percent.has_value());  // no baseline present
}

TEST_CASE("residual plot data uses 16 significant digits") {
  prsolve::SolveReport<double> report;
  report.residual_history = {{1, 0.5}, {3, 1.23456789012345e-5}};
  const auto dir = fresh_dir("residuals");
  const auto path = dir / "r.csv";
  prsolve::emit_residual_plot_data(report, path.string());
  CHECK(slurp(path) ==
        "mv,residual\n"
        "1,5.000000000000000e-01\n"
        "3,1.234567890123450e-05\n");

  prsolve::SolveReport<double> empty;
  CHECK_THROWS_AS(prsolve::emit_residual_plot_data(empty, (dir / "e.csv").string()),
                  std::invalid_argument);
  fs::remove_all(dir);
}

TEST_CASE("table writers agree on the rounded values") {
  std::vector<BenchRow<double>> rows(2);
  rows[0].matrix = "g";
  rows[0].alpha = 0.99;
  rows[0].method = "iio";
  rows[0].mv = 1764;
  rows[0].cpu_seconds = 26.34421789;
  rows[0].it = 337;
  rows[0].converged = true;
  rows[1] = rows[0];
  rows[1].method = "miio";
  rows[1].mv = 1522;
  rows[1].cpu_seconds = 14.98226111;
  rows[1].it = 142;
  prsolve::compute_speedup(rows);

  std::ostringstream csv;
  prsolve::write_rows_csv(rows, csv);
  CHECK(csv.str() ==
        "matrix,alpha,method,mv,cpu_seconds,it,speedup_percent,converged\n"
        "g,0.99,iio,1764,26.3442,337,,true\n"
        "g,0.99,miio,1522,14.9823,142,43.13,true\n");

  std::ostringstream md;
  prsolve::write_rows_markdown(rows, md);
  CHECK(md.str().find("| g | 0.99 | miio | 1522 | 14.9823 | 142 | 43.13% | yes |") !=
        std::string::npos);

  std::ostringstream js;
  prsolve::write_rows_json(rows, js);
  const auto parsed = nlohmann::json::parse(js.str());
  REQUIRE(parsed.is_array());
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0]["speedup_percent"].is_null());
  CHECK(parsed[1]["cpu_seconds"].get<double>() == 14.9823);
  CHECK(parsed[1]["speedup_percent"].get<double>() == 43.13);
  CHECK(parsed[1]["mv"].get<long long>() == 1522);
}

TEST_CASE("run_bench on a file input: oracle and power agree") {
  const auto dir = fresh_dir("file-input");
  const auto mtx = dir / "tiny.mtx";
  std::ofstream(mtx) << "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 1.0\n";

  BenchConfig<double> config;
  config.input_path = mtx.string();
  config.methods = {"power", "oracle"};
  config.alphas = {0.85};
  config.sp.tau = 1e-12;
  const auto outcome = prsolve::run_bench(config);
  CHECK(outcome.matrix_name == "tiny");
  REQUIRE(outcome.rows.size() == 2);
  CHECK(outcome.rows[0].method == "power");
  CHECK(outcome.rows[0].converged);
  CHECK(outcome.rows[0].mv > 0);
  CHECK(outcome.rows[1].method == "oracle");
  CHECK(outcome.rows[1].converged);
  CHECK(outcome.rows[1].mv == 0);
  CHECK(outcome.rows[1].it == 0);
  CHECK((outcome.reports[0].x - outcome.reports[1].x).lpNorm<Eigen::Infinity>() <= 1e-10);
  fs::remove_all(dir);
}

TEST_CASE("run_bench emits the requested artifacts") {
  const auto dir = fresh_dir("artifacts");
  const auto config = synthetic_config(dir);
  const auto outcome = prsolve::run_bench(config);
  CHECK(outcome.matrix_name == "synthetic-n120-seed7");
  REQUIRE(outcome.rows.size() == config.methods.size());
  for (const auto& row : outcome.rows) CHECK(row.converged);

  CHECK(fs::exists(dir / "benchmark.csv"));
  CHECK(fs::exists(dir / "benchmark.md"));
  CHECK(fs::exists(dir / "benchmark.json"));
  for (const auto& method : config.methods)
    CHECK(fs::exists(dir / ("residuals-synthetic-n120-seed7-alpha0.9-" + method + ".csv")));
  // Phase traces exist for the traced hybrid runs only.
  CHECK(fs::exists(dir / "trace-synthetic-n120-seed7-alpha0.9-arnoldi-miio.csv"));
  CHECK(fs::exists(dir / "trace-synthetic-n120-seed7-alpha0.9-garnoldi-miio.csv"));
  CHECK_FALSE(fs::exists(dir / "trace-synthetic-n120-seed7-alpha0.9-power.csv"));

  const auto parsed = nlohmann::json::parse(slurp(dir / "benchmark.json"));
  CHECK(parsed.size() == outcome.rows.size());

  const std::string trace = slurp(dir / "trace-synthetic-n120-seed7-alpha0.9-arnoldi-miio.csv");
  CHECK(trace.rfind("phase,mv,entry_residual,exit_residual,restart_count\nK,", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("sequential re-runs differ only in the timing columns") {
  const auto dir_a = fresh_dir("repeat-a");
  const auto dir_b = fresh_dir("repeat-b");
  prsolve::run_bench(synthetic_config(dir_a));
  prsolve::run_bench(synthetic_config(dir_b));

  CHECK(strip_timing_columns(slurp(dir_a / "benchmark.csv")) ==
        strip_timing_columns(slurp(dir_b / "benchmark.csv")));
  // Residual histories carry no timing at all: byte-identical.
  for (const auto& entry : fs::directory_iterator(dir_a)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("residuals-", 0) == 0 || name.rfind("trace-", 0) == 0)
      CHECK(slurp(entry.path()) == slurp(dir_b / name));
  }
  fs::remove_all(dir_a.parent_path());
}
