#pragma once

#include "prsolve/dense_kernels.hpp"
#include "prsolve/hybrid.hpp"
#include "prsolve/krylov.hpp"
#include "prsolve/matrix_market.hpp"
#include "prsolve/report.hpp"
#include "prsolve/splitting.hpp"
#include "prsolve/synthetic.hpp"
#include "prsolve/transition.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace prsolve {

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> methods = {
      "power", "iio", "miio", "arnoldi", "garnoldi", "arnoldi-miio", "garnoldi-miio", "oracle"};
  return methods;
}

template <class Scalar = double>
struct BenchConfig {
  std::optional<std::string> input_path;  // Matrix Market file, optionally gzip-compressed
  std::optional<GraphSpec> synthetic;     // used when no input path is given
  bool transpose = false;
  std::vector<std::string> methods;
  std::vector<Scalar> alphas;
  SplittingParams<Scalar> sp;  // alpha is replaced per run
  FlipFlopParams<Scalar> ff;   // alpha1/alpha2 default to alpha - 0.1 per run
  std::optional<Scalar> alpha1_override;
  std::optional<Scalar> alpha2_override;
  std::string output_dir;  // empty: no artifact files
  std::set<std::string> formats{"csv"};
  bool trace = false;
  int threads = 1;
  std::string matrix_name;  // derived from the input when empty

  void validate() const {
    if (!input_path && !synthetic)
      throw std::invalid_argument("bench config: an input file or a synthetic spec is required");
    if (methods.empty()) throw std::invalid_argument("bench config: at least one method required");
    if (alphas.empty()) throw std::invalid_argument("bench config: at least one alpha required");
    for (const Scalar a : alphas)
      if (!(a > Scalar(0)) || a >= Scalar(1))
        throw std::invalid_argument("bench config: alphas must be in (0, 1)");
    const auto& known = known_methods();
    for (const auto& m : methods)
      if (std::find(known.begin(), known.end(), m) == known.end())
        throw std::invalid_argument("bench config: unknown method '" + m + "'");
    for (const auto& f : formats)
      if (f != "csv" && f != "markdown" && f != "json")
        throw std::invalid_argument("bench config: unknown format '" + f + "'");
    if (threads < 1) throw std::invalid_argument("bench config: threads must be >= 1");
  }
};

template <class Scalar = double>
struct BenchRow {
  std::string matrix;
  Scalar alpha = 0;
  std::string method;
  long long mv = 0;
  double cpu_seconds = 0;
  long long it = 0;
  std::optional<double> speedup_percent;
  bool converged = false;
};

template <class Scalar = double>
struct BenchOutcome {
  std::string matrix_name;
  std::vector<BenchRow<Scalar>> rows;
  std::vector<SolveReport<Scalar>> reports;  // aligned with rows
};

namespace detail {

inline std::string format_double(const char* fmt, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, value);
  return buf;
}

template <class Scalar>
std::string format_alpha(Scalar alpha) {
  return format_double("%g", static_cast<double>(alpha));
}

inline std::string strip_matrix_extensions(std::string name) {
  for (const char* ext : {".gz", ".mtx"}) {
    const std::string suffix(ext);
    if (name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      name.erase(name.size() - suffix.size());
  }
  return name;
}

template <class Scalar>
std::string derive_matrix_name(const BenchConfig<Scalar>& config) {
  if (!config.matrix_name.empty()) return config.matrix_name;
  if (config.input_path)
    return strip_matrix_extensions(std::filesystem::path(*config.input_path).filename().string());
  std::ostringstream out;
  out << "synthetic-n" << config.synthetic->n << "-seed" << config.synthetic->seed;
  return out.str();
}

/// Two-decimal CPU-derived columns round identically across the CSV,
/// markdown, and JSON writers because every writer consumes these strings.
inline std::string cpu_string(double seconds) { return format_double("%.4f", seconds); }
inline std::string speedup_string(double percent) { return format_double("%.2f", percent); }

}  // namespace detail

/// Fills speedup_percent for every row whose (matrix, alpha) group contains
/// an IIO baseline row: (CPU_IIO - CPU_method) / CPU_IIO * 100.  The IIO
/// row itself and groups without a baseline are left empty.
template <class Scalar>
void compute_speedup(std::vector<BenchRow<Scalar>>& rows) {
  for (auto& row : rows) {
    if (row.method == "iio") continue;
    for (const auto& base : rows) {
      if (base.method == "iio" && base.matrix == row.matrix && base.alpha == row.alpha &&
          base.cpu_seconds > 0) {
        row.speedup_percent =
            (base.cpu_seconds - row.cpu_seconds) / base.cpu_seconds * 100.0;
        break;
      }
    }
  }
}

/// Residual-history CSV: header `mv,residual`, one row per recorded
/// convergence check, residuals with 16 significant digits.
template <class Scalar>
void emit_residual_plot_data(const SolveReport<Scalar>& report, const std::string& path) {
  if (report.residual_history.empty())
    throw std::invalid_argument("emit_residual_plot_data: empty residual history");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_residual_plot_data: cannot open " + path);
  out << "mv,residual\n";
  for (const auto& [mv, res] : report.residual_history)
    out << mv << ',' << detail::format_double("%.15e", static_cast<double>(res)) << '\n';
  if (!out) throw std::runtime_error("emit_residual_plot_data: write failed for " + path);
}

/// Phase-log CSV for a traced hybrid run.
template <class Scalar>
void emit_phase_trace(const SolveReport<Scalar>& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_phase_trace: cannot open " + path);
  out << "phase,mv,entry_residual,exit_residual,restart_count\n";
  for (const auto& rec : flip_flop_trace(report))
    out << rec.phase << ',' << rec.mv << ','
        << detail::format_double("%.15e", static_cast<double>(rec.entry_residual)) << ','
        << detail::format_double("%.15e", static_cast<double>(rec.exit_residual)) << ','
        << rec.restart_count << '\n';
  if (!out) throw std::runtime_error("emit_phase_trace: write failed for " + path);
}

template <class Scalar>
void write_rows_csv(const std::vector<BenchRow<Scalar>>& rows, std::ostream& out) {
  out << "matrix,alpha,method,mv,cpu_seconds,it,speedup_percent,converged\n";
  for (const auto& row : rows) {
    out << row.matrix << ',' << detail::format_alpha(row.alpha) << ',' << row.method << ','
        << row.mv << ',' << detail::cpu_string(row.cpu_seconds) << ',' << row.it << ','
        << (row.speedup_percent ? detail::speedup_string(*row.speedup_percent) : std::string())
        << ',' << (row.converged ? "true" : "false") << '\n';
  }
}

template <class Scalar>
void write_rows_markdown(const std::vector<BenchRow<Scalar>>& rows, std::ostream& out) {
  out << "| Matrix | alpha | Method | Mv | CPU | IT | Speedup | Converged |\n";
  out << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& row : rows) {
    out << "| " << row.matrix << " | " << detail::format_alpha(row.alpha) << " | " << row.method
        << " | " << row.mv << " | " << detail::cpu_string(row.cpu_seconds) << " | " << row.it
        << " | "
        << (row.speedup_percent ? detail::speedup_string(*row.speedup_percent) + "%"
                                : std::string("-"))
        << " | " << (row.converged ? "yes" : "no") << " |\n";
  }
}

template <class Scalar>
void write_rows_json(const std::vector<BenchRow<Scalar>>& rows, std::ostream& out) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json obj;
    obj["matrix"] = row.matrix;
    obj["alpha"] = static_cast<double>(row.alpha);
    obj["method"] = row.method;
    obj["mv"] = row.mv;
    obj["cpu_seconds"] = std::stod(detail::cpu_string(row.cpu_seconds));
    obj["it"] = row.it;
    if (row.speedup_percent)
      obj["speedup_percent"] = std::stod(detail::speedup_string(*row.speedup_percent));
    else
      obj["speedup_percent"] = nullptr;
    obj["converged"] = row.converged;
    arr.push_back(std::move(obj));
  }
  out << arr.dump(2) << '\n';
}

namespace detail {

template <class Scalar>
SolveReport<Scalar> run_one_method(const TransitionOperator<Scalar>& op,
                                   const CompressedSparseMatrix<Scalar>& adj,
                                   const std::string& method, const SplittingParams<Scalar>& sp,
                                   const FlipFlopParams<Scalar>& ff, bool trace) {
  if (method == "power") return power_method(op, sp.alpha, sp.tau, sp.max_outer);
  if (method == "iio") return iio_solve(op, sp);
  if (method == "miio") return miio_solve(op, sp);
  if (method == "arnoldi")
    return thick_restart_arnoldi_solve(op, sp.alpha, ff.m, ff.p, sp.tau);
  if (method == "garnoldi") return adaptive_garnoldi_solve(op, sp.alpha, ff.m, sp.tau);
  if (method == "arnoldi-miio") return arnoldi_miio_solve(op, sp, ff, trace);
  if (method == "garnoldi-miio") return garnoldi_miio_solve(op, sp, ff, trace);
  if (method == "oracle") {
    SolveReport<Scalar> report;
    report.method = "oracle";
    report.x = dense_oracle_pagerank(adj, sp.alpha, op.teleport());
    report.converged = true;
    return report;
  }
  throw std::invalid_argument("unknown method '" + method + "'");
}

}  // namespace detail

/// Runs every requested (alpha, method) pair sequentially on the resolved
/// input, times each solve (wall clock around the solver call only), fills
/// speedups against the IIO baseline, and — when an output directory is
/// set — writes the row table in each requested format plus per-run
/// residual-history files (and phase traces for traced hybrid runs).
template <class Scalar>
BenchOutcome<Scalar> run_bench(const BenchConfig<Scalar>& config) {
  config.validate();
  CompressedSparseMatrix<Scalar> adj = config.input_path
                                           ? load_matrix_market<Scalar>(*config.input_path)
                                           : generate_graph<Scalar>(*config.synthetic);
  if (config.transpose) adj = adj.transpose();
  const TransitionOperator<Scalar> op(
      adj, TransitionOperator<Scalar>::uniform_teleport(adj.rows()), config.threads);

  BenchOutcome<Scalar> outcome;
  outcome.matrix_name = detail::derive_matrix_name(config);
  for (const Scalar alpha : config.alphas) {
    SplittingParams<Scalar> sp = config.sp;
    sp.alpha = alpha;
    FlipFlopParams<Scalar> ff = config.ff;
    ff.alpha1 = config.alpha1_override.value_or(alpha - Scalar(0.1));
    ff.alpha2 = config.alpha2_override.value_or(alpha - Scalar(0.1));
    for (const auto& method : config.methods) {
      const auto t0 = std::chrono::steady_clock::now();
      SolveReport<Scalar> report = detail::run_one_method(op, adj, method, sp, ff, config.trace);
      const auto t1 = std::chrono::steady_clock::now();
      report.cpu_seconds = std::chrono::duration<double>(t1 - t0).count();

      BenchRow<Scalar> row;
      row.matrix = outcome.matrix_name;
      row.alpha = alpha;
      row.method = method;
      row.mv = report.mv;
      row.cpu_seconds = report.cpu_seconds;
      row.it = report.iterations;
      row.converged = report.converged;
      outcome.rows.push_back(std::move(row));
      outcome.reports.push_back(std::move(report));
    }
  }
  compute_speedup(outcome.rows);

  if (!config.output_dir.empty()) {
    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);
    if (config.formats.count("csv")) {
      std::ofstream out(dir / "benchmark.csv");
      if (!out) throw std::runtime_error("run_bench: cannot write benchmark.csv");
      write_rows_csv(outcome.rows, out);
    }
    if (config.formats.count("markdown")) {
      std::ofstream out(dir / "benchmark.md");
      if (!out) throw std::runtime_error("run_bench: cannot write benchmark.md");
      write_rows_markdown(outcome.rows, out);
    }
    if (config.formats.count("json")) {
      std::ofstream out(dir / "benchmark.json");
      if (!out) throw std::runtime_error("run_bench: cannot write benchmark.json");
      write_rows_json(outcome.rows, out);
    }
    for (std::size_t i = 0; i < outcome.rows.size(); ++i) {
      const auto& row = outcome.rows[i];
      const auto& report = outcome.reports[i];
      const std::string stem =
          outcome.matrix_name + "-alpha" + detail::format_alpha(row.alpha) + "-" + row.method;
      if (!report.residual_history.empty())
        emit_residual_plot_data(report, (dir / ("residuals-" + stem + ".csv")).string());
      if (!report.phases.empty())
        emit_phase_trace(report, (dir / ("trace-" + stem + ".csv")).string());
    }
  }
  return outcome;
}

}  // namespace prsolve
