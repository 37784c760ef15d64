#include "sparse_ukf/trace_io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>

#include "sparse_ukf/config_io.hpp"
#include "sparse_ukf/errors.hpp"

namespace sparse_ukf {

namespace {

void append_row(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  out += "\r\n";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << content;
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

std::string state_label(Eigen::Index i) { return fmt::format("x{}", i + 1); }

}  // namespace

std::vector<std::string> trace_columns(Eigen::Index n_x, std::size_t n_theta) {
  std::vector<std::string> cols{"t"};
  for (Eigen::Index i = 0; i < n_x; ++i) cols.push_back("truth_" + state_label(i));
  cols.emplace_back("y");
  for (Eigen::Index i = 0; i < n_x; ++i) cols.push_back("sq_" + state_label(i));
  for (Eigen::Index i = 0; i < n_x; ++i) cols.push_back("jsq_" + state_label(i));
  for (std::size_t i = 0; i < n_theta; ++i) cols.push_back(fmt::format("theta_{}", i + 1));
  cols.emplace_back("active_count");
  cols.emplace_back("pseudo_iters");
  return cols;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_number(double v) { return fmt::format("{}", v); }

std::string trace_csv(const RunTrace& trace) {
  const auto cols = trace_columns(trace.n_x, trace.term_names.size());
  std::string out;
  std::vector<std::string> header;
  for (const auto& c : cols) header.push_back(csv_field(c));
  append_row(out, header);

  std::vector<std::string> row;
  for (const auto& r : trace.records) {
    row.clear();
    row.push_back(format_number(r.t));
    for (Eigen::Index i = 0; i < r.truth.size(); ++i) row.push_back(format_number(r.truth(i)));
    row.push_back(format_number(r.y));
    for (Eigen::Index i = 0; i < r.sq_estimate.size(); ++i) {
      row.push_back(format_number(r.sq_estimate(i)));
    }
    for (Eigen::Index i = 0; i < r.jsq_estimate.size(); ++i) {
      row.push_back(format_number(r.jsq_estimate(i)));
    }
    for (Eigen::Index i = 0; i < r.theta.size(); ++i) row.push_back(format_number(r.theta(i)));
    row.push_back(std::to_string(r.active_count));
    row.push_back(std::to_string(r.sparsity.iterations));
    if (row.size() != cols.size()) {
      throw DimensionMismatch("trace_csv: record width does not match header");
    }
    append_row(out, row);
  }
  return out;
}

std::string metrics_csv(const MetricsSummary& m, Eigen::Index n_x) {
  std::string out;
  append_row(out, {"filter", "component", "rmse_full", "rmse_post_transient"});
  // A window the run never reached has no RMSE; leave the field empty.
  auto field = [](double v) { return std::isfinite(v) ? format_number(v) : std::string(); };
  auto rows = [&](const char* name, const Vector& full, const Vector& post) {
    for (Eigen::Index i = 0; i < n_x; ++i) {
      append_row(out, {name, state_label(i), field(full(i)), field(post(i))});
    }
  };
  rows("sq_ukf", m.full.sq, m.post_transient.sq);
  rows("jsq_ukf", m.full.jsq, m.post_transient.jsq);
  return out;
}

std::string report_text(const ExperimentResult& result, const ExperimentConfig& config) {
  const auto& m = result.metrics;
  const auto& trace = result.trace;
  std::string out;
  out += fmt::format("benchmark: {}\n", config.benchmark);
  out += fmt::format("library: {}\n",
                     config.custom_terms.empty() ? config.library_key : std::string("custom"));
  out += fmt::format("seed: {}\n", config.seed);
  out += fmt::format("steps recorded: {}\n", trace.records.size());
  out += fmt::format("status: {}\n", trace.completed ? "completed" : "terminated early");
  if (!trace.completed) out += fmt::format("termination: {}\n", trace.termination);
  out += "\n";
  out += fmt::format("Dominant term at the final step: theta_{} = {:.6g}  (Psi_{}(x,u) = {})\n",
                     m.dominant_index, m.final_report.dominant().value, m.dominant_index,
                     m.dominant_term);
  out += fmt::format("Active terms at the final step (|theta| > {}):\n", config.sparsity.barrier);
  for (const auto& e : m.final_report.entries) {
    if (e.active) out += fmt::format("  theta_{:<3} {:>12.6g}  {}\n", e.index, e.value, e.name);
  }
  out += fmt::format("Largest active count after t = {}: {}\n", m.window_start,
                     m.max_active_post_transient);
  out += "Terms active at some point after the transient:";
  for (const auto& n : m.post_transient_active_terms) out += " " + n;
  out += "\n\n";
  out += "RMSE after the transient (truth vs estimate):\n";
  for (Eigen::Index i = 0; i < trace.n_x; ++i) {
    out += fmt::format("  x{}: SQ-UKF {:.6g}   J-SQ-UKF {:.6g}\n", i + 1, m.post_transient.sq(i),
                       m.post_transient.jsq(i));
  }
  out += fmt::format("\nPseudo-measurement iterations: {} total\n", m.total_pseudo_iterations);
  out += fmt::format("Mean ||theta||_1 before/after the sparsity loop: {:.6g} / {:.6g}\n",
                     m.mean_l1_before, m.mean_l1_after);
  out += fmt::format("Covariance repairs: SQ-UKF {}, J-SQ-UKF {}\n", m.sq_recoveries.total(),
                     m.jsq_recoveries.total());
  return out;
}

std::string plot_script(const RunTrace& trace, const ExperimentConfig& config) {
  const Eigen::Index n_x = trace.n_x;
  const std::size_t n_theta = trace.term_names.size();
  // 1-based gnuplot column indices.
  const auto truth_col = [](Eigen::Index i) { return 2 + i; };
  const auto sq_col = [n_x](Eigen::Index i) { return 3 + n_x + i; };
  const auto jsq_col = [n_x](Eigen::Index i) { return 3 + 2 * n_x + i; };
  const Eigen::Index theta_first = 3 + 3 * n_x;

  std::string out;
  out += "# gnuplot script; run `gnuplot plots.gp` inside this directory\n";
  out += "set datafile separator ','\n";
  out += "set terminal pngcairo size 1000,800\n";
  out += "set grid\n\n";
  out += "set output 'states.png'\n";
  out += fmt::format("set multiplot layout {},1 title '{}: state estimates'\n", n_x,
                     config.benchmark);
  for (Eigen::Index i = 0; i < n_x; ++i) {
    out += fmt::format("set ylabel 'x{}'\n", i + 1);
    out += fmt::format(
        "plot 'trace.csv' using 1:{} with lines lw 2 title 'truth', \\\n"
        "     '' using 1:{} with lines dt 3 title 'SQ-UKF', \\\n"
        "     '' using 1:{} with lines dt 2 title 'J-SQ-UKF'\n",
        truth_col(i), sq_col(i), jsq_col(i));
  }
  out += "unset multiplot\n\n";
  out += "set output 'theta.png'\n";
  out += "set xlabel 't [s]'\nset ylabel 'theta'\n";
  out += fmt::format("set object 1 rect from graph 0, first {} to graph 1, first {} "
                     "fc rgb 'gray' fs transparent solid 0.3 noborder\n",
                     -config.sparsity.barrier, config.sparsity.barrier);
  out += "plot ";
  for (std::size_t j = 0; j < n_theta; ++j) {
    if (j) out += ", \\\n     ";
    std::string title = trace.term_names[j];
    for (auto& ch : title) {
      if (ch == '\'') ch = '"';
    }
    out += fmt::format("'trace.csv' using 1:{} with lines title 'theta_{}: {}'",
                       theta_first + static_cast<Eigen::Index>(j), j + 1, title);
  }
  out += "\n";
  return out;
}

void export_trace(const ExperimentResult& result, const ExperimentConfig& config,
                  const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  write_file(dir / "trace.csv", trace_csv(result.trace));
  write_file(dir / "metrics.csv", metrics_csv(result.metrics, result.trace.n_x));
  write_file(dir / "report.txt", report_text(result, config));
  write_file(dir / "plots.gp", plot_script(result.trace, config));
  write_file(dir / "config.yaml", dump_config(config));
}

}  // namespace sparse_ukf
