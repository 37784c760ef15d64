#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sparse_ukf/experiment.hpp"

namespace sparse_ukf {

/// Header of trace.csv:
/// t, truth_x1.., y, sq_x1.., jsq_x1.., theta_1..theta_n, active_count, pseudo_iters
std::vector<std::string> trace_columns(Eigen::Index n_x, std::size_t n_theta);

/// Quotes a CSV field when it contains a comma, quote or line break.
std::string csv_field(const std::string& s);

/// Shortest text that parses back to exactly `v`.
std::string format_number(double v);

std::string trace_csv(const RunTrace& trace);
std::string metrics_csv(const MetricsSummary& metrics, Eigen::Index n_x);
std::string report_text(const ExperimentResult& result, const ExperimentConfig& config);
std::string plot_script(const RunTrace& trace, const ExperimentConfig& config);

/// Writes trace.csv, metrics.csv, report.txt, plots.gp and config.yaml into
/// `dir`, creating it if needed. Throws IoError on failure.
void export_trace(const ExperimentResult& result, const ExperimentConfig& config,
                  const std::filesystem::path& dir);

}  // namespace sparse_ukf
