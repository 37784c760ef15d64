#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sparse_ukf/library.hpp"
#include "sparse_ukf/models.hpp"
#include "sparse_ukf/sparse_update.hpp"
#include "sparse_ukf/squkf.hpp"

namespace sparse_ukf {

/// u(t) = amplitude * sin(frequency * t)
struct Excitation {
  double amplitude = 1.0;
  double frequency = 1.0;  // rad/s

  [[nodiscard]] double at(double t) const;
};

/// Scalar multiples of the identity for each covariance block.
struct NoiseLevels {
  double p0_x = 1e-6;
  double p0_theta = 1e-4;
  double q_x = 1e-6;
  double q_theta = 1e-4;
  double r = 1e-4;
  bool truth_process_noise = false;
  double truth_q = 1e-6;
};

struct UnscentedSettings {
  double alpha = 1e-3;
  double beta = 2.0;
  double kappa = 0.0;
  WeightMode weights = WeightMode::kStandard;
  bool redraw = true;
};

struct ExperimentConfig {
  std::string benchmark = "duffing";  // "duffing" | "golf"
  std::string library_key = "duffing_psi1";
  std::vector<std::string> custom_terms;  // overrides library_key when non-empty
  DuffingParams duffing;
  GolfParams golf;
  double dt = 0.02;
  double horizon = 20.0;
  Excitation excitation;
  Vector truth_x0;
  Vector estimate_x0;
  double theta0 = 1e-3;
  NoiseLevels noise;
  UnscentedSettings unscented;
  SparsityConfig sparsity;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  double transient_fraction = 0.5;  // metrics window starts at this fraction of the horizon

  [[nodiscard]] std::size_t steps() const;
  [[nodiscard]] Eigen::Index state_dim() const { return 2; }

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Built-in Duffing (library psi1) or golf demonstration setup.
ExperimentConfig demo_config(const std::string& benchmark);

/// The configured library, built-in or from custom term expressions.
FunctionLibrary make_library(const ExperimentConfig& config);

/// Continuous complete model used for ground truth.
DerivativeFn truth_derivative(const ExperimentConfig& config);

/// Euler-discretized incomplete model with the g slot.
GSlotModel incomplete_model(const ExperimentConfig& config);

struct TruthData {
  std::vector<double> time;
  std::vector<double> input;
  std::vector<Vector> state;
  std::vector<double> measurement;
};

/// RK4 ground truth and noisy measurements y_k = x1_k + v_k, k = 0..steps().
TruthData simulate_truth(const ExperimentConfig& config);

struct TraceRecord {
  double t = 0.0;
  Vector truth;
  double y = 0.0;
  Vector sq_estimate;
  Vector jsq_estimate;
  Vector theta;
  std::size_t active_count = 0;
  SparsityDiagnostics sparsity;
};

struct RunTrace {
  Eigen::Index n_x = 0;
  std::vector<std::string> term_names;
  std::vector<TraceRecord> records;
  bool completed = true;
  std::string termination;  // diagnostic when the run stopped early
};

struct RmseResult {
  Vector sq;
  Vector jsq;
  std::size_t samples = 0;
};

/// Per-component RMSE of both filters over records with start <= t <= end.
/// Throws EmptyWindow if no record falls inside.
RmseResult compute_rmse(const RunTrace& trace, double start, double end);

struct MetricsSummary {
  RmseResult full;
  RmseResult post_transient;
  double window_start = 0.0;
  CoefficientReport final_report;
  std::string dominant_term;
  std::size_t dominant_index = 0;  // 1-based
  std::size_t max_active_post_transient = 0;
  std::vector<std::string> post_transient_active_terms;  // union over the window
  std::size_t total_pseudo_iterations = 0;
  double mean_l1_before = 0.0;
  double mean_l1_after = 0.0;
  RecoveryCounter sq_recoveries;
  RecoveryCounter jsq_recoveries;
};

MetricsSummary summarize(const RunTrace& trace, const ExperimentConfig& config,
                         const FunctionLibrary& lib);

struct ExperimentResult {
  RunTrace trace;
  MetricsSummary metrics;
};

/// Runs the plain filter on the incomplete model and the joint sparse filter
/// on the same measurement sequence.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace sparse_ukf
