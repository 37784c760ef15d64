#include "sparse_ukf/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "sparse_ukf/errors.hpp"

namespace sparse_ukf {

double Excitation::at(double t) const { return amplitude * std::sin(frequency * t); }

std::size_t ExperimentConfig::steps() const {
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("config field '" + field + "': " + why);
  };
  if (benchmark != "duffing" && benchmark != "golf") fail("benchmark", "must be duffing or golf");
  if (custom_terms.empty()) {
    try {
      (void)library_by_key(library_key);
    } catch (const Error& e) {
      fail("library", e.what());
    }
  } else {
    try {
      (void)make_library(*this);
    } catch (const Error& e) {
      fail("library", e.what());
    }
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt", "must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) fail("horizon", "must be positive");
  if (steps() < 1) fail("horizon", "must cover at least one step");
  if (std::abs(static_cast<double>(steps()) * dt - horizon) > 1e-9 * horizon) {
    fail("horizon", "must be an integer multiple of dt");
  }
  if (!std::isfinite(excitation.amplitude)) fail("excitation.amplitude", "must be finite");
  if (!std::isfinite(excitation.frequency)) fail("excitation.frequency", "must be finite");
  if (truth_x0.size() != state_dim() || !truth_x0.allFinite()) {
    fail("initial.truth", "must have 2 finite entries");
  }
  if (estimate_x0.size() != state_dim() || !estimate_x0.allFinite()) {
    fail("initial.estimate", "must have 2 finite entries");
  }
  if (!std::isfinite(theta0)) fail("initial.theta", "must be finite");
  const std::pair<const char*, double> positives[] = {
      {"noise.p0_x", noise.p0_x},         {"noise.p0_theta", noise.p0_theta},
      {"noise.q_x", noise.q_x},           {"noise.q_theta", noise.q_theta},
      {"noise.r", noise.r},               {"noise.truth_q", noise.truth_q},
  };
  for (const auto& [name, v] : positives) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(name, "must be positive");
  }
  if (benchmark == "golf" && !(golf.J > 0.0)) fail("params.J", "must be positive");
  try {
    (void)compute_weights(unscented.alpha, unscented.beta, unscented.kappa, 2, unscented.weights);
  } catch (const Error& e) {
    fail("unscented", e.what());
  }
  try {
    sparsity.validate(make_library(*this).size());
  } catch (const Error& e) {
    fail("sparsity", e.what());
  }
  if (!(transient_fraction >= 0.0 && transient_fraction < 1.0)) {
    fail("metrics.transient_fraction", "must be in [0, 1)");
  }
}

ExperimentConfig demo_config(const std::string& benchmark) {
  ExperimentConfig c;
  c.benchmark = benchmark;
  c.truth_x0 = Vector::Zero(2);
  c.estimate_x0 = Vector::Zero(2);
  if (benchmark == "duffing") {
    c.library_key = "duffing_psi1";
    // Resonant forcing inside the right-hand well of the double-well potential.
    c.excitation = {0.12, 1.4};
    c.truth_x0 << 0.6, 0.0;
    c.estimate_x0 << 1.1, 0.5;
    c.output_dir = "out/demo_duffing";
  } else if (benchmark == "golf") {
    c.library_key = "golf_psi";
    // Larger amplitudes drive the stand-in arm over the top.
    c.excitation = {0.1, 2.0};
    c.truth_x0 << 0.0, 0.0;
    c.estimate_x0 << 0.3, 0.0;
    c.output_dir = "out/demo_golf";
  } else {
    throw ConfigError("unknown demo benchmark '" + benchmark + "'");
  }
  return c;
}

FunctionLibrary make_library(const ExperimentConfig& config) {
  if (config.custom_terms.empty()) return library_by_key(config.library_key);
  std::vector<LibraryTerm> terms;
  for (const auto& t : config.custom_terms) {
    terms.push_back(parse_term(t, static_cast<std::size_t>(config.state_dim())));
  }
  return FunctionLibrary(std::move(terms), static_cast<std::size_t>(config.state_dim()));
}

DerivativeFn truth_derivative(const ExperimentConfig& config) {
  if (config.benchmark == "duffing") {
    return [p = config.duffing](const Vector& x, double u) { return duffing_derivative(x, u, p); };
  }
  return [p = config.golf](const Vector& x, double u) { return golf_derivative(x, u, p); };
}

GSlotModel incomplete_model(const ExperimentConfig& config) {
  if (config.benchmark == "duffing") return duffing_incomplete(config.duffing, config.dt);
  return golf_incomplete(config.golf, config.dt);
}

TruthData simulate_truth(const ExperimentConfig& config) {
  config.validate();
  const std::size_t steps = config.steps();
  const DerivativeFn f = truth_derivative(config);

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> meas_noise(0.0, std::sqrt(config.noise.r));
  std::normal_distribution<double> proc_noise(0.0, std::sqrt(config.noise.truth_q));

  TruthData out;
  out.time.reserve(steps + 1);
  out.input.reserve(steps + 1);
  out.state.reserve(steps + 1);
  out.measurement.reserve(steps + 1);

  Vector x = config.truth_x0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * config.dt;
    const double u = config.excitation.at(t);
    out.time.push_back(t);
    out.input.push_back(u);
    out.state.push_back(x);
    out.measurement.push_back(x(0) + meas_noise(rng));
    if (k == steps) break;
    x = rk4_step(f, x, u, config.dt);
    if (config.noise.truth_process_noise) {
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += proc_noise(rng);
    }
  }
  return out;
}

RmseResult compute_rmse(const RunTrace& trace, double start, double end) {
  RmseResult out;
  out.sq = Vector::Zero(trace.n_x);
  out.jsq = Vector::Zero(trace.n_x);
  for (const auto& r : trace.records) {
    if (r.t < start || r.t > end) continue;
    out.sq += (r.sq_estimate - r.truth).cwiseAbs2();
    out.jsq += (r.jsq_estimate - r.truth).cwiseAbs2();
    ++out.samples;
  }
  if (out.samples == 0) throw EmptyWindow("compute_rmse: no records in the requested window");
  const auto n = static_cast<double>(out.samples);
  out.sq = (out.sq / n).cwiseSqrt();
  out.jsq = (out.jsq / n).cwiseSqrt();
  return out;
}

MetricsSummary summarize(const RunTrace& trace, const ExperimentConfig& config,
                         const FunctionLibrary& lib) {
  if (trace.records.empty()) throw EmptyWindow("summarize: trace has no records");
  MetricsSummary m;
  const double end = trace.records.back().t;
  m.window_start = config.transient_fraction * config.horizon;
  m.full = compute_rmse(trace, 0.0, end);
  if (end >= m.window_start) {
    m.post_transient = compute_rmse(trace, m.window_start, end);
  } else {
    // Run stopped before the window opened; no post-transient estimate exists.
    const double inf = std::numeric_limits<double>::infinity();
    m.post_transient = {Vector::Constant(trace.n_x, inf), Vector::Constant(trace.n_x, inf), 0};
  }

  const auto& last = trace.records.back();
  m.final_report =
      dominant_terms(lib, last.theta, config.sparsity.barrier, trace.records.size() - 1);
  const auto& dom = m.final_report.dominant();
  m.dominant_term = dom.name;
  m.dominant_index = dom.index;

  std::set<std::size_t> active_union;
  std::size_t counted = 0;
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    const auto& r = trace.records[k];
    m.total_pseudo_iterations += r.sparsity.iterations;
    m.mean_l1_before += r.sparsity.l1_before;
    m.mean_l1_after += r.sparsity.l1_after;
    ++counted;
    if (r.t < m.window_start) continue;
    m.max_active_post_transient = std::max(m.max_active_post_transient, r.active_count);
    for (Eigen::Index i = 0; i < r.theta.size(); ++i) {
      if (std::abs(r.theta(i)) > config.sparsity.barrier) {
        active_union.insert(static_cast<std::size_t>(i));
      }
    }
  }
  if (counted > 0) {
    m.mean_l1_before /= static_cast<double>(counted);
    m.mean_l1_after /= static_cast<double>(counted);
  }
  for (std::size_t i : active_union) m.post_transient_active_terms.push_back(lib.term(i).name);
  return m;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const TruthData truth = simulate_truth(config);
  auto lib = std::make_shared<const FunctionLibrary>(make_library(config));

  const Eigen::Index n_x = config.state_dim();
  const auto n_theta = static_cast<Eigen::Index>(lib->size());
  const Eigen::Index n_joint = n_x + n_theta;
  const GSlotModel base = incomplete_model(config);
  const auto& ut = config.unscented;
  const auto& nl = config.noise;

  auto weights = [&ut](Eigen::Index n) {
    UnscentedParams p = compute_weights(ut.alpha, ut.beta, ut.kappa, n, ut.weights);
    p.redraw = ut.redraw;
    return p;
  };
  const Matrix r = nl.r * Matrix::Identity(1, 1);
  const SquareRootUkf plain(without_g(base),
                            NoiseSpec{nl.q_x * Matrix::Identity(n_x, n_x), r},
                            weights(n_x));
  const JointSqUkf joint(
      make_joint_model(base, lib), n_x,
      NoiseSpec{block_diagonal(nl.q_x * Matrix::Identity(n_x, n_x),
                               nl.q_theta * Matrix::Identity(n_theta, n_theta)),
                r},
      weights(n_joint), config.sparsity);

  FilterState sq = plain.initialize(config.estimate_x0, nl.p0_x * Matrix::Identity(n_x, n_x));
  Vector joint_mean(n_joint);
  joint_mean.head(n_x) = config.estimate_x0;
  joint_mean.tail(n_theta).setConstant(config.theta0);
  FilterState jsq = joint.initialize(
      joint_mean, block_diagonal(nl.p0_x * Matrix::Identity(n_x, n_x),
                                 nl.p0_theta * Matrix::Identity(n_theta, n_theta)));

  ExperimentResult result;
  RunTrace& trace = result.trace;
  trace.n_x = n_x;
  trace.term_names = lib->names();
  trace.records.reserve(truth.time.size());

  auto record = [&](std::size_t k, const SparsityDiagnostics& diag) {
    TraceRecord rec;
    rec.t = truth.time[k];
    rec.truth = truth.state[k];
    rec.y = truth.measurement[k];
    rec.sq_estimate = sq.mean;
    rec.jsq_estimate = jsq.mean.head(n_x);
    rec.theta = jsq.mean.tail(n_theta);
    rec.active_count = active_count(rec.theta, config.sparsity.barrier);
    rec.sparsity = diag;
    trace.records.push_back(std::move(rec));
  };

  record(0, SparsityDiagnostics{});
  for (std::size_t k = 1; k < truth.time.size(); ++k) {
    const double u = truth.input[k - 1];
    const Vector y = Vector::Constant(1, truth.measurement[k]);
    try {
      FilterState sq_next = plain.step(sq, u, y);
      auto joint_next = joint.step(jsq, u, y);
      const bool finite = sq_next.mean.allFinite() && sq_next.sqrt_cov.matrix().allFinite() &&
                          joint_next.state.mean.allFinite() &&
                          joint_next.state.sqrt_cov.matrix().allFinite();
      if (!finite) {
        trace.completed = false;
        trace.termination = "non-finite filter state at step " + std::to_string(k);
        break;
      }
      sq = std::move(sq_next);
      jsq = std::move(joint_next.state);
      record(k, joint_next.diagnostics);
    } catch (const Error& e) {
      trace.completed = false;
      trace.termination = "filter error at step " + std::to_string(k) + ": " + e.what();
      break;
    }
  }

  result.metrics = summarize(trace, config, *lib);
  result.metrics.sq_recoveries = plain.recoveries();
  result.metrics.jsq_recoveries = joint.filter().recoveries();
  return result;
}

}  // namespace sparse_ukf
