#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sparse_ukf/config_io.hpp"
#include "sparse_ukf/errors.hpp"
#include "sparse_ukf/experiment.hpp"
#include "sparse_ukf/library.hpp"
#include "sparse_ukf/linalg.hpp"
#include "sparse_ukf/models.hpp"
#include "sparse_ukf/sparse_update.hpp"
#include "sparse_ukf/squkf.hpp"
#include "sparse_ukf/trace_io.hpp"

namespace py = pybind11;
using namespace sparse_ukf;

namespace {

TriangularFactor factor(const Matrix& lower) { return TriangularFactor(lower); }

// Stacks per-record vectors into a (records x dim) array.
template <typename Get>
Matrix stack(const RunTrace& trace, Eigen::Index dim, Get get) {
  Matrix out(static_cast<Eigen::Index>(trace.records.size()), dim);
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = get(trace.records[k]).transpose();
  }
  return out;
}

Vector column(const RunTrace& trace, double (*get)(const TraceRecord&)) {
  Vector out(static_cast<Eigen::Index>(trace.records.size()));
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    out(static_cast<Eigen::Index>(k)) = get(trace.records[k]);
  }
  return out;
}

py::dict trace_arrays(const RunTrace& trace) {
  const Eigen::Index n_theta = static_cast<Eigen::Index>(trace.term_names.size());
  py::dict d;
  d["t"] = column(trace, [](const TraceRecord& r) { return r.t; });
  d["y"] = column(trace, [](const TraceRecord& r) { return r.y; });
  d["truth"] = stack(trace, trace.n_x,
                     [](const TraceRecord& r) -> const Vector& { return r.truth; });
  d["sq"] = stack(trace, trace.n_x,
                  [](const TraceRecord& r) -> const Vector& { return r.sq_estimate; });
  d["jsq"] = stack(trace, trace.n_x,
                   [](const TraceRecord& r) -> const Vector& { return r.jsq_estimate; });
  d["theta"] = stack(trace, n_theta, [](const TraceRecord& r) -> const Vector& { return r.theta; });
  d["active_count"] = column(
      trace, [](const TraceRecord& r) { return static_cast<double>(r.active_count); });
  d["pseudo_iterations"] = column(
      trace, [](const TraceRecord& r) { return static_cast<double>(r.sparsity.iterations); });
  return d;
}

DiscreteModel python_model(Eigen::Index n, Eigen::Index m, TransitionFn f, ObservationFn h) {
  return DiscreteModel{n, m, std::move(f), std::move(h)};
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Square-root UKF with sparsity-promoting model discovery";

  auto base = py::register_exception<Error>(mod, "Error", PyExc_RuntimeError);
  py::register_exception<NotPositiveDefinite>(mod, "NotPositiveDefinite", base.ptr());
  py::register_exception<RankDeficient>(mod, "RankDeficient", base.ptr());
  py::register_exception<DowndateFailure>(mod, "DowndateFailure", base.ptr());
  py::register_exception<SingularFactor>(mod, "SingularFactor", base.ptr());
  py::register_exception<DimensionMismatch>(mod, "DimensionMismatch", base.ptr());
  py::register_exception<NonFiniteResult>(mod, "NonFiniteResult", base.ptr());
  py::register_exception<InvalidParams>(mod, "InvalidParams", base.ptr());
  py::register_exception<ConfigError>(mod, "ConfigError", base.ptr());
  py::register_exception<EmptyWindow>(mod, "EmptyWindow", base.ptr());
  py::register_exception<IoError>(mod, "IoError", base.ptr());

  // Square-root kernels: factors travel as lower-triangular numpy arrays.
  mod.def("cholesky", [](const Matrix& p) { return cholesky(p).matrix(); }, py::arg("p"));
  mod.def("qr_triangularize", [](const Matrix& a) { return qr_triangularize(a).matrix(); },
          py::arg("a"));
  mod.def(
      "chol_rank1_update",
      [](const Matrix& s, const Matrix& u, double weight) {
        return chol_rank1_update(factor(s), u, weight).matrix();
      },
      py::arg("s"), py::arg("u"), py::arg("weight"),
      "Factor of S S^T + weight * U U^T; U may be a vector or a matrix of columns.");
  mod.def(
      "triangular_solve",
      [](const Matrix& s, const Matrix& b, const std::string& side, bool transpose) {
        if (side != "left" && side != "right") {
          throw InvalidParams("side must be 'left' or 'right'");
        }
        return triangular_solve(factor(s), b, side == "left" ? Side::kLeft : Side::kRight,
                                transpose);
      },
      py::arg("s"), py::arg("b"), py::arg("side") = "left", py::arg("transpose") = false);
  mod.def(
      "project_and_factor",
      [](const Matrix& p, double floor) { return project_and_factor(p, floor).matrix(); },
      py::arg("p"), py::arg("floor") = 1e-12);

  py::enum_<WeightMode>(mod, "WeightMode")
      .value("STANDARD", WeightMode::kStandard)
      .value("PRINTED", WeightMode::kPrinted);

  py::class_<UnscentedParams>(mod, "UnscentedParams")
      .def_readonly("alpha", &UnscentedParams::alpha)
      .def_readonly("beta", &UnscentedParams::beta)
      .def_readonly("kappa", &UnscentedParams::kappa)
      .def_readonly("n", &UnscentedParams::n)
      .def_readonly("lam", &UnscentedParams::lambda)
      .def_readonly("eta", &UnscentedParams::eta)
      .def_readonly("wm", &UnscentedParams::wm)
      .def_readonly("wc", &UnscentedParams::wc)
      .def_readonly("mode", &UnscentedParams::mode)
      .def_readwrite("redraw", &UnscentedParams::redraw);
  mod.def(
      "compute_weights",
      [](Eigen::Index n, double alpha, double beta, double kappa, WeightMode mode) {
        return compute_weights(alpha, beta, kappa, n, mode);
      },
      py::arg("n"), py::arg("alpha") = 1e-3, py::arg("beta") = 2.0, py::arg("kappa") = 0.0,
      py::arg("mode") = WeightMode::kStandard);
  mod.def(
      "sigma_points",
      [](const Vector& mean, const Matrix& s, double eta) {
        return sigma_points(mean, factor(s), eta);
      },
      py::arg("mean"), py::arg("s"), py::arg("eta"));

  py::class_<FilterState>(mod, "FilterState")
      .def_readonly("mean", &FilterState::mean)
      .def_property_readonly("sqrt_cov", [](const FilterState& s) { return s.sqrt_cov.matrix(); })
      .def_property_readonly("cov", [](const FilterState& s) { return s.sqrt_cov.covariance(); })
      .def_readonly("step", &FilterState::step);

  py::class_<SquareRootUkf>(mod, "SquareRootUkf")
      .def(py::init([](Eigen::Index n, Eigen::Index m, TransitionFn f, ObservationFn h,
                       const Matrix& q, const Matrix& r, UnscentedParams params) {
             return SquareRootUkf(python_model(n, m, std::move(f), std::move(h)), NoiseSpec{q, r},
                                  std::move(params));
           }),
           py::arg("state_dim"), py::arg("measurement_dim"), py::arg("transition"),
           py::arg("observation"), py::arg("q"), py::arg("r"), py::arg("params"),
           "Filter over x' = transition(x, u), y = observation(x, u).")
      .def("initialize", &SquareRootUkf::initialize, py::arg("mean"), py::arg("cov"))
      .def("step", &SquareRootUkf::step, py::arg("state"), py::arg("u"), py::arg("y"))
      .def_property_readonly("recoveries",
                             [](const SquareRootUkf& f) { return f.recoveries().total(); });

  // Function libraries.
  mod.def("library_terms", [](const std::string& key) { return library_by_key(key).names(); },
          py::arg("key"));
  mod.def(
      "eval_library",
      [](const std::string& key, const Vector& x, double u) {
        return eval_library(library_by_key(key), x, u);
      },
      py::arg("key"), py::arg("x"), py::arg("u"));
  mod.def(
      "active_terms",
      [](const std::string& key, const Vector& theta, double barrier) {
        return dominant_terms(library_by_key(key), theta, barrier).active_names();
      },
      py::arg("key"), py::arg("theta"), py::arg("barrier") = 0.1);
  mod.def(
      "active_count",
      [](const Vector& theta, double barrier) { return active_count(theta, barrier); },
      py::arg("theta"), py::arg("barrier") = 0.1);

  // Experiments.
  py::class_<SparsityConfig>(mod, "SparsityConfig")
      .def(py::init<>())
      .def_readwrite("barrier", &SparsityConfig::barrier)
      .def_readwrite("max_active", &SparsityConfig::max_active)
      .def_readwrite("max_iterations", &SparsityConfig::max_iterations)
      .def_readwrite("gamma", &SparsityConfig::gamma)
      .def_readwrite("r_pm", &SparsityConfig::r_pm)
      .def_readwrite("pseudo_predict", &SparsityConfig::pseudo_predict);

  py::class_<ExperimentConfig>(mod, "ExperimentConfig")
      .def_readwrite("benchmark", &ExperimentConfig::benchmark)
      .def_readwrite("library_key", &ExperimentConfig::library_key)
      .def_readwrite("custom_terms", &ExperimentConfig::custom_terms)
      .def_readwrite("dt", &ExperimentConfig::dt)
      .def_readwrite("horizon", &ExperimentConfig::horizon)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("output_dir", &ExperimentConfig::output_dir)
      .def_readwrite("sparsity", &ExperimentConfig::sparsity)
      .def_property_readonly("steps", &ExperimentConfig::steps)
      .def("validate", &ExperimentConfig::validate)
      .def("to_yaml", [](const ExperimentConfig& c) { return dump_config(c); });
  mod.def("demo_config", &demo_config, py::arg("benchmark"));
  mod.def("parse_config", &parse_config, py::arg("yaml_text"));
  mod.def("load_config", &load_config, py::arg("path"));

  py::class_<ExperimentResult>(mod, "ExperimentResult")
      .def_property_readonly("term_names",
                             [](const ExperimentResult& r) { return r.trace.term_names; })
      .def_property_readonly("completed",
                             [](const ExperimentResult& r) { return r.trace.completed; })
      .def_property_readonly("trace",
                             [](const ExperimentResult& r) { return trace_arrays(r.trace); })
      .def_property_readonly("dominant_term",
                             [](const ExperimentResult& r) { return r.metrics.dominant_term; })
      .def_property_readonly("final_active_terms",
                             [](const ExperimentResult& r) {
                               return r.metrics.final_report.active_names();
                             })
      .def_property_readonly("max_active_post_transient",
                             [](const ExperimentResult& r) {
                               return r.metrics.max_active_post_transient;
                             })
      .def_property_readonly("rmse_post_transient",
                             [](const ExperimentResult& r) {
                               py::dict d;
                               d["sq"] = r.metrics.post_transient.sq;
                               d["jsq"] = r.metrics.post_transient.jsq;
                               return d;
                             })
      .def("trace_csv", [](const ExperimentResult& r) { return trace_csv(r.trace); });
  mod.def("run_experiment", &run_experiment, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
  mod.def("export_trace", &export_trace, py::arg("result"), py::arg("config"),
          py::arg("directory"));
}
