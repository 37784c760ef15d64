#include "sparse_ukf/config_io.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "sparse_ukf/errors.hpp"

namespace sparse_ukf {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw ConfigError("config field '" + field + "': " + why);
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const YAML::Node& node, const std::string& prefix,
                    const std::set<std::string>& allowed) {
  if (!node.IsMap()) fail(prefix.empty() ? "<root>" : prefix, "must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(join(prefix, key), "unknown key");
  }
}

template <typename T>
void read(const YAML::Node& node, const std::string& key, const std::string& prefix, T& out) {
  const YAML::Node v = node[key];
  if (!v) return;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    fail(join(prefix, key), "has the wrong type");
  }
}

void read_vector(const YAML::Node& node, const std::string& key, const std::string& prefix,
                 Vector& out) {
  const YAML::Node v = node[key];
  if (!v) return;
  if (!v.IsSequence()) fail(join(prefix, key), "must be a list of numbers");
  Vector tmp(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    try {
      tmp(static_cast<Eigen::Index>(i)) = v[i].as<double>();
    } catch (const YAML::Exception&) {
      fail(join(prefix, key), "must be a list of numbers");
    }
  }
  out = tmp;
}

const YAML::Node section(const YAML::Node& root, const std::string& name,
                         const std::set<std::string>& allowed) {
  const YAML::Node s = root[name];
  if (s) reject_unknown(s, name, allowed);
  return s;
}

}  // namespace

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root || root.IsNull()) throw ConfigError("config is empty");
  reject_unknown(root, "",
                 {"benchmark", "library", "seed", "dt", "horizon", "output_dir", "excitation",
                  "initial", "params", "noise", "unscented", "sparsity", "metrics"});

  if (!root["benchmark"]) fail("benchmark", "is required");
  std::string benchmark;
  read(root, "benchmark", "", benchmark);
  if (benchmark != "duffing" && benchmark != "golf") fail("benchmark", "must be duffing or golf");
  ExperimentConfig c = demo_config(benchmark);

  if (!root["seed"]) fail("seed", "is required");
  read(root, "seed", "", c.seed);

  if (const YAML::Node lib = root["library"]) {
    if (lib.IsSequence()) {
      c.custom_terms.clear();
      for (const auto& t : lib) {
        try {
          c.custom_terms.push_back(t.as<std::string>());
        } catch (const YAML::Exception&) {
          fail("library", "custom terms must be strings");
        }
      }
    } else {
      read(root, "library", "", c.library_key);
    }
  }
  read(root, "dt", "", c.dt);
  read(root, "horizon", "", c.horizon);
  read(root, "output_dir", "", c.output_dir);

  if (const auto s = section(root, "excitation", {"amplitude", "frequency"})) {
    read(s, "amplitude", "excitation", c.excitation.amplitude);
    read(s, "frequency", "excitation", c.excitation.frequency);
  }
  if (const auto s = section(root, "initial", {"truth", "estimate", "theta"})) {
    read_vector(s, "truth", "initial", c.truth_x0);
    read_vector(s, "estimate", "initial", c.estimate_x0);
    read(s, "theta", "initial", c.theta0);
  }
  if (benchmark == "duffing") {
    if (const auto s = section(root, "params", {"p1", "p2", "p3"})) {
      read(s, "p1", "params", c.duffing.p1);
      read(s, "p2", "params", c.duffing.p2);
      read(s, "p3", "params", c.duffing.p3);
    }
  } else {
    if (const auto s = section(root, "params", {"m", "a", "d", "J", "r", "mu"})) {
      read(s, "m", "params", c.golf.m);
      read(s, "a", "params", c.golf.a);
      read(s, "d", "params", c.golf.d);
      read(s, "J", "params", c.golf.J);
      read(s, "r", "params", c.golf.r);
      read(s, "mu", "params", c.golf.mu);
    }
  }
  if (const auto s = section(root, "noise", {"p0_x", "p0_theta", "q_x", "q_theta", "r",
                                             "truth_process_noise", "truth_q"})) {
    read(s, "p0_x", "noise", c.noise.p0_x);
    read(s, "p0_theta", "noise", c.noise.p0_theta);
    read(s, "q_x", "noise", c.noise.q_x);
    read(s, "q_theta", "noise", c.noise.q_theta);
    read(s, "r", "noise", c.noise.r);
    read(s, "truth_process_noise", "noise", c.noise.truth_process_noise);
    read(s, "truth_q", "noise", c.noise.truth_q);
  }
  if (const auto s = section(root, "unscented",
                             {"alpha", "beta", "kappa", "weights", "redraw_sigma_points"})) {
    read(s, "alpha", "unscented", c.unscented.alpha);
    read(s, "beta", "unscented", c.unscented.beta);
    read(s, "kappa", "unscented", c.unscented.kappa);
    read(s, "redraw_sigma_points", "unscented", c.unscented.redraw);
    std::string mode = "standard";
    read(s, "weights", "unscented", mode);
    if (mode == "standard") {
      c.unscented.weights = WeightMode::kStandard;
    } else if (mode == "printed" || mode == "paper") {
      c.unscented.weights = WeightMode::kPrinted;
    } else {
      fail("unscented.weights", "must be standard or printed");
    }
  }
  if (const auto s = section(root, "sparsity", {"lambda_tilde", "n_theta_act", "max_pseudo_iters",
                                                "gamma", "r_pm", "pseudo_predict"})) {
    read(s, "lambda_tilde", "sparsity", c.sparsity.barrier);
    read(s, "n_theta_act", "sparsity", c.sparsity.max_active);
    read(s, "max_pseudo_iters", "sparsity", c.sparsity.max_iterations);
    read(s, "gamma", "sparsity", c.sparsity.gamma);
    read(s, "r_pm", "sparsity", c.sparsity.r_pm);
    read(s, "pseudo_predict", "sparsity", c.sparsity.pseudo_predict);
  }
  if (const auto s = section(root, "metrics", {"transient_fraction"})) {
    read(s, "transient_fraction", "metrics", c.transient_fraction);
  }

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const ExperimentConfig& c) {
  auto vec = [](const Vector& v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    return out;
  };
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "benchmark" << YAML::Value << c.benchmark;
  if (c.custom_terms.empty()) {
    e << YAML::Key << "library" << YAML::Value << c.library_key;
  } else {
    e << YAML::Key << "library" << YAML::Value << YAML::Flow << c.custom_terms;
  }
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::Key << "dt" << YAML::Value << c.dt;
  e << YAML::Key << "horizon" << YAML::Value << c.horizon;
  e << YAML::Key << "output_dir" << YAML::Value << c.output_dir;
  e << YAML::Key << "excitation" << YAML::Value << YAML::BeginMap
    << YAML::Key << "amplitude" << YAML::Value << c.excitation.amplitude
    << YAML::Key << "frequency" << YAML::Value << c.excitation.frequency << YAML::EndMap;
  e << YAML::Key << "initial" << YAML::Value << YAML::BeginMap
    << YAML::Key << "truth" << YAML::Value << YAML::Flow << vec(c.truth_x0)
    << YAML::Key << "estimate" << YAML::Value << YAML::Flow << vec(c.estimate_x0)
    << YAML::Key << "theta" << YAML::Value << c.theta0 << YAML::EndMap;
  e << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  if (c.benchmark == "duffing") {
    e << YAML::Key << "p1" << YAML::Value << c.duffing.p1
      << YAML::Key << "p2" << YAML::Value << c.duffing.p2
      << YAML::Key << "p3" << YAML::Value << c.duffing.p3;
  } else {
    e << YAML::Key << "m" << YAML::Value << c.golf.m << YAML::Key << "a" << YAML::Value << c.golf.a
      << YAML::Key << "d" << YAML::Value << c.golf.d << YAML::Key << "J" << YAML::Value << c.golf.J
      << YAML::Key << "r" << YAML::Value << c.golf.r << YAML::Key << "mu" << YAML::Value
      << c.golf.mu;
  }
  e << YAML::EndMap;
  e << YAML::Key << "noise" << YAML::Value << YAML::BeginMap
    << YAML::Key << "p0_x" << YAML::Value << c.noise.p0_x
    << YAML::Key << "p0_theta" << YAML::Value << c.noise.p0_theta
    << YAML::Key << "q_x" << YAML::Value << c.noise.q_x
    << YAML::Key << "q_theta" << YAML::Value << c.noise.q_theta
    << YAML::Key << "r" << YAML::Value << c.noise.r
    << YAML::Key << "truth_process_noise" << YAML::Value << c.noise.truth_process_noise
    << YAML::Key << "truth_q" << YAML::Value << c.noise.truth_q << YAML::EndMap;
  e << YAML::Key << "unscented" << YAML::Value << YAML::BeginMap
    << YAML::Key << "alpha" << YAML::Value << c.unscented.alpha
    << YAML::Key << "beta" << YAML::Value << c.unscented.beta
    << YAML::Key << "kappa" << YAML::Value << c.unscented.kappa
    << YAML::Key << "weights" << YAML::Value
    << (c.unscented.weights == WeightMode::kStandard ? "standard" : "printed")
    << YAML::Key << "redraw_sigma_points" << YAML::Value << c.unscented.redraw << YAML::EndMap;
  e << YAML::Key << "sparsity" << YAML::Value << YAML::BeginMap
    << YAML::Key << "lambda_tilde" << YAML::Value << c.sparsity.barrier
    << YAML::Key << "n_theta_act" << YAML::Value << c.sparsity.max_active
    << YAML::Key << "max_pseudo_iters" << YAML::Value << c.sparsity.max_iterations
    << YAML::Key << "gamma" << YAML::Value << c.sparsity.gamma
    << YAML::Key << "r_pm" << YAML::Value << c.sparsity.r_pm
    << YAML::Key << "pseudo_predict" << YAML::Value << c.sparsity.pseudo_predict << YAML::EndMap;
  e << YAML::Key << "metrics" << YAML::Value << YAML::BeginMap
    << YAML::Key << "transient_fraction" << YAML::Value << c.transient_fraction << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace sparse_ukf
