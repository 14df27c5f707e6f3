#include "config.hpp"

#include "uowq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace uowq::app {
namespace {

using nlohmann::json;

// A JSON object being consumed. Every key read is recorded; finish() rejects the rest.
class Node {
 public:
  Node(const json& value, std::string path) : value_(&value), path_(std::move(path)) {
    if (!value.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return value_->contains(key); }

  const json& get(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) throw ConfigError(at(key), "required field is missing");
    return (*value_)[key];
  }

  Node object(const std::string& key) { return Node(get(key), at(key)); }

  double number(const std::string& key) { return as_number(get(key), at(key)); }
  double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::uint64_t unsigned_int(const std::string& key) { return as_unsigned(get(key), at(key)); }
  std::uint64_t unsigned_or(const std::string& key, std::uint64_t fallback) {
    return has(key) ? unsigned_int(key) : fallback;
  }

  std::string string(const std::string& key) {
    const json& v = get(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    return v.get<std::string>();
  }

  bool boolean_or(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
    return v.get<bool>();
  }

  void finish() const {
    for (auto it = value_->begin(); it != value_->end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
    }
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path, "expected a finite number");
    return x;
  }

  static std::uint64_t as_unsigned(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError(path, "expected a non-negative integer");
  }

 private:
  const json* value_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> number_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(Node::as_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::size_t> count_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of non-negative integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(static_cast<std::size_t>(Node::as_unsigned(v[i], path + "[" + std::to_string(i) + "]")));
  }
  return out;
}

Eigen::VectorXd vector_of(const json& v, const std::string& path) {
  const auto values = number_array(v, path);
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// Either an explicit array or {"start", "stop", "step"} (inclusive of stop up to rounding).
std::vector<double> grid_of(const json& v, const std::string& path) {
  if (v.is_array()) return number_array(v, path);
  Node node(v, path);
  const double start = node.number("start");
  const double stop = node.number("stop");
  const double step = node.number("step");
  node.finish();
  if (!(step > 0.0)) throw ConfigError(path + ".step", "must be > 0");
  if (stop < start) throw ConfigError(path + ".stop", "must be >= start");
  const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
  if (n > 1'000'000) throw ConfigError(path, "grid has too many points");
  std::vector<double> out;
  for (long long i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

std::vector<std::size_t> count_grid_of(const json& v, const std::string& path) {
  if (v.is_array()) return count_array(v, path);
  std::vector<std::size_t> out;
  for (double x : grid_of(v, path)) {
    if (x < 0.0 || std::abs(x - std::round(x)) > 1e-9) throw ConfigError(path, "quantity grid must hold integers");
    out.push_back(static_cast<std::size_t>(std::llround(x)));
  }
  return out;
}

template <class T>
void require_increasing(const std::vector<T>& grid, const std::string& path) {
  if (grid.empty()) throw ConfigError(path, "grid must not be empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ConfigError(path, "grid must be strictly increasing");
  }
}

std::size_t positive_count(Node& node, const std::string& key, std::size_t fallback, std::size_t minimum = 1) {
  const auto v = static_cast<std::size_t>(node.unsigned_or(key, fallback));
  if (v < minimum) throw ConfigError(node.at(key), "must be >= " + std::to_string(minimum));
  return v;
}

ModelFamily parse_family(Node node) {
  const std::string name = node.string("name");
  ModelFamily family = ModelFamily::gaussian_iso(1);
  try {
    if (name == "categorical") {
      family = ModelFamily::categorical(static_cast<int>(node.unsigned_int("outcomes")));
    } else if (name == "gaussian_iso") {
      family = ModelFamily::gaussian_iso(static_cast<int>(node.unsigned_int("dim")));
    } else if (name == "softmax_regression") {
      family = ModelFamily::softmax_regression(static_cast<int>(node.unsigned_int("features")),
                                               static_cast<int>(node.unsigned_int("classes")));
    } else {
      throw ConfigError(node.at("name"), "unknown family '" + name + "' (expected categorical, gaussian_iso or softmax_regression)");
    }
  } catch (const uowq::Error& e) {
    throw ConfigError(node.at("name"), e.what());
  }
  node.finish();
  return family;
}

EnsembleSpec parse_ensemble(Node node) {
  EnsembleSpec spec;
  spec.target_theta = vector_of(node.get("target_theta"), node.at("target_theta"));
  spec.target_size = positive_count(node, "target_size", 0);
  const json& sources = node.get("sources");
  if (!sources.is_array() || sources.empty()) throw ConfigError(node.at("sources"), "expected a non-empty array");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    Node s(sources[i], node.at("sources") + "[" + std::to_string(i) + "]");
    SourceEntry entry;
    entry.budget = positive_count(s, "budget", 0);
    if (s.has("theta")) {
      if (s.has("regime_constant")) throw ConfigError(s.at("theta"), "give either theta or regime_constant, not both");
      entry.theta = vector_of(s.get("theta"), s.at("theta"));
    } else {
      entry.regime_constant = s.number("regime_constant");
      if (entry.regime_constant < 0.0) throw ConfigError(s.at("regime_constant"), "must be >= 0");
      entry.direction_seed = s.unsigned_or("direction_seed", i);
    }
    s.finish();
    spec.sources.push_back(std::move(entry));
  }
  node.finish();
  return spec;
}

Eigen::MatrixXd parse_fisher(Node node) {
  const json& rows = node.get("dense");
  const std::string path = node.at("dense");
  if (!rows.is_array() || rows.empty()) throw ConfigError(path, "expected a square array of rows");
  const auto d = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    const auto row = number_array(rows[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]");
    if (static_cast<Eigen::Index>(row.size()) != d) throw ConfigError(path, "matrix must be square");
    for (Eigen::Index c = 0; c < d; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  node.finish();
  return m;
}

WeightsSpec parse_weights(Node node) {
  WeightsSpec spec;
  if (node.has("diagnostic_fractions")) {
    spec.diagnostic_fractions = number_array(node.get("diagnostic_fractions"), node.at("diagnostic_fractions"));
    for (double f : spec.diagnostic_fractions) {
      if (f < 0.0 || f > 1.0) throw ConfigError(node.at("diagnostic_fractions"), "fractions must lie in [0, 1]");
    }
  }
  node.finish();
  return spec;
}

SimulateSpec parse_simulate(Node node) {
  SimulateSpec spec;
  if (node.has("weights")) {
    const json& w = node.get("weights");
    if (!(w.is_string() && w.get<std::string>() == "optimal")) {
      spec.weights = number_array(w, node.at("weights"));
      for (double x : *spec.weights) {
        if (x < 0.0) throw ConfigError(node.at("weights"), "weights must be >= 0");
      }
    }
  }
  if (node.has("quantities")) spec.quantities = count_array(node.get("quantities"), node.at("quantities"));
  spec.trials = positive_count(node, "trials", spec.trials, 2);
  node.finish();
  return spec;
}

SweepSpec parse_sweep(Node node) {
  SweepSpec spec;
  spec.axis = node.string("axis");
  spec.source = static_cast<std::size_t>(node.unsigned_or("source", 0));
  spec.trials = positive_count(node, "trials", spec.trials, 2);
  if (spec.axis == "weight") {
    spec.weight_grid = grid_of(node.get("grid"), node.at("grid"));
    require_increasing(spec.weight_grid, node.at("grid"));
    if (spec.weight_grid.front() < 0.0) throw ConfigError(node.at("grid"), "weights must be >= 0");
  } else if (spec.axis == "quantity") {
    spec.quantity_grid = count_grid_of(node.get("grid"), node.at("grid"));
    require_increasing(spec.quantity_grid, node.at("grid"));
    const std::string rule = node.has("rule") ? node.string("rule") : "optimal";
    if (rule == "optimal") {
      spec.rule.kind = WeightRule::Kind::optimal;
    } else if (rule == "fixed") {
      spec.rule.kind = WeightRule::Kind::fixed;
      spec.rule.weight = node.number("weight");
      if (spec.rule.weight < 0.0) throw ConfigError(node.at("weight"), "must be >= 0");
    } else {
      throw ConfigError(node.at("rule"), "expected 'optimal' or 'fixed'");
    }
  } else {
    throw ConfigError(node.at("axis"), "expected 'weight' or 'quantity'");
  }
  node.finish();
  return spec;
}

VerifySpec parse_verify(Node node) {
  VerifySpec spec;
  const json& ids = node.get("theorems");
  if (!ids.is_array() || ids.empty()) throw ConfigError(node.at("theorems"), "expected a non-empty array of ids");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::string path = node.at("theorems") + "[" + std::to_string(i) + "]";
    if (!ids[i].is_string()) throw ConfigError(path, "expected a string");
    const auto id = ids[i].get<std::string>();
    const auto& known = theorem_ids();
    if (std::find(known.begin(), known.end(), id) == known.end()) throw ConfigError(path, "unknown theorem id '" + id + "'");
    spec.theorems.push_back(id);
  }
  VerifyOptions& o = spec.options;
  o.trials = positive_count(node, "trials", o.trials, 2);
  if (node.has("weight_grid")) {
    o.weight_grid = grid_of(node.get("weight_grid"), node.at("weight_grid"));
    require_increasing(o.weight_grid, node.at("weight_grid"));
  }
  if (node.has("quantity_grid")) {
    o.quantity_grid = count_grid_of(node.get("quantity_grid"), node.at("quantity_grid"));
    require_increasing(o.quantity_grid, node.at("quantity_grid"));
  }
  if (node.has("dims")) {
    o.dims.clear();
    for (std::size_t d : count_array(node.get("dims"), node.at("dims"))) {
      if (d < 1) throw ConfigError(node.at("dims"), "dimensions must be >= 1");
      o.dims.push_back(static_cast<int>(d));
    }
  }
  if (node.has("weight")) {
    o.weight = node.number("weight");
    if (*o.weight < 0.0) throw ConfigError(node.at("weight"), "must be >= 0");
  }
  o.random_plans = positive_count(node, "random_plans", o.random_plans, 0);
  o.top_plans = positive_count(node, "top_plans", o.top_plans, 0);
  o.plan_trials = positive_count(node, "plan_trials", o.plan_trials, 2);
  o.max_random_weight = node.number_or("max_random_weight", o.max_random_weight);
  if (!(o.max_random_weight > 0.0)) throw ConfigError(node.at("max_random_weight"), "must be > 0");
  node.finish();
  return spec;
}

ShiftedTask parse_task(Node node, bool with_shift) {
  ShiftedTask task;
  if (with_shift) {
    task.shift = node.number_or("shift", 0.0);
    if (task.shift < 0.0) throw ConfigError(node.at("shift"), "must be >= 0");
  }
  task.size = positive_count(node, "size", 0);
  task.holdout = static_cast<std::size_t>(node.unsigned_or("holdout", 0));
  node.finish();
  return task;
}

std::vector<ShiftedTask> parse_tasks(Node& parent, const std::string& key) {
  const json& list = parent.get(key);
  if (!list.is_array() || list.empty()) throw ConfigError(parent.at(key), "expected a non-empty array");
  std::vector<ShiftedTask> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    out.push_back(parse_task(Node(list[i], parent.at(key) + "[" + std::to_string(i) + "]"), true));
  }
  return out;
}

TrainSpec parse_train(Node node) {
  TrainSpec spec;
  spec.mode = node.string("mode");
  spec.theta_scale = node.number_or("theta_scale", spec.theta_scale);
  if (!(spec.theta_scale >= 0.0)) throw ConfigError(node.at("theta_scale"), "must be >= 0");
  if (spec.mode == "multi_source") {
    spec.target = parse_task(node.object("target"), false);
    spec.sources = parse_tasks(node, "sources");
  } else if (spec.mode == "multi_task") {
    spec.tasks = parse_tasks(node, "tasks");
    if (spec.tasks.size() < 2) throw ConfigError(node.at("tasks"), "multi-task training needs at least 2 tasks");
  } else {
    throw ConfigError(node.at("mode"), "expected 'multi_source' or 'multi_task'");
  }
  TrainConfig& t = spec.train;
  t.learning_rate = node.number_or("learning_rate", t.learning_rate);
  t.epochs = static_cast<int>(positive_count(node, "epochs", static_cast<std::size_t>(t.epochs)));
  t.weight_update_period =
      static_cast<int>(positive_count(node, "weight_update_period", static_cast<std::size_t>(t.weight_update_period)));
  t.steps_per_epoch = static_cast<int>(positive_count(node, "steps_per_epoch", static_cast<std::size_t>(t.steps_per_epoch)));
  t.ridge = node.number_or("ridge", t.ridge);
  t.init_scale = node.number_or("init_scale", t.init_scale);
  t.stop_tolerance = node.number_or("stop_tolerance", t.stop_tolerance);
  spec.baseline = node.boolean_or("baseline", spec.baseline);
  try {
    t.validate();
  } catch (const uowq::Error& e) {
    throw ConfigError("train", e.what());
  }
  node.finish();
  return spec;
}

}  // namespace

RunConfig parse_config(const json& root, std::optional<std::uint64_t> seed_override) {
  RunConfig cfg;
  Node node(root, "");
  cfg.seed = node.unsigned_or("seed", 0);
  if (seed_override) cfg.seed = *seed_override;
  if (node.has("output_dir")) cfg.output_dir = node.string("output_dir");
  if (node.has("family")) cfg.family = parse_family(node.object("family"));
  if (node.has("ensemble")) {
    if (!cfg.family) throw ConfigError("ensemble", "an ensemble needs a family block");
    cfg.ensemble = parse_ensemble(node.object("ensemble"));
  }
  if (node.has("fisher")) cfg.fisher = parse_fisher(node.object("fisher"));
  if (node.has("weights")) cfg.weights = parse_weights(node.object("weights"));
  if (node.has("simulate")) cfg.simulate = parse_simulate(node.object("simulate"));
  if (node.has("sweeps")) {
    const json& list = node.get("sweeps");
    if (!list.is_array() || list.empty()) throw ConfigError("sweeps", "expected a non-empty array");
    std::set<std::string> axes;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "sweeps[" + std::to_string(i) + "]";
      cfg.sweeps.push_back(parse_sweep(Node(list[i], path)));
      if (!axes.insert(cfg.sweeps.back().axis).second) throw ConfigError(path + ".axis", "each axis may be swept once");
    }
  }
  if (node.has("verify")) cfg.verify = parse_verify(node.object("verify"));
  if (node.has("train")) {
    cfg.train = parse_train(node.object("train"));
    if (!cfg.family || cfg.family->kind() != FamilyKind::softmax_regression) {
      throw ConfigError("family.name", "training requires the softmax_regression family");
    }
  }
  node.finish();

  cfg.echo = root;
  cfg.echo["seed"] = cfg.seed;
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path.string() + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(root, seed_override);
}

TaskEnsemble build_ensemble(const RunConfig& cfg) {
  if (!cfg.ensemble) throw ConfigError("ensemble", "this command needs an ensemble block");
  const EnsembleSpec& spec = *cfg.ensemble;
  const ModelFamily& family = *cfg.family;
  try {
    family.validate(spec.target_theta);
  } catch (const uowq::Error& e) {
    throw ConfigError("ensemble.target_theta", e.what());
  }
  if (!family.is_interior(spec.target_theta)) {
    throw ConfigError("ensemble.target_theta", "target parameter must lie in the interior of the parameter region");
  }

  std::vector<SourceSpec> generated;
  std::vector<std::size_t> generated_index;
  for (std::size_t i = 0; i < spec.sources.size(); ++i) {
    const auto& s = spec.sources[i];
    if (s.theta) continue;
    generated.push_back({s.regime_constant, s.budget, s.direction_seed});
    generated_index.push_back(i);
  }
  TaskEnsemble ensemble{family, spec.target_theta, spec.target_size, {}};
  ensemble.sources.resize(spec.sources.size());
  if (!generated.empty()) {
    const TaskEnsemble g = generate_ensemble(family, spec.target_theta, spec.target_size, generated, cfg.seed);
    for (std::size_t j = 0; j < generated.size(); ++j) ensemble.sources[generated_index[j]] = g.sources[j];
  }
  const double root_n0 = std::sqrt(static_cast<double>(spec.target_size));
  for (std::size_t i = 0; i < spec.sources.size(); ++i) {
    const auto& s = spec.sources[i];
    if (!s.theta) continue;
    const std::string path = "ensemble.sources[" + std::to_string(i) + "].theta";
    try {
      family.validate(*s.theta);
    } catch (const uowq::Error& e) {
      throw ConfigError(path, e.what());
    }
    ensemble.sources[i] = {*s.theta, s.budget, root_n0 * (*s.theta - spec.target_theta).norm()};
  }
  return ensemble;
}

}  // namespace uowq::app
