#include "lqrcbf/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string_view>

#include <yaml-cpp/yaml.h>

namespace lqrcbf {
namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const YAML::Node& node, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  if (!node.IsMap()) throw ValidationError(path, "expected a mapping");
  const std::set<std::string_view> keys(allowed);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!keys.contains(key)) throw ValidationError(join(path, key), "unknown key");
  }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) throw ValidationError(field, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::BadConversion&) {
    throw ValidationError(field, "cannot convert '" + node.Scalar() + "'");
  }
}

template <class T>
void read(const YAML::Node& map, const std::string& path, const char* key,
          T& out) {
  const YAML::Node node = map[key];
  if (node) out = scalar<T>(node, join(path, key));
}

std::vector<double> numbers(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) throw ValidationError(field, "expected a list");
  std::vector<double> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(scalar<double>(node[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Point2 point(const YAML::Node& node, const std::string& field) {
  const auto v = numbers(node, field);
  if (v.size() != 2) throw ValidationError(field, "expected two numbers");
  return {v[0], v[1]};
}

void read_point(const YAML::Node& map, const std::string& path, const char* key,
                Point2& out) {
  const YAML::Node node = map[key];
  if (node) out = point(node, join(path, key));
}

// Section validators report "<section>.<key> must ..."; lift the key out.
[[noreturn]] void rethrow(const std::invalid_argument& e,
                          const std::string& section) {
  std::string what = e.what();
  const auto space = what.find(' ');
  std::string field = what.substr(0, space);
  if (field.find('.') == std::string::npos) field = section;
  if (!field.empty() && field.back() == ':') field.pop_back();
  throw ValidationError(field, what);
}

void parse_model(const YAML::Node& node, ScenarioConfig& cfg) {
  if (node.IsScalar()) {
    cfg.model = scalar<std::string>(node, "model");
    return;
  }
  check_keys(node, "model", {"name", "speed", "control_bounds"});
  read(node, "model", "name", cfg.model);
  read(node, "model", "speed", cfg.model_options.unicycle_speed);
  if (const auto b = node["control_bounds"]) {
    check_keys(b, "model.control_bounds", {"lower", "upper"});
    if (!b["lower"] || !b["upper"]) {
      throw ValidationError("model.control_bounds", "needs lower and upper");
    }
    const auto lo = numbers(b["lower"], "model.control_bounds.lower");
    const auto hi = numbers(b["upper"], "model.control_bounds.upper");
    ControlBounds bounds;
    bounds.lower = Eigen::Map<const Eigen::VectorXd>(lo.data(),
                                                     static_cast<Eigen::Index>(lo.size()));
    bounds.upper = Eigen::Map<const Eigen::VectorXd>(hi.data(),
                                                     static_cast<Eigen::Index>(hi.size()));
    cfg.model_options.control_bounds = bounds;
  }
}

void parse_obstacles(const YAML::Node& node, ScenarioConfig& cfg) {
  if (!node.IsSequence()) throw ValidationError("obstacles", "expected a list");
  cfg.obstacles.clear();
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string path = "obstacles[" + std::to_string(i) + "]";
    check_keys(node[i], path, {"center", "radius"});
    if (!node[i]["center"] || !node[i]["radius"]) {
      throw ValidationError(path, "needs center and radius");
    }
    const Point2 c = point(node[i]["center"], path + ".center");
    const double r = scalar<double>(node[i]["radius"], path + ".radius");
    if (!c.allFinite()) throw ValidationError(path + ".center", "must be finite");
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw ValidationError(path + ".radius", "must be positive");
    }
    cfg.obstacles.emplace_back(c, r);
  }
}

void parse_cbf(const YAML::Node& node, ScenarioConfig& cfg) {
  check_keys(node, "cbf", {"k1", "k2", "form"});
  read(node, "cbf", "k1", cfg.cbf_k1);
  read(node, "cbf", "k2", cfg.cbf_k2);
  if (const auto f = node["form"]) {
    const auto form = scalar<std::string>(f, "cbf.form");
    if (form == "derived") {
      cfg.unicycle_form = ZetaForm::kUnicycleDerived;
    } else if (form == "printed") {
      cfg.unicycle_form = ZetaForm::kUnicyclePrinted;
    } else {
      throw ValidationError("cbf.form", "expected 'derived' or 'printed'");
    }
  }
}

void parse_planner(const YAML::Node& node, ScenarioConfig& cfg) {
  check_keys(node, "planner",
             {"iterations", "lambda", "eta", "dimension", "goal_attempt_radius",
              "rewire", "duplicate_tolerance", "parallel_threshold"});
  PlannerConfig& p = cfg.planner;
  read(node, "planner", "iterations", p.iterations);
  read(node, "planner", "lambda", p.lambda);
  read(node, "planner", "eta", p.eta);
  read(node, "planner", "dimension", p.dimension);
  read(node, "planner", "goal_attempt_radius", p.goal_attempt_radius);
  read(node, "planner", "rewire", p.rewire);
  read(node, "planner", "duplicate_tolerance", p.duplicate_tolerance);
  read(node, "planner", "parallel_threshold", p.parallel_threshold);
}

void parse_sampler(const YAML::Node& node, ScenarioConfig& cfg) {
  check_keys(node, "sampler",
             {"quantile", "update_period", "max_elites", "mix_probability",
              "convergence_threshold", "convergence_samples",
              "sticky_convergence", "max_rejections"});
  SamplerConfig& s = cfg.sampler;
  read(node, "sampler", "quantile", s.quantile);
  read(node, "sampler", "update_period", s.update_period);
  read(node, "sampler", "max_elites", s.max_elites);
  read(node, "sampler", "mix_probability", s.mix_probability);
  read(node, "sampler", "convergence_threshold", s.convergence_threshold);
  read(node, "sampler", "convergence_samples", s.convergence_samples);
  read(node, "sampler", "sticky_convergence", s.sticky_convergence);
  read(node, "sampler", "max_rejections", s.max_rejections);
}

ScenarioConfig from_yaml(const YAML::Node& root) {
  if (!root.IsMap()) throw ParseError("config: top level must be a mapping");
  check_keys(root, "",
             {"name", "model", "workspace", "obstacles", "start", "goal", "cbf",
              "cost", "steer", "planner", "sampler", "baseline", "seeds",
              "timing"});
  ScenarioConfig cfg;
  read(root, "", "name", cfg.name);
  if (const auto m = root["model"]) parse_model(m, cfg);
  // Per-model CBF defaults; an explicit cbf section overrides them.
  if (cfg.model == "unicycle") {
    cfg.cbf_k1 = 2.0;
    cfg.cbf_k2 = 2.0;
  }
  if (const auto w = root["workspace"]) {
    check_keys(w, "workspace", {"lower", "upper"});
    read_point(w, "workspace", "lower", cfg.workspace.lower);
    read_point(w, "workspace", "upper", cfg.workspace.upper);
  }
  if (const auto o = root["obstacles"]) parse_obstacles(o, cfg);
  if (const auto s = root["start"]) cfg.start = numbers(s, "start");
  if (const auto g = root["goal"]) {
    check_keys(g, "goal", {"center", "radius"});
    read_point(g, "goal", "center", cfg.goal);
    read(g, "goal", "radius", cfg.goal_radius);
  }
  if (const auto c = root["cbf"]) parse_cbf(c, cfg);
  if (const auto c = root["cost"]) {
    check_keys(c, "cost", {"Q", "R"});
    if (c["Q"]) cfg.q_diag = numbers(c["Q"], "cost.Q");
    if (c["R"]) cfg.r_diag = numbers(c["R"], "cost.R");
  }
  if (const auto s = root["steer"]) {
    check_keys(s, "steer", {"dt", "max_steps", "goal_tolerance"});
    read(s, "steer", "dt", cfg.steer.dt);
    read(s, "steer", "max_steps", cfg.steer.max_steps);
    read(s, "steer", "goal_tolerance", cfg.steer.goal_tolerance);
  }
  if (const auto p = root["planner"]) parse_planner(p, cfg);
  if (const auto s = root["sampler"]) parse_sampler(s, cfg);
  if (const auto b = root["baseline"]) {
    check_keys(b, "baseline", {"gain_cache", "adaptive_sampling"});
    read(b, "baseline", "gain_cache", cfg.gain_cache);
    read(b, "baseline", "adaptive_sampling", cfg.adaptive_sampling);
  }
  if (const auto s = root["seeds"]) {
    if (!s.IsSequence()) throw ValidationError("seeds", "expected a list");
    cfg.seeds.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      cfg.seeds.push_back(
          scalar<std::uint64_t>(s[i], "seeds[" + std::to_string(i) + "]"));
    }
  }
  if (const auto t = root["timing"]) {
    check_keys(t, "timing", {"repeats"});
    read(t, "timing", "repeats", cfg.timing_repeats);
  }
  cfg.validate();
  return cfg;
}

}  // namespace

void ScenarioConfig::validate() const {
  std::shared_ptr<DynamicsModel> m;
  try {
    m = make_model(model, model_options);
  } catch (const std::invalid_argument& e) {
    throw ValidationError("model", e.what());
  }
  if (!workspace.lower.allFinite() || !workspace.upper.allFinite() ||
      !(workspace.lower.array() < workspace.upper.array()).all()) {
    throw ValidationError("workspace", "bounds must be finite with lower < upper");
  }
  const auto n = static_cast<std::size_t>(m->state_dim());
  if (start.size() != 2 && start.size() != n) {
    throw ValidationError("start", "expected 2 or " + std::to_string(n) +
                                       " numbers");
  }
  for (double v : start) {
    if (!std::isfinite(v)) throw ValidationError("start", "must be finite");
  }
  if (!goal.allFinite()) throw ValidationError("goal.center", "must be finite");
  if (!(goal_radius > 0.0)) throw ValidationError("goal.radius", "must be positive");
  if (!(cbf_k1 > 0.0)) throw ValidationError("cbf.k1", "must be positive");
  if (!(cbf_k2 > 0.0)) throw ValidationError("cbf.k2", "must be positive");
  const Problem problem = make_problem(*this);
  const Point2 s = m->workspace(problem.x_init);
  if (!workspace.contains(s)) {
    throw ValidationError("start", "lies outside the workspace");
  }
  if (!workspace.contains(goal)) {
    throw ValidationError("goal.center", "lies outside the workspace");
  }
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    if (h_value(obstacles[i], s) < 0.0) {
      throw ValidationError("start", "lies inside obstacle " + std::to_string(i));
    }
    if (h_value(obstacles[i], goal) < 0.0) {
      throw ValidationError("goal.center",
                            "lies inside obstacle " + std::to_string(i));
    }
  }
  try {
    steer.validate();
  } catch (const std::invalid_argument& e) {
    rethrow(e, "steer");
  }
  try {
    PlannerConfig p = planner;
    p.goal = goal;
    p.goal_radius = goal_radius;
    p.validate();
  } catch (const std::invalid_argument& e) {
    rethrow(e, "planner");
  }
  try {
    SamplerConfig sc = sampler;
    sc.box = workspace;
    sc.validate();
  } catch (const std::invalid_argument& e) {
    rethrow(e, "sampler");
  }
  if (seeds.empty()) throw ValidationError("seeds", "must not be empty");
  if (timing_repeats < 1) throw ValidationError("timing.repeats", "must be >= 1");
}

ScenarioConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return from_yaml(root);
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

Problem make_problem(const ScenarioConfig& config) {
  std::shared_ptr<DynamicsModel> model;
  try {
    model = make_model(config.model, config.model_options);
  } catch (const std::invalid_argument& e) {
    throw ValidationError("model", e.what());
  }
  const int n = model->state_dim();
  const int m = model->control_dim();

  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(m, m);
  if (!config.q_diag.empty()) {
    if (config.q_diag.size() != static_cast<std::size_t>(n)) {
      throw ValidationError("cost.Q", "expected " + std::to_string(n) + " entries");
    }
    for (int i = 0; i < n; ++i) Q(i, i) = config.q_diag[i];
  }
  if (!config.r_diag.empty()) {
    if (config.r_diag.size() != static_cast<std::size_t>(m)) {
      throw ValidationError("cost.R", "expected " + std::to_string(m) + " entries");
    }
    for (int i = 0; i < m; ++i) R(i, i) = config.r_diag[i];
  }
  std::optional<CostWeights> weights;
  try {
    weights.emplace(Q, R);
  } catch (const std::invalid_argument& e) {
    throw ValidationError("cost", e.what());
  }

  const ZetaForm form = model->name() == "unicycle" ? config.unicycle_form
                                                    : ZetaForm::kDoubleIntegrator;
  std::optional<CbfParams> cbf;
  try {
    cbf.emplace(config.cbf_k1, config.cbf_k2, form);
  } catch (const std::invalid_argument& e) {
    throw ValidationError("cbf", e.what());
  }

  State x0 = State::Zero(n);
  if (config.start.size() == static_cast<std::size_t>(n)) {
    for (int i = 0; i < n; ++i) x0[i] = config.start[i];
    x0 = model->normalize(x0);
  } else if (config.start.size() == 2) {
    // At rest for the double integrator; facing the goal for the unicycle.
    const Point2 p{config.start[0], config.start[1]};
    State from = State::Zero(n);
    const auto idx = model->workspace_indices();
    from[idx[0]] = p.x();
    from[idx[1]] = p.y();
    x0 = model->lift(config.goal, from);
    x0[idx[0]] = p.x();
    x0[idx[1]] = p.y();
  } else {
    throw ValidationError("start", "expected 2 or " + std::to_string(n) + " numbers");
  }

  return Problem{std::move(model), config.obstacles, *cbf, *weights, config.steer,
                 x0};
}

PlannerConfig planner_config(const ScenarioConfig& config, std::uint64_t seed) {
  PlannerConfig p = config.planner;
  p.goal = config.goal;
  p.goal_radius = config.goal_radius;
  p.seed = seed;
  p.use_cache = config.gain_cache;
  return p;
}

SamplerConfig sampler_config(const ScenarioConfig& config) {
  SamplerConfig s = config.sampler;
  s.box = config.workspace;
  s.adaptive = config.adaptive_sampling;
  return s;
}

}  // namespace lqrcbf
