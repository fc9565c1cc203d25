#include "core/config_io.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "core/errors.hpp"

namespace gmp3 {

using nlohmann::json;

namespace {

Vec3 vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw InvalidArgument(std::string(what) + " must be a 3-element array");
  Vec3 v;
  for (int k = 0; k < 3; ++k) {
    if (!j[static_cast<std::size_t>(k)].is_number()) throw InvalidArgument(std::string(what) + " must be numeric");
    v[k] = j[static_cast<std::size_t>(k)].get<double>();
  }
  return v;
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Pose pose_from(const json& j, const char* what) {
  if (!j.is_object() || !j.contains("xyz")) throw InvalidArgument(std::string(what) + " needs xyz");
  Pose p;
  p.position = vec3(j.at("xyz"), what);
  if (j.contains("ypr")) {
    const Vec3 e = vec3(j.at("ypr"), what);
    p.rotation = se3::euler_to_rot({e[0], e[1], e[2]});
  }
  return p;
}

json pose_json(const Pose& p) {
  const EulerAngles e = se3::rot_to_euler(p.rotation);
  return {{"xyz", vec3_json(p.position)}, {"ypr", json::array({e.yaw, e.pitch, e.roll})}};
}

Mat3 q_from(const json& j) {
  if (j.is_number()) return j.get<double>() * Mat3::Identity();
  if (j.is_string()) {
    std::vector<double> vals;
    std::stringstream ss(j.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(item, &used));
        if (item.find_first_not_of(" \t", used) != std::string::npos) throw InvalidArgument("Q_diag");
      } catch (const std::exception&) {
        throw InvalidArgument("weights.Q_diag must be numbers separated by commas");
      }
    }
    if (vals.size() == 1) return vals[0] * Mat3::Identity();
    if (vals.size() != 3) throw InvalidArgument("weights.Q_diag needs 1 or 3 values");
    return Vec3(vals[0], vals[1], vals[2]).asDiagonal();
  }
  return vec3(j, "weights.Q_diag").asDiagonal();
}

double number(const json& v, std::string_view key) {
  if (!v.is_number()) throw InvalidArgument(std::string(key) + " must be a number");
  return v.get<double>();
}

std::size_t count(const json& v, std::string_view key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw InvalidArgument(std::string(key) + " must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

bool flag(const json& v, std::string_view key) {
  if (!v.is_boolean()) throw InvalidArgument(std::string(key) + " must be true or false");
  return v.get<bool>();
}

std::string text(const json& v, std::string_view key) {
  if (!v.is_string()) throw InvalidArgument(std::string(key) + " must be a string");
  return v.get<std::string>();
}

std::string kind_list() {
  std::string out;
  for (auto k : kAllOptimizers) {
    if (!out.empty()) out += ", ";
    out += to_string(k);
  }
  return out;
}

using Setter = std::function<void(PlannerConfig&, const json&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"optimizer.profile",
       [](PlannerConfig& c, const json& v) {
         const auto name = text(v, "optimizer.profile");
         if (name == "paper") c.constants_profile = ConstantsProfile::kPaper;
         else if (name == "default") c.constants_profile = ConstantsProfile::kDefault;
         else throw InvalidArgument("optimizer.profile must be default or paper");
         const double eta = c.constants.eta;
         c.constants = default_constants(c.optimizer, c.constants_profile);
         c.constants.eta = eta;
       }},
      {"optimizer.kind",
       [](PlannerConfig& c, const json& v) {
         const auto name = text(v, "optimizer.kind");
         const auto kind = parse_optimizer_kind(name);
         if (!kind) throw InvalidArgument("unknown optimizer '" + name + "' (valid: " + kind_list() + ")");
         const double eta = c.constants.eta;
         c.optimizer = *kind;
         c.constants = default_constants(*kind, c.constants_profile);
         c.constants.eta = eta;
       }},
      {"optimizer.eta", [](PlannerConfig& c, const json& v) { c.constants.eta = number(v, "optimizer.eta"); }},
      {"optimizer.constants.momentum",
       [](PlannerConfig& c, const json& v) { c.constants.momentum = number(v, "momentum"); }},
      {"optimizer.constants.decay", [](PlannerConfig& c, const json& v) { c.constants.decay = number(v, "decay"); }},
      {"optimizer.constants.rho", [](PlannerConfig& c, const json& v) { c.constants.rho = number(v, "rho"); }},
      {"optimizer.constants.adam_beta1",
       [](PlannerConfig& c, const json& v) { c.constants.adam_beta1 = number(v, "adam_beta1"); }},
      {"optimizer.constants.adam_beta2",
       [](PlannerConfig& c, const json& v) { c.constants.adam_beta2 = number(v, "adam_beta2"); }},
      {"optimizer.constants.epsilon",
       [](PlannerConfig& c, const json& v) { c.constants.epsilon = number(v, "epsilon"); }},
      {"alpha", [](PlannerConfig& c, const json& v) { c.hyper.alpha = number(v, "alpha"); }},
      {"beta1", [](PlannerConfig& c, const json& v) { c.hyper.beta1 = number(v, "beta1"); }},
      {"beta2", [](PlannerConfig& c, const json& v) { c.hyper.beta2 = number(v, "beta2"); }},
      {"gamma", [](PlannerConfig& c, const json& v) { c.hyper.gamma = number(v, "gamma"); }},
      {"consensus_gain", [](PlannerConfig& c, const json& v) { c.hyper.consensus_gain = number(v, "consensus_gain"); }},
      {"weights.Q_diag", [](PlannerConfig& c, const json& v) { c.weights.q = q_from(v); }},
      {"weights.mu", [](PlannerConfig& c, const json& v) { c.weights.mu = number(v, "weights.mu"); }},
      {"weights.lambda", [](PlannerConfig& c, const json& v) { c.weights.lambda = number(v, "weights.lambda"); }},
      {"scheme",
       [](PlannerConfig& c, const json& v) {
         const auto name = text(v, "scheme");
         const auto kind = parse_fd_kind(name);
         if (!kind) throw InvalidArgument("unknown scheme '" + name + "' (valid: two_point, three_point, five_point)");
         c.scheme.kind = *kind;
       }},
      {"fd_delta", [](PlannerConfig& c, const json& v) { c.scheme.delta = number(v, "fd_delta"); }},
      {"max_iterations", [](PlannerConfig& c, const json& v) { c.max_iterations = count(v, "max_iterations"); }},
      {"tolerance", [](PlannerConfig& c, const json& v) { c.tolerance = number(v, "tolerance"); }},
      {"stop_early", [](PlannerConfig& c, const json& v) { c.stop_early = flag(v, "stop_early"); }},
      {"dt", [](PlannerConfig& c, const json& v) { c.dt = number(v, "dt"); }},
      {"total_time", [](PlannerConfig& c, const json& v) { c.total_time = number(v, "total_time"); }},
      {"N", [](PlannerConfig& c, const json& v) { c.samples = count(v, "N"); }},
      {"influence_aware", [](PlannerConfig& c, const json& v) { c.influence_aware = flag(v, "influence_aware"); }},
      {"consensus", [](PlannerConfig& c, const json& v) { c.consensus = flag(v, "consensus"); }},
      {"n_agents", [](PlannerConfig& c, const json& v) { c.n_agents = count(v, "n_agents"); }},
      {"clamp_speed", [](PlannerConfig& c, const json& v) { c.clamp_speed = flag(v, "clamp_speed"); }},
      {"speed_cap", [](PlannerConfig& c, const json& v) { c.speed_cap = number(v, "speed_cap"); }},
  };
  return table;
}

void flatten(const json& j, const std::string& prefix, std::map<std::string, json>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it.value().is_object()) flatten(it.value(), key, out);
    else out[key] = it.value();
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

}  // namespace

Scenario scenario_from_json(const json& doc) {
  if (!doc.is_object()) throw InvalidArgument("scenario must be a JSON object");
  Scenario s;
  s.start = pose_from(doc.at("start"), "start");
  s.goal = pose_from(doc.at("goal"), "goal");
  if (doc.contains("obstacles")) {
    for (const auto& o : doc.at("obstacles")) {
      s.obstacles.push_back({vec3(o.at("center"), "obstacle center"), number(o.at("radius"), "obstacle radius")});
    }
  }
  if (doc.contains("bounds")) {
    s.bounds.min = vec3(doc.at("bounds").at("min"), "bounds.min");
    s.bounds.max = vec3(doc.at("bounds").at("max"), "bounds.max");
  } else {
    throw InvalidArgument("scenario needs bounds{min,max}");
  }
  if (doc.contains("weights")) {
    const auto& w = doc.at("weights");
    if (w.contains("Q_diag")) s.weights.q = q_from(w.at("Q_diag"));
    if (w.contains("mu")) s.weights.mu = number(w.at("mu"), "weights.mu");
    if (w.contains("lambda")) s.weights.lambda = number(w.at("lambda"), "weights.lambda");
  }
  s.validate();
  return s;
}

json scenario_to_json(const Scenario& s) {
  json obstacles = json::array();
  for (const auto& o : s.obstacles) obstacles.push_back({{"center", vec3_json(o.center)}, {"radius", o.radius}});
  return {{"start", pose_json(s.start)},
          {"goal", pose_json(s.goal)},
          {"obstacles", obstacles},
          {"bounds", {{"min", vec3_json(s.bounds.min)}, {"max", vec3_json(s.bounds.max)}}},
          {"weights",
           {{"Q_diag", vec3_json(s.weights.q.diagonal())}, {"mu", s.weights.mu}, {"lambda", s.weights.lambda}}}};
}

Scenario load_scenario(const std::filesystem::path& path) {
  try {
    return scenario_from_json(read_json(path));
  } catch (const json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

std::vector<std::string> profile_names() { return {"default", "paper_sec5", "paper_rmsprop"}; }

PlannerConfig profile_config(std::string_view name) {
  PlannerConfig c;
  if (name == "default") return c;
  if (name != "paper_sec5" && name != "paper_rmsprop") {
    throw InvalidArgument("unknown profile '" + std::string(name) + "' (valid: default, paper_sec5, paper_rmsprop)");
  }
  c.hyper.alpha = c.hyper.beta1 = c.hyper.beta2 = 0.0028;
  c.hyper.gamma = 1.0;
  c.optimizer = OptimizerKind::kRmsProp;
  c.constants_profile = ConstantsProfile::kPaper;
  c.constants = default_constants(c.optimizer, c.constants_profile);
  c.consensus = false;
  c.n_agents = 3;
  c.total_time = 10.0;
  if (name == "paper_sec5") {
    c.dt = 0.05;
    c.max_iterations = 30;
    c.stop_early = false;
  } else {
    c.dt = 0.2;
    c.max_iterations = 100;
    c.stop_early = true;
  }
  return c;
}

PlannerConfig apply_config_json(PlannerConfig base, const json& doc) {
  if (!doc.is_object()) throw InvalidArgument("config must be a JSON object");
  std::map<std::string, json> flat;
  flatten(doc, "", flat);
  if (auto it = flat.find("profile"); it != flat.end()) {
    base = profile_config(text(it->second, "profile"));
    flat.erase(it);
  }
  for (const auto& [key, setter] : setters()) {
    if (auto it = flat.find(key); it != flat.end()) {
      setter(base, it->second);
      flat.erase(it);
    }
  }
  if (!flat.empty()) throw InvalidArgument("unknown config key '" + flat.begin()->first + "'");
  return base;
}

PlannerConfig load_config(const std::filesystem::path& path, PlannerConfig base) {
  return apply_config_json(std::move(base), read_json(path));
}

json config_to_json(const PlannerConfig& c) {
  json j = {
      {"alpha", c.hyper.alpha},
      {"beta1", c.hyper.beta1},
      {"beta2", c.hyper.beta2},
      {"gamma", c.hyper.gamma},
      {"consensus_gain", c.hyper.consensus_gain},
      {"scheme", std::string(to_string(c.scheme.kind))},
      {"fd_delta", c.scheme.delta},
      {"optimizer",
       {{"kind", std::string(to_string(c.optimizer))},
        {"profile", c.constants_profile == ConstantsProfile::kPaper ? "paper" : "default"},
        {"eta", c.constants.eta},
        {"constants",
         {{"momentum", c.constants.momentum},
          {"decay", c.constants.decay},
          {"rho", c.constants.rho},
          {"adam_beta1", c.constants.adam_beta1},
          {"adam_beta2", c.constants.adam_beta2},
          {"epsilon", c.constants.epsilon}}}}},
      {"max_iterations", c.max_iterations},
      {"tolerance", c.tolerance},
      {"stop_early", c.stop_early},
      {"dt", c.dt},
      {"total_time", c.total_time},
      {"N", c.samples},
      {"influence_aware", c.influence_aware},
      {"consensus", c.consensus},
      {"n_agents", c.n_agents},
      {"clamp_speed", c.clamp_speed},
      {"speed_cap", c.speed_cap},
  };
  json w = json::object();
  if (c.weights.q) w["Q_diag"] = vec3_json(c.weights.q->diagonal());
  if (c.weights.mu) w["mu"] = *c.weights.mu;
  if (c.weights.lambda) w["lambda"] = *c.weights.lambda;
  if (!w.empty()) j["weights"] = w;
  return j;
}

void set_config_value(PlannerConfig& config, std::string_view key, std::string_view value) {
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = std::string(value);
  }
  for (const auto& [name, setter] : setters()) {
    if (name == key) {
      setter(config, v);
      return;
    }
  }
  throw InvalidArgument("unknown config key '" + std::string(key) + "'");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [name, setter] : setters()) out.push_back(name);
    return out;
  }();
  return keys;
}

}  // namespace gmp3
