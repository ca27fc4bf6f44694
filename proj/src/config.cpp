#include "endocost/config.hpp"

#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>

#include "endocost/error.hpp"

namespace endocost {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || key == a;
    if (!known) throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
  }
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

std::uint64_t get_unsigned(const json& j, const std::string& path) {
  if (!j.is_number_unsigned()) throw ConfigError(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected a boolean");
  return j.get<bool>();
}

template <typename Parse>
auto enum_field(const json& j, const std::string& path, Parse parse) {
  const std::string name = get_string(j, path);
  try {
    return parse(name);
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

GraphSpec parse_graph(const json& j, const std::string& path) {
  only_keys(j, path, {"topology", "n", "lambda", "w_coop", "w_comp", "m_target", "seed"});
  GraphSpec spec;
  if (j.contains("topology")) spec.topology = get_string(j["topology"], join(path, "topology"));
  if (j.contains("n")) spec.n = get_unsigned(j["n"], join(path, "n"));
  if (j.contains("lambda")) spec.lambda = get_number(j["lambda"], join(path, "lambda"));
  if (j.contains("w_coop")) spec.w_coop = get_number(j["w_coop"], join(path, "w_coop"));
  if (j.contains("w_comp")) spec.w_comp = get_number(j["w_comp"], join(path, "w_comp"));
  if (j.contains("m_target")) spec.m_target = get_unsigned(j["m_target"], join(path, "m_target"));
  if (j.contains("seed")) spec.seed = get_unsigned(j["seed"], join(path, "seed"));
  return spec;
}

EnvironmentSpec parse_environment(const json& j, const std::string& path, EnvironmentSpec spec) {
  only_keys(j, path, {"kind", "phase_length", "variation_budget", "noise_amplitude", "value_low", "value_high"});
  if (j.contains("kind")) spec.kind = enum_field(j["kind"], join(path, "kind"), environment_kind_from_string);
  if (j.contains("phase_length")) {
    if (j["phase_length"].is_null()) {
      spec.phase_length.reset();
    } else {
      spec.phase_length = get_unsigned(j["phase_length"], join(path, "phase_length"));
    }
  }
  if (j.contains("variation_budget")) spec.variation_budget = get_number(j["variation_budget"], join(path, "variation_budget"));
  if (j.contains("noise_amplitude")) spec.noise_amplitude = get_number(j["noise_amplitude"], join(path, "noise_amplitude"));
  if (j.contains("value_low")) spec.value_low = get_number(j["value_low"], join(path, "value_low"));
  if (j.contains("value_high")) spec.value_high = get_number(j["value_high"], join(path, "value_high"));
  try {
    EnvironmentSpec probe = spec;
    probe.validate();
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  return spec;
}

AllocatorSpec parse_allocator(const json& j, const std::string& path, const EnvironmentSpec& base_env) {
  only_keys(j, path, {"kind", "learning_rate", "anytime", "base_step", "step_exponent", "feature_noise",
                      "gradient_mode", "environment"});
  AllocatorSpec spec;
  if (!j.contains("kind")) throw ConfigError(join(path, "kind"), "required");
  spec.kind = enum_field(j["kind"], join(path, "kind"), allocator_kind_from_string);
  if (j.contains("learning_rate") && !j["learning_rate"].is_null()) {
    const double eta = get_number(j["learning_rate"], join(path, "learning_rate"));
    if (!(eta > 0.0)) throw ConfigError(join(path, "learning_rate"), "must be > 0");
    spec.competitive.learning_rate = eta;
  }
  if (j.contains("anytime")) spec.competitive.anytime = get_bool(j["anytime"], join(path, "anytime"));
  if (j.contains("base_step")) {
    spec.gated.base_step = get_number(j["base_step"], join(path, "base_step"));
    if (!(spec.gated.base_step > 0.0)) throw ConfigError(join(path, "base_step"), "must be > 0");
  }
  if (j.contains("step_exponent")) spec.gated.step_exponent = get_number(j["step_exponent"], join(path, "step_exponent"));
  if (j.contains("feature_noise")) {
    spec.feature_noise = get_number(j["feature_noise"], join(path, "feature_noise"));
    if (!(spec.feature_noise >= 0.0)) throw ConfigError(join(path, "feature_noise"), "must be >= 0");
  }
  if (j.contains("gradient_mode")) {
    spec.gated.gradient_mode = enum_field(j["gradient_mode"], join(path, "gradient_mode"), reward_mode_from_string);
  }
  if (j.contains("environment")) spec.environment = parse_environment(j["environment"], join(path, "environment"), base_env);
  return spec;
}

json environment_json(const EnvironmentSpec& e) {
  json j{{"kind", to_string(e.kind)},
         {"variation_budget", e.variation_budget},
         {"noise_amplitude", e.noise_amplitude},
         {"value_low", e.value_low},
         {"value_high", e.value_high}};
  j["phase_length"] = e.phase_length ? json(*e.phase_length) : json(nullptr);
  return j;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  only_keys(j, "", {"graph", "topologies", "environment", "allocators", "horizons", "seeds", "reward_mode"});
  ExperimentConfig config;
  if (j.contains("graph")) config.graph = parse_graph(j["graph"], "graph");
  if (j.contains("environment")) config.environment = parse_environment(j["environment"], "environment", config.environment);
  if (j.contains("topologies")) {
    if (!j["topologies"].is_array()) throw ConfigError("topologies", "expected an array");
    config.topologies.clear();
    for (std::size_t k = 0; k < j["topologies"].size(); ++k) {
      config.topologies.push_back(get_string(j["topologies"][k], "topologies[" + std::to_string(k) + "]"));
    }
  }
  if (j.contains("allocators")) {
    if (!j["allocators"].is_array()) throw ConfigError("allocators", "expected an array");
    config.allocators.clear();
    for (std::size_t k = 0; k < j["allocators"].size(); ++k) {
      config.allocators.push_back(
          parse_allocator(j["allocators"][k], "allocators[" + std::to_string(k) + "]", config.environment));
    }
  }
  if (j.contains("horizons")) {
    if (!j["horizons"].is_array()) throw ConfigError("horizons", "expected an array");
    config.horizons.clear();
    for (std::size_t k = 0; k < j["horizons"].size(); ++k) {
      config.horizons.push_back(get_unsigned(j["horizons"][k], "horizons[" + std::to_string(k) + "]"));
    }
  }
  if (j.contains("seeds")) {
    if (!j["seeds"].is_array()) throw ConfigError("seeds", "expected an array");
    config.seeds.clear();
    for (std::size_t k = 0; k < j["seeds"].size(); ++k) {
      config.seeds.push_back(get_unsigned(j["seeds"][k], "seeds[" + std::to_string(k) + "]"));
    }
  }
  if (j.contains("reward_mode")) config.reward_mode = enum_field(j["reward_mode"], "reward_mode", reward_mode_from_string);
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

json to_json(const ExperimentConfig& config) {
  json j;
  j["graph"] = {{"topology", config.graph.topology}, {"n", config.graph.n},           {"lambda", config.graph.lambda},
                {"w_coop", config.graph.w_coop},     {"w_comp", config.graph.w_comp}, {"m_target", config.graph.m_target},
                {"seed", config.graph.seed}};
  j["topologies"] = config.topologies;
  j["environment"] = environment_json(config.environment);
  j["allocators"] = json::array();
  for (const AllocatorSpec& a : config.allocators) {
    json aj{{"kind", to_string(a.kind)},
            {"anytime", a.competitive.anytime},
            {"base_step", a.gated.base_step},
            {"step_exponent", a.gated.step_exponent},
            {"feature_noise", a.feature_noise},
            {"gradient_mode", to_string(a.gated.gradient_mode)}};
    aj["learning_rate"] = a.competitive.learning_rate ? json(*a.competitive.learning_rate) : json(nullptr);
    if (a.environment) aj["environment"] = environment_json(*a.environment);
    j["allocators"].push_back(std::move(aj));
  }
  j["horizons"] = config.horizons;
  j["seeds"] = config.seeds;
  j["reward_mode"] = to_string(config.reward_mode);
  return j;
}

}  // namespace endocost
