#include "run_config.hpp"

#include "oamp/errors.hpp"
#include "oamp/io.hpp"

namespace oamp::cli {

namespace {

using nlohmann::json;

bool same_kind(const json& def, const json& v) {
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_string()) return v.is_string();
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_number()) return v.is_number();
  return false;
}

}  // namespace

RunConfig::RunConfig() {
  values_ = {
      {"command", ""},
      {"seed", -1},
      // inputs
      {"data", ""},
      {"prior", ""},
      {"imputer", ""},
      {"predictions", ""},
      {"observed", ""},
      {"data.train_fraction", 0.8},
      // synth
      {"synth.height", 32},
      {"synth.width", 32},
      {"synth.corr_length", 3.0},
      {"synth.style", "mixed"},
      {"synth.coverage", 0.5},
      {"synth.land_fraction", 0.1},
      {"synth.samples", 100},
      // mask prior
      {"prior.steps", 2000},
      {"prior.batch", 8},
      {"prior.learning_rate", 2e-3},
      {"prior.weighting", "uniform"},
      {"prior.t_sampling", "uniform"},
      {"prior.lr_schedule", "constant"},
      {"prior.hidden_channels", 32},
      {"prior.coord_features", 4},
      {"prior.kappa", 4.0},
      {"prior.t_min", 1e-3},
      // mask sampling
      {"guidance.enabled", false},
      {"guidance.rho", 0.8},
      {"guidance.scale", 120.0},
      {"guidance.steps", 15},
      {"guidance.clamp", 1e-6},
      {"sample.ensemble", 1},
      {"sample.height", 32},
      {"sample.width", 32},
      // partition strategies
      {"strategy.r_ctx", 0.3},
      {"strategy.r_qry", 0.3},
      {"strategy.block_grid", 8},
      {"strategy.unconditional_steps", 15},
      // imputer
      {"imputer.strategy", "guided"},
      {"imputer.steps", 5000},
      {"imputer.batch", 1},
      {"imputer.learning_rate", 1e-3},
      {"imputer.p_clean", 0.5},
      {"imputer.hidden_channels", 48},
      {"imputer.bank", 0},
      // inference
      {"impute.sampler", "direct"},
      {"impute.generator", "guided"},
      {"impute.ensemble", 8},
      {"impute.steps", 50},
      {"impute.delta", 1e-3},
      {"impute.jump", 2},
      {"impute.frequency", 4},
      {"impute.stages", 3},
      // heatmap
      {"heatmap.strategy", "guided"},
      {"heatmap.ensemble", 256},
      {"heatmap.sample", -1},
      // verify
      {"verify.trials", 200},
      {"verify.max_dim", 6},
  };
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(path.string() + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) set(key, value);
}

void RunConfig::set(const std::string& key, json value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  if (!same_kind(it->second, value)) {
    throw ConfigError("config key '" + key + "' expects " + it->second.type_name() + ", got " +
                      value.type_name());
  }
  it->second = std::move(value);
}

const json& RunConfig::at(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

int RunConfig::integer(const std::string& key) const { return at(key).get<int>(); }
double RunConfig::number(const std::string& key) const { return at(key).get<double>(); }
bool RunConfig::flag(const std::string& key) const { return at(key).get<bool>(); }
std::string RunConfig::text(const std::string& key) const { return at(key).get<std::string>(); }

std::uint64_t RunConfig::seed() const {
  const auto s = at("seed").get<std::int64_t>();
  if (s < 0) throw ConfigError("--seed is required");
  return static_cast<std::uint64_t>(s);
}

json RunConfig::to_json() const {
  json j = json::object();
  for (const auto& [k, v] : values_) j[k] = v;
  return j;
}

void RunConfig::write_lock(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  io::write_atomic(dir / "config.lock.json", to_json().dump(2) + "\n");
}

}  // namespace oamp::cli
