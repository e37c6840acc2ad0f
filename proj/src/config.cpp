#include "driftbench/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "driftbench/error.hpp"
#include "text_util.hpp"

namespace driftbench {

RunSettings default_run_settings() {
  RunSettings s;
  s.experiment.data.format = DataSource::Format::libsvm;
  if (const char* env = std::getenv(kDataDirEnv); env != nullptr && *env != '\0') {
    s.experiment.data.dir = env;
  }
  return s;
}

KeyValues parse_config_text(std::string_view text) {
  KeyValues out;
  std::size_t line_no = 0;
  for (auto line : text::split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    out.emplace_back(std::string(text::trim(line.substr(0, eq))),
                     std::string(text::trim(line.substr(eq + 1))));
  }
  return out;
}

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const std::string& why) {
  throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(key) +
                    "': " + why);
}

double parse_real(std::string_view key, std::string_view value) {
  const auto v = text::to_double(value);
  if (!v) bad_value(key, value, "expected a number");
  return *v;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view value) {
  const auto v = text::to_int<Int>(value);
  if (!v) bad_value(key, value, "expected an integer");
  return *v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "expected true or false");
}

std::vector<std::string_view> parse_list(std::string_view value) {
  std::vector<std::string_view> out;
  for (auto item : text::split(value, ',')) {
    item = text::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::optional<ModelKind> kind_from_prefix(std::string_view prefix) {
  for (ModelKind k : all_model_kinds()) {
    if (config_prefix(k) == prefix) return k;
  }
  return std::nullopt;
}

}  // namespace

void apply_setting(RunSettings& settings, std::string_view key, std::string_view value) {
  auto& cfg = settings.experiment;
  auto& data = cfg.data;
  auto& synth = data.synth;

  if (key == "data.format") {
    if (value == "libsvm") data.format = DataSource::Format::libsvm;
    else if (value == "csv") data.format = DataSource::Format::csv;
    else if (value == "synth") data.format = DataSource::Format::synth;
    else bad_value(key, value, "expected libsvm, csv or synth");
  } else if (key == "data.dir") {
    data.dir = std::string(value);
  } else if (key == "data.manifest") {
    data.manifest = std::string(value);
  } else if (key == "data.csv") {
    data.csv = std::string(value);
  } else if (key == "data.label_column") {
    data.label_column = std::string(value);
  } else if (key == "data.batch_column") {
    data.batch_column = std::string(value);
  } else if (key == "data.num_features") {
    data.num_features = parse_int<std::size_t>(key, value);
  } else if (key == "data.num_classes") {
    data.num_classes = parse_int<std::size_t>(key, value);
  } else if (key == "synth.num_classes") {
    synth.num_classes = parse_int<std::size_t>(key, value);
  } else if (key == "synth.num_features") {
    synth.num_features = parse_int<std::size_t>(key, value);
  } else if (key == "synth.samples_per_batch") {
    synth.samples_per_batch = parse_int<std::size_t>(key, value);
  } else if (key == "synth.num_batches") {
    synth.num_batches = parse_int<std::size_t>(key, value);
  } else if (key == "synth.class_separation") {
    synth.class_separation = parse_real(key, value);
  } else if (key == "synth.gain_decay") {
    synth.gain_decay_per_batch = parse_real(key, value);
  } else if (key == "synth.offset_drift") {
    synth.offset_drift_per_batch = parse_real(key, value);
  } else if (key == "synth.noise") {
    synth.noise_deviation = parse_real(key, value);
  } else if (key == "synth.seed") {
    data.synth_seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "train_batches") {
    cfg.train_batches.clear();
    for (auto item : parse_list(value)) cfg.train_batches.insert(parse_int<BatchId>(key, item));
    if (cfg.train_batches.empty()) bad_value(key, value, "empty list");
  } else if (key == "split_fraction") {
    cfg.split_fraction = parse_real(key, value);
  } else if (key == "seeds") {
    cfg.seeds.clear();
    for (auto item : parse_list(value)) cfg.seeds.push_back(parse_int<std::uint64_t>(key, item));
    if (cfg.seeds.empty()) bad_value(key, value, "empty list");
  } else if (key == "seed") {
    cfg.master_seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "models") {
    std::vector<ModelKind> models;
    for (auto item : parse_list(value)) {
      try {
        models.push_back(model_kind_from_string(std::string(item)));
      } catch (const ConfigError& e) {
        bad_value(key, value, e.what());
      }
    }
    if (models.empty()) bad_value(key, value, "empty list");
    settings.models = std::move(models);
  } else if (key == "jobs") {
    cfg.jobs = parse_int<int>(key, value);
  } else if (key == "out_dir") {
    settings.out_dir = std::string(value);
  } else if (key == "ece_bins") {
    cfg.ece_bins = parse_int<std::size_t>(key, value);
  } else if (key == "monitor.window") {
    cfg.monitor.window = parse_int<std::size_t>(key, value);
  } else if (key == "monitor.k") {
    cfg.monitor.k = parse_real(key, value);
  } else if (key == "grid_search") {
    cfg.grid_search = parse_bool(key, value);
  } else if (key.starts_with("grid.")) {
    const auto rest = key.substr(5);
    const auto dot = rest.find('.');
    const auto kind = dot == std::string_view::npos ? std::nullopt : kind_from_prefix(rest.substr(0, dot));
    if (!kind) throw ConfigError("unknown config key '" + std::string(key) + "'");
    const std::string param(rest.substr(dot + 1));
    if (!default_hyperparams(*kind).contains(param)) {
      throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
    std::vector<double> values;
    for (auto item : parse_list(value)) values.push_back(parse_real(key, item));
    if (values.empty()) bad_value(key, value, "empty list");
    auto& grid = cfg.grids[*kind];
    const auto it = std::find_if(grid.begin(), grid.end(), [&](const auto& a) { return a.first == param; });
    if (it != grid.end()) it->second = std::move(values);
    else grid.emplace_back(param, std::move(values));
  } else {
    const auto dot = key.find('.');
    const auto kind = dot == std::string_view::npos ? std::nullopt : kind_from_prefix(key.substr(0, dot));
    if (!kind) throw ConfigError("unknown config key '" + std::string(key) + "'");
    const std::string param(key.substr(dot + 1));
    if (!default_hyperparams(*kind).contains(param)) {
      throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
    settings.hyperparams[*kind][param] = parse_real(key, value);
  }
}

ExperimentConfig RunSettings::build() const {
  ExperimentConfig cfg = experiment;
  cfg.roster.clear();
  const auto& kinds = models.empty() ? all_model_kinds() : models;
  for (ModelKind k : kinds) {
    const auto it = hyperparams.find(k);
    cfg.roster.push_back({k, it == hyperparams.end() ? Hyperparams{} : it->second});
  }
  cfg.validate();
  return cfg;
}

void apply_settings(RunSettings& settings, const KeyValues& kv) {
  for (const auto& [key, value] : kv) apply_setting(settings, key, value);
}

RunSettings resolve_run_settings(const std::optional<std::filesystem::path>& config_file,
                                 const KeyValues& overrides) {
  RunSettings settings = default_run_settings();
  if (config_file) {
    std::ifstream in(*config_file);
    if (!in) throw ConfigError("cannot read config file " + config_file->string());
    std::ostringstream text;
    text << in.rdbuf();
    apply_settings(settings, parse_config_text(text.str()));
  }
  apply_settings(settings, overrides);
  return settings;
}

}  // namespace driftbench
