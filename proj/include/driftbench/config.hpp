#pragma once

// Run configuration text format: one `key = value` per line, `#` starts a
// comment, blank lines are ignored. Keys:
//
//   data.format          libsvm | csv | synth             (libsvm)
//   data.dir             libsvm batch directory            ($DRIFTBENCH_DATA_DIR)
//   data.manifest        libsvm manifest CSV               (built-in gas-sensor layout)
//   data.csv             csv file
//   data.label_column    csv label column                  (label)
//   data.batch_column    csv batch column                  (batch)
//   data.num_features    libsvm feature dimension          (128)
//   data.num_classes     libsvm class count                (6)
//   synth.num_classes | num_features | samples_per_batch | num_batches |
//   synth.class_separation | gain_decay | offset_drift | noise | seed
//   train_batches        comma list of batch ids           (0,1)
//   split_fraction       train share of train_batches      (0.5)
//   seeds                comma list of seed values         (0,...,9)
//   seed                 master seed                       (0)
//   models               comma list of model names         (all seven)
//   jobs                 concurrent (model, seed) cells    (1)
//   out_dir              output directory                  (results)
//   ece_bins             equal-width ECE bins              (10)
//   monitor.window       drift monitor window              (50)
//   monitor.k            drift monitor sensitivity         (3)
//   grid_search          true | false                      (false)
//   <model>.<param>      hyperparameter, e.g. knn.k = 7, rf.num_trees = 100
//   grid.<model>.<param> comma list searched when grid_search is on
//
// <model> is one of svm, dt, knn, rf, nn, nn_ens, nn_mcd.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "driftbench/harness.hpp"

namespace driftbench {

inline constexpr const char* kDataDirEnv = "DRIFTBENCH_DATA_DIR";

struct RunSettings {
  ExperimentConfig experiment;  // roster is filled in by build()
  std::vector<ModelKind> models;  // empty = all seven
  std::map<ModelKind, Hyperparams> hyperparams;
  std::filesystem::path out_dir = "results";

  /// Experiment config with the roster assembled from `models` and
  /// `hyperparams`. Throws ConfigError when the result is invalid.
  ExperimentConfig build() const;
};

/// Defaults, with data.dir taken from DRIFTBENCH_DATA_DIR when set.
RunSettings default_run_settings();

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Splits config text into ordered key/value pairs. Throws ConfigError with
/// the line number on a line without '='.
KeyValues parse_config_text(std::string_view text);

/// Applies one setting. Throws ConfigError naming the key when it is unknown
/// or its value is invalid.
void apply_setting(RunSettings& settings, std::string_view key, std::string_view value);

void apply_settings(RunSettings& settings, const KeyValues& kv);

/// Defaults, then the config file (if any), then `overrides` in order.
/// Throws ConfigError when the file cannot be read.
RunSettings resolve_run_settings(const std::optional<std::filesystem::path>& config_file,
                                 const KeyValues& overrides);

}  // namespace driftbench
