#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "driftbench/data.hpp"
#include "driftbench/drift.hpp"
#include "driftbench/roster.hpp"
#include "driftbench/synth.hpp"

namespace driftbench {

inline constexpr const char* kVersion = "1.0.0";

struct DataSource {
  enum class Format { synth, libsvm, csv };

  Format format = Format::synth;
  std::filesystem::path dir;       // libsvm: directory holding the batch files
  std::filesystem::path manifest;  // libsvm: optional manifest CSV (default: gas-sensor layout)
  std::filesystem::path csv;       // csv: file path
  std::string label_column = "label";
  std::string batch_column = "batch";
  std::size_t num_features = 128;  // libsvm
  std::size_t num_classes = 6;     // libsvm
  SynthConfig synth;
  std::uint64_t synth_seed = 0;
};

const char* to_string(DataSource::Format f);

struct MonitorParams {
  std::size_t window = 50;
  double k = 3.0;
};

struct ExperimentConfig {
  DataSource data;
  std::set<BatchId> train_batches{0, 1};
  double split_fraction = 0.5;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::uint64_t master_seed = 0;
  std::vector<ModelSpec> roster;  // empty = all seven families with defaults
  std::size_t ece_bins = 10;
  MonitorParams monitor;
  bool grid_search = false;
  std::map<ModelKind, Grid> grids;
  int jobs = 1;  // concurrent (model, seed) cells; 0 = one per OpenMP thread

  /// Throws ConfigError on an invalid combination.
  void validate() const;
  std::vector<ModelSpec> effective_roster() const;
};

/// Reads or generates the dataset named by `src`. Throws DataError on I/O or
/// parse failures.
Dataset load_dataset(const DataSource& src);

/// One seed's standardized sets. The standardizer is fit on train only.
struct PreparedSplit {
  Standardizer standardizer;
  Dataset train;
  Dataset val;
  std::vector<Dataset> tests;  // one per drifted batch, ascending id
};

/// Split with derive_seed(derive_seed(master_seed, seed), "split"), then
/// standardize every set with statistics of the training part.
PreparedSplit prepare_split(const ExperimentConfig& cfg, const Dataset& data, std::uint64_t seed);

struct SetMetrics {
  std::string set;        // "val" or "batch<id>"
  BatchId batch = -1;     // -1 for val
  std::size_t n = 0;
  double accuracy = 0.0;
  double mean_confidence = 0.0;
  double ece = 0.0;
};

/// One (model, seed) job.
struct RunCell {
  std::string model;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  Hyperparams hyperparams;       // resolved values used for the fit
  std::vector<SetMetrics> sets;  // val first, then drifted batches ascending
  SetMetrics drifted;            // per-batch means over the drifted batches
  SetMetrics drifted_pooled;     // all drifted records scored together
  MonitorTrace monitor;
  int first_alarm_batch = -1;  // batch id of the first alarm, -1 if none
};

/// Looks up "val", "batch<id>", "drifted" or "drifted_pooled"; nullptr if absent.
const SetMetrics* find_set(const RunCell& cell, const std::string& name);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // population deviation across seeds
};

struct Aggregate {
  std::string model;
  std::string set;  // "val", "batch<id>", "drifted", "drifted_pooled"
  std::size_t seeds = 0;
  std::size_t failed = 0;
  MetricSummary accuracy;
  MetricSummary mean_confidence;
  MetricSummary ece;
};

struct ExperimentResult {
  std::vector<std::string> models;
  std::vector<std::string> sets;                // temporal order
  std::map<std::string, MonthRange> set_months; // by set name
  std::vector<RunCell> cells;                   // model-major, then seed order
  std::vector<Aggregate> aggregates;
  nlohmann::json config_echo;
};

/// Mean and population deviation per (model, set) over the non-failed cells.
std::vector<Aggregate> aggregate_seeds(const std::vector<RunCell>& cells,
                                       const std::vector<std::string>& models,
                                       const std::vector<std::string>& sets);

ExperimentResult run_experiment(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& data);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
nlohmann::json result_to_json(const ExperimentResult& r);

/// Writes result.json, cells.csv and aggregates.csv into `out_dir`.
void write_result_files(const ExperimentResult& r, const std::filesystem::path& out_dir);

/// Plot-ready tables derived from a result document without recomputation:
/// fig2a.csv (per-set accuracy and confidence per model) and fig2b.csv
/// (validation vs drifted ECE with deviations). Throws DataError on a
/// malformed document.
void write_report(const nlohmann::json& result, const std::filesystem::path& out_dir);

}  // namespace driftbench
