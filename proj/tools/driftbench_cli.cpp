// driftbench command-line front end: run, synth, report.
//
// Exit codes: 0 success, 1 configuration error, 2 data error, 3 internal error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "driftbench/config.hpp"
#include "driftbench/data.hpp"
#include "driftbench/error.hpp"
#include "driftbench/harness.hpp"
#include "driftbench/synth.hpp"

namespace fs = std::filesystem;
using namespace driftbench;

namespace {

enum Exit { kOk = 0, kConfig = 1, kData = 2, kInternal = 3 };

struct CommonFlags {
  std::optional<std::string> config;
  std::vector<std::string> set;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
};

struct RunFlags {
  std::optional<int> jobs;
  std::optional<std::string> models;
  std::optional<std::string> seeds;
  std::optional<std::string> data_dir;
};

struct SynthFlags {
  std::string name = "synth.csv";
  std::optional<std::size_t> classes, features, samples_per_batch, batches;
  std::optional<double> separation, gain_decay, offset_drift, noise;
};

struct ReportFlags {
  std::string result;
  std::optional<std::string> out_dir;
};

KeyValues parse_set_flags(const std::vector<std::string>& items) {
  KeyValues out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + item + "'");
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

template <typename T>
void push(KeyValues& kv, const char* key, const std::optional<T>& v) {
  if (!v) return;
  std::ostringstream s;
  s << std::setprecision(17) << *v;
  kv.emplace_back(key, s.str());
}

std::optional<fs::path> config_path(const CommonFlags& f) {
  if (!f.config) return std::nullopt;
  return fs::path(*f.config);
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

void print_summary(const ExperimentResult& r, std::ostream& out) {
  const auto find = [&](const std::string& model, const std::string& set) -> const Aggregate* {
    for (const auto& a : r.aggregates) {
      if (a.model == model && a.set == set) return &a;
    }
    return nullptr;
  };
  out << std::left << std::setw(8) << "model" << std::right << std::setw(10) << "val_acc"
      << std::setw(10) << "val_ece" << std::setw(12) << "drift_acc" << std::setw(12) << "drift_ece"
      << std::setw(8) << "failed" << '\n';
  for (const auto& m : r.models) {
    const auto* v = find(m, "val");
    const auto* d = find(m, "drifted");
    out << std::left << std::setw(8) << m << std::right;
    if (v != nullptr && v->seeds > 0) {
      out << std::setw(10) << fixed(v->accuracy.mean) << std::setw(10) << fixed(v->ece.mean);
    } else {
      out << std::setw(10) << "-" << std::setw(10) << "-";
    }
    if (d != nullptr && d->seeds > 0) {
      out << std::setw(12) << fixed(d->accuracy.mean) << std::setw(12) << fixed(d->ece.mean);
    } else {
      out << std::setw(12) << "-" << std::setw(12) << "-";
    }
    out << std::setw(8) << (v != nullptr ? v->failed : 0) << '\n';
  }
}

int cmd_run(const CommonFlags& common, const RunFlags& flags) {
  KeyValues overrides = parse_set_flags(common.set);
  if (common.out_dir) overrides.emplace_back("out_dir", *common.out_dir);
  push(overrides, "seed", common.seed);
  push(overrides, "jobs", flags.jobs);
  if (flags.models) overrides.emplace_back("models", *flags.models);
  if (flags.seeds) overrides.emplace_back("seeds", *flags.seeds);
  if (flags.data_dir) overrides.emplace_back("data.dir", *flags.data_dir);

  const RunSettings settings = resolve_run_settings(config_path(common), overrides);
  const ExperimentConfig cfg = settings.build();
  const ExperimentResult result = run_experiment(cfg);
  write_result_files(result, settings.out_dir);
  print_summary(result, std::cout);
  std::cout << "results written to " << settings.out_dir.string() << '\n';
  return kOk;
}

int cmd_synth(const CommonFlags& common, const SynthFlags& flags) {
  KeyValues overrides = parse_set_flags(common.set);
  if (common.out_dir) overrides.emplace_back("out_dir", *common.out_dir);
  push(overrides, "synth.seed", common.seed);
  push(overrides, "synth.num_classes", flags.classes);
  push(overrides, "synth.num_features", flags.features);
  push(overrides, "synth.samples_per_batch", flags.samples_per_batch);
  push(overrides, "synth.num_batches", flags.batches);
  push(overrides, "synth.class_separation", flags.separation);
  push(overrides, "synth.gain_decay", flags.gain_decay);
  push(overrides, "synth.offset_drift", flags.offset_drift);
  push(overrides, "synth.noise", flags.noise);

  const RunSettings settings = resolve_run_settings(config_path(common), overrides);
  const auto& data = settings.experiment.data;
  data.synth.validate();
  if (flags.name.empty() || fs::path(flags.name).has_parent_path()) {
    throw ConfigError("--name must be a plain file name, got '" + flags.name + "'");
  }

  const Dataset d = generate_drift_stream(data.synth, data.synth_seed);
  std::error_code ec;
  fs::create_directories(settings.out_dir, ec);
  if (ec) throw DataError("cannot create output directory " + settings.out_dir.string());
  const fs::path path = settings.out_dir / flags.name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_csv(out, d);
  out.close();
  if (!out) throw DataError("failed writing " + path.string());
  std::cout << "wrote " << d.size() << " rows in " << data.synth.num_batches << " batches to "
            << path.string() << '\n';
  return kOk;
}

int cmd_report(const ReportFlags& flags) {
  const fs::path result_path = flags.result;
  std::ifstream in(result_path, std::ios::binary);
  if (!in) throw DataError("cannot read result file " + result_path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed result JSON " + result_path.string() + ": " + e.what());
  }
  fs::path out_dir = flags.out_dir ? fs::path(*flags.out_dir) : result_path.parent_path();
  if (out_dir.empty()) out_dir = ".";
  write_report(doc, out_dir);
  std::cout << "wrote " << (out_dir / "fig2a.csv").string() << " and "
            << (out_dir / "fig2b.csv").string() << '\n';
  return kOk;
}

void add_common(CLI::App* cmd, CommonFlags& f, const char* seed_help) {
  cmd->add_option("--config", f.config, "key = value configuration file");
  cmd->add_option("--set", f.set, "override a config key (key=value), repeatable");
  cmd->add_option("--out-dir", f.out_dir, "output directory (out_dir)");
  cmd->add_option("--seed", f.seed, seed_help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"driftbench: classifier calibration under sensor drift"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonFlags run_common, synth_common;
  RunFlags run_flags;
  SynthFlags synth_flags;
  ReportFlags report_flags;

  auto* run = app.add_subcommand("run", "run the experiment grid and write result files");
  add_common(run, run_common, "master seed (seed)");
  run->add_option("--jobs", run_flags.jobs, "concurrent (model, seed) cells, 0 = all threads (jobs)");
  run->add_option("--models", run_flags.models, "comma list of models, e.g. RF,NN-Ens (models)");
  run->add_option("--seeds", run_flags.seeds, "comma list of seed values (seeds)");
  run->add_option("--data-dir", run_flags.data_dir,
                  std::string("libsvm batch directory (data.dir, default $") + kDataDirEnv + ")");

  auto* synth = app.add_subcommand("synth", "write a synthetic drift stream as CSV");
  add_common(synth, synth_common, "generator seed (synth.seed)");
  synth->add_option("--name", synth_flags.name, "file name inside the output directory");
  synth->add_option("--classes", synth_flags.classes, "synth.num_classes");
  synth->add_option("--features", synth_flags.features, "synth.num_features");
  synth->add_option("--samples-per-batch", synth_flags.samples_per_batch, "synth.samples_per_batch");
  synth->add_option("--batches", synth_flags.batches, "synth.num_batches");
  synth->add_option("--separation", synth_flags.separation, "synth.class_separation");
  synth->add_option("--gain-decay", synth_flags.gain_decay, "synth.gain_decay");
  synth->add_option("--offset-drift", synth_flags.offset_drift, "synth.offset_drift");
  synth->add_option("--noise", synth_flags.noise, "synth.noise");

  auto* report = app.add_subcommand("report", "derive fig2a.csv and fig2b.csv from result.json");
  report->add_option("result", report_flags.result, "result.json path")->required();
  report->add_option("--out-dir", report_flags.out_dir, "output directory (default: next to result)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*run) return cmd_run(run_common, run_flags);
    if (*synth) return cmd_synth(synth_common, synth_flags);
    if (*report) return cmd_report(report_flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
