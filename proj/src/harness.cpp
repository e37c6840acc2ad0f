#include "driftbench/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "driftbench/error.hpp"
#include "driftbench/metrics.hpp"
#include "driftbench/rng.hpp"
#include "text_util.hpp"

namespace driftbench {

using nlohmann::json;

const char* to_string(DataSource::Format f) {
  switch (f) {
    case DataSource::Format::synth: return "synth";
    case DataSource::Format::libsvm: return "libsvm";
    case DataSource::Format::csv: return "csv";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (train_batches.empty()) throw ConfigError("train_batches is empty");
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw ConfigError("split_fraction must lie in (0, 1)");
  }
  if (ece_bins < 1) throw ConfigError("ece_bins must be at least 1");
  if (monitor.window < 1) throw ConfigError("monitor.window must be at least 1");
  if (!(monitor.k >= 0.0)) throw ConfigError("monitor.k must be nonnegative");
  if (jobs < 0) throw ConfigError("jobs must be nonnegative");
  {
    auto sorted = seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ConfigError("seeds must be distinct");
    }
  }
  std::set<ModelKind> kinds;
  for (const auto& spec : effective_roster()) {
    if (!kinds.insert(spec.kind).second) {
      throw ConfigError("model " + to_string(spec.kind) + " listed twice in the roster");
    }
    resolve_hyperparams(spec.kind, spec.params);
  }
  for (const auto& [kind, grid] : grids) {
    const auto defaults = default_hyperparams(kind);
    for (const auto& [name, values] : grid) {
      if (!defaults.contains(name)) {
        throw ConfigError("unknown grid hyperparameter '" + name + "' for model " + to_string(kind));
      }
      if (values.empty()) throw ConfigError("grid axis '" + name + "' is empty");
    }
  }
  if (data.format == DataSource::Format::synth) data.synth.validate();
}

std::vector<ModelSpec> ExperimentConfig::effective_roster() const {
  if (!roster.empty()) return roster;
  std::vector<ModelSpec> all;
  for (ModelKind k : all_model_kinds()) all.push_back({k, {}});
  return all;
}

Dataset load_dataset(const DataSource& src) {
  switch (src.format) {
    case DataSource::Format::synth:
      return generate_drift_stream(src.synth, src.synth_seed);
    case DataSource::Format::libsvm: {
      std::vector<BatchFile> manifest = ucsd_manifest();
      if (!src.manifest.empty()) {
        std::ifstream in(src.manifest);
        if (!in) throw DataError("cannot open manifest " + src.manifest.string());
        manifest = read_manifest(in);
      }
      return load_libsvm_batches(src.dir, manifest, src.num_features, src.num_classes);
    }
    case DataSource::Format::csv: {
      std::ifstream in(src.csv);
      if (!in) throw DataError("cannot open data file " + src.csv.string());
      auto d = parse_csv(in, src.label_column, src.batch_column);
      d.check_contiguous_batches();
      return d;
    }
  }
  throw DataError("unknown data format");
}

const SetMetrics* find_set(const RunCell& cell, const std::string& name) {
  if (name == "drifted") return &cell.drifted;
  if (name == "drifted_pooled") return &cell.drifted_pooled;
  for (const auto& s : cell.sets) {
    if (s.set == name) return &s;
  }
  return nullptr;
}

namespace {

std::string batch_set_name(BatchId b) { return "batch" + std::to_string(b); }

SetMetrics score(const std::string& name, BatchId batch, const std::vector<PredictionRecord>& rec,
                 std::size_t bins) {
  const auto rep = ece(rec, bins);
  return {name, batch, rec.size(), rep.accuracy, rep.mean_confidence, rep.ece};
}

RunCell run_cell(const ExperimentConfig& cfg, const ModelSpec& base, const PreparedSplit& data,
                 std::uint64_t seed, Execution exec) {
  RunCell cell;
  cell.model = to_string(base.kind);
  cell.seed = seed;
  const std::uint64_t model_seed =
      derive_seed(derive_seed(cfg.master_seed, seed), "model/" + cell.model);
  try {
    ModelSpec spec = base;
    if (cfg.grid_search) {
      if (const auto it = cfg.grids.find(spec.kind); it != cfg.grids.end()) {
        // Inner 80/20 split of the training half; val is never touched.
        Rng rng(derive_seed(model_seed, "grid-split"));
        auto idx = shuffled_indices(data.train.size(), rng);
        const auto n_inner = static_cast<std::size_t>(std::ceil(0.8 * static_cast<double>(idx.size())));
        const auto inner = data.train.subset(std::span(idx).first(n_inner));
        const auto held = data.train.subset(std::span(idx).subspan(n_inner));
        spec.params = grid_search(inner, held, spec, it->second, derive_seed(model_seed, "grid"), exec);
      }
    }
    cell.hyperparams = resolve_hyperparams(spec.kind, spec.params);
    const auto model = fit_model(spec, data.train, model_seed, exec);

    const auto val_rec = make_records(model->predict_proba_all(data.val, exec), data.val);
    cell.sets.push_back(score("val", -1, val_rec, cfg.ece_bins));
    std::vector<double> val_conf;
    for (const auto& r : val_rec) val_conf.push_back(r.probs.confidence());

    std::vector<PredictionRecord> pooled;
    std::vector<double> stream;
    std::vector<BatchId> stream_batch;
    for (const auto& test : data.tests) {
      const BatchId b = test.batch(0);
      auto rec = make_records(model->predict_proba_all(test, exec), test);
      cell.sets.push_back(score(batch_set_name(b), b, rec, cfg.ece_bins));
      for (auto& r : rec) {
        stream.push_back(r.probs.confidence());
        stream_batch.push_back(b);
        pooled.push_back(std::move(r));
      }
    }

    const auto drifted_count = static_cast<double>(data.tests.size());
    cell.drifted = {"drifted", -1, pooled.size(), 0.0, 0.0, 0.0};
    for (std::size_t i = 1; i < cell.sets.size(); ++i) {
      cell.drifted.accuracy += cell.sets[i].accuracy / drifted_count;
      cell.drifted.mean_confidence += cell.sets[i].mean_confidence / drifted_count;
      cell.drifted.ece += cell.sets[i].ece / drifted_count;
    }
    cell.drifted_pooled = score("drifted_pooled", -1, pooled, cfg.ece_bins);

    ConfidenceMonitor monitor(val_conf, cfg.monitor.window, cfg.monitor.k);
    cell.monitor = replay(std::move(monitor), stream);
    if (cell.monitor.first_alarm >= 0) {
      cell.first_alarm_batch = stream_batch[static_cast<std::size_t>(cell.monitor.first_alarm)];
    }
  } catch (const std::exception& e) {
    cell = RunCell{};
    cell.model = to_string(base.kind);
    cell.seed = seed;
    cell.failed = true;
    cell.error = e.what();
  }
  return cell;
}

MetricSummary summarize(std::vector<double> values) {
  // Sorted accumulation makes the result independent of seed order.
  std::sort(values.begin(), values.end());
  MetricSummary s;
  if (values.empty()) return s;
  const auto n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  std::vector<double> sq;
  for (double v : values) sq.push_back((v - s.mean) * (v - s.mean));
  std::sort(sq.begin(), sq.end());
  double var = 0.0;
  for (double v : sq) var += v;
  s.std = std::sqrt(var / n);
  return s;
}

}  // namespace

std::vector<Aggregate> aggregate_seeds(const std::vector<RunCell>& cells,
                                       const std::vector<std::string>& models,
                                       const std::vector<std::string>& sets) {
  std::vector<Aggregate> out;
  auto all_sets = sets;
  all_sets.push_back("drifted");
  all_sets.push_back("drifted_pooled");
  for (const auto& model : models) {
    for (const auto& set : all_sets) {
      Aggregate agg;
      agg.model = model;
      agg.set = set;
      std::vector<double> acc, conf, err;
      for (const auto& cell : cells) {
        if (cell.model != model) continue;
        if (cell.failed) {
          ++agg.failed;
          continue;
        }
        const auto* m = find_set(cell, set);
        if (m == nullptr) {
          throw DataError("missing cell for model " + model + ", seed " + std::to_string(cell.seed) +
                          ", set " + set);
        }
        acc.push_back(m->accuracy);
        conf.push_back(m->mean_confidence);
        err.push_back(m->ece);
      }
      if (acc.empty() && agg.failed == 0) {
        throw DataError("no cells for model " + model + ", set " + set);
      }
      agg.seeds = acc.size();
      agg.accuracy = summarize(acc);
      agg.mean_confidence = summarize(conf);
      agg.ece = summarize(err);
      out.push_back(std::move(agg));
    }
  }
  return out;
}

PreparedSplit prepare_split(const ExperimentConfig& cfg, const Dataset& data, std::uint64_t seed) {
  auto split = temporal_split(data, cfg.train_batches, cfg.split_fraction,
                              derive_seed(derive_seed(cfg.master_seed, seed), "split"));
  if (split.test_per_batch.empty()) {
    throw ConfigError("no drifted batches remain outside train_batches");
  }
  if (split.val.size() < 2) throw DataError("validation split needs at least two samples");
  PreparedSplit p;
  p.standardizer = Standardizer::fit(split.train);
  p.train = p.standardizer.apply(split.train);
  p.val = p.standardizer.apply(split.val);
  for (const auto& t : split.test_per_batch) p.tests.push_back(p.standardizer.apply(t));
  return p;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_experiment(cfg, load_dataset(cfg.data));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& data) {
  cfg.validate();
  const auto roster = cfg.effective_roster();

  std::vector<PreparedSplit> prepared;
  for (std::uint64_t seed : cfg.seeds) prepared.push_back(prepare_split(cfg, data, seed));

  ExperimentResult result;
  result.config_echo = config_to_json(cfg);
  for (const auto& spec : roster) result.models.push_back(to_string(spec.kind));
  result.sets.push_back("val");
  {
    MonthRange val_months{0, 0};
    bool first = true;
    for (BatchId b : cfg.train_batches) {
      const auto it = data.batch_months().find(b);
      if (it == data.batch_months().end()) continue;
      val_months.first = first ? it->second.first : std::min(val_months.first, it->second.first);
      val_months.last = first ? it->second.last : std::max(val_months.last, it->second.last);
      first = false;
    }
    if (!first) result.set_months["val"] = val_months;
  }
  for (const auto& t : prepared.front().tests) {
    const BatchId b = t.batch(0);
    result.sets.push_back(batch_set_name(b));
    if (const auto it = data.batch_months().find(b); it != data.batch_months().end()) {
      result.set_months[batch_set_name(b)] = it->second;
    }
  }

  const std::size_t num_seeds = cfg.seeds.size();
  const std::size_t num_cells = roster.size() * num_seeds;
  result.cells.resize(num_cells);
  const int threads = cfg.jobs == 0 ? num_threads() : cfg.jobs;
  const Execution inner = threads == 1 ? Execution::parallel : Execution::serial;
  const auto cells = static_cast<std::ptrdiff_t>(num_cells);
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (threads > 1)
  for (std::ptrdiff_t c = 0; c < cells; ++c) {
    const auto idx = static_cast<std::size_t>(c);
    const std::size_t m = idx / num_seeds;
    const std::size_t s = idx % num_seeds;
    result.cells[idx] = run_cell(cfg, roster[m], prepared[s], cfg.seeds[s], inner);
  }

  result.aggregates = aggregate_seeds(result.cells, result.models, result.sets);
  return result;
}

// ---------------------------------------------------------------------------
// Serialization

json config_to_json(const ExperimentConfig& cfg) {
  json data{{"format", to_string(cfg.data.format)}};
  switch (cfg.data.format) {
    case DataSource::Format::synth: {
      const auto& s = cfg.data.synth;
      data["synth"] = {{"num_classes", s.num_classes},
                       {"num_features", s.num_features},
                       {"samples_per_batch", s.samples_per_batch},
                       {"num_batches", s.num_batches},
                       {"class_separation", s.class_separation},
                       {"gain_decay", s.gain_decay_per_batch},
                       {"offset_drift", s.offset_drift_per_batch},
                       {"noise", s.noise_deviation},
                       {"seed", cfg.data.synth_seed}};
      break;
    }
    case DataSource::Format::libsvm:
      data["dir"] = cfg.data.dir.string();
      data["manifest"] = cfg.data.manifest.string();
      data["num_features"] = cfg.data.num_features;
      data["num_classes"] = cfg.data.num_classes;
      break;
    case DataSource::Format::csv:
      data["csv"] = cfg.data.csv.string();
      data["label_column"] = cfg.data.label_column;
      data["batch_column"] = cfg.data.batch_column;
      break;
  }
  json roster = json::array();
  for (const auto& spec : cfg.effective_roster()) {
    roster.push_back({{"model", to_string(spec.kind)},
                      {"hyperparams", resolve_hyperparams(spec.kind, spec.params)}});
  }
  json grids = json::object();
  for (const auto& [kind, grid] : cfg.grids) {
    json axes = json::array();
    for (const auto& [name, values] : grid) axes.push_back({{"name", name}, {"values", values}});
    grids[to_string(kind)] = axes;
  }
  return json{{"data", data},
              {"train_batches", std::vector<BatchId>(cfg.train_batches.begin(), cfg.train_batches.end())},
              {"split_fraction", cfg.split_fraction},
              {"seeds", cfg.seeds},
              {"master_seed", cfg.master_seed},
              {"roster", roster},
              {"ece_bins", cfg.ece_bins},
              {"monitor", {{"window", cfg.monitor.window}, {"k", cfg.monitor.k}}},
              {"grid_search", cfg.grid_search},
              {"grids", grids}};
}

namespace {

json metrics_json(const SetMetrics& m) {
  return json{{"set", m.set},           {"batch", m.batch},
              {"n", m.n},               {"accuracy", m.accuracy},
              {"mean_confidence", m.mean_confidence}, {"ece", m.ece}};
}

json summary_json(const MetricSummary& s) { return json{{"mean", s.mean}, {"std", s.std}}; }

}  // namespace

json result_to_json(const ExperimentResult& r) {
  json sets = json::array();
  for (const auto& name : r.sets) {
    json s{{"name", name}};
    if (const auto it = r.set_months.find(name); it != r.set_months.end()) {
      s["first_month"] = it->second.first;
      s["last_month"] = it->second.last;
    }
    sets.push_back(std::move(s));
  }
  json cells = json::array();
  for (const auto& c : r.cells) {
    json j{{"model", c.model}, {"seed", c.seed}, {"failed", c.failed}};
    if (c.failed) {
      j["error"] = c.error;
      cells.push_back(std::move(j));
      continue;
    }
    j["hyperparams"] = c.hyperparams;
    json per_set = json::array();
    for (const auto& m : c.sets) per_set.push_back(metrics_json(m));
    j["sets"] = per_set;
    j["drifted"] = metrics_json(c.drifted);
    j["drifted_pooled"] = metrics_json(c.drifted_pooled);
    json events = json::array();
    for (const auto& e : c.monitor.events) {
      events.push_back({{"sample_index", e.sample_index},
                        {"window_mean", e.window_mean},
                        {"threshold", e.threshold},
                        {"status", to_string(e.status)}});
    }
    j["monitor"] = {{"first_alarm", c.monitor.first_alarm},
                    {"first_alarm_batch", c.first_alarm_batch},
                    {"alarm_count", c.monitor.alarm_count},
                    {"events", events}};
    cells.push_back(std::move(j));
  }
  json aggs = json::array();
  for (const auto& a : r.aggregates) {
    aggs.push_back({{"model", a.model},
                    {"set", a.set},
                    {"seeds", a.seeds},
                    {"failed", a.failed},
                    {"accuracy", summary_json(a.accuracy)},
                    {"mean_confidence", summary_json(a.mean_confidence)},
                    {"ece", summary_json(a.ece)}});
  }
  return json{{"format", "driftbench-result"},
              {"version", 1},
              {"driftbench", kVersion},
              {"config", r.config_echo},
              {"models", r.models},
              {"sets", sets},
              {"cells", cells},
              {"aggregates", aggs}};
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::string fmt(double v) { return text::format_double(v); }

}  // namespace

void write_result_files(const ExperimentResult& r, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  {
    auto out = open_output(out_dir / "result.json");
    out << result_to_json(r).dump(2) << '\n';
  }
  {
    auto out = open_output(out_dir / "cells.csv");
    out << "model,seed,set,batch,first_month,last_month,n,accuracy,mean_confidence,ece,failed\n";
    for (const auto& c : r.cells) {
      if (c.failed) {
        out << c.model << ',' << c.seed << ",,,,,,,,,1\n";
        continue;
      }
      for (const auto& m : c.sets) {
        out << c.model << ',' << c.seed << ',' << m.set << ',' << m.batch << ',';
        if (const auto it = r.set_months.find(m.set); it != r.set_months.end()) {
          out << it->second.first << ',' << it->second.last;
        } else {
          out << ',';
        }
        out << ',' << m.n << ',' << fmt(m.accuracy) << ',' << fmt(m.mean_confidence) << ','
            << fmt(m.ece) << ",0\n";
      }
    }
  }
  {
    auto out = open_output(out_dir / "aggregates.csv");
    out << "model,set,seeds,failed,accuracy_mean,accuracy_std,confidence_mean,confidence_std,"
           "ece_mean,ece_std\n";
    for (const auto& a : r.aggregates) {
      out << a.model << ',' << a.set << ',' << a.seeds << ',' << a.failed << ','
          << fmt(a.accuracy.mean) << ',' << fmt(a.accuracy.std) << ',' << fmt(a.mean_confidence.mean)
          << ',' << fmt(a.mean_confidence.std) << ',' << fmt(a.ece.mean) << ',' << fmt(a.ece.std)
          << '\n';
    }
  }
}

void write_report(const json& result, const std::filesystem::path& out_dir) {
  struct Row {
    double acc_mean, conf_mean, ece_mean, ece_std;
    std::size_t seeds;
  };
  std::vector<std::string> models;
  std::vector<json> sets;
  std::map<std::pair<std::string, std::string>, Row> agg;
  try {
    if (!result.is_object() || result.at("format").get<std::string>() != "driftbench-result") {
      throw DataError("not a driftbench result document");
    }
    models = result.at("models").get<std::vector<std::string>>();
    for (const auto& s : result.at("sets")) sets.push_back(s);
    for (const auto& a : result.at("aggregates")) {
      agg[{a.at("model").get<std::string>(), a.at("set").get<std::string>()}] =
          Row{a.at("accuracy").at("mean").get<double>(), a.at("mean_confidence").at("mean").get<double>(),
              a.at("ece").at("mean").get<double>(), a.at("ece").at("std").get<double>(),
              a.at("seeds").get<std::size_t>()};
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed result document: ") + e.what());
  }
  const auto lookup = [&](const std::string& model, const std::string& set) -> const Row& {
    const auto it = agg.find({model, set});
    if (it == agg.end()) throw DataError("result lacks aggregate for " + model + "/" + set);
    return it->second;
  };
  const auto cell = [](const Row& r, double v) { return r.seeds == 0 ? std::string() : fmt(v); };

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create output directory " + out_dir.string());

  std::ostringstream a;
  a << "set,first_month,last_month";
  for (const auto& m : models) a << ',' << m << "_accuracy";
  for (const auto& m : models) a << ',' << m << "_confidence";
  a << '\n';
  for (const auto& s : sets) {
    const auto name = s.at("name").get<std::string>();
    a << name << ',';
    if (s.contains("first_month")) a << s.at("first_month").get<int>();
    a << ',';
    if (s.contains("last_month")) a << s.at("last_month").get<int>();
    for (const auto& m : models) {
      const auto& r = lookup(m, name);
      a << ',' << cell(r, r.acc_mean);
    }
    for (const auto& m : models) {
      const auto& r = lookup(m, name);
      a << ',' << cell(r, r.conf_mean);
    }
    a << '\n';
  }

  std::ostringstream b;
  b << "model,val_ece_mean,val_ece_std,drifted_ece_mean,drifted_ece_std,"
       "drifted_pooled_ece_mean,drifted_pooled_ece_std\n";
  for (const auto& m : models) {
    const auto& v = lookup(m, "val");
    const auto& d = lookup(m, "drifted");
    const auto& p = lookup(m, "drifted_pooled");
    b << m << ',' << cell(v, v.ece_mean) << ',' << cell(v, v.ece_std) << ',' << cell(d, d.ece_mean)
      << ',' << cell(d, d.ece_std) << ',' << cell(p, p.ece_mean) << ',' << cell(p, p.ece_std) << '\n';
  }

  open_output(out_dir / "fig2a.csv") << a.str();
  open_output(out_dir / "fig2b.csv") << b.str();
}

}  // namespace driftbench
