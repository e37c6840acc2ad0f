#include "driftbench/roster.hpp"

#include <cmath>

#include "driftbench/error.hpp"
#include "driftbench/forest.hpp"
#include "driftbench/knn.hpp"
#include "driftbench/metrics.hpp"
#include "driftbench/neural.hpp"
#include "driftbench/rng.hpp"
#include "driftbench/svm.hpp"
#include "driftbench/tree.hpp"

namespace driftbench {

Hyperparams default_hyperparams(ModelKind kind) {
  const Hyperparams nn{{"epochs", 50}, {"learning_rate", 1e-3}, {"batch_size", 32}};
  switch (kind) {
    case ModelKind::svm: return {{"c", 1.0}, {"gamma", 0.0}, {"linear", 0.0}, {"tol", 1e-3}};
    case ModelKind::dt: return {{"max_depth", 6}};
    case ModelKind::knn: return {{"k", 5}};
    case ModelKind::rf: return {{"num_trees", 100}, {"max_depth", -1}, {"max_features", 0}};
    case ModelKind::nn: return nn;
    case ModelKind::nn_ens: {
      auto h = nn;
      h["members"] = 10;
      return h;
    }
    case ModelKind::nn_mcd: {
      auto h = nn;
      h["dropout"] = 0.2;
      h["passes"] = 20;
      return h;
    }
  }
  return {};
}

Hyperparams resolve_hyperparams(ModelKind kind, const Hyperparams& overrides) {
  auto h = default_hyperparams(kind);
  for (const auto& [key, value] : overrides) {
    if (!h.contains(key)) {
      throw ConfigError("unknown hyperparameter '" + key + "' for model " + to_string(kind));
    }
    if (!std::isfinite(value)) throw ConfigError("hyperparameter '" + key + "' is not finite");
    h[key] = value;
  }
  return h;
}

std::string config_prefix(ModelKind kind) {
  switch (kind) {
    case ModelKind::svm: return "svm";
    case ModelKind::dt: return "dt";
    case ModelKind::knn: return "knn";
    case ModelKind::rf: return "rf";
    case ModelKind::nn: return "nn";
    case ModelKind::nn_ens: return "nn_ens";
    case ModelKind::nn_mcd: return "nn_mcd";
  }
  return "?";
}

namespace {

std::size_t as_count(const Hyperparams& h, const std::string& key, std::size_t min) {
  const double v = h.at(key);
  if (v != std::floor(v) || v < static_cast<double>(min)) {
    throw ConfigError("hyperparameter '" + key + "' must be an integer >= " + std::to_string(min));
  }
  return static_cast<std::size_t>(v);
}

int as_depth(const Hyperparams& h, const std::string& key) {
  const double v = h.at(key);
  if (v != std::floor(v)) throw ConfigError("hyperparameter '" + key + "' must be an integer");
  return v < 0 ? -1 : static_cast<int>(v);
}

TrainConfig train_config(const Hyperparams& h, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = as_count(h, "epochs", 1);
  cfg.learning_rate = h.at("learning_rate");
  cfg.batch_size = as_count(h, "batch_size", 1);
  cfg.seed = seed;
  if (!(cfg.learning_rate >= 0.0)) throw ConfigError("learning_rate must be nonnegative");
  return cfg;
}

}  // namespace

std::unique_ptr<Classifier> fit_model(const ModelSpec& spec, const Dataset& train,
                                      std::uint64_t seed, Execution exec) {
  const auto h = resolve_hyperparams(spec.kind, spec.params);
  switch (spec.kind) {
    case ModelKind::svm: {
      SvmOptions opts;
      opts.c_reg = h.at("c");
      opts.tol = h.at("tol");
      opts.kernel = h.at("linear") != 0.0 ? Kernel::linear() : Kernel::rbf(h.at("gamma"));
      return std::make_unique<MulticlassSvmModel>(MulticlassSvmModel::fit(train, opts, seed, exec));
    }
    case ModelKind::dt: {
      TreeOptions opts;
      opts.max_depth = as_depth(h, "max_depth");
      return std::make_unique<TreeModel>(TreeModel::fit(train, opts, seed));
    }
    case ModelKind::knn:
      return std::make_unique<KnnModel>(train, as_count(h, "k", 1));
    case ModelKind::rf: {
      ForestOptions opts;
      opts.num_trees = as_count(h, "num_trees", 1);
      opts.max_depth = as_depth(h, "max_depth");
      opts.max_features = as_count(h, "max_features", 0);
      return std::make_unique<ForestModel>(ForestModel::fit(train, opts, seed, exec));
    }
    case ModelKind::nn:
      return std::make_unique<MlpClassifier>(fit_mlp(train, train_config(h, seed)));
    case ModelKind::nn_ens:
      return std::make_unique<EnsembleModel>(
          EnsembleModel::fit(train, as_count(h, "members", 1), train_config(h, seed), exec));
    case ModelKind::nn_mcd: {
      const double p = h.at("dropout");
      // Dropout after the first two hidden layers only.
      auto m = fit_mlp(train, train_config(h, seed), {p, p, 0.0});
      return std::make_unique<McdModel>(std::move(m), as_count(h, "passes", 1),
                                        derive_seed(seed, "inference"));
    }
  }
  throw ConfigError("unsupported model kind");
}

Hyperparams grid_search(const Dataset& train, const Dataset& val_inner, const ModelSpec& base,
                        const Grid& grid, std::uint64_t seed, Execution exec) {
  if (grid.empty()) throw ConfigError("grid search needs at least one axis");
  for (const auto& [name, values] : grid) {
    if (values.empty()) throw ConfigError("grid axis '" + name + "' is empty");
  }
  if (val_inner.empty()) throw DataError("grid search needs a nonempty inner validation set");

  std::vector<std::size_t> pos(grid.size(), 0);
  Hyperparams best;
  double best_acc = -1.0;
  while (true) {
    ModelSpec cand = base;
    for (std::size_t a = 0; a < grid.size(); ++a) cand.params[grid[a].first] = grid[a].second[pos[a]];
    const auto model = fit_model(cand, train, seed, exec);
    const double acc = accuracy(make_records(model->predict_proba_all(val_inner, exec), val_inner));
    if (acc > best_acc) {
      best_acc = acc;
      best = cand.params;
    }
    // Odometer increment, last axis fastest.
    std::size_t a = grid.size();
    while (a > 0) {
      --a;
      if (++pos[a] < grid[a].second.size()) break;
      pos[a] = 0;
      if (a == 0) return best;
    }
  }
}

}  // namespace driftbench
