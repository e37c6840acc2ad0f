#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "driftbench/prob.hpp"

namespace driftbench {

/// Numeric hyperparameters keyed by name. Recognised keys per family:
///   SVM     c (1), gamma (0 = 1/(D var X)), linear (0), tol (1e-3)
///   DT      max_depth (6)
///   KNN     k (5)
///   RF      num_trees (100), max_depth (-1 = unlimited), max_features (0 = ceil sqrt D)
///   NN      epochs (50), learning_rate (1e-3), batch_size (32)
///   NN-Ens  as NN plus members (10)
///   NN-MCD  as NN plus dropout (0.2), passes (20)
using Hyperparams = std::map<std::string, double>;

struct ModelSpec {
  ModelKind kind = ModelKind::rf;
  Hyperparams params;  // overrides on top of the family defaults
};

Hyperparams default_hyperparams(ModelKind kind);

/// Defaults overlaid with `overrides`. Throws ConfigError on an unknown key.
Hyperparams resolve_hyperparams(ModelKind kind, const Hyperparams& overrides);

/// Lower-case config prefix of a family ("svm", "nn_ens", ...).
std::string config_prefix(ModelKind kind);

std::unique_ptr<Classifier> fit_model(const ModelSpec& spec, const Dataset& train,
                                      std::uint64_t seed, Execution exec = Execution::parallel);

/// Hyperparameter axes in declaration order.
using Grid = std::vector<std::pair<std::string, std::vector<double>>>;

/// Exhaustive search over the Cartesian product of `grid` (first axis
/// outermost), scored by accuracy on `val_inner`. The first best combination
/// in enumeration order wins. Returns the winning overrides merged into
/// `base.params`.
Hyperparams grid_search(const Dataset& train, const Dataset& val_inner, const ModelSpec& base,
                        const Grid& grid, std::uint64_t seed, Execution exec = Execution::parallel);

}  // namespace driftbench
