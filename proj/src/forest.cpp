#include "driftbench/forest.hpp"

#include <cmath>
#include <numeric>

#include "driftbench/error.hpp"
#include "driftbench/rng.hpp"

namespace driftbench {

namespace {

TreeModel grow_tree(const Dataset& train, const ForestOptions& opts, const TreeOptions& tree_opts,
                    std::uint64_t tree_seed) {
  std::vector<std::size_t> rows(train.size());
  if (opts.bootstrap) {
    Rng rng(derive_seed(tree_seed, "bootstrap"));
    for (auto& r : rows) r = static_cast<std::size_t>(rng.below(train.size()));
  } else {
    std::iota(rows.begin(), rows.end(), std::size_t{0});
  }
  return TreeModel::fit(train, rows, tree_opts, derive_seed(tree_seed, "features"));
}

}  // namespace

ForestModel::ForestModel(std::vector<TreeModel> trees, std::vector<std::uint64_t> tree_seeds)
    : trees_(std::move(trees)), tree_seeds_(std::move(tree_seeds)) {
  if (trees_.empty()) throw ConfigError("a forest needs at least one tree");
  if (tree_seeds_.size() != trees_.size()) throw ConfigError("one seed per tree required");
}

ForestModel ForestModel::fit(const Dataset& train, const ForestOptions& opts, std::uint64_t seed,
                             Execution exec) {
  if (train.empty()) throw DataError("cannot fit a random forest on an empty dataset");
  if (opts.num_trees < 1) throw ConfigError("num_trees must be at least 1");
  TreeOptions tree_opts;
  tree_opts.max_depth = opts.max_depth;
  tree_opts.max_features =
      opts.max_features != 0
          ? opts.max_features
          : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(train.num_features()))));

  std::vector<std::uint64_t> seeds(opts.num_trees);
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = derive_seed(seed, std::uint64_t{i});
  std::vector<TreeModel> trees(opts.num_trees);
  const auto n = static_cast<std::ptrdiff_t>(opts.num_trees);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) trees[i] = grow_tree(train, opts, tree_opts, seeds[i]);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) trees[i] = grow_tree(train, opts, tree_opts, seeds[i]);
  }
  return ForestModel(std::move(trees), std::move(seeds));
}

ProbVector ForestModel::predict_proba(std::span<const double> x) const {
  check_dimension(x);
  std::vector<ProbVector> member(trees_.size());
  for (std::size_t t = 0; t < trees_.size(); ++t) member[t] = trees_[t].predict_proba(x);
  return mean_of(member);
}

}  // namespace driftbench
