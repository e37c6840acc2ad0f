#pragma once

#include <cstdint>

#include "driftbench/tree.hpp"

namespace driftbench {

struct ForestOptions {
  std::size_t num_trees = 100;
  int max_depth = -1;            // unlimited
  std::size_t max_features = 0;  // 0 = ceil(sqrt(D))
  bool bootstrap = true;         // false only in tests: every tree sees all rows once
};

/// Random forest whose probability is the plain mean of its trees' leaf
/// frequencies. Tree i draws its bootstrap sample and split features from
/// derive_seed(seed, i), so trees can be grown in any order or concurrently.
class ForestModel final : public Classifier {
 public:
  ForestModel(std::vector<TreeModel> trees, std::vector<std::uint64_t> tree_seeds);

  static ForestModel fit(const Dataset& train, const ForestOptions& opts, std::uint64_t seed,
                         Execution exec = Execution::parallel);

  ModelKind kind() const override { return ModelKind::rf; }
  std::size_t num_features() const override { return trees_.front().num_features(); }
  std::size_t num_classes() const override { return trees_.front().num_classes(); }
  ProbVector predict_proba(std::span<const double> x) const override;
  nlohmann::json to_json() const override;

  const std::vector<TreeModel>& trees() const noexcept { return trees_; }
  const std::vector<std::uint64_t>& tree_seeds() const noexcept { return tree_seeds_; }

  bool operator==(const ForestModel& o) const {
    return trees_ == o.trees_ && tree_seeds_ == o.tree_seeds_;
  }

 private:
  std::vector<TreeModel> trees_;
  std::vector<std::uint64_t> tree_seeds_;
};

}  // namespace driftbench
