#pragma once

#include <cstdint>

#include "driftbench/prob.hpp"

namespace driftbench {

struct TreeOptions {
  int max_depth = 6;             // root has depth 0; negative = unlimited
  std::size_t max_features = 0;  // candidate features per split; 0 = all
};

/// CART node. Leaves have `feature < 0`. Every node keeps the class counts of
/// the training rows that reached it.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<std::size_t> counts;

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Gini impurity of a count vector.
double gini(std::span<const std::size_t> counts);

/// Binary classification tree grown greedily on weighted Gini impurity.
///
/// Candidate thresholds are midpoints of consecutive distinct sorted values;
/// rows with x[feature] <= threshold go left. Growth stops at max_depth, at a
/// pure node, or when no split strictly lowers the weighted impurity. Equal
/// impurities resolve to the lowest feature index, then the lowest threshold.
class TreeModel final : public Classifier {
 public:
  TreeModel() = default;
  TreeModel(std::vector<TreeNode> nodes, std::size_t num_features, std::size_t num_classes,
            int max_depth);

  /// Fits on all rows of `train`. Throws DataError on an empty dataset.
  static TreeModel fit(const Dataset& train, const TreeOptions& opts, std::uint64_t seed);

  /// Fits on `rows` (indices into `train`, repeats allowed).
  static TreeModel fit(const Dataset& train, std::span<const std::size_t> rows,
                       const TreeOptions& opts, std::uint64_t seed);

  ModelKind kind() const override { return ModelKind::dt; }
  std::size_t num_features() const override { return num_features_; }
  std::size_t num_classes() const override { return num_classes_; }
  ProbVector predict_proba(std::span<const double> x) const override;
  nlohmann::json to_json() const override;

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& leaf_for(std::span<const double> x) const;
  int max_depth() const noexcept { return max_depth_; }
  /// Depth of the deepest leaf (root-only tree = 0).
  int depth() const;

  bool operator==(const TreeModel& o) const {
    return nodes_ == o.nodes_ && num_features_ == o.num_features_ &&
           num_classes_ == o.num_classes_ && max_depth_ == o.max_depth_;
  }

 private:
  std::vector<TreeNode> nodes_;
  std::size_t num_features_ = 0;
  std::size_t num_classes_ = 0;
  int max_depth_ = 0;
};

}  // namespace driftbench
