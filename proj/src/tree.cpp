#include "driftbench/tree.hpp"

#include <algorithm>
#include <numeric>

#include "driftbench/error.hpp"
#include "driftbench/rng.hpp"

namespace driftbench {

double gini(std::span<const std::size_t> counts) {
  const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  if (n == 0.0) return 0.0;
  double sq = 0.0;
  for (std::size_t c : counts) sq += static_cast<double>(c) * static_cast<double>(c);
  return 1.0 - sq / (n * n);
}

namespace {

// Sum of squared class counts divided by the node size. Larger is purer;
// n * gini = n - purity.
double purity(const std::vector<std::size_t>& counts, std::size_t n) {
  double sq = 0.0;
  for (std::size_t c : counts) sq += static_cast<double>(c) * static_cast<double>(c);
  return sq / static_cast<double>(n);
}

class Builder {
 public:
  Builder(const Dataset& data, const TreeOptions& opts, std::uint64_t seed)
      : data_(data), opts_(opts), rng_(seed) {}

  std::vector<TreeNode> build(std::vector<std::size_t> rows) {
    grow(std::move(rows), 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double purity = 0.0;
  };

  std::vector<std::size_t> class_counts(const std::vector<std::size_t>& rows) const {
    std::vector<std::size_t> counts(data_.num_classes(), 0);
    for (std::size_t r : rows) ++counts[data_.label(r)];
    return counts;
  }

  std::vector<std::size_t> candidate_features() {
    const std::size_t dim = data_.num_features();
    std::vector<std::size_t> all(dim);
    std::iota(all.begin(), all.end(), std::size_t{0});
    if (opts_.max_features == 0 || opts_.max_features >= dim) return all;
    // Partial Fisher-Yates draw without replacement, then ascending order so
    // ties still resolve to the lowest feature index.
    for (std::size_t i = 0; i < opts_.max_features; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_.below(dim - i));
      std::swap(all[i], all[j]);
    }
    all.resize(opts_.max_features);
    std::sort(all.begin(), all.end());
    return all;
  }

  Split best_split(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& counts) {
    const std::size_t n = rows.size();
    const double node_impurity = static_cast<double>(n) - purity(counts, n);
    Split best;
    double best_impurity = node_impurity;

    std::vector<std::pair<double, ClassId>> column(n);
    std::vector<std::size_t> left(data_.num_classes());
    std::vector<std::size_t> right(data_.num_classes());
    for (std::size_t f : candidate_features()) {
      for (std::size_t i = 0; i < n; ++i) column[i] = {data_.row(rows[i])[f], data_.label(rows[i])};
      std::sort(column.begin(), column.end());
      std::fill(left.begin(), left.end(), 0);
      right = counts;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        ++left[column[i].second];
        --right[column[i].second];
        const double lo = column[i].first;
        const double hi = column[i + 1].first;
        if (!(lo < hi)) continue;
        const std::size_t n_left = i + 1;
        const std::size_t n_right = n - n_left;
        const double impurity = static_cast<double>(n_left) - purity(left, n_left) +
                                static_cast<double>(n_right) - purity(right, n_right);
        if (impurity < best_impurity) {
          best_impurity = impurity;
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid < hi)) mid = lo;
          best = {static_cast<int>(f), mid, impurity};
        }
      }
    }
    // Require a reduction beyond rounding noise.
    if (best.feature >= 0 && !(node_impurity - best_impurity > 1e-12 * static_cast<double>(n))) {
      best.feature = -1;
    }
    return best;
  }

  int grow(std::vector<std::size_t> rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{});
    auto counts = class_counts(rows);
    const bool pure = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) <= 1;
    const bool depth_left = opts_.max_depth < 0 || depth < opts_.max_depth;

    Split split;
    if (!pure && depth_left && rows.size() > 1) split = best_split(rows, counts);
    nodes_[id].counts = std::move(counts);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (std::size_t r : rows) {
      (data_.row(r)[static_cast<std::size_t>(split.feature)] <= split.threshold ? left_rows : right_rows)
          .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    nodes_[id].feature = split.feature;
    nodes_[id].threshold = split.threshold;
    const int l = grow(std::move(left_rows), depth + 1);
    const int r = grow(std::move(right_rows), depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  const Dataset& data_;
  const TreeOptions& opts_;
  Rng rng_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

TreeModel::TreeModel(std::vector<TreeNode> nodes, std::size_t num_features, std::size_t num_classes,
                     int max_depth)
    : nodes_(std::move(nodes)),
      num_features_(num_features),
      num_classes_(num_classes),
      max_depth_(max_depth) {}

TreeModel TreeModel::fit(const Dataset& train, const TreeOptions& opts, std::uint64_t seed) {
  std::vector<std::size_t> rows(train.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit(train, rows, opts, seed);
}

TreeModel TreeModel::fit(const Dataset& train, std::span<const std::size_t> rows,
                         const TreeOptions& opts, std::uint64_t seed) {
  if (rows.empty()) throw DataError("cannot fit a decision tree on an empty dataset");
  Builder builder(train, opts, seed);
  auto nodes = builder.build({rows.begin(), rows.end()});
  return TreeModel(std::move(nodes), train.num_features(), train.num_classes(), opts.max_depth);
}

const TreeNode& TreeModel::leaf_for(std::span<const double> x) const {
  const TreeNode* node = &nodes_.front();
  while (!node->is_leaf()) {
    node = &nodes_[static_cast<std::size_t>(
        x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left : node->right)];
  }
  return *node;
}

ProbVector TreeModel::predict_proba(std::span<const double> x) const {
  check_dimension(x);
  const auto& counts = leaf_for(x).counts;
  const double total =
      static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  std::vector<double> probs(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) probs[c] = static_cast<double>(counts[c]) / total;
  return ProbVector(std::move(probs));
}

int TreeModel::depth() const {
  std::vector<int> depth_of(nodes_.size(), 0);
  int deepest = 0;
  // Children are always appended after their parent.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& node = nodes_[i];
    deepest = std::max(deepest, depth_of[i]);
    if (!node.is_leaf()) {
      depth_of[static_cast<std::size_t>(node.left)] = depth_of[i] + 1;
      depth_of[static_cast<std::size_t>(node.right)] = depth_of[i] + 1;
    }
  }
  return deepest;
}

}  // namespace driftbench
