#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "driftbench/error.hpp"
#include "driftbench/forest.hpp"
#include "driftbench/tree.hpp"
#include "test_support.hpp"

using namespace driftbench;
using test_support::make_dataset;

namespace {

double weighted_gini(const std::vector<std::size_t>& l, const std::vector<std::size_t>& r) {
  auto g = [](const std::vector<std::size_t>& c) {
    double n = 0.0, s = 0.0;
    for (auto v : c) n += static_cast<double>(v);
    if (n == 0.0) return std::pair{0.0, 0.0};
    for (auto v : c) s += (static_cast<double>(v) / n) * (static_cast<double>(v) / n);
    return std::pair{1.0 - s, n};
  };
  const auto [gl, nl] = g(l);
  const auto [gr, nr] = g(r);
  return (nl * gl + nr * gr) / (nl + nr);
}

// Best single split of one feature by enumerating every midpoint.
std::pair<double, double> best_split_oracle(const std::vector<double>& x, const std::vector<ClassId>& y,
                                            std::size_t classes) {
  auto sorted = x;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  double best = std::numeric_limits<double>::infinity(), thr = 0.0;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    const double t = 0.5 * (sorted[i] + sorted[i + 1]);
    std::vector<std::size_t> l(classes, 0), r(classes, 0);
    for (std::size_t k = 0; k < x.size(); ++k) ++(x[k] <= t ? l : r)[y[k]];
    const double g = weighted_gini(l, r);
    if (g < best - 1e-12) {
      best = g;
      thr = t;
    }
  }
  return {thr, best};
}

std::vector<std::size_t> child_counts(const TreeModel& m, int node) {
  return m.nodes()[static_cast<std::size_t>(node)].counts;
}

}  // namespace

TEST_CASE("gini of count vectors") {
  CHECK(gini(std::vector<std::size_t>{5, 0}) == 0.0);
  CHECK(gini(std::vector<std::size_t>{2, 2}) == 0.5);
  CHECK(gini(std::vector<std::size_t>{1, 1, 1}) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("single-class data gives a pure root leaf") {
  const auto d = make_dataset({{0.0}, {1.0}, {2.0}}, {1, 1, 1}, 3);
  const auto m = TreeModel::fit(d, {}, 0);
  REQUIRE(m.nodes().size() == 1);
  CHECK(m.nodes()[0].is_leaf());
  CHECK(m.predict_proba(std::vector<double>{7.0}) == ProbVector{0.0, 1.0, 0.0});
}

TEST_CASE("four 1-D points split once between 1 and 10") {
  const auto d = make_dataset({{0.0}, {1.0}, {10.0}, {11.0}}, {0, 0, 1, 1}, 2);
  const auto m = TreeModel::fit(d, {}, 0);
  REQUIRE(m.nodes().size() == 3);
  const auto& root = m.nodes()[0];
  CHECK(root.feature == 0);
  CHECK(root.threshold > 1.0);
  CHECK(root.threshold < 10.0);
  const auto oracle = best_split_oracle({0, 1, 10, 11}, {0, 0, 1, 1}, 2);
  CHECK(root.threshold == oracle.first);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(m.predict(d.row(i)) == d.label(i));
}

TEST_CASE("max_depth 0 predicts the class prior") {
  std::vector<std::vector<double>> rows;
  std::vector<ClassId> labels;
  for (int i = 0; i < 40; ++i) {
    rows.push_back({static_cast<double>(i)});
    labels.push_back(i < 10 ? 0 : 1);
  }
  const auto m = TreeModel::fit(make_dataset(rows, labels, 2), {.max_depth = 0}, 0);
  CHECK(m.nodes().size() == 1);
  CHECK(m.predict_proba(std::vector<double>{0.0}) == ProbVector{0.25, 0.75});
  CHECK(m.predict_proba(std::vector<double>{39.0}) == ProbVector{0.25, 0.75});
}

TEST_CASE("leaf frequencies are normalised counts") {
  TreeModel leaf({TreeNode{-1, 0.0, -1, -1, {3, 1}}}, 1, 2, 0);
  CHECK(leaf.predict_proba(std::vector<double>{0.0}) == ProbVector{0.75, 0.25});
  TreeModel pure({TreeNode{-1, 0.0, -1, -1, {5, 0}}}, 1, 2, 0);
  CHECK(pure.predict_proba(std::vector<double>{0.0}) == ProbVector{1.0, 0.0});
}

TEST_CASE("root split matches a brute-force oracle on random 1-D data") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(40), c = 2 + rng.below(3);
    std::vector<double> x(n);
    std::vector<ClassId> y(n);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.below(15));
      y[i] = rng.below(c);
      rows.push_back({x[i]});
    }
    const auto d = make_dataset(rows, y, c);
    const auto m = TreeModel::fit(d, {.max_depth = 1}, 0);
    const auto counts = d.class_counts();
    const double parent = gini(counts);
    const auto [thr, g] = best_split_oracle(x, y, c);
    if (g < parent - 1e-12 * static_cast<double>(n)) {
      REQUIRE_FALSE(m.nodes()[0].is_leaf());
      CHECK(m.nodes()[0].threshold == thr);
    } else {
      CHECK(m.nodes()[0].is_leaf());
    }
  }
}

TEST_CASE("every split strictly lowers weighted gini; depth and leaves are valid") {
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 20 + rng.below(200), dim = 1 + rng.below(4), c = 2 + rng.below(3);
    Dataset d(dim, c);
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : x) v = std::round(rng.normal() * 4.0) / 4.0;
      d.add(x, rng.below(c), 0);
    }
    const int max_depth = trial % 2 == 0 ? -1 : static_cast<int>(rng.below(6));
    const auto m = TreeModel::fit(d, {.max_depth = max_depth, .max_features = 0}, trial);
    if (max_depth >= 0) CHECK(m.depth() <= max_depth);
    for (const auto& node : m.nodes()) {
      std::size_t total = 0;
      for (auto v : node.counts) total += v;
      CHECK(total > 0);
      if (node.is_leaf()) continue;
      const auto l = child_counts(m, node.left), r = child_counts(m, node.right);
      CHECK(weighted_gini(l, r) < gini(node.counts));
    }
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(m.predict_proba(d.row(i)).is_simplex());
  }
}

TEST_CASE("tree errors") {
  CHECK_THROWS_AS(TreeModel::fit(Dataset(2, 2), {}, 0), DataError);
  const auto m = TreeModel::fit(make_dataset({{0.0}, {1.0}}, {0, 1}, 2), {}, 0);
  CHECK_THROWS_AS(m.predict_proba(std::vector<double>{0.0, 0.0}), DataError);
  CHECK_THROWS_AS(ForestModel::fit(Dataset(2, 2), {}, 0), DataError);
}

TEST_CASE("forest of two trees averages their outputs") {
  TreeModel a({TreeNode{-1, 0.0, -1, -1, {3, 2}}}, 1, 2, 0);
  TreeModel b({TreeNode{-1, 0.0, -1, -1, {4, 0}}}, 1, 2, 0);
  const ForestModel f({a, b}, {0, 1});
  const auto p = f.predict_proba(std::vector<double>{0.0});
  CHECK(p[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.2).epsilon(1e-15));
  const ForestModel same({a, a, a}, {0, 1, 2});
  const auto common = a.predict_proba(std::vector<double>{0.0});
  const auto agreed = same.predict_proba(std::vector<double>{0.0});
  for (std::size_t c = 0; c < 2; ++c) CHECK(std::abs(agreed[c] - common[c]) < 1e-15);
}

TEST_CASE("100-tree forest equals the recomputed mean of its trees") {
  const auto d = test_support::blobs(60, 3, 4, 3.0, 5);
  const auto f = ForestModel::fit(d, {}, 99);
  REQUIRE(f.trees().size() == 100);
  Rng rng(2);
  for (int q = 0; q < 50; ++q) {
    std::vector<double> x(4);
    for (auto& v : x) v = rng.normal() * 3.0;
    const auto p = f.predict_proba(x);
    CHECK(p.is_simplex());
    std::vector<double> sum(3, 0.0);
    std::vector<ProbVector> members;
    for (const auto& t : f.trees()) {
      const auto tp = t.predict_proba(x);
      members.push_back(tp);
      for (std::size_t c = 0; c < 3; ++c) sum[c] += tp[c];
    }
    for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(p[c] - sum[c] / 100.0) < 1e-12);
    CHECK(p == mean_of(members));
  }
}

TEST_CASE("singleton forest without bootstrap matches the decision tree") {
  const auto d = test_support::blobs(80, 3, 5, 2.0, 7);
  ForestOptions fo;
  fo.num_trees = 1;
  fo.max_depth = 6;
  fo.max_features = d.num_features();
  fo.bootstrap = false;
  const auto f = ForestModel::fit(d, fo, 13);
  const auto t = TreeModel::fit(d, {.max_depth = 6, .max_features = 0}, 13);
  CHECK(f.trees().front() == t);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(f.predict_proba(d.row(i)) == t.predict_proba(d.row(i)));
}

TEST_CASE("forest fits are seed-deterministic and seeds are derived per tree") {
  const auto d = test_support::blobs(50, 2, 3, 2.0, 1);
  ForestOptions fo;
  fo.num_trees = 10;
  const auto a = ForestModel::fit(d, fo, 4);
  const auto b = ForestModel::fit(d, fo, 4);
  const auto c = ForestModel::fit(d, fo, 5);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  for (std::size_t i = 0; i < 10; ++i) CHECK(a.tree_seeds()[i] == derive_seed(4, std::uint64_t{i}));
  // A prefix of trees does not depend on the total count.
  fo.num_trees = 4;
  const auto prefix = ForestModel::fit(d, fo, 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(prefix.trees()[i] == a.trees()[i]);
}

TEST_CASE("forest separates well-separated blobs on the training data") {
  const auto d = test_support::blobs(300, 4, 8, 10.0, 3);
  const auto f = ForestModel::fit(d, {}, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < d.size(); ++i) correct += f.predict(d.row(i)) == d.label(i);
  CHECK(static_cast<double>(correct) / static_cast<double>(d.size()) >= 0.99);
}
