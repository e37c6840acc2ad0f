#include "driftbench/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "driftbench/error.hpp"

namespace driftbench {

KnnModel::KnnModel(Dataset train, std::size_t k) : train_(std::move(train)), k_(k) {
  if (k_ < 1 || k_ > train_.size()) {
    throw ConfigError("KNN needs 1 <= k <= training size (k = " + std::to_string(k_) +
                      ", n = " + std::to_string(train_.size()) + ")");
  }
}

ProbVector KnnModel::predict_proba(std::span<const double> x) const {
  check_dimension(x);
  const std::size_t n = train_.size();
  const std::size_t dim = train_.num_features();

  struct Candidate {
    double sq_dist;
    std::size_t index;
  };
  std::vector<Candidate> cand(n);
  const double* base = train_.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = base + i * dim;
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double diff = r[j] - x[j];
      s += diff * diff;
    }
    cand[i] = {s, i};
  }
  const auto closer = [](const Candidate& a, const Candidate& b) {
    return a.sq_dist < b.sq_dist || (a.sq_dist == b.sq_dist && a.index < b.index);
  };
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k_), cand.end(), closer);

  std::vector<double> probs(train_.num_classes(), 0.0);
  const auto neighbours = std::span(cand).first(k_);
  const auto exact = static_cast<std::size_t>(std::count_if(
      neighbours.begin(), neighbours.end(), [](const Candidate& c) { return c.sq_dist == 0.0; }));
  if (exact > 0) {
    for (const auto& c : neighbours) {
      if (c.sq_dist == 0.0) probs[train_.label(c.index)] += 1.0 / static_cast<double>(exact);
    }
    return ProbVector(std::move(probs));
  }

  double total = 0.0;
  for (const auto& c : neighbours) {
    const double w = 1.0 / (std::sqrt(c.sq_dist) + kEpsilon);
    probs[train_.label(c.index)] += w;
    total += w;
  }
  for (double& p : probs) p /= total;
  return ProbVector(std::move(probs));
}

}  // namespace driftbench
