#pragma once

#include "driftbench/prob.hpp"

namespace driftbench {

/// Distance-weighted k-nearest-neighbour classifier.
///
/// Neighbours are the k training rows with the smallest Euclidean distance
/// (ties by lower row index). Each contributes weight 1/(distance + 1e-12) to
/// its class. If any neighbour lies at distance zero, the zero-distance
/// neighbours share all probability mass equally.
class KnnModel final : public Classifier {
 public:
  static constexpr double kEpsilon = 1e-12;

  /// Throws ConfigError unless 1 <= k <= train.size().
  KnnModel(Dataset train, std::size_t k);

  ModelKind kind() const override { return ModelKind::knn; }
  std::size_t num_features() const override { return train_.num_features(); }
  std::size_t num_classes() const override { return train_.num_classes(); }
  ProbVector predict_proba(std::span<const double> x) const override;
  nlohmann::json to_json() const override;

  std::size_t k() const noexcept { return k_; }
  const Dataset& training_data() const noexcept { return train_; }

 private:
  Dataset train_;
  std::size_t k_;
};

}  // namespace driftbench
