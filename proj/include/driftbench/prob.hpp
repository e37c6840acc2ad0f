#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftbench/data.hpp"
#include "driftbench/parallel.hpp"

namespace driftbench {

/// Per-class probability estimate p(y = c | x, theta).
class ProbVector {
 public:
  ProbVector() = default;
  explicit ProbVector(std::vector<double> probs) : probs_(std::move(probs)) {}
  ProbVector(std::initializer_list<double> probs) : probs_(probs) {}

  static ProbVector uniform(std::size_t num_classes);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t c) const { return probs_[c]; }
  std::span<const double> values() const noexcept { return probs_; }

  /// Lowest class id among the maximal entries.
  ClassId argmax() const;
  /// Maximum entry (top-label confidence).
  double confidence() const;

  /// Entries nonnegative, finite and summing to 1 within `tol`.
  bool is_simplex(double tol = 1e-9) const;

  bool operator==(const ProbVector&) const = default;

 private:
  std::vector<double> probs_;
};

/// Arithmetic mean of equally sized probability vectors, accumulated in order.
ProbVector mean_of(std::span<const ProbVector> members);

enum class ModelKind { svm, dt, knn, rf, nn, nn_ens, nn_mcd };

std::string to_string(ModelKind kind);
/// Accepts the display names ("SVM", "NN-Ens", ...) case-insensitively.
ModelKind model_kind_from_string(const std::string& name);
const std::vector<ModelKind>& all_model_kinds();

/// Shared contract of every fitted model: deterministic predict_proba and
/// argmax prediction with ties going to the lowest class id.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual ModelKind kind() const = 0;
  virtual std::size_t num_features() const = 0;
  virtual std::size_t num_classes() const = 0;
  virtual ProbVector predict_proba(std::span<const double> x) const = 0;

  ClassId predict(std::span<const double> x) const { return predict_proba(x).argmax(); }

  /// One ProbVector per row of `d`.
  virtual std::vector<ProbVector> predict_proba_all(const Dataset& d,
                                                    Execution exec = Execution::parallel) const;

  /// Versioned JSON document; see model_io.hpp.
  virtual nlohmann::json to_json() const = 0;

 protected:
  void check_dimension(std::span<const double> x) const;
};

}  // namespace driftbench
