#pragma once

#include <cstdint>

#include "driftbench/prob.hpp"

namespace driftbench {

struct Kernel {
  enum class Type { linear, rbf };

  Type type = Type::rbf;
  double gamma = 1.0;  // rbf only: exp(-gamma * |a - b|^2)

  static Kernel linear() { return {Type::linear, 0.0}; }
  static Kernel rbf(double gamma) { return {Type::rbf, gamma}; }

  double operator()(std::span<const double> a, std::span<const double> b) const;
  bool operator==(const Kernel&) const = default;
};

/// 1 / (D * var(all feature values)), the "scale" heuristic.
double default_rbf_gamma(const Dataset& d);

/// Dense kernel matrix over the rows of a dataset.
class GramMatrix {
 public:
  static GramMatrix compute(const Dataset& d, const Kernel& kernel,
                            Execution exec = Execution::parallel);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return k_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> k_;
};

struct SvmOptions {
  Kernel kernel = Kernel::rbf(1.0);
  double c_reg = 1.0;
  double tol = 1e-3;
};

/// Dual solution of a binary soft-margin problem on a subset of Gram rows.
struct SmoSolution {
  std::vector<double> alpha;  // one per training row
  double bias = 0.0;
  std::size_t iterations = 0;
  double max_violation = 0.0;
};

/// SMO with maximal-violating-pair working set selection. `rows` index the
/// Gram matrix, `y` holds +1/-1 per row. Throws ConvergenceError after
/// 100 * rows.size() iterations without reaching `tol`.
SmoSolution solve_smo(const GramMatrix& gram, std::span<const std::size_t> rows,
                      std::span<const int> y, double c_reg, double tol);

/// Kernel expansion f(x) = sum_i coef_i K(sv_i, x) + bias over support vectors.
class BinarySvmModel {
 public:
  BinarySvmModel() = default;
  BinarySvmModel(std::vector<double> support_vectors, std::size_t num_features,
                 std::vector<double> coef, double bias, Kernel kernel, double c_reg);

  /// Binary fit; label 1 is the positive class, label 0 the negative.
  /// Throws DataError if a class is missing, ConfigError if c_reg <= 0.
  static BinarySvmModel fit(const Dataset& train, const SvmOptions& opts);

  /// Fit on Gram rows with explicit +1/-1 targets.
  static BinarySvmModel fit(const Dataset& data, const GramMatrix& gram,
                            std::span<const std::size_t> rows, std::span<const int> y,
                            const SvmOptions& opts, SmoSolution* solution_out = nullptr);

  double decision_value(std::span<const double> x) const;

  std::size_t num_features() const noexcept { return num_features_; }
  std::size_t num_support_vectors() const noexcept { return coef_.size(); }
  std::span<const double> support_vector(std::size_t i) const {
    return {support_vectors_.data() + i * num_features_, num_features_};
  }
  std::span<const double> coef() const noexcept { return coef_; }
  double bias() const noexcept { return bias_; }
  const Kernel& kernel() const noexcept { return kernel_; }
  double c_reg() const noexcept { return c_reg_; }

  bool operator==(const BinarySvmModel&) const = default;

 private:
  std::vector<double> support_vectors_;
  std::size_t num_features_ = 0;
  std::vector<double> coef_;  // alpha_i * y_i
  double bias_ = 0.0;
  Kernel kernel_;
  double c_reg_ = 1.0;
};

/// Sigmoid P(+ | f) = 1 / (1 + exp(a * f + b)).
struct PlattParams {
  double a = 0.0;
  double b = 0.0;

  bool operator==(const PlattParams&) const = default;
};

/// Overflow-safe sigmoid evaluation.
double platt_apply(const PlattParams& p, double f);

/// Cross-entropy of the sigmoid against Platt's smoothed targets.
double platt_objective(std::span<const double> values, std::span<const int> y,
                       const PlattParams& p);

/// Newton with backtracking on the smoothed-target likelihood. `y` holds
/// +1/-1. Stops when the gradient norm drops below 1e-8 or after 100 steps.
PlattParams platt_fit(std::span<const double> values, std::span<const int> y);

/// One-vs-rest SVM with per-class Platt scaling. Calibration values come from
/// 5-fold cross-validated refits (folds stratified by class).
class MulticlassSvmModel final : public Classifier {
 public:
  static constexpr std::size_t kFolds = 5;

  MulticlassSvmModel(std::vector<BinarySvmModel> machines, std::vector<PlattParams> platt,
                     std::size_t num_features);

  /// `opts.kernel.gamma <= 0` selects default_rbf_gamma(train).
  static MulticlassSvmModel fit(const Dataset& train, SvmOptions opts, std::uint64_t seed,
                                Execution exec = Execution::parallel);

  ModelKind kind() const override { return ModelKind::svm; }
  std::size_t num_features() const override { return num_features_; }
  std::size_t num_classes() const override { return machines_.size(); }
  ProbVector predict_proba(std::span<const double> x) const override;
  nlohmann::json to_json() const override;

  /// Per-class raw decision values.
  std::vector<double> decision_values(std::span<const double> x) const;

  const std::vector<BinarySvmModel>& machines() const noexcept { return machines_; }
  const std::vector<PlattParams>& platt() const noexcept { return platt_; }

  bool operator==(const MulticlassSvmModel& o) const {
    return machines_ == o.machines_ && platt_ == o.platt_ && num_features_ == o.num_features_;
  }

 private:
  std::vector<BinarySvmModel> machines_;
  std::vector<PlattParams> platt_;
  std::size_t num_features_ = 0;
};

/// Stratified fold id per row: rows of each class are shuffled and dealt
/// round-robin over `folds`.
std::vector<std::size_t> stratified_folds(const Dataset& d, std::size_t folds, std::uint64_t seed);

/// Normalizes per-class sigmoid outputs; uniform when all are below 1e-12.
ProbVector couple_one_vs_rest(std::span<const double> per_class);

}  // namespace driftbench
