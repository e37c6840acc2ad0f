#pragma once

#include <cstdint>
#include <optional>

#include "driftbench/prob.hpp"

namespace driftbench {

/// Fully connected ReLU network with a linear output layer; softmax is applied
/// by the callers that need probabilities. All parameters live in one flat
/// vector: for each layer, the weight matrix (row-major, out x in) followed by
/// its bias.
struct MlpModel {
  std::vector<std::size_t> layer_sizes;  // input, hidden..., output
  std::vector<double> params;
  std::vector<double> dropout;  // rate applied after each hidden layer

  std::size_t num_layers() const noexcept { return layer_sizes.size() - 1; }
  std::size_t input_size() const noexcept { return layer_sizes.front(); }
  std::size_t output_size() const noexcept { return layer_sizes.back(); }
  std::size_t weight_offset(std::size_t layer) const;
  std::size_t bias_offset(std::size_t layer) const;
  bool has_dropout() const;

  bool operator==(const MlpModel&) const = default;
};

/// Default architecture: hidden widths 32, 16, 8.
std::vector<std::size_t> default_hidden_layers();

/// He-uniform weights U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)), zero biases.
/// `dropout` gives one rate per hidden layer (empty = no dropout).
MlpModel mlp_init(std::size_t num_features, std::size_t num_classes, std::uint64_t seed,
                  std::vector<std::size_t> hidden = default_hidden_layers(),
                  std::vector<double> dropout = {});

/// Number of trainable parameters for the given layer sizes.
std::size_t parameter_count(std::span<const std::size_t> layer_sizes);

/// Logits for one input. With a dropout seed, each hidden unit of a layer with
/// rate p is zeroed with probability p and survivors are scaled by 1/(1-p).
std::vector<double> forward(const MlpModel& m, std::span<const double> x,
                            std::optional<std::uint64_t> dropout_seed = std::nullopt);

/// Max-subtracted softmax. Throws DataError on non-finite logits.
ProbVector softmax(std::span<const double> logits);

struct TrainConfig {
  std::size_t epochs = 50;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  std::uint64_t seed = 0;
  bool shuffle = true;  // false + batch_size >= n gives deterministic full-batch descent
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // same layout as MlpModel::params
};

/// Mean cross-entropy over `rows` of `d` and its exact gradient, dropout off.
LossAndGradient loss_and_gradient(const MlpModel& m, const Dataset& d,
                                  std::span<const std::size_t> rows);

/// Mean cross-entropy over all rows, dropout off.
double mean_cross_entropy(const MlpModel& m, const Dataset& d);

/// Mini-batch Adam on mean cross-entropy. Dropout is active iff the model has
/// a nonzero rate. Optional `epoch_losses` receives the full-data loss after
/// each epoch (dropout off).
MlpModel train(MlpModel m, const Dataset& d, const TrainConfig& cfg,
               std::vector<double>* epoch_losses = nullptr);

/// mlp_init with derive_seed(cfg.seed, "init") followed by train with
/// derive_seed(cfg.seed, "train").
MlpModel fit_mlp(const Dataset& d, const TrainConfig& cfg, std::vector<double> dropout = {});

/// Mean of `passes` dropout-active softmax outputs; pass k uses
/// derive_seed(seed, k). Without dropout this is one deterministic pass.
ProbVector mcd_predict_proba(const MlpModel& m, std::span<const double> x, std::size_t passes,
                             std::uint64_t seed);

/// Max-softmax network.
class MlpClassifier final : public Classifier {
 public:
  explicit MlpClassifier(MlpModel model);

  ModelKind kind() const override { return ModelKind::nn; }
  std::size_t num_features() const override { return model_.input_size(); }
  std::size_t num_classes() const override { return model_.output_size(); }
  ProbVector predict_proba(std::span<const double> x) const override;
  nlohmann::json to_json() const override;

  const MlpModel& model() const noexcept { return model_; }

 private:
  MlpModel model_;
};

/// Deep ensemble: independently initialised and shuffled members, each trained
/// on the full training set; the output is the mean member softmax.
class EnsembleModel final : public Classifier {
 public:
  explicit EnsembleModel(std::vector<MlpModel> members);

  /// Member i is fit_mlp with seed derive_seed(cfg.seed, i).
  static EnsembleModel fit(const Dataset& d, std::size_t num_members, const TrainConfig& cfg,
                           Execution exec = Execution::parallel);

  ModelKind kind() const override { return ModelKind::nn_ens; }
  std::size_t num_features() const override { return members_.front().input_size(); }
  std::size_t num_classes() const override { return members_.front().output_size(); }
  ProbVector predict_proba(std::span<const double> x) const override;
  nlohmann::json to_json() const override;

  const std::vector<MlpModel>& members() const noexcept { return members_; }

 private:
  std::vector<MlpModel> members_;
};

/// Monte-Carlo dropout: dropout stays on at inference. The per-query seed is
/// derived from `inference_seed` and the query's bytes, so results do not
/// depend on evaluation order.
class McdModel final : public Classifier {
 public:
  McdModel(MlpModel model, std::size_t passes, std::uint64_t inference_seed);

  ModelKind kind() const override { return ModelKind::nn_mcd; }
  std::size_t num_features() const override { return model_.input_size(); }
  std::size_t num_classes() const override { return model_.output_size(); }
  ProbVector predict_proba(std::span<const double> x) const override;
  nlohmann::json to_json() const override;

  const MlpModel& model() const noexcept { return model_; }
  std::size_t passes() const noexcept { return passes_; }
  std::uint64_t inference_seed() const noexcept { return inference_seed_; }

 private:
  MlpModel model_;
  std::size_t passes_;
  std::uint64_t inference_seed_;
};

}  // namespace driftbench
