#include "driftbench/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "driftbench/error.hpp"
#include "driftbench/rng.hpp"

namespace driftbench {

std::size_t MlpModel::weight_offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) off += (layer_sizes[l] + 1) * layer_sizes[l + 1];
  return off;
}

std::size_t MlpModel::bias_offset(std::size_t layer) const {
  return weight_offset(layer) + layer_sizes[layer] * layer_sizes[layer + 1];
}

bool MlpModel::has_dropout() const {
  return std::any_of(dropout.begin(), dropout.end(), [](double p) { return p > 0.0; });
}

std::vector<std::size_t> default_hidden_layers() { return {32, 16, 8}; }

std::size_t parameter_count(std::span<const std::size_t> layer_sizes) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) n += (layer_sizes[l] + 1) * layer_sizes[l + 1];
  return n;
}

MlpModel mlp_init(std::size_t num_features, std::size_t num_classes, std::uint64_t seed,
                  std::vector<std::size_t> hidden, std::vector<double> dropout) {
  if (num_features < 1 || num_classes < 1) throw ConfigError("network needs D >= 1 and C >= 1");
  if (dropout.empty()) dropout.assign(hidden.size(), 0.0);
  if (dropout.size() != hidden.size()) throw ConfigError("one dropout rate per hidden layer required");
  for (double p : dropout) {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
  }

  MlpModel m;
  m.layer_sizes.push_back(num_features);
  m.layer_sizes.insert(m.layer_sizes.end(), hidden.begin(), hidden.end());
  m.layer_sizes.push_back(num_classes);
  m.dropout = std::move(dropout);
  m.params.assign(parameter_count(m.layer_sizes), 0.0);

  Rng rng(seed);
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    const std::size_t fan_in = m.layer_sizes[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    const std::size_t off = m.weight_offset(l);
    for (std::size_t k = 0; k < fan_in * m.layer_sizes[l + 1]; ++k) {
      m.params[off + k] = rng.uniform(-limit, limit);
    }
  }
  return m;
}

namespace {

// Pre-activations and post-dropout activations of one forward pass.
struct Trace {
  std::vector<std::vector<double>> act;  // act[0] = input, act[l + 1] = output of layer l
  std::vector<std::vector<double>> pre;  // pre[l] = affine output of layer l
  std::vector<std::vector<double>> mask; // per hidden layer; empty when no dropout
};

void run_forward(const MlpModel& m, std::span<const double> x, Rng* dropout_rng, Trace& tr) {
  const std::size_t layers = m.num_layers();
  tr.act.resize(layers + 1);
  tr.pre.resize(layers);
  tr.mask.resize(layers - 1);
  tr.act[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = m.layer_sizes[l];
    const std::size_t out = m.layer_sizes[l + 1];
    const double* w = m.params.data() + m.weight_offset(l);
    const double* b = m.params.data() + m.bias_offset(l);
    const auto& a = tr.act[l];
    auto& z = tr.pre[l];
    z.resize(out);
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) s += row[i] * a[i];
      z[o] = s;
    }
    auto& next = tr.act[l + 1];
    next = z;
    if (l + 1 == layers) break;
    for (double& v : next) v = v > 0.0 ? v : 0.0;
    auto& mask = tr.mask[l];
    mask.clear();
    const double p = m.dropout[l];
    if (dropout_rng != nullptr && p > 0.0) {
      mask.resize(out);
      const double scale = 1.0 / (1.0 - p);
      for (std::size_t o = 0; o < out; ++o) {
        mask[o] = dropout_rng->uniform() < p ? 0.0 : scale;
        next[o] *= mask[o];
      }
    }
  }
}

void check_input(const MlpModel& m, std::span<const double> x) {
  if (x.size() != m.input_size()) {
    throw DataError("input has " + std::to_string(x.size()) + " features, network expects " +
                    std::to_string(m.input_size()));
  }
}

// Cross-entropy of one sample; accumulates the gradient scaled by `weight`.
double backprop(const MlpModel& m, const Trace& tr, ClassId label, double weight,
                std::vector<double>& grad) {
  const std::size_t layers = m.num_layers();
  const auto& logits = tr.pre[layers - 1];
  const double zmax = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double z : logits) denom += std::exp(z - zmax);
  const double log_norm = zmax + std::log(denom);
  const double loss = log_norm - logits[label];

  std::vector<double> delta(logits.size());
  for (std::size_t c = 0; c < logits.size(); ++c) {
    delta[c] = std::exp(logits[c] - log_norm) - (c == label ? 1.0 : 0.0);
  }
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = m.layer_sizes[l];
    const std::size_t out = m.layer_sizes[l + 1];
    const auto& a = tr.act[l];
    double* gw = grad.data() + m.weight_offset(l);
    double* gb = grad.data() + m.bias_offset(l);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o] * weight;
      gb[o] += d;
      double* row = gw + o * in;
      for (std::size_t i = 0; i < in; ++i) row[i] += d * a[i];
    }
    if (l == 0) break;
    const double* w = m.params.data() + m.weight_offset(l);
    std::vector<double> prev(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) prev[i] += row[i] * delta[o];
    }
    const auto& z = tr.pre[l - 1];
    const auto& mask = tr.mask[l - 1];
    for (std::size_t i = 0; i < in; ++i) {
      prev[i] = z[i] > 0.0 ? prev[i] : 0.0;
      if (!mask.empty()) prev[i] *= mask[i];
    }
    delta = std::move(prev);
  }
  return loss;
}

}  // namespace

std::vector<double> forward(const MlpModel& m, std::span<const double> x,
                            std::optional<std::uint64_t> dropout_seed) {
  check_input(m, x);
  Trace tr;
  if (dropout_seed) {
    Rng rng(*dropout_seed);
    run_forward(m, x, &rng, tr);
  } else {
    run_forward(m, x, nullptr, tr);
  }
  return std::move(tr.pre.back());
}

ProbVector softmax(std::span<const double> logits) {
  if (logits.empty()) throw DataError("softmax of an empty vector");
  for (double z : logits) {
    if (!std::isfinite(z)) throw DataError("softmax input is not finite");
  }
  const double zmax = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    p[c] = std::exp(logits[c] - zmax);
    sum += p[c];
  }
  for (double& v : p) v /= sum;
  return ProbVector(std::move(p));
}

LossAndGradient loss_and_gradient(const MlpModel& m, const Dataset& d,
                                  std::span<const std::size_t> rows) {
  if (d.num_features() != m.input_size()) throw DataError("dataset/network dimension mismatch");
  LossAndGradient out;
  out.gradient.assign(m.params.size(), 0.0);
  if (rows.empty()) return out;
  const double w = 1.0 / static_cast<double>(rows.size());
  Trace tr;
  for (std::size_t r : rows) {
    run_forward(m, d.row(r), nullptr, tr);
    out.loss += backprop(m, tr, d.label(r), w, out.gradient);
  }
  out.loss *= w;
  return out;
}

double mean_cross_entropy(const MlpModel& m, const Dataset& d) {
  if (d.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto logits = forward(m, d.row(i));
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double z : logits) denom += std::exp(z - zmax);
    total += zmax + std::log(denom) - logits[d.label(i)];
  }
  return total / static_cast<double>(d.size());
}

MlpModel train(MlpModel m, const Dataset& d, const TrainConfig& cfg,
               std::vector<double>* epoch_losses) {
  if (d.empty()) throw DataError("cannot train on an empty dataset");
  if (d.num_features() != m.input_size()) throw DataError("dataset/network dimension mismatch");
  if (d.num_classes() > m.output_size()) throw DataError("dataset has more classes than the network");
  if (cfg.epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(cfg.learning_rate >= 0.0)) throw ConfigError("learning rate must be nonnegative");
  if (cfg.batch_size < 1) throw ConfigError("batch size must be at least 1");

  const std::size_t n = d.size();
  const std::size_t num_params = m.params.size();
  std::vector<double> first(num_params, 0.0);
  std::vector<double> second(num_params, 0.0);
  std::vector<double> grad(num_params);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  Rng dropout_rng(derive_seed(cfg.seed, "dropout"));
  Rng* drop = m.has_dropout() ? &dropout_rng : nullptr;
  Trace tr;
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      const double w = 1.0 / static_cast<double>(stop - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < stop; ++k) {
        run_forward(m, d.row(order[k]), drop, tr);
        backprop(m, tr, d.label(order[k]), w, grad);
      }
      beta1_pow *= cfg.beta1;
      beta2_pow *= cfg.beta2;
      const double c1 = 1.0 - beta1_pow;
      const double c2 = 1.0 - beta2_pow;
      for (std::size_t p = 0; p < num_params; ++p) {
        first[p] = cfg.beta1 * first[p] + (1.0 - cfg.beta1) * grad[p];
        second[p] = cfg.beta2 * second[p] + (1.0 - cfg.beta2) * grad[p] * grad[p];
        const double mhat = first[p] / c1;
        const double vhat = second[p] / c2;
        m.params[p] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
      }
    }
    if (epoch_losses != nullptr) epoch_losses->push_back(mean_cross_entropy(m, d));
  }
  return m;
}

MlpModel fit_mlp(const Dataset& d, const TrainConfig& cfg, std::vector<double> dropout) {
  auto m = mlp_init(d.num_features(), d.num_classes(), derive_seed(cfg.seed, "init"),
                    default_hidden_layers(), std::move(dropout));
  TrainConfig member = cfg;
  member.seed = derive_seed(cfg.seed, "train");
  return train(std::move(m), d, member);
}

ProbVector mcd_predict_proba(const MlpModel& m, std::span<const double> x, std::size_t passes,
                             std::uint64_t seed) {
  check_input(m, x);
  if (!m.has_dropout() || passes == 0) return softmax(forward(m, x));
  std::vector<ProbVector> outs(passes);
  for (std::size_t k = 0; k < passes; ++k) {
    outs[k] = softmax(forward(m, x, derive_seed(seed, std::uint64_t{k})));
  }
  return mean_of(outs);
}

// ---------------------------------------------------------------------------

MlpClassifier::MlpClassifier(MlpModel model) : model_(std::move(model)) {}

ProbVector MlpClassifier::predict_proba(std::span<const double> x) const {
  check_dimension(x);
  return softmax(forward(model_, x));
}

EnsembleModel::EnsembleModel(std::vector<MlpModel> members) : members_(std::move(members)) {
  if (members_.empty()) throw ConfigError("an ensemble needs at least one member");
  for (const auto& mm : members_) {
    if (mm.layer_sizes != members_.front().layer_sizes) {
      throw ConfigError("ensemble members must share one architecture");
    }
  }
}

EnsembleModel EnsembleModel::fit(const Dataset& d, std::size_t num_members, const TrainConfig& cfg,
                                 Execution exec) {
  if (num_members < 1) throw ConfigError("ensemble size must be at least 1");
  if (d.empty()) throw DataError("cannot train on an empty dataset");
  std::vector<MlpModel> members(num_members);
  std::vector<std::string> errors(num_members);
  const auto fit_member = [&](std::size_t i) {
    TrainConfig member = cfg;
    member.seed = derive_seed(cfg.seed, std::uint64_t{i});
    try {
      members[i] = fit_mlp(d, member);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  };
  const auto n = static_cast<std::ptrdiff_t>(num_members);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) fit_member(static_cast<std::size_t>(i));
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) fit_member(static_cast<std::size_t>(i));
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw ConfigError("ensemble member failed: " + e);
  }
  return EnsembleModel(std::move(members));
}

ProbVector EnsembleModel::predict_proba(std::span<const double> x) const {
  check_dimension(x);
  std::vector<ProbVector> outs(members_.size());
  for (std::size_t i = 0; i < members_.size(); ++i) outs[i] = softmax(forward(members_[i], x));
  return mean_of(outs);
}

McdModel::McdModel(MlpModel model, std::size_t passes, std::uint64_t inference_seed)
    : model_(std::move(model)), passes_(passes), inference_seed_(inference_seed) {
  if (passes_ < 1) throw ConfigError("MC dropout needs at least one pass");
}

ProbVector McdModel::predict_proba(std::span<const double> x) const {
  check_dimension(x);
  const auto bytes = std::span(reinterpret_cast<const unsigned char*>(x.data()), x.size_bytes());
  return mcd_predict_proba(model_, x, passes_, derive_seed(inference_seed_, fnv1a(bytes)));
}

}  // namespace driftbench
