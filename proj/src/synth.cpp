#include "driftbench/synth.hpp"

#include <cmath>

#include "driftbench/error.hpp"
#include "driftbench/rng.hpp"

namespace driftbench {

void SynthConfig::validate() const {
  if (num_classes < 1 || num_features < 1 || samples_per_batch < 1 || num_batches < 1) {
    throw ConfigError("synthetic stream counts must all be at least 1");
  }
  if (!(noise_deviation > 0.0) || !std::isfinite(noise_deviation)) {
    throw ConfigError("noise_deviation must be positive");
  }
  if (!(gain_decay_per_batch >= 0.0 && gain_decay_per_batch <= 1.0)) {
    throw ConfigError("gain_decay_per_batch must lie in [0, 1]");
  }
  if (!std::isfinite(class_separation) || !std::isfinite(offset_drift_per_batch)) {
    throw ConfigError("class_separation and offset_drift_per_batch must be finite");
  }
}

std::vector<double> class_mean(const SynthConfig& cfg, ClassId c) {
  std::vector<double> mu(cfg.num_features);
  for (std::size_t j = 0; j < mu.size(); ++j) mu[j] = 0.5 * cfg.class_separation * static_cast<double>(j);
  mu[c % cfg.num_features] += cfg.class_separation / std::sqrt(2.0);
  return mu;
}

double drifted_mean_distance(const SynthConfig& cfg, ClassId a, ClassId b, BatchId t) {
  // The offset is common to all classes and cancels.
  const double gain = std::pow(1.0 - cfg.gain_decay_per_batch, t);
  const auto ma = class_mean(cfg, a);
  const auto mb = class_mean(cfg, b);
  double s = 0.0;
  for (std::size_t j = 0; j < ma.size(); ++j) s += (ma[j] - mb[j]) * (ma[j] - mb[j]);
  return gain * std::sqrt(s);
}

Dataset generate_drift_stream(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Dataset d(cfg.num_features, cfg.num_classes);
  std::map<BatchId, MonthRange> months;
  std::vector<std::vector<double>> means;
  for (ClassId c = 0; c < cfg.num_classes; ++c) means.push_back(class_mean(cfg, c));

  std::vector<double> x(cfg.num_features);
  for (std::size_t t = 0; t < cfg.num_batches; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<ClassId> labels(cfg.samples_per_batch);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % cfg.num_classes;
    rng.shuffle(labels);

    const double gain = std::pow(1.0 - cfg.gain_decay_per_batch, static_cast<double>(t));
    const double offset = static_cast<double>(t) * cfg.offset_drift_per_batch;
    for (ClassId c : labels) {
      for (std::size_t j = 0; j < cfg.num_features; ++j) {
        const double physical = means[c][j] + cfg.noise_deviation * rng.normal();
        x[j] = gain * physical + offset;
      }
      d.add(x, c, static_cast<BatchId>(t));
    }
    const int month = static_cast<int>(t) + 1;
    months[static_cast<BatchId>(t)] = {month, month};
  }
  d.set_batch_months(std::move(months));
  return d;
}

}  // namespace driftbench
