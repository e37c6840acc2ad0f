#pragma once

#include <cstdint>

#include "driftbench/data.hpp"

namespace driftbench {

/// Gaussian class blobs observed through a degrading sensor.
///
/// Class c is centred at b + (separation / sqrt 2) * e_(c mod D), where the
/// sensor baseline b_j = j * separation / 2, so distinct classes sit at mutual
/// distance `separation` when C <= D. Batch t reads the
/// noisy physical value v and reports (1 - gain_decay_per_batch)^t * v
/// + t * offset_drift_per_batch on every feature.
struct SynthConfig {
  std::size_t num_classes = 4;
  std::size_t num_features = 8;
  std::size_t samples_per_batch = 300;
  std::size_t num_batches = 8;
  double class_separation = 6.0;
  double gain_decay_per_batch = 0.0;
  double offset_drift_per_batch = 0.0;
  double noise_deviation = 1.0;

  /// Throws ConfigError on an invalid field.
  void validate() const;
};

/// Class mean before drift.
std::vector<double> class_mean(const SynthConfig& cfg, ClassId c);

/// Distance between the drifted means of two classes in batch t.
double drifted_mean_distance(const SynthConfig& cfg, ClassId a, ClassId b, BatchId t);

/// Per-batch class counts differ by at most one; order within a batch is shuffled.
Dataset generate_drift_stream(const SynthConfig& cfg, std::uint64_t seed);

}  // namespace driftbench
