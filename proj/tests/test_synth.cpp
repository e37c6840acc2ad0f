#include <doctest.h>

#include <cmath>

#include "driftbench/error.hpp"
#include "driftbench/knn.hpp"
#include "driftbench/synth.hpp"
#include "test_support.hpp"

using namespace driftbench;

namespace {

std::vector<double> feature_means(const Dataset& d) {
  std::vector<double> m(d.num_features(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += d.row(i)[j];
  }
  for (auto& v : m) v /= static_cast<double>(d.size());
  return m;
}

std::vector<double> feature_deviations(const Dataset& d) {
  const auto mean = feature_means(d);
  std::vector<double> s(d.num_features(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) s[j] += (d.row(i)[j] - mean[j]) * (d.row(i)[j] - mean[j]);
  }
  for (auto& v : s) v = std::sqrt(v / static_cast<double>(d.size()));
  return s;
}

}  // namespace

TEST_CASE("class means sit at mutual distance class_separation") {
  SynthConfig cfg;
  cfg.num_classes = 4;
  cfg.num_features = 8;
  for (ClassId a = 0; a < 4; ++a) {
    for (ClassId b = a + 1; b < 4; ++b) {
      CHECK(drifted_mean_distance(cfg, a, b, 0) == doctest::Approx(cfg.class_separation).epsilon(1e-12));
    }
  }
}

TEST_CASE("class means ride on a per-feature sensor baseline") {
  SynthConfig cfg;
  cfg.num_features = 3;
  cfg.class_separation = 2.0;
  const auto m = class_mean(cfg, 1);
  CHECK(m[0] == 0.0);
  CHECK(m[1] == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-15));
  CHECK(m[2] == 2.0);
  double n0 = 0.0, n1 = 0.0;
  for (double v : class_mean(cfg, 0)) n0 += v * v;
  for (double v : m) n1 += v * v;
  CHECK(n0 != doctest::Approx(n1));
}

TEST_CASE("stream shape, months and uniform class priors") {
  SynthConfig cfg;
  cfg.num_classes = 3;
  cfg.samples_per_batch = 100;
  cfg.num_batches = 5;
  const auto d = generate_drift_stream(cfg, 1);
  CHECK(d.size() == 500);
  CHECK(d.batch_ids() == std::vector<BatchId>{0, 1, 2, 3, 4});
  CHECK(d.batch_months().at(4) == MonthRange{5, 5});
  for (BatchId b = 0; b < 5; ++b) {
    const auto counts = d.select_batch(b).class_counts();
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    CHECK(*hi - *lo <= 1);
  }
}

TEST_CASE("same seed gives an identical stream") {
  SynthConfig cfg;
  cfg.gain_decay_per_batch = 0.1;
  cfg.offset_drift_per_batch = 0.3;
  CHECK(generate_drift_stream(cfg, 5) == generate_drift_stream(cfg, 5));
  CHECK_FALSE(generate_drift_stream(cfg, 5) == generate_drift_stream(cfg, 6));
}

TEST_CASE("zero drift: first and last batch means agree within four standard errors") {
  SynthConfig cfg;
  cfg.samples_per_batch = 1000;
  cfg.num_batches = 6;
  const auto d = generate_drift_stream(cfg, 7);
  const auto first = d.select_batch(0), last = d.select_batch(5);
  const auto m0 = feature_means(first), m1 = feature_means(last);
  const auto s0 = feature_deviations(first), s1 = feature_deviations(last);
  for (std::size_t j = 0; j < m0.size(); ++j) {
    const double se = std::sqrt(s0[j] * s0[j] / 1000.0 + s1[j] * s1[j] / 1000.0);
    CHECK(std::abs(m0[j] - m1[j]) < 4.0 * se);
  }
}

TEST_CASE("gain decay 0.2 shrinks batch 4 deviations by 0.8^4") {
  SynthConfig cfg;
  cfg.samples_per_batch = 2000;
  cfg.num_batches = 5;
  cfg.gain_decay_per_batch = 0.2;
  const auto d = generate_drift_stream(cfg, 8);
  const auto s0 = feature_deviations(d.select_batch(0));
  const auto s4 = feature_deviations(d.select_batch(4));
  const double expected = std::pow(0.8, 4);
  for (std::size_t j = 0; j < s0.size(); ++j) CHECK(std::abs(s4[j] / s0[j] - expected) < 0.1 * expected);
}

TEST_CASE("offset drift shifts every feature by t * offset") {
  SynthConfig cfg;
  cfg.samples_per_batch = 4000;
  cfg.num_batches = 4;
  cfg.offset_drift_per_batch = 0.5;
  const auto d = generate_drift_stream(cfg, 9);
  const auto m0 = feature_means(d.select_batch(0)), m3 = feature_means(d.select_batch(3));
  for (std::size_t j = 0; j < m0.size(); ++j) CHECK(std::abs(m3[j] - m0[j] - 1.5) < 0.15);
}

TEST_CASE("class mean distance is non-increasing under gain decay") {
  SynthConfig cfg;
  cfg.gain_decay_per_batch = 0.15;
  cfg.offset_drift_per_batch = 0.2;
  for (BatchId t = 1; t < 12; ++t) {
    CHECK(drifted_mean_distance(cfg, 0, 1, t) <= drifted_mean_distance(cfg, 0, 1, t - 1));
    CHECK(drifted_mean_distance(cfg, 0, 1, t) == doctest::Approx(6.0 * std::pow(0.85, t)));
  }
}

TEST_CASE("zero drift: batch accuracies of a fixed classifier overlap at 99%") {
  SynthConfig cfg;
  cfg.samples_per_batch = 400;
  cfg.num_batches = 5;
  cfg.class_separation = 2.5;
  const auto d = generate_drift_stream(cfg, 10);
  const auto model = KnnModel(d.select_batch(0), 5);
  std::vector<std::pair<double, double>> intervals;
  for (BatchId b = 1; b < 5; ++b) {
    const auto batch = d.select_batch(b);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) correct += model.predict(batch.row(i)) == batch.label(i);
    const double n = static_cast<double>(batch.size());
    const double p = static_cast<double>(correct) / n;
    const double half = 2.576 * std::sqrt(p * (1 - p) / n);
    intervals.emplace_back(p - half, p + half);
  }
  for (std::size_t a = 0; a < intervals.size(); ++a) {
    for (std::size_t b = a + 1; b < intervals.size(); ++b) {
      CHECK(intervals[a].first <= intervals[b].second);
      CHECK(intervals[b].first <= intervals[a].second);
    }
  }
}

TEST_CASE("invalid synth configurations are rejected") {
  SynthConfig cfg;
  cfg.samples_per_batch = 0;
  CHECK_THROWS_AS(generate_drift_stream(cfg, 0), ConfigError);
  cfg = {};
  cfg.noise_deviation = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.gain_decay_per_batch = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.num_classes = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
