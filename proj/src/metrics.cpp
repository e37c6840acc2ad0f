#include "driftbench/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "driftbench/error.hpp"

namespace driftbench {

namespace {

void require_records(std::span<const PredictionRecord> records) {
  if (records.empty()) throw DataError("metric of an empty record set");
}

}  // namespace

double accuracy(std::span<const PredictionRecord> records) {
  require_records(records);
  std::size_t correct = 0;
  for (const auto& r : records) correct += r.probs.argmax() == r.label ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

double mean_confidence(std::span<const PredictionRecord> records) {
  require_records(records);
  double sum = 0.0;
  for (const auto& r : records) sum += r.probs.confidence();
  return sum / static_cast<double>(records.size());
}

CalibrationReport ece(std::span<const PredictionRecord> records, std::size_t num_bins) {
  require_records(records);
  if (num_bins < 1) throw ConfigError("ECE needs at least one bin");

  std::vector<std::size_t> count(num_bins, 0);
  std::vector<std::size_t> correct(num_bins, 0);
  std::vector<double> conf_sum(num_bins, 0.0);
  const double bins = static_cast<double>(num_bins);
  for (const auto& r : records) {
    const double conf = r.probs.confidence();
    auto m = static_cast<std::size_t>(std::floor(conf * bins));
    m = std::min(m, num_bins - 1);
    ++count[m];
    conf_sum[m] += conf;
    correct[m] += r.probs.argmax() == r.label ? 1 : 0;
  }

  CalibrationReport rep;
  rep.accuracy = accuracy(records);
  rep.mean_confidence = mean_confidence(records);
  rep.bins.resize(num_bins);
  for (std::size_t m = 0; m < num_bins; ++m) {
    auto& b = rep.bins[m];
    b.lower = static_cast<double>(m) / bins;
    b.upper = static_cast<double>(m + 1) / bins;
    b.count = count[m];
    if (count[m] > 0) {
      b.bin_accuracy = static_cast<double>(correct[m]) / static_cast<double>(count[m]);
      b.bin_confidence = conf_sum[m] / static_cast<double>(count[m]);
    }
  }
  rep.ece = ece_from_bins(rep.bins);
  return rep;
}

double ece_from_bins(std::span<const CalibrationBin> bins) {
  std::size_t total = 0;
  for (const auto& b : bins) total += b.count;
  if (total == 0) return 0.0;
  double e = 0.0;
  for (const auto& b : bins) {
    if (b.count == 0) continue;
    e += static_cast<double>(b.count) / static_cast<double>(total) *
         std::abs(b.bin_accuracy - b.bin_confidence);
  }
  return e;
}

std::vector<PredictionRecord> make_records(std::vector<ProbVector> probs, const Dataset& d) {
  if (probs.size() != d.size()) throw DataError("prediction/label count mismatch");
  std::vector<PredictionRecord> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = {std::move(probs[i]), d.label(i)};
  return out;
}

}  // namespace driftbench
