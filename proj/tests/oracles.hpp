#pragma once

// Reference computations written independently of the library code paths.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "driftbench/metrics.hpp"
#include "driftbench/neural.hpp"
#include "driftbench/rng.hpp"
#include "test_support.hpp"

namespace oracle {

/// Binned calibration error by scanning every record once per bin.
inline double ece(const std::vector<driftbench::PredictionRecord>& records, std::size_t bins) {
  const double n = static_cast<double>(records.size());
  const double b = static_cast<double>(bins);
  double total = 0.0;
  for (std::size_t m = 0; m < bins; ++m) {
    double hits = 0.0, conf = 0.0, count = 0.0;
    for (const auto& r : records) {
      const auto p = r.probs.values();
      std::size_t top = 0;
      for (std::size_t c = 1; c < p.size(); ++c) {
        if (p[c] > p[top]) top = c;
      }
      const double x = p[top] * b;
      const bool last = m + 1 == bins;
      if (x >= static_cast<double>(m) && (x < static_cast<double>(m + 1) || last)) {
        count += 1.0;
        conf += p[top];
        hits += top == r.label ? 1.0 : 0.0;
      }
    }
    if (count > 0.0) total += count / n * std::abs(hits / count - conf / count);
  }
  return total;
}

/// Random record set; some records are tied, one-hot or uniform.
inline std::vector<driftbench::PredictionRecord> random_records(driftbench::Rng& rng, std::size_t n,
                                                                std::size_t classes) {
  std::vector<driftbench::PredictionRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> p;
    const auto kind = rng.below(10);
    if (kind == 0) {
      p.assign(classes, 0.0);
      p[rng.below(classes)] = 1.0;
    } else if (kind == 1) {
      p.assign(classes, 1.0 / static_cast<double>(classes));
    } else {
      p = test_support::random_simplex(rng, classes);
      if (kind == 2) {
        // Sharpen toward one class.
        for (auto& v : p) v = std::pow(v, 6.0);
        const double s = std::accumulate(p.begin(), p.end(), 0.0);
        for (auto& v : p) v /= s;
      }
    }
    out.push_back({driftbench::ProbVector(std::move(p)), static_cast<std::size_t>(rng.below(classes))});
  }
  return out;
}

/// Largest relative gap between the analytic gradient and central differences.
inline double gradient_error(const driftbench::MlpModel& m, const driftbench::Dataset& d, double h) {
  std::vector<std::size_t> rows(d.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const auto analytic = driftbench::loss_and_gradient(m, d, rows).gradient;
  double worst = 0.0;
  auto probe = m;
  for (std::size_t p = 0; p < m.params.size(); ++p) {
    probe.params[p] = m.params[p] + h;
    const double up = driftbench::mean_cross_entropy(probe, d);
    probe.params[p] = m.params[p] - h;
    const double down = driftbench::mean_cross_entropy(probe, d);
    probe.params[p] = m.params[p];
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[p]), 1e-6});
    worst = std::max(worst, std::abs(numeric - analytic[p]) / scale);
  }
  return worst;
}

/// Random small network and toy dataset for gradient checks.
struct GradientCase {
  driftbench::MlpModel model;
  driftbench::Dataset data;
};

inline GradientCase random_gradient_case(driftbench::Rng& rng) {
  const std::size_t dim = 1 + rng.below(5), classes = 2 + rng.below(3);
  std::vector<std::size_t> hidden(1 + rng.below(3));
  for (auto& h : hidden) h = 2 + rng.below(5);
  const std::size_t n = 3 + rng.below(6);
  driftbench::Dataset d(dim, classes);
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = rng.normal();
    d.add(x, i % classes, 0);
  }
  auto m = driftbench::mlp_init(dim, classes, rng.next_u64(), hidden, {});
  for (auto& v : m.params) v += 0.1 * rng.normal();
  return {std::move(m), std::move(d)};
}

}  // namespace oracle
