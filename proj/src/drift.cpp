#include "driftbench/drift.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftbench/error.hpp"

namespace driftbench {

const char* to_string(MonitorStatus s) {
  switch (s) {
    case MonitorStatus::warmup: return "warmup";
    case MonitorStatus::ok: return "ok";
    case MonitorStatus::alarm: return "alarm";
  }
  return "?";
}

ConfidenceMonitor::ConfidenceMonitor(std::span<const double> validation_confidences,
                                     std::size_t window_size, double k)
    : window_size_(window_size), k_(k) {
  if (validation_confidences.size() < 2) {
    throw ConfigError("monitor baseline needs at least two validation confidences");
  }
  if (window_size_ < 1) throw ConfigError("monitor window size must be at least 1");
  if (!(k_ >= 0.0)) throw ConfigError("monitor sensitivity k must be nonnegative");
  const auto n = static_cast<double>(validation_confidences.size());
  for (double c : validation_confidences) baseline_mean_ += c;
  baseline_mean_ /= n;
  double var = 0.0;
  for (double c : validation_confidences) var += (c - baseline_mean_) * (c - baseline_mean_);
  baseline_std_ = std::sqrt(var / n);
}

double ConfidenceMonitor::threshold() const noexcept {
  return baseline_mean_ - k_ * std::max(baseline_std_, kSigmaFloor);
}

double ConfidenceMonitor::window_mean() const {
  return window_.empty() ? 0.0 : window_sum_ / static_cast<double>(window_.size());
}

MonitorStatus ConfidenceMonitor::update(double confidence) {
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    throw DataError("confidence " + std::to_string(confidence) + " outside [0, 1]");
  }
  window_.push_back(confidence);
  if (window_.size() > window_size_) window_.pop_front();
  // Re-summed in window order so the status is a function of the contents.
  window_sum_ = 0.0;
  for (double c : window_) window_sum_ += c;

  if (window_.size() < window_size_) {
    status_ = MonitorStatus::warmup;
  } else {
    status_ = window_mean() < threshold() ? MonitorStatus::alarm : MonitorStatus::ok;
  }
  return status_;
}

MonitorTrace replay(ConfidenceMonitor monitor, std::span<const double> stream) {
  MonitorTrace trace;
  MonitorStatus prev = monitor.status();
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const auto s = monitor.update(stream[i]);
    if (s == MonitorStatus::alarm) {
      ++trace.alarm_count;
      if (trace.first_alarm < 0) trace.first_alarm = static_cast<std::ptrdiff_t>(i);
    }
    if (s != prev) {
      trace.events.push_back({i, monitor.window_mean(), monitor.threshold(), s});
      prev = s;
    }
  }
  return trace;
}

}  // namespace driftbench
