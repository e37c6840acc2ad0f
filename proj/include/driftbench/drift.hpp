#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

namespace driftbench {

enum class MonitorStatus { warmup, ok, alarm };

const char* to_string(MonitorStatus s);

/// Windowed-mean confidence monitor against a validation baseline.
///
/// Once the window holds `window_size` confidences, the monitor alarms iff
/// the window mean falls below baseline_mean - k * max(baseline_std, 1e-3).
/// Alarms do not latch: each update is judged on the current window alone.
class ConfidenceMonitor {
 public:
  static constexpr double kSigmaFloor = 1e-3;

  /// Throws ConfigError on fewer than two confidences, window_size 0 or k < 0.
  ConfidenceMonitor(std::span<const double> validation_confidences, std::size_t window_size,
                    double k);

  /// Throws DataError unless 0 <= confidence <= 1.
  MonitorStatus update(double confidence);

  MonitorStatus status() const noexcept { return status_; }
  double baseline_mean() const noexcept { return baseline_mean_; }
  double baseline_std() const noexcept { return baseline_std_; }
  double threshold() const noexcept;
  double window_mean() const;
  std::size_t window_size() const noexcept { return window_size_; }
  std::size_t window_fill() const noexcept { return window_.size(); }
  double k() const noexcept { return k_; }

 private:
  double baseline_mean_ = 0.0;
  double baseline_std_ = 0.0;
  std::size_t window_size_;
  double k_;
  std::deque<double> window_;
  double window_sum_ = 0.0;
  MonitorStatus status_ = MonitorStatus::warmup;
};

/// Status change while replaying a stream through a monitor.
struct AlarmEvent {
  std::size_t sample_index = 0;
  double window_mean = 0.0;
  double threshold = 0.0;
  MonitorStatus status = MonitorStatus::warmup;
};

struct MonitorTrace {
  std::vector<AlarmEvent> events;  // transitions into ok or alarm
  std::ptrdiff_t first_alarm = -1; // sample index, -1 if never
  std::size_t alarm_count = 0;     // updates that reported alarm
};

MonitorTrace replay(ConfidenceMonitor monitor, std::span<const double> stream);

}  // namespace driftbench
