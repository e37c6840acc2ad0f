#include <doctest.h>

#include <vector>

#include "driftbench/drift.hpp"
#include "driftbench/error.hpp"
#include "driftbench/rng.hpp"

using namespace driftbench;

TEST_CASE("baseline statistics") {
  const ConfidenceMonitor a(std::vector<double>{0.9, 0.9}, 5, 3.0);
  CHECK(a.baseline_mean() == doctest::Approx(0.9));
  CHECK(a.baseline_std() == 0.0);
  CHECK(a.status() == MonitorStatus::warmup);
  CHECK(a.window_fill() == 0);
  const ConfidenceMonitor b(std::vector<double>{1.0, 0.8}, 5, 3.0);
  CHECK(b.baseline_mean() == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(b.baseline_std() == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("monitor construction errors") {
  CHECK_THROWS_AS(ConfidenceMonitor(std::vector<double>{0.9, 0.8}, 0, 3.0), ConfigError);
  CHECK_THROWS_AS(ConfidenceMonitor(std::vector<double>{0.9}, 5, 3.0), ConfigError);
  CHECK_THROWS_AS(ConfidenceMonitor(std::vector<double>{0.9, 0.8}, 5, -1.0), ConfigError);
  ConfidenceMonitor m(std::vector<double>{0.9, 0.8}, 5, 3.0);
  CHECK_THROWS_AS(m.update(1.5), DataError);
  CHECK_THROWS_AS(m.update(-0.1), DataError);
  CHECK_THROWS_AS(m.update(NAN), DataError);
}

TEST_CASE("warmup until the window is full") {
  ConfidenceMonitor m(std::vector<double>{0.9, 0.8}, 3, 3.0);
  CHECK(m.update(0.0) == MonitorStatus::warmup);
  CHECK(m.update(0.0) == MonitorStatus::warmup);
  CHECK(m.update(0.0) == MonitorStatus::alarm);
}

TEST_CASE("threshold arithmetic: mean 0.95, std 0.01, k 3") {
  ConfidenceMonitor m(std::vector<double>{0.94, 0.96}, 4, 3.0);
  CHECK(m.baseline_std() == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(m.threshold() == doctest::Approx(0.92).epsilon(1e-9));
  for (int i = 0; i < 4; ++i) m.update(0.90);
  CHECK(m.status() == MonitorStatus::alarm);
  for (int i = 0; i < 4; ++i) m.update(0.93);
  CHECK(m.status() == MonitorStatus::ok);
}

TEST_CASE("constant stream at the baseline never alarms") {
  for (double k : {0.5, 1.0, 3.0}) {
    ConfidenceMonitor m(std::vector<double>{0.87, 0.87, 0.87}, 10, k);
    const auto trace = replay(m, std::vector<double>(500, 0.87));
    CHECK(trace.alarm_count == 0);
    CHECK(trace.first_alarm == -1);
  }
}

TEST_CASE("sigma floor applies to zero-variance baselines") {
  ConfidenceMonitor m(std::vector<double>{0.9, 0.9}, 2, 3.0);
  CHECK(m.threshold() == doctest::Approx(0.9 - 3e-3).epsilon(1e-12));
  m.update(0.898);
  CHECK(m.update(0.898) == MonitorStatus::ok);
  CHECK(m.update(0.896) == MonitorStatus::ok);
  CHECK(m.update(0.890) == MonitorStatus::alarm);
}

TEST_CASE("alarms do not latch and events record transitions") {
  ConfidenceMonitor m(std::vector<double>{0.9, 0.9}, 2, 3.0);
  const std::vector<double> stream{0.9, 0.9, 0.5, 0.5, 0.9, 0.9, 0.9};
  const auto trace = replay(m, stream);
  CHECK(trace.first_alarm == 2);
  CHECK(trace.alarm_count == 3);  // indices 2, 3, 4
  REQUIRE(trace.events.size() == 3);
  CHECK(trace.events[0].status == MonitorStatus::ok);
  CHECK(trace.events[0].sample_index == 1);
  CHECK(trace.events[1].status == MonitorStatus::alarm);
  CHECK(trace.events[1].sample_index == 2);
  CHECK(trace.events[1].window_mean == doctest::Approx(0.7));
  CHECK(trace.events[2].status == MonitorStatus::ok);
  CHECK(trace.events[2].sample_index == 5);
}

TEST_CASE("status depends only on baseline and window contents") {
  Rng rng(9);
  std::vector<double> val(100), stream(400);
  for (auto& v : val) v = rng.uniform(0.7, 1.0);
  for (auto& v : stream) v = rng.uniform(0.5, 1.0);
  ConfidenceMonitor a(val, 20, 2.0), b(val, 20, 2.0);
  std::vector<MonitorStatus> sa, sb;
  for (double c : stream) sa.push_back(a.update(c));
  // Different prefix, same final window.
  for (int i = 0; i < 37; ++i) b.update(rng.uniform());
  for (double c : stream) sb.push_back(b.update(c));
  for (std::size_t i = 19; i < stream.size(); ++i) CHECK(sa[i] == sb[i]);
}

TEST_CASE("lowering the window never clears an alarm") {
  Rng rng(10);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> val(20);
    for (auto& v : val) v = rng.uniform(0.6, 1.0);
    const std::size_t w = 1 + rng.below(10);
    std::vector<double> window(w);
    for (auto& v : window) v = rng.uniform(0.3, 1.0);
    const double delta = rng.uniform(1e-6, 0.2);
    ConfidenceMonitor hi(val, w, rng.uniform(0, 3));
    ConfidenceMonitor lo = hi;
    MonitorStatus s_hi = MonitorStatus::warmup, s_lo = MonitorStatus::warmup;
    for (double v : window) {
      s_hi = hi.update(v);
      s_lo = lo.update(std::max(0.0, v - delta));
    }
    if (s_hi == MonitorStatus::alarm) CHECK(s_lo == MonitorStatus::alarm);
  }
}

TEST_CASE("k = 0: a full window at or above the baseline mean is ok") {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> val(10);
    for (auto& v : val) v = rng.uniform(0.5, 0.9);
    ConfidenceMonitor m(val, 5, 0.0);
    MonitorStatus s = MonitorStatus::warmup;
    for (int i = 0; i < 5; ++i) s = m.update(rng.uniform(m.baseline_mean(), 1.0));
    CHECK(s == MonitorStatus::ok);
  }
}

TEST_CASE("status names") {
  CHECK(std::string(to_string(MonitorStatus::warmup)) == "warmup");
  CHECK(std::string(to_string(MonitorStatus::ok)) == "ok");
  CHECK(std::string(to_string(MonitorStatus::alarm)) == "alarm");
}
