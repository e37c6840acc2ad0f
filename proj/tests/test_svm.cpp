#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "driftbench/error.hpp"
#include "driftbench/svm.hpp"
#include "test_support.hpp"

using namespace driftbench;
using test_support::make_dataset;

namespace {

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), std::size_t{0});
  return r;
}

std::vector<int> signs(const Dataset& d) {
  std::vector<int> y(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) y[i] = d.label(i) == 1 ? 1 : -1;
  return y;
}

// Independent KKT check of a dual solution: recompute the gradient from the
// kernel and measure the maximal violating pair.
double kkt_violation(const Dataset& d, const Kernel& k, const std::vector<int>& y,
                     const std::vector<double>& alpha, double c) {
  const std::size_t n = d.size();
  double up = -std::numeric_limits<double>::infinity(), low = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    double g = -1.0;
    for (std::size_t s = 0; s < n; ++s) g += y[t] * y[s] * k(d.row(t), d.row(s)) * alpha[s];
    const double v = -y[t] * g;
    const bool is_up = (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0);
    const bool is_low = (y[t] == -1 && alpha[t] < c) || (y[t] == 1 && alpha[t] > 0);
    if (is_up) up = std::max(up, v);
    if (is_low) low = std::min(low, v);
  }
  return up - low;
}

double constant_nll(std::span<const int> y) {
  const auto pos = static_cast<double>(std::count(y.begin(), y.end(), 1));
  const auto neg = static_cast<double>(y.size()) - pos;
  return platt_objective(std::vector<double>(y.size(), 0.0), y,
                         PlattParams{0.0, std::log((neg + 1.0) / (pos + 1.0))});
}

}  // namespace

TEST_CASE("two separable points with a linear kernel") {
  const auto d = make_dataset({{-1.0}, {1.0}}, {0, 1}, 2);
  const auto m = BinarySvmModel::fit(d, {Kernel::linear(), 1.0, 1e-3});
  CHECK(m.decision_value(std::vector<double>{-1.0}) < 0.0);
  CHECK(m.decision_value(std::vector<double>{1.0}) > 0.0);
  CHECK(m.decision_value(std::vector<double>{0.0}) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("duplicating every point keeps the training sign pattern") {
  const auto d = test_support::blobs(40, 2, 2, 6.0, 4);
  Dataset twice(d.num_features(), 2);
  for (std::size_t i = 0; i < d.size(); ++i) twice.add(d.sample(i));
  for (std::size_t i = 0; i < d.size(); ++i) twice.add(d.sample(i));
  const SvmOptions opts{Kernel::rbf(0.5), 1.0, 1e-3};
  const auto a = BinarySvmModel::fit(d, opts);
  const auto b = BinarySvmModel::fit(twice, opts);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    agree += (a.decision_value(d.row(i)) > 0) == (b.decision_value(d.row(i)) > 0);
  }
  CHECK(agree == d.size());
}

TEST_CASE("XOR is learned exactly with rbf gamma 1 and C 10") {
  const auto d = make_dataset({{0, 0}, {1, 1}, {0, 1}, {1, 0}}, {0, 0, 1, 1}, 2);
  const SvmOptions opts{Kernel::rbf(1.0), 10.0, 1e-3};
  const auto gram = GramMatrix::compute(d, opts.kernel, Execution::serial);
  const auto y = signs(d);
  SmoSolution sol;
  const auto m = BinarySvmModel::fit(d, gram, all_rows(4), y, opts, &sol);
  for (double a : sol.alpha) {
    CHECK(a >= 0.0);
    CHECK(a <= 10.0);
  }
  for (std::size_t i = 0; i < 4; ++i) CHECK((m.decision_value(d.row(i)) > 0) == (y[i] == 1));
  CHECK(kkt_violation(d, opts.kernel, y, sol.alpha, 10.0) < 1e-3);
}

TEST_CASE("SMO solutions satisfy the KKT conditions and the equality constraint") {
  Rng rng(8);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t n = 10 + rng.below(40);
    Dataset d(2, 2);
    for (std::size_t i = 0; i < n; ++i) {
      const ClassId c = i % 2;
      d.add(std::vector<double>{rng.normal() + (c ? 1.0 : -1.0), rng.normal()}, c, 0);
    }
    const double c_reg = trial % 3 == 0 ? 0.1 : trial % 3 == 1 ? 1.0 : 10.0;
    const Kernel k = trial % 2 == 0 ? Kernel::linear() : Kernel::rbf(0.7);
    const auto gram = GramMatrix::compute(d, k, Execution::serial);
    const auto y = signs(d);
    const auto sol = solve_smo(gram, all_rows(n), y, c_reg, 1e-3);
    double balance = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(sol.alpha[i] >= 0.0);
      CHECK(sol.alpha[i] <= c_reg);
      balance += sol.alpha[i] * y[i];
    }
    CHECK(std::abs(balance) < 1e-9);
    CHECK(kkt_violation(d, k, y, sol.alpha, c_reg) < 1e-3);
  }
}

TEST_CASE("support vectors of a separable fit sit on or outside the margin") {
  const auto d = test_support::blobs(60, 2, 2, 8.0, 2);
  const SvmOptions opts{Kernel::linear(), 100.0, 1e-3};
  const auto m = BinarySvmModel::fit(d, opts);
  REQUIRE(m.num_support_vectors() > 0);
  for (std::size_t s = 0; s < m.num_support_vectors(); ++s) {
    CHECK(std::abs(m.decision_value(m.support_vector(s))) >= 1.0 - opts.tol);
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK((m.decision_value(d.row(i)) > 0) == (d.label(i) == 1));
  }
}

TEST_CASE("far rbf query returns the bias") {
  const auto d = make_dataset({{0, 0}, {1, 1}, {0, 1}, {1, 0}}, {0, 0, 1, 1}, 2);
  const auto m = BinarySvmModel::fit(d, {Kernel::rbf(1.0), 10.0, 1e-3});
  CHECK(m.decision_value(std::vector<double>{1e3, -1e3}) == m.bias());
}

TEST_CASE("single support vector at the origin gives f = 0 everywhere") {
  const BinarySvmModel m({0.0, 0.0}, 2, {1.0}, 0.0, Kernel::linear(), 1.0);
  CHECK(m.decision_value(std::vector<double>{3.0, -4.0}) == 0.0);
  CHECK(m.decision_value(std::vector<double>{0.0, 0.0}) == 0.0);
}

TEST_CASE("binary fit errors") {
  const auto one = make_dataset({{0.0}, {1.0}}, {1, 1}, 2);
  CHECK_THROWS_AS(BinarySvmModel::fit(one, {}), DataError);
  const auto two = make_dataset({{0.0}, {1.0}}, {0, 1}, 2);
  CHECK_THROWS_AS(BinarySvmModel::fit(two, {Kernel::linear(), 0.0, 1e-3}), ConfigError);
  const auto m = BinarySvmModel::fit(two, {Kernel::linear(), 1.0, 1e-3});
  CHECK_THROWS_AS(m.decision_value(std::vector<double>{0.0, 1.0}), DataError);
}

TEST_CASE("SMO iteration cap raises ConvergenceError") {
  const auto d = test_support::blobs(40, 2, 2, 0.5, 6);
  const auto gram = GramMatrix::compute(d, Kernel::rbf(1.0), Execution::serial);
  CHECK_THROWS_AS(solve_smo(gram, all_rows(d.size()), signs(d), 1e6, 1e-15), ConvergenceError);
}

TEST_CASE("platt_apply midpoint, limits and monotonicity") {
  const PlattParams p{-1.0, 0.0};
  CHECK(platt_apply(p, 0.0) == 0.5);
  CHECK(platt_apply(p, 1e6) == 1.0);
  CHECK(platt_apply(p, -1e6) == 0.0);
  CHECK(platt_apply(p, std::numeric_limits<double>::max()) == 1.0);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double f1 = rng.uniform(-5, 5), f2 = f1 + rng.uniform(1e-3, 5);
    const PlattParams q{-rng.uniform(0.01, 3), rng.uniform(-3, 3)};
    CHECK(platt_apply(q, f1) < platt_apply(q, f2));
  }
}

TEST_CASE("platt fit on separated values orders the probabilities") {
  std::vector<double> v;
  std::vector<int> y;
  for (int i = 0; i < 50; ++i) {
    v.push_back(-2.0);
    y.push_back(-1);
    v.push_back(2.0);
    y.push_back(1);
  }
  const auto p = platt_fit(v, y);
  CHECK(platt_apply(p, 2.0) > 0.9);
  CHECK(platt_apply(p, -2.0) < 0.1);
  CHECK(p.a < 0.0);
}

TEST_CASE("platt fit on label-independent values recovers the prior") {
  Rng rng(12);
  std::vector<double> v(1000);
  std::vector<int> y(1000);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = rng.normal();
    y[i] = rng.bernoulli(0.3) ? 1 : -1;
    pos += y[i] == 1;
  }
  const double prior = static_cast<double>(pos) / 1000.0;
  const auto p = platt_fit(v, y);
  for (double f : {-2.0, -1.0, 0.0, 1.0, 2.0}) CHECK(std::abs(platt_apply(p, f) - prior) < 0.1);
}

TEST_CASE("platt fit is no worse than the constant predictor or any grid point") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 10 + rng.below(200);
    std::vector<double> v(n);
    std::vector<int> y(n);
    const double shift = rng.uniform(0, 3);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = i < 2 ? (i == 0 ? 1 : -1) : (rng.bernoulli(0.5) ? 1 : -1);
      v[i] = rng.normal() + (y[i] == 1 ? shift : -shift);
    }
    const auto p = platt_fit(v, y);
    const double fit = platt_objective(v, y, p);
    CHECK(fit <= constant_nll(y) + 1e-9);
    for (double a = -8.0; a <= 2.0; a += 0.5) {
      for (double b = -3.0; b <= 3.0; b += 0.5) CHECK(fit <= platt_objective(v, y, {a, b}) + 1e-9);
    }
  }
}

TEST_CASE("platt fit errors") {
  CHECK_THROWS_AS(platt_fit(std::vector<double>{1.0, 2.0}, std::vector<int>{1, 1}), DataError);
  CHECK_THROWS_AS(platt_fit(std::vector<double>{1.0}, std::vector<int>{1, -1}), DataError);
  CHECK_THROWS_AS(platt_fit(std::vector<double>{NAN, 2.0}, std::vector<int>{1, -1}), DataError);
}

TEST_CASE("stratified folds partition the rows and balance classes") {
  const auto d = test_support::blobs(103, 3, 2, 1.0, 3);
  const auto fold = stratified_folds(d, 5, 77);
  REQUIRE(fold.size() == d.size());
  std::vector<std::vector<std::size_t>> per(5, std::vector<std::size_t>(3, 0));
  for (std::size_t i = 0; i < d.size(); ++i) {
    REQUIRE(fold[i] < 5);
    ++per[fold[i]][d.label(i)];
  }
  for (ClassId c = 0; c < 3; ++c) {
    std::size_t lo = d.size(), hi = 0;
    for (std::size_t k = 0; k < 5; ++k) {
      lo = std::min(lo, per[k][c]);
      hi = std::max(hi, per[k][c]);
    }
    CHECK(hi - lo <= 1);
  }
  CHECK(stratified_folds(d, 5, 77) == fold);
}

TEST_CASE("one-vs-rest coupling normalises or falls back to uniform") {
  const auto p = couple_one_vs_rest(std::vector<double>{0.2, 0.6});
  CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(couple_one_vs_rest(std::vector<double>{0.0, 1e-13, 0.0}) == ProbVector::uniform(3));
}

TEST_CASE("two-class OvR agrees with the binary machine") {
  const auto d = test_support::blobs(200, 2, 3, 2.0, 9);
  SvmOptions opts{Kernel::rbf(0.0), 1.0, 1e-3};
  const auto multi = MulticlassSvmModel::fit(d, opts, 5);
  REQUIRE(multi.machines().size() == 2);
  opts.kernel.gamma = default_rbf_gamma(d);
  const auto binary = BinarySvmModel::fit(d, opts);
  std::size_t agree = 0, negated = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto f = multi.decision_values(d.row(i));
    agree += multi.predict(d.row(i)) == (binary.decision_value(d.row(i)) > 0 ? 1u : 0u);
    negated += std::abs(f[0] + f[1]) < 1e-2;
  }
  CHECK(static_cast<double>(agree) / static_cast<double>(d.size()) >= 0.99);
  CHECK(static_cast<double>(negated) / static_cast<double>(d.size()) >= 0.99);
}

TEST_CASE("multiclass SVM yields one calibrated machine per class and simplex outputs") {
  const auto d = test_support::blobs(180, 6, 8, 4.0, 10);
  const auto m = MulticlassSvmModel::fit(d, {}, 1);
  CHECK(m.machines().size() == 6);
  CHECK(m.platt().size() == 6);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto p = m.predict_proba(d.row(i));
    CHECK(p.is_simplex());
    correct += p.argmax() == d.label(i);
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(d.size()) > 0.9);
  for (const auto& pp : m.platt()) CHECK(pp.a < 0.0);
}

TEST_CASE("multiclass SVM rejects classes smaller than the fold count") {
  auto d = test_support::blobs(40, 2, 2, 3.0, 1);
  Dataset small(2, 3);
  for (std::size_t i = 0; i < d.size(); ++i) small.add(d.sample(i));
  small.add(std::vector<double>{0.0, 0.0}, 2, 0);
  try {
    MulticlassSvmModel::fit(small, {}, 0);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("class 2") != std::string::npos);
  }
}
