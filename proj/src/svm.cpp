#include "driftbench/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "driftbench/error.hpp"
#include "driftbench/rng.hpp"

namespace driftbench {

double Kernel::operator()(std::span<const double> a, std::span<const double> b) const {
  if (type == Type::linear) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
  }
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return std::exp(-gamma * s);
}

double default_rbf_gamma(const Dataset& d) {
  const auto v = d.values();
  if (v.empty()) return 1.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  if (!(var > 0.0)) return 1.0;
  return 1.0 / (static_cast<double>(d.num_features()) * var);
}

GramMatrix GramMatrix::compute(const Dataset& d, const Kernel& kernel, Execution exec) {
  GramMatrix g;
  g.n_ = d.size();
  g.k_.assign(g.n_ * g.n_, 0.0);
  const auto n = static_cast<std::ptrdiff_t>(g.n_);
  // Upper triangle row by row, mirrored; each entry is written by one iteration.
  const auto fill_row = [&](std::ptrdiff_t i) {
    const auto ri = d.row(static_cast<std::size_t>(i));
    for (std::ptrdiff_t j = i; j < n; ++j) {
      const double v = kernel(ri, d.row(static_cast<std::size_t>(j)));
      g.k_[static_cast<std::size_t>(i * n + j)] = v;
      g.k_[static_cast<std::size_t>(j * n + i)] = v;
    }
  };
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) fill_row(i);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) fill_row(i);
  }
  return g;
}

// ---------------------------------------------------------------------------

SmoSolution solve_smo(const GramMatrix& gram, std::span<const std::size_t> rows,
                      std::span<const int> y, double c_reg, double tol) {
  const std::size_t m = rows.size();
  constexpr double kTau = 1e-12;
  const auto q = [&](std::size_t i, std::size_t j) {
    return static_cast<double>(y[i] * y[j]) * gram(rows[i], rows[j]);
  };

  SmoSolution sol;
  sol.alpha.assign(m, 0.0);
  std::vector<double> grad(m, -1.0);  // gradient of 1/2 a'Qa - e'a
  std::vector<double> diag(m);
  for (std::size_t i = 0; i < m; ++i) diag[i] = gram(rows[i], rows[i]);
  auto& alpha = sol.alpha;

  const auto in_up = [&](std::size_t t) {
    return (y[t] == 1 && alpha[t] < c_reg) || (y[t] == -1 && alpha[t] > 0.0);
  };
  const auto in_low = [&](std::size_t t) {
    return (y[t] == -1 && alpha[t] < c_reg) || (y[t] == 1 && alpha[t] > 0.0);
  };

  const std::size_t max_iter = 100 * std::max<std::size_t>(m, 1);
  while (true) {
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    std::size_t i = m;
    std::size_t j = m;
    for (std::size_t t = 0; t < m; ++t) {
      const double v = -static_cast<double>(y[t]) * grad[t];
      if (in_up(t) && v > g_max) {
        g_max = v;
        i = t;
      }
      if (in_low(t) && v < g_min) {
        g_min = v;
        j = t;
      }
    }
    sol.max_violation = (i == m || j == m) ? 0.0 : g_max - g_min;
    if (i == m || j == m || g_max - g_min < tol) break;
    if (sol.iterations >= max_iter) {
      throw ConvergenceError("SMO did not reach tolerance " + std::to_string(tol) + " within " +
                             std::to_string(max_iter) + " iterations (violation " +
                             std::to_string(g_max - g_min) + ")");
    }
    ++sol.iterations;

    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    const double qij = q(i, j);
    if (y[i] != y[j]) {
      double quad = diag[i] + diag[j] + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c_reg) {
          alpha[i] = c_reg;
          alpha[j] = c_reg - diff;
        }
      } else if (alpha[j] > c_reg) {
        alpha[j] = c_reg;
        alpha[i] = c_reg + diff;
      }
    } else {
      double quad = diag[i] + diag[j] - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c_reg) {
        if (alpha[i] > c_reg) {
          alpha[i] = c_reg;
          alpha[j] = sum - c_reg;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c_reg) {
        if (alpha[j] > c_reg) {
          alpha[j] = c_reg;
          alpha[i] = sum - c_reg;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < m; ++t) grad[t] += q(t, i) * dai + q(t, j) * daj;
  }

  // Bias from free multipliers, or the midpoint of the feasible interval.
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < m; ++t) {
    const double yg = static_cast<double>(y[t]) * grad[t];
    if (alpha[t] >= c_reg) {
      if (y[t] == -1) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] == 1) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (upper + lower) / 2.0;
  sol.bias = -rho;
  return sol;
}

BinarySvmModel::BinarySvmModel(std::vector<double> support_vectors, std::size_t num_features,
                               std::vector<double> coef, double bias, Kernel kernel, double c_reg)
    : support_vectors_(std::move(support_vectors)),
      num_features_(num_features),
      coef_(std::move(coef)),
      bias_(bias),
      kernel_(kernel),
      c_reg_(c_reg) {}

BinarySvmModel BinarySvmModel::fit(const Dataset& train, const SvmOptions& opts) {
  std::vector<int> y(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) y[i] = train.label(i) == 1 ? 1 : -1;
  std::vector<std::size_t> rows(train.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const auto gram = GramMatrix::compute(train, opts.kernel, Execution::serial);
  return fit(train, gram, rows, y, opts);
}

BinarySvmModel BinarySvmModel::fit(const Dataset& data, const GramMatrix& gram,
                                   std::span<const std::size_t> rows, std::span<const int> y,
                                   const SvmOptions& opts, SmoSolution* solution_out) {
  if (!(opts.c_reg > 0.0)) throw ConfigError("SVM regularization C must be positive");
  const bool has_pos = std::find(y.begin(), y.end(), 1) != y.end();
  const bool has_neg = std::find(y.begin(), y.end(), -1) != y.end();
  if (!has_pos || !has_neg) throw DataError("binary SVM needs both classes present");

  auto sol = solve_smo(gram, rows, y, opts.c_reg, opts.tol);
  std::vector<double> sv;
  std::vector<double> coef;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (sol.alpha[t] > 0.0) {
      const auto r = data.row(rows[t]);
      sv.insert(sv.end(), r.begin(), r.end());
      coef.push_back(sol.alpha[t] * static_cast<double>(y[t]));
    }
  }
  BinarySvmModel model(std::move(sv), data.num_features(), std::move(coef), sol.bias, opts.kernel,
                       opts.c_reg);
  if (solution_out != nullptr) *solution_out = std::move(sol);
  return model;
}

double BinarySvmModel::decision_value(std::span<const double> x) const {
  if (x.size() != num_features_) {
    throw DataError("query has " + std::to_string(x.size()) + " features, SVM expects " +
                    std::to_string(num_features_));
  }
  double f = 0.0;
  for (std::size_t i = 0; i < coef_.size(); ++i) f += coef_[i] * kernel_(support_vector(i), x);
  return f + bias_;
}

// ---------------------------------------------------------------------------

double platt_apply(const PlattParams& p, double f) {
  const double z = p.a * f + p.b;
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

namespace {

struct PlattTargets {
  double hi;
  double lo;
};

PlattTargets smoothed_targets(std::span<const int> y) {
  const auto pos = static_cast<double>(std::count(y.begin(), y.end(), 1));
  const auto neg = static_cast<double>(y.size()) - pos;
  return {(pos + 1.0) / (pos + 2.0), 1.0 / (neg + 2.0)};
}

void check_platt_input(std::span<const double> values, std::span<const int> y) {
  if (values.size() != y.size()) throw DataError("Platt fit: value/label length mismatch");
  for (double v : values) {
    if (!std::isfinite(v)) throw DataError("Platt fit: non-finite decision value");
  }
  const bool has_pos = std::find(y.begin(), y.end(), 1) != y.end();
  const bool has_neg = std::find(y.begin(), y.end(), -1) != y.end();
  if (!has_pos || !has_neg) throw DataError("Platt fit needs both classes present");
}

}  // namespace

double platt_objective(std::span<const double> values, std::span<const int> y,
                       const PlattParams& p) {
  const auto targets = smoothed_targets(y);
  double nll = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double t = y[i] == 1 ? targets.hi : targets.lo;
    const double z = values[i] * p.a + p.b;
    if (z >= 0.0) nll += t * z + std::log1p(std::exp(-z));
    else nll += (t - 1.0) * z + std::log1p(std::exp(z));
  }
  return nll;
}

PlattParams platt_fit(std::span<const double> values, std::span<const int> y) {
  check_platt_input(values, y);
  const auto targets = smoothed_targets(y);
  const auto pos = static_cast<double>(std::count(y.begin(), y.end(), 1));
  const auto neg = static_cast<double>(y.size()) - pos;

  constexpr int kMaxIter = 100;
  constexpr double kMinStep = 1e-10;
  constexpr double kRidge = 1e-12;
  constexpr double kGradTol = 1e-8;

  PlattParams p{0.0, std::log((neg + 1.0) / (pos + 1.0))};
  double fval = platt_objective(values, y, p);
  for (int iter = 0; iter < kMaxIter; ++iter) {
    double h11 = kRidge, h22 = kRidge, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double f = values[i];
      const double z = f * p.a + p.b;
      double prob, comp;  // P(+) and 1 - P(+)
      if (z >= 0.0) {
        const double e = std::exp(-z);
        prob = e / (1.0 + e);
        comp = 1.0 / (1.0 + e);
      } else {
        const double e = std::exp(z);
        prob = 1.0 / (1.0 + e);
        comp = e / (1.0 + e);
      }
      const double d2 = prob * comp;
      h11 += f * f * d2;
      h22 += d2;
      h21 += f * d2;
      const double d1 = (y[i] == 1 ? targets.hi : targets.lo) - prob;
      g1 += f * d1;
      g2 += d1;
    }
    if (std::hypot(g1, g2) < kGradTol) break;

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= kMinStep) {
      const PlattParams cand{p.a + step * da, p.b + step * db};
      const double cand_val = platt_objective(values, y, cand);
      if (cand_val < fval + 1e-4 * step * gd) {
        p = cand;
        fval = cand_val;
        break;
      }
      step /= 2.0;
    }
    if (step < kMinStep) break;  // no sufficient decrease; keep the current point
  }
  return p;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> stratified_folds(const Dataset& d, std::size_t folds, std::uint64_t seed) {
  std::vector<std::size_t> fold(d.size(), 0);
  Rng rng(seed);
  for (ClassId c = 0; c < d.num_classes(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.label(i) == c) members.push_back(i);
    }
    rng.shuffle(members);
    for (std::size_t k = 0; k < members.size(); ++k) fold[members[k]] = k % folds;
  }
  return fold;
}

ProbVector couple_one_vs_rest(std::span<const double> per_class) {
  double total = 0.0;
  bool any = false;
  for (double p : per_class) {
    total += p;
    any = any || p >= 1e-12;
  }
  if (!any) return ProbVector::uniform(per_class.size());
  std::vector<double> probs(per_class.begin(), per_class.end());
  for (double& p : probs) p /= total;
  return ProbVector(std::move(probs));
}

MulticlassSvmModel::MulticlassSvmModel(std::vector<BinarySvmModel> machines,
                                       std::vector<PlattParams> platt, std::size_t num_features)
    : machines_(std::move(machines)), platt_(std::move(platt)), num_features_(num_features) {
  if (machines_.size() != platt_.size() || machines_.size() < 2) {
    throw ConfigError("multiclass SVM needs one (machine, Platt) pair per class, at least two");
  }
}

MulticlassSvmModel MulticlassSvmModel::fit(const Dataset& train, SvmOptions opts,
                                           std::uint64_t seed, Execution exec) {
  const std::size_t num_classes = train.num_classes();
  if (num_classes < 2) throw DataError("multiclass SVM needs at least two classes");
  const auto counts = train.class_counts();
  for (ClassId c = 0; c < num_classes; ++c) {
    if (counts[c] < kFolds) {
      throw DataError("class " + std::to_string(c) + " has " + std::to_string(counts[c]) +
                      " training samples; " + std::to_string(kFolds) + "-fold calibration needs " +
                      std::to_string(kFolds));
    }
  }
  if (!(opts.c_reg > 0.0)) throw ConfigError("SVM regularization C must be positive");
  if (opts.kernel.type == Kernel::Type::rbf && !(opts.kernel.gamma > 0.0)) {
    opts.kernel.gamma = default_rbf_gamma(train);
  }

  const auto gram = GramMatrix::compute(train, opts.kernel, exec);
  const auto fold = stratified_folds(train, kFolds, derive_seed(seed, "folds"));
  const std::size_t n = train.size();

  // Task t = c * (kFolds + 1) + k: k == kFolds is the full fit for class c,
  // otherwise the refit that holds out fold k.
  const std::size_t num_tasks = num_classes * (kFolds + 1);
  std::vector<BinarySvmModel> full(num_classes);
  std::vector<std::vector<double>> oof(num_classes, std::vector<double>(n, 0.0));
  std::vector<std::string> errors(num_tasks);

  const auto run_task = [&](std::size_t task) {
    const ClassId c = task / (kFolds + 1);
    const std::size_t k = task % (kFolds + 1);
    std::vector<std::size_t> rows;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < n; ++i) {
      (k == kFolds || fold[i] != k ? rows : held).push_back(i);
    }
    std::vector<int> y(rows.size());
    for (std::size_t t = 0; t < rows.size(); ++t) y[t] = train.label(rows[t]) == c ? 1 : -1;
    try {
      SmoSolution sol;
      auto model = BinarySvmModel::fit(train, gram, rows, y, opts, &sol);
      if (k == kFolds) {
        full[c] = std::move(model);
        return;
      }
      for (std::size_t h : held) {
        double f = sol.bias;
        for (std::size_t t = 0; t < rows.size(); ++t) {
          if (sol.alpha[t] > 0.0) f += sol.alpha[t] * static_cast<double>(y[t]) * gram(rows[t], h);
        }
        oof[c][h] = f;
      }
    } catch (const std::exception& e) {
      errors[task] = e.what();
    }
  };

  const auto tasks = static_cast<std::ptrdiff_t>(num_tasks);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t t = 0; t < tasks; ++t) run_task(static_cast<std::size_t>(t));
  } else {
    for (std::ptrdiff_t t = 0; t < tasks; ++t) run_task(static_cast<std::size_t>(t));
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw ConvergenceError("SVM fit failed: " + e);
  }

  std::vector<PlattParams> platt(num_classes);
  for (ClassId c = 0; c < num_classes; ++c) {
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = train.label(i) == c ? 1 : -1;
    platt[c] = platt_fit(oof[c], y);
  }
  return MulticlassSvmModel(std::move(full), std::move(platt), train.num_features());
}

std::vector<double> MulticlassSvmModel::decision_values(std::span<const double> x) const {
  check_dimension(x);
  std::vector<double> f(machines_.size());
  for (std::size_t c = 0; c < machines_.size(); ++c) f[c] = machines_[c].decision_value(x);
  return f;
}

ProbVector MulticlassSvmModel::predict_proba(std::span<const double> x) const {
  const auto f = decision_values(x);
  std::vector<double> p(f.size());
  for (std::size_t c = 0; c < f.size(); ++c) p[c] = platt_apply(platt_[c], f[c]);
  return couple_one_vs_rest(p);
}

}  // namespace driftbench
