#include "driftbench/prob.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <omp.h>

#include "driftbench/error.hpp"

namespace driftbench {

void set_num_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int num_threads() { return omp_get_max_threads(); }

ProbVector ProbVector::uniform(std::size_t num_classes) {
  return ProbVector(std::vector<double>(num_classes, 1.0 / static_cast<double>(num_classes)));
}

ClassId ProbVector::argmax() const {
  ClassId best = 0;
  for (ClassId c = 1; c < probs_.size(); ++c) {
    if (probs_[c] > probs_[best]) best = c;
  }
  return best;
}

double ProbVector::confidence() const { return probs_.empty() ? 0.0 : probs_[argmax()]; }

bool ProbVector::is_simplex(double tol) const {
  if (probs_.empty()) return false;
  double sum = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0 + tol) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= tol;
}

ProbVector mean_of(std::span<const ProbVector> members) {
  if (members.empty()) throw std::invalid_argument("mean_of: no members");
  std::vector<double> acc(members.front().size(), 0.0);
  for (const auto& m : members) {
    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += m[c];
  }
  const double inv = static_cast<double>(members.size());
  for (double& a : acc) a /= inv;
  return ProbVector(std::move(acc));
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::svm: return "SVM";
    case ModelKind::dt: return "DT";
    case ModelKind::knn: return "KNN";
    case ModelKind::rf: return "RF";
    case ModelKind::nn: return "NN";
    case ModelKind::nn_ens: return "NN-Ens";
    case ModelKind::nn_mcd: return "NN-MCD";
  }
  return "?";
}

const std::vector<ModelKind>& all_model_kinds() {
  static const std::vector<ModelKind> kinds{ModelKind::svm, ModelKind::dt,     ModelKind::knn,
                                            ModelKind::rf,  ModelKind::nn,     ModelKind::nn_ens,
                                            ModelKind::nn_mcd};
  return kinds;
}

ModelKind model_kind_from_string(const std::string& name) {
  const auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
  };
  const auto wanted = lower(name);
  for (ModelKind k : all_model_kinds()) {
    if (lower(to_string(k)) == wanted) return k;
  }
  throw ConfigError("unknown model '" + name + "'");
}

std::vector<ProbVector> Classifier::predict_proba_all(const Dataset& d, Execution exec) const {
  if (d.num_features() != num_features()) {
    throw DataError("dataset has " + std::to_string(d.num_features()) +
                    " features, model expects " + std::to_string(num_features()));
  }
  std::vector<ProbVector> out(d.size());
  const auto n = static_cast<std::ptrdiff_t>(d.size());
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = predict_proba(d.row(static_cast<std::size_t>(i)));
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = predict_proba(d.row(static_cast<std::size_t>(i)));
  }
  return out;
}

void Classifier::check_dimension(std::span<const double> x) const {
  if (x.size() != num_features()) {
    throw DataError("query has " + std::to_string(x.size()) + " features, model expects " +
                    std::to_string(num_features()));
  }
}

}  // namespace driftbench
