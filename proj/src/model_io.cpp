#include "driftbench/model_io.hpp"

#include <fstream>

#include "driftbench/error.hpp"
#include "driftbench/forest.hpp"
#include "driftbench/knn.hpp"
#include "driftbench/neural.hpp"
#include "driftbench/svm.hpp"
#include "driftbench/tree.hpp"

namespace driftbench {

using nlohmann::json;

namespace {

json header(ModelKind kind) {
  return json{{"format", "driftbench-model"}, {"version", kModelFormatVersion}, {"kind", to_string(kind)}};
}

json dataset_json(const Dataset& d) {
  std::vector<BatchId> batches(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) batches[i] = d.batch(i);
  return json{{"num_features", d.num_features()},
              {"num_classes", d.num_classes()},
              {"values", std::vector<double>(d.values().begin(), d.values().end())},
              {"labels", std::vector<ClassId>(d.labels().begin(), d.labels().end())},
              {"batches", batches}};
}

Dataset dataset_from_json(const json& j) {
  Dataset d(j.at("num_features").get<std::size_t>(), j.at("num_classes").get<std::size_t>());
  const auto values = j.at("values").get<std::vector<double>>();
  const auto labels = j.at("labels").get<std::vector<ClassId>>();
  const auto batches = j.at("batches").get<std::vector<BatchId>>();
  if (labels.size() != batches.size() || values.size() != labels.size() * d.num_features()) {
    throw DataError("inconsistent dataset payload");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    d.add(std::span(values).subspan(i * d.num_features(), d.num_features()), labels[i], batches[i]);
  }
  return d;
}

json tree_payload(const TreeModel& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes()) {
    nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left},
                     {"right", n.right}, {"counts", n.counts}});
  }
  return json{{"num_features", t.num_features()}, {"num_classes", t.num_classes()},
              {"max_depth", t.max_depth()}, {"nodes", nodes}};
}

TreeModel tree_from_payload(const json& j) {
  std::vector<TreeNode> nodes;
  for (const auto& n : j.at("nodes")) {
    nodes.push_back(TreeNode{n.at("feature").get<int>(), n.at("threshold").get<double>(),
                             n.at("left").get<int>(), n.at("right").get<int>(),
                             n.at("counts").get<std::vector<std::size_t>>()});
  }
  if (nodes.empty()) throw DataError("tree payload has no nodes");
  return TreeModel(std::move(nodes), j.at("num_features").get<std::size_t>(),
                   j.at("num_classes").get<std::size_t>(), j.at("max_depth").get<int>());
}

json mlp_payload(const MlpModel& m) {
  return json{{"layer_sizes", m.layer_sizes}, {"dropout", m.dropout}, {"params", m.params}};
}

MlpModel mlp_from_payload(const json& j) {
  MlpModel m;
  m.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  m.dropout = j.at("dropout").get<std::vector<double>>();
  m.params = j.at("params").get<std::vector<double>>();
  if (m.layer_sizes.size() < 2 || m.params.size() != parameter_count(m.layer_sizes) ||
      m.dropout.size() + 2 != m.layer_sizes.size()) {
    throw DataError("inconsistent network payload");
  }
  return m;
}

json svm_machine_payload(const BinarySvmModel& m) {
  std::vector<double> sv;
  for (std::size_t i = 0; i < m.num_support_vectors(); ++i) {
    const auto r = m.support_vector(i);
    sv.insert(sv.end(), r.begin(), r.end());
  }
  return json{{"kernel", m.kernel().type == Kernel::Type::linear ? "linear" : "rbf"},
              {"gamma", m.kernel().gamma},
              {"c_reg", m.c_reg()},
              {"bias", m.bias()},
              {"coef", std::vector<double>(m.coef().begin(), m.coef().end())},
              {"support_vectors", sv}};
}

BinarySvmModel svm_machine_from_payload(const json& j, std::size_t num_features) {
  const auto kind = j.at("kernel").get<std::string>();
  Kernel kernel = kind == "linear" ? Kernel::linear() : Kernel::rbf(j.at("gamma").get<double>());
  auto coef = j.at("coef").get<std::vector<double>>();
  auto sv = j.at("support_vectors").get<std::vector<double>>();
  if (sv.size() != coef.size() * num_features) throw DataError("inconsistent SVM payload");
  return BinarySvmModel(std::move(sv), num_features, std::move(coef), j.at("bias").get<double>(),
                        kernel, j.at("c_reg").get<double>());
}

}  // namespace

json KnnModel::to_json() const {
  auto j = header(kind());
  j["k"] = k_;
  j["train"] = dataset_json(train_);
  return j;
}

json TreeModel::to_json() const {
  auto j = header(kind());
  j["tree"] = tree_payload(*this);
  return j;
}

json ForestModel::to_json() const {
  auto j = header(kind());
  json trees = json::array();
  for (const auto& t : trees_) trees.push_back(tree_payload(t));
  j["trees"] = trees;
  j["tree_seeds"] = tree_seeds_;
  return j;
}

json MulticlassSvmModel::to_json() const {
  auto j = header(kind());
  j["num_features"] = num_features_;
  json machines = json::array();
  for (std::size_t c = 0; c < machines_.size(); ++c) {
    auto m = svm_machine_payload(machines_[c]);
    m["platt_a"] = platt_[c].a;
    m["platt_b"] = platt_[c].b;
    machines.push_back(std::move(m));
  }
  j["machines"] = machines;
  return j;
}

json MlpClassifier::to_json() const {
  auto j = header(kind());
  j["network"] = mlp_payload(model_);
  return j;
}

json EnsembleModel::to_json() const {
  auto j = header(kind());
  json members = json::array();
  for (const auto& m : members_) members.push_back(mlp_payload(m));
  j["members"] = members;
  return j;
}

json McdModel::to_json() const {
  auto j = header(kind());
  j["network"] = mlp_payload(model_);
  j["passes"] = passes_;
  j["inference_seed"] = inference_seed_;
  return j;
}

std::unique_ptr<Classifier> model_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "driftbench-model") {
      throw DataError("not a driftbench model document");
    }
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw DataError("unsupported model format version " + std::to_string(version));
    }
    switch (model_kind_from_string(doc.at("kind").get<std::string>())) {
      case ModelKind::knn:
        return std::make_unique<KnnModel>(dataset_from_json(doc.at("train")),
                                          doc.at("k").get<std::size_t>());
      case ModelKind::dt:
        return std::make_unique<TreeModel>(tree_from_payload(doc.at("tree")));
      case ModelKind::rf: {
        std::vector<TreeModel> trees;
        for (const auto& t : doc.at("trees")) trees.push_back(tree_from_payload(t));
        return std::make_unique<ForestModel>(std::move(trees),
                                             doc.at("tree_seeds").get<std::vector<std::uint64_t>>());
      }
      case ModelKind::svm: {
        const auto dim = doc.at("num_features").get<std::size_t>();
        std::vector<BinarySvmModel> machines;
        std::vector<PlattParams> platt;
        for (const auto& m : doc.at("machines")) {
          machines.push_back(svm_machine_from_payload(m, dim));
          platt.push_back({m.at("platt_a").get<double>(), m.at("platt_b").get<double>()});
        }
        return std::make_unique<MulticlassSvmModel>(std::move(machines), std::move(platt), dim);
      }
      case ModelKind::nn:
        return std::make_unique<MlpClassifier>(mlp_from_payload(doc.at("network")));
      case ModelKind::nn_ens: {
        std::vector<MlpModel> members;
        for (const auto& m : doc.at("members")) members.push_back(mlp_from_payload(m));
        return std::make_unique<EnsembleModel>(std::move(members));
      }
      case ModelKind::nn_mcd:
        return std::make_unique<McdModel>(mlp_from_payload(doc.at("network")),
                                          doc.at("passes").get<std::size_t>(),
                                          doc.at("inference_seed").get<std::uint64_t>());
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  }
  throw DataError("unsupported model kind");
}

void save_model(const Classifier& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << model.to_json().dump() << '\n';
}

std::unique_ptr<Classifier> load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace driftbench
