#pragma once

// Fitted-model documents ("driftbench-model", version 1):
//
//   {"format": "driftbench-model", "version": 1, "kind": "<SVM|DT|KNN|RF|NN|NN-Ens|NN-MCD>",
//    ...family payload...}
//
// Payloads store every parameter needed for bit-identical predictions; doubles
// are written with round-trip precision. The layout may change before 1.0.

#include <filesystem>
#include <memory>

#include "driftbench/prob.hpp"

namespace driftbench {

inline constexpr int kModelFormatVersion = 1;

std::unique_ptr<Classifier> model_from_json(const nlohmann::json& doc);

void save_model(const Classifier& model, const std::filesystem::path& path);
std::unique_ptr<Classifier> load_model(const std::filesystem::path& path);

}  // namespace driftbench
