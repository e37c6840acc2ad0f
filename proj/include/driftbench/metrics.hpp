#pragma once

#include <span>
#include <vector>

#include "driftbench/prob.hpp"

namespace driftbench {

struct PredictionRecord {
  ProbVector probs;
  ClassId label = 0;
};

struct CalibrationBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double bin_accuracy = 0.0;    // 0 for empty bins
  double bin_confidence = 0.0;  // 0 for empty bins
};

struct CalibrationReport {
  double accuracy = 0.0;
  double mean_confidence = 0.0;
  double ece = 0.0;
  std::vector<CalibrationBin> bins;
};

/// Fraction of records whose argmax (lowest id on ties) equals the label.
double accuracy(std::span<const PredictionRecord> records);

/// Mean top-label confidence.
double mean_confidence(std::span<const PredictionRecord> records);

/// Expected calibration error over `num_bins` equal-width confidence bins.
/// Bin m holds confidences in [m/B, (m+1)/B); confidence 1 joins the last bin.
CalibrationReport ece(std::span<const PredictionRecord> records, std::size_t num_bins = 10);

/// ECE recomputed from the bins alone.
double ece_from_bins(std::span<const CalibrationBin> bins);

/// Pairs predictions with the labels of `d`.
std::vector<PredictionRecord> make_records(std::vector<ProbVector> probs, const Dataset& d);

}  // namespace driftbench
