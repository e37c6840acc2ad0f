#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace driftbench {

using ClassId = std::size_t;
using BatchId = int;

struct Sample {
  std::vector<double> features;
  ClassId label = 0;
  BatchId batch = 0;

  bool operator==(const Sample&) const = default;
};

/// Inclusive month range covered by a temporal batch.
struct MonthRange {
  int first = 0;
  int last = 0;

  bool operator==(const MonthRange&) const = default;
};

/// Row-major sample table with a fixed feature dimension and class count.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t num_features, std::size_t num_classes);

  /// Appends a sample. Throws DataError on a dimension or label mismatch.
  void add(std::span<const double> features, ClassId label, BatchId batch);
  void add(const Sample& s) { add(s.features, s.label, s.batch); }

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  std::size_t num_features() const noexcept { return num_features_; }
  std::size_t num_classes() const noexcept { return num_classes_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * num_features_, num_features_};
  }
  std::span<double> row(std::size_t i) { return {values_.data() + i * num_features_, num_features_}; }
  ClassId label(std::size_t i) const { return labels_[i]; }
  BatchId batch(std::size_t i) const { return batches_[i]; }
  Sample sample(std::size_t i) const;

  std::span<const double> values() const noexcept { return values_; }
  std::span<const ClassId> labels() const noexcept { return labels_; }

  const std::map<BatchId, MonthRange>& batch_months() const noexcept { return batch_months_; }
  void set_batch_months(std::map<BatchId, MonthRange> months) { batch_months_ = std::move(months); }

  /// Sorted distinct batch ids.
  std::vector<BatchId> batch_ids() const;

  /// Throws DataError unless the sorted distinct batch ids are 0, 1, ..., B-1.
  void check_contiguous_batches() const;

  /// Rows `idx` in the given order; metadata is carried over.
  Dataset subset(std::span<const std::size_t> idx) const;
  Dataset select_batch(BatchId b) const;

  /// Count of samples per class.
  std::vector<std::size_t> class_counts() const;

  bool operator==(const Dataset&) const = default;

 private:
  std::size_t num_features_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<double> values_;
  std::vector<ClassId> labels_;
  std::vector<BatchId> batches_;
  std::map<BatchId, MonthRange> batch_months_;
};

// ---------------------------------------------------------------------------
// Ingestion

/// Sparse "label idx:value ..." text, one batch per file. Indices are 1-based
/// and strictly increasing; file labels 1..num_classes become 0..num_classes-1.
/// A label token may carry a ";<number>" suffix (the gas-sensor distribution
/// appends the concentration), which is ignored.
Dataset parse_libsvm(std::istream& in, std::size_t num_features, std::size_t num_classes,
                     BatchId batch);

/// CSV with a header row. Every column other than the label and batch columns
/// becomes a feature, in header order. Labels are 0-based class ids.
Dataset parse_csv(std::istream& in, const std::string& label_column,
                  const std::string& batch_column);

/// Canonical CSV: header f0..f{D-1},label,batch then one row per sample.
/// Values are written in shortest round-trip form.
void write_csv(std::ostream& out, const Dataset& d);

struct BatchFile {
  BatchId batch = 0;
  std::string file;
  MonthRange months;
  std::size_t expected_rows = 0;  // 0 = unchecked
};

/// Batch layout of the public gas-sensor drift distribution (batch1.dat ..
/// batch10.dat). Mirrors data/ucsd_batches.csv.
std::vector<BatchFile> ucsd_manifest();

/// Reads a manifest CSV with header batch,file,first_month,last_month,rows.
std::vector<BatchFile> read_manifest(std::istream& in);

/// Loads every manifest file from `dir` into one Dataset (months attached).
Dataset load_libsvm_batches(const std::filesystem::path& dir, const std::vector<BatchFile>& manifest,
                            std::size_t num_features, std::size_t num_classes);

// ---------------------------------------------------------------------------
// Standardization

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> deviation;  // strictly positive; constant features store 1

  /// Population statistics over `train`. Throws DataError on empty input.
  static Standardizer fit(const Dataset& train);

  Dataset apply(const Dataset& d) const;
  void apply_row(std::span<double> x) const;
  void invert_row(std::span<double> x) const;
};

// ---------------------------------------------------------------------------
// Temporal protocol

struct TemporalSplit {
  Dataset train;
  Dataset val;
  std::vector<Dataset> test_per_batch;  // ascending batch id
};

/// Shuffles the samples of `train_batches` with `seed` and gives the first
/// ceil(fraction * n) to train and the rest to val. Other batches are returned
/// untouched, one Dataset per batch.
TemporalSplit temporal_split(const Dataset& d, const std::set<BatchId>& train_batches,
                             double fraction, std::uint64_t seed);

}  // namespace driftbench
