#include "driftbench/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "driftbench/error.hpp"
#include "driftbench/rng.hpp"
#include "text_util.hpp"

namespace driftbench {

namespace {

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
  throw DataError("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

Dataset::Dataset(std::size_t num_features, std::size_t num_classes)
    : num_features_(num_features), num_classes_(num_classes) {}

void Dataset::add(std::span<const double> features, ClassId label, BatchId batch) {
  if (features.size() != num_features_) {
    throw DataError("sample has " + std::to_string(features.size()) + " features, expected " +
                    std::to_string(num_features_));
  }
  if (label >= num_classes_) {
    throw DataError("label " + std::to_string(label) + " outside class range [0, " +
                    std::to_string(num_classes_) + ")");
  }
  values_.insert(values_.end(), features.begin(), features.end());
  labels_.push_back(label);
  batches_.push_back(batch);
}

Sample Dataset::sample(std::size_t i) const {
  const auto r = row(i);
  return Sample{{r.begin(), r.end()}, labels_[i], batches_[i]};
}

std::vector<BatchId> Dataset::batch_ids() const {
  std::vector<BatchId> ids(batches_.begin(), batches_.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

void Dataset::check_contiguous_batches() const {
  const auto ids = batch_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] != static_cast<BatchId>(i)) {
      throw DataError("batch ids are not contiguous from 0 (missing batch " + std::to_string(i) +
                      ")");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> idx) const {
  Dataset out(num_features_, num_classes_);
  out.values_.reserve(idx.size() * num_features_);
  out.labels_.reserve(idx.size());
  out.batches_.reserve(idx.size());
  for (std::size_t i : idx) {
    const auto r = row(i);
    out.values_.insert(out.values_.end(), r.begin(), r.end());
    out.labels_.push_back(labels_[i]);
    out.batches_.push_back(batches_[i]);
  }
  out.batch_months_ = batch_months_;
  return out;
}

Dataset Dataset::select_batch(BatchId b) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < size(); ++i) {
    if (batches_[i] == b) idx.push_back(i);
  }
  return subset(idx);
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes_, 0);
  for (ClassId c : labels_) ++counts[c];
  return counts;
}

// ---------------------------------------------------------------------------

Dataset parse_libsvm(std::istream& in, std::size_t num_features, std::size_t num_classes,
                     BatchId batch) {
  Dataset d(num_features, num_classes);
  std::vector<double> x(num_features);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = text::trim(line);
    if (content.empty()) continue;

    std::fill(x.begin(), x.end(), 0.0);
    std::istringstream tokens{std::string(content)};
    std::string tok;
    tokens >> tok;
    std::string_view label_tok = tok;
    if (const auto semi = label_tok.find(';'); semi != std::string_view::npos) {
      if (!text::to_double(label_tok.substr(semi + 1))) {
        fail_line(line_no, "malformed label token '" + tok + "'");
      }
      label_tok = label_tok.substr(0, semi);
    }
    const auto file_label = text::to_int<long long>(label_tok);
    if (!file_label) fail_line(line_no, "malformed label '" + tok + "'");
    if (*file_label < 1 || static_cast<unsigned long long>(*file_label) > num_classes) {
      fail_line(line_no, "label " + std::to_string(*file_label) + " outside declared classes 1.." +
                             std::to_string(num_classes));
    }

    std::size_t prev_index = 0;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) fail_line(line_no, "expected idx:value, got '" + tok + "'");
      const auto index = text::to_int<std::size_t>(std::string_view(tok).substr(0, colon));
      if (!index || *index == 0) fail_line(line_no, "malformed feature index in '" + tok + "'");
      if (*index <= prev_index) fail_line(line_no, "feature indices must be strictly increasing");
      if (*index > num_features) {
        fail_line(line_no, "feature index " + std::to_string(*index) + " exceeds dimension " +
                               std::to_string(num_features));
      }
      const auto value = text::to_double(std::string_view(tok).substr(colon + 1));
      if (!value) fail_line(line_no, "non-numeric value in '" + tok + "'");
      x[*index - 1] = *value;
      prev_index = *index;
    }
    d.add(x, static_cast<ClassId>(*file_label - 1), batch);
  }
  return d;
}

Dataset parse_csv(std::istream& in, const std::string& label_column,
                  const std::string& batch_column) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError("CSV input has no header row");
  ++line_no;

  std::vector<std::string> header;
  for (auto h : text::split(text::trim(line), ',')) header.emplace_back(text::trim(h));
  {
    auto sorted = header;
    std::sort(sorted.begin(), sorted.end());
    if (const auto dup = std::adjacent_find(sorted.begin(), sorted.end()); dup != sorted.end()) {
      throw DataError("duplicate CSV column '" + *dup + "'");
    }
  }
  const auto find_col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("missing CSV column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t label_col = find_col(label_column);
  const std::size_t batch_col = find_col(batch_column);
  if (label_col == batch_col) throw DataError("label and batch columns must differ");

  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_col && c != batch_col) feature_cols.push_back(c);
  }

  std::vector<Sample> rows;
  ClassId max_label = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = text::trim(line);
    if (content.empty()) continue;
    const auto cells = text::split(content, ',');
    if (cells.size() != header.size()) {
      fail_line(line_no, "expected " + std::to_string(header.size()) + " cells, got " +
                             std::to_string(cells.size()));
    }
    Sample s;
    s.features.reserve(feature_cols.size());
    for (std::size_t c : feature_cols) {
      const auto v = text::to_double(cells[c]);
      if (!v) fail_line(line_no, "non-numeric value in column '" + header[c] + "'");
      s.features.push_back(*v);
    }
    const auto label = text::to_int<ClassId>(cells[label_col]);
    if (!label) fail_line(line_no, "label must be a non-negative integer");
    const auto batch = text::to_int<BatchId>(cells[batch_col]);
    if (!batch || *batch < 0) fail_line(line_no, "batch must be a non-negative integer");
    s.label = *label;
    s.batch = *batch;
    max_label = std::max(max_label, s.label);
    rows.push_back(std::move(s));
  }

  Dataset d(feature_cols.size(), rows.empty() ? 0 : max_label + 1);
  for (const auto& s : rows) d.add(s);
  return d;
}

void write_csv(std::ostream& out, const Dataset& d) {
  for (std::size_t j = 0; j < d.num_features(); ++j) out << 'f' << j << ',';
  out << "label,batch\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (double v : d.row(i)) out << text::format_double(v) << ',';
    out << d.label(i) << ',' << d.batch(i) << '\n';
  }
}

std::vector<BatchFile> ucsd_manifest() {
  return {
      {0, "batch1.dat", {1, 2}, 445},     {1, "batch2.dat", {3, 10}, 1244},
      {2, "batch3.dat", {11, 13}, 1586},  {3, "batch4.dat", {14, 15}, 161},
      {4, "batch5.dat", {16, 16}, 197},   {5, "batch6.dat", {17, 20}, 2300},
      {6, "batch7.dat", {21, 21}, 3613},  {7, "batch8.dat", {22, 23}, 294},
      {8, "batch9.dat", {24, 30}, 470},   {9, "batch10.dat", {36, 36}, 3600},
  };
}

std::vector<BatchFile> read_manifest(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<BatchFile> out;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = text::trim(line);
    if (content.empty() || content.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto cells = text::split(content, ',');
    if (cells.size() != 5) fail_line(line_no, "manifest rows need 5 cells");
    BatchFile f;
    const auto batch = text::to_int<BatchId>(cells[0]);
    const auto first = text::to_int<int>(cells[2]);
    const auto last = text::to_int<int>(cells[3]);
    const auto rows = text::to_int<std::size_t>(cells[4]);
    if (!batch || !first || !last || !rows) fail_line(line_no, "malformed manifest row");
    f.batch = *batch;
    f.file = std::string(text::trim(cells[1]));
    f.months = {*first, *last};
    f.expected_rows = *rows;
    out.push_back(std::move(f));
  }
  return out;
}

Dataset load_libsvm_batches(const std::filesystem::path& dir, const std::vector<BatchFile>& manifest,
                            std::size_t num_features, std::size_t num_classes) {
  Dataset all(num_features, num_classes);
  std::map<BatchId, MonthRange> months;
  for (const auto& entry : manifest) {
    const auto path = dir / entry.file;
    std::ifstream in(path);
    if (!in) throw DataError("cannot open data file " + path.string());
    Dataset part;
    try {
      part = parse_libsvm(in, num_features, num_classes, entry.batch);
    } catch (const DataError& e) {
      throw DataError(path.string() + ": " + e.what());
    }
    if (entry.expected_rows != 0 && part.size() != entry.expected_rows) {
      throw DataError(path.string() + ": expected " + std::to_string(entry.expected_rows) +
                      " rows, found " + std::to_string(part.size()));
    }
    for (std::size_t i = 0; i < part.size(); ++i) all.add(part.row(i), part.label(i), part.batch(i));
    months[entry.batch] = entry.months;
  }
  all.set_batch_months(std::move(months));
  all.check_contiguous_batches();
  return all;
}

// ---------------------------------------------------------------------------

Standardizer Standardizer::fit(const Dataset& train) {
  if (train.empty()) throw DataError("cannot fit a standardizer on an empty dataset");
  const std::size_t n = train.size();
  const std::size_t dim = train.num_features();
  Standardizer s;
  s.mean.assign(dim, 0.0);
  s.deviation.assign(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = train.row(i);
    for (std::size_t j = 0; j < dim; ++j) s.mean[j] += r[j];
  }
  for (double& m : s.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = train.row(i);
    for (std::size_t j = 0; j < dim; ++j) {
      const double c = r[j] - s.mean[j];
      s.deviation[j] += c * c;
    }
  }
  for (double& v : s.deviation) {
    v = std::sqrt(v / static_cast<double>(n));
    if (!(v > 0.0)) v = 1.0;
  }
  return s;
}

void Standardizer::apply_row(std::span<double> x) const {
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = (x[j] - mean[j]) / deviation[j];
}

void Standardizer::invert_row(std::span<double> x) const {
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = x[j] * deviation[j] + mean[j];
}

Dataset Standardizer::apply(const Dataset& d) const {
  if (d.num_features() != mean.size()) {
    throw DataError("standardizer has dimension " + std::to_string(mean.size()) +
                    ", dataset has " + std::to_string(d.num_features()));
  }
  Dataset out = d;
  for (std::size_t i = 0; i < out.size(); ++i) apply_row(out.row(i));
  return out;
}

// ---------------------------------------------------------------------------

TemporalSplit temporal_split(const Dataset& d, const std::set<BatchId>& train_batches,
                             double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("split fraction must lie in (0, 1)");
  }
  if (train_batches.empty()) throw ConfigError("train batch set is empty");
  const auto ids = d.batch_ids();
  for (BatchId b : train_batches) {
    if (!std::binary_search(ids.begin(), ids.end(), b)) {
      throw ConfigError("unknown batch id " + std::to_string(b));
    }
  }

  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (train_batches.contains(d.batch(i))) pool.push_back(i);
  }
  Rng rng(seed);
  rng.shuffle(pool);
  const auto n_train =
      static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(pool.size())));

  TemporalSplit out;
  out.train = d.subset(std::span(pool).first(n_train));
  out.val = d.subset(std::span(pool).subspan(n_train));
  for (BatchId b : ids) {
    if (!train_batches.contains(b)) out.test_per_batch.push_back(d.select_batch(b));
  }
  return out;
}

}  // namespace driftbench
