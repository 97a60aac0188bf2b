#pragma once

// Prediction files.
//
//   CSV   header `label,p0,...,p{K-1}`, then one `label,prob,...` row per sample.
//   JSONL one `{"label": <int>, "probs": [<number>, ...]}` object per line.
//
// Labels are 0-based. `#` comment lines are accepted before the header (CSV)
// or the first record (JSONL); blank lines are ignored. Rows that break the
// record invariants are rejected (strict mode: the read fails at the first
// one). Probability vectors whose sum is within tolerance of 1 but not
// exactly 1 are divided by their sum.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "decisive/metrics.hpp"

namespace decisive {

enum class DataFormat { csv, jsonl };

DataFormat parse_format(std::string_view name);
std::string_view to_string(DataFormat f);
/// jsonl for `.jsonl`/`.ndjson` extensions, csv otherwise.
DataFormat format_from_path(const std::filesystem::path& path);

namespace reject {
inline constexpr std::string_view parse_error = "parse-error";
inline constexpr std::string_view column_count = "column-count";
inline constexpr std::string_view class_count_mismatch = "class-count-mismatch";
inline constexpr std::string_view label_out_of_range = "label-out-of-range";
inline constexpr std::string_view prob_out_of_range = "prob-out-of-range";
inline constexpr std::string_view sum_out_of_tolerance = "sum-out-of-tolerance";
}  // namespace reject

struct DatasetSummary {
  std::string name;
  std::uint64_t n_records = 0;
  std::uint64_t n_classes = 0;
  std::uint64_t n_rejected = 0;
  std::map<std::string, std::uint64_t> rejection_reasons;

  friend bool operator==(const DatasetSummary&, const DatasetSummary&) = default;
};

/// Pull-style reader over a byte stream; holds one row at a time.
class PredictionReader {
 public:
  PredictionReader(std::istream& in, DataFormat format, const EvalConfig& config, bool strict);

  /// Next accepted record, or false at end of input.
  bool next(PredictionRecord& out);

  const DatasetSummary& summary() const noexcept { return summary_; }

 private:
  bool read_header();
  void reject(std::string_view reason, const std::string& detail);
  bool parse_csv_row(std::string_view line, PredictionRecord& out);
  bool parse_jsonl_row(std::string_view line, PredictionRecord& out);
  bool validate(PredictionRecord& rec);

  std::istream& in_;
  DataFormat format_;
  EvalConfig config_;
  bool strict_;
  bool header_done_ = false;
  bool pending_row_ = false;  // JSONL: first data row already in line_
  std::size_t line_no_ = 0;
  std::string line_;
  std::optional<std::size_t> classes_;
  DatasetSummary summary_;
};

struct ReadResult {
  std::vector<PredictionRecord> records;
  DatasetSummary summary;
};

ReadResult read_predictions(std::istream& in, DataFormat format, const EvalConfig& config,
                            bool strict);
ReadResult read_predictions(const std::filesystem::path& path, DataFormat format,
                            const EvalConfig& config, bool strict);

/// Streaming writer. Probabilities use the shortest round-trip decimal form.
class PredictionWriter {
 public:
  PredictionWriter(std::ostream& out, DataFormat format, std::size_t n_classes);

  void write(const PredictionRecord& record);
  std::size_t count() const noexcept { return count_; }

 private:
  std::ostream& out_;
  DataFormat format_;
  std::size_t n_classes_;
  std::size_t count_ = 0;
  std::string buf_;
};

/// Writes the header (CSV) and every record; returns the record count.
std::size_t write_predictions(std::span<const PredictionRecord> records, std::ostream& out,
                              DataFormat format);

/// Anything that can replay the same record sequence any number of times,
/// handing it over in windows of at most `window` records.
class RecordSource {
 public:
  using Visitor = std::function<void(std::span<const PredictionRecord>)>;
  virtual ~RecordSource() = default;

  virtual void scan(std::size_t window, const Visitor& visit) const = 0;
  /// Summary of the records a scan yields. Valid after the first scan.
  virtual DatasetSummary summary() const = 0;
};

class SpanSource final : public RecordSource {
 public:
  explicit SpanSource(std::span<const PredictionRecord> records, std::string name = {});
  void scan(std::size_t window, const Visitor& visit) const override;
  DatasetSummary summary() const override;

 private:
  std::span<const PredictionRecord> records_;
  std::string name_;
};

/// Re-opens and re-parses the file on every scan; memory stays O(window * K).
class FileSource final : public RecordSource {
 public:
  FileSource(std::filesystem::path path, DataFormat format, EvalConfig config, bool strict);
  void scan(std::size_t window, const Visitor& visit) const override;
  DatasetSummary summary() const override;

 private:
  std::filesystem::path path_;
  DataFormat format_;
  EvalConfig config_;
  bool strict_;
  mutable std::optional<DatasetSummary> summary_;
};

}  // namespace decisive
