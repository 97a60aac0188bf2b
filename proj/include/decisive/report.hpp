#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "decisive/binning.hpp"
#include "decisive/ingest.hpp"
#include "decisive/metrics.hpp"

namespace decisive {

struct MetricReport {
  double prediction_accuracy = 0.0;
  double cross_entropy = 0.0;  // +inf when some correct-class probability is 0 and gamma == 0
  MetricTriple reported;
  MetricTriple truth;
  SlopeResult slope;
  BinTable bin_table;
  std::uint64_t out_of_range_incorrect = 0;
  EvalConfig config;
  DatasetSummary dataset;

  bool cross_entropy_infinite() const;
};

struct EvalOptions {
  unsigned threads = 1;
  // Records handed to the counting pass at a time.
  std::size_t window = 1024;
};

/// Two passes over the source: correct-class probabilities and accuracy
/// first, then per-bin counts. Only O(N) doubles are retained.
MetricReport evaluate(const RecordSource& source, const EvalConfig& config,
                      const EvalOptions& options = {});
MetricReport evaluate(std::span<const PredictionRecord> records, const EvalConfig& config,
                      const EvalOptions& options = {});

struct SweepRow {
  double gamma = 0.0;
  MetricTriple reported;
  MetricTriple truth;
};

/// One row per gamma, in input order. Bins are rebuilt for every gamma;
/// all counting shares a single pass over the source.
std::vector<SweepRow> gamma_sweep(const RecordSource& source, const EvalConfig& config,
                                  std::span<const double> gammas, const EvalOptions& options = {});
std::vector<SweepRow> gamma_sweep(std::span<const PredictionRecord> records, const EvalConfig& config,
                                  std::span<const double> gammas, const EvalOptions& options = {});

enum class ReportFormat { json, tsv };

/// Returns bytes written. Reals use 17 significant digits.
std::size_t write_report(const MetricReport& report, ReportFormat format, std::ostream& out);
void write_report(const MetricReport& report, ReportFormat format, const std::filesystem::path& path);

MetricReport read_report_json(std::istream& in);
MetricReport read_report_json(const std::filesystem::path& path);

/// Tab-separated sweep table with a header row.
std::size_t write_sweep_tsv(std::span<const SweepRow> rows, std::ostream& out);

/// Human-readable summary in "reported / measured" notation.
void print_summary(const MetricReport& report, std::ostream& out);

}  // namespace decisive
