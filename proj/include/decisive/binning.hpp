#pragma once

// Measured ("truth") metrics from equal-population histograms.
//
// Bins are defined by the correct-class probabilities only. Every class
// probability of every record is then counted against those bins: the
// correct-class entry increments n_correct, all others n_incorrect, and the
// per-bin fraction f = n_correct / (n_correct + n_incorrect) is the measured
// probability for that range of reported probabilities.
//
// Construction rules:
//  * A value (grouped within value_epsilon) whose multiplicity strictly
//    exceeds ceil(N / B) is a singularity and gets its own bin (v - gamma, v].
//    For v < gamma the bin is [0, gamma]. Overlapping singularity bins are
//    truncated at the previous bin's upper edge.
//  * The remaining values are split into min(B - #singularities, #remaining)
//    quantile groups whose populations differ by at most one (lower groups
//    take the extra). Group edges sit at the midpoint between the largest
//    member of the lower group and the smallest member of the upper group;
//    tied values at an edge go to the lower group. The lowest group starts at
//    the overall minimum and the highest ends at 1.
//  * Singularity intervals are carved out of the quantile groups. A piece
//    left without correct-class members is merged into an adjacent quantile
//    bin when one is contiguous, otherwise it becomes a gap.
//  * Intervals are (lo, hi]; the first bin is closed at lo.
//
// Probabilities below the first bin or inside gaps can only be
// incorrect-class entries; they are tallied in out_of_range_incorrect.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "decisive/metrics.hpp"

namespace decisive {

struct BinStats {
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t n_correct = 0;
  std::uint64_t n_incorrect = 0;
  double fraction = 0.0;
  double weight = 0.0;
  bool is_singularity = false;
  double mean_reported = 0.0;

  friend bool operator==(const BinStats&, const BinStats&) = default;
};

struct BinTable {
  std::vector<BinStats> bins;
  std::uint64_t total_correct = 0;
  std::uint64_t total_incorrect = 0;
  std::uint64_t out_of_range_incorrect = 0;

  /// Index of the bin containing p, or nullopt for gaps and values below
  /// the first bin.
  std::optional<std::size_t> locate(double p) const;

  friend bool operator==(const BinTable&, const BinTable&) = default;
};

enum class Verdict { overconfident, underconfident, calibrated, undefined };

std::string_view to_string(Verdict v);
/// Inverse of to_string; throws UsageError on unknown names.
Verdict verdict_from_string(std::string_view name);

struct SlopeResult {
  double slope = 0.0;  // NaN when the verdict is undefined
  double d_truth = 0.0;
  double r_truth = 0.0;
  double d_reported = 0.0;
  double r_reported = 0.0;
  Verdict verdict = Verdict::undefined;
};

/// Values (grouped within value_epsilon, represented by the group maximum)
/// whose multiplicity exceeds ceil(N / bins). Input must be sorted ascending.
std::vector<double> detect_singularities(std::span<const double> sorted_probs,
                                         const EvalConfig& config);

/// Bin edges, n_correct and mean_reported from the correct-class
/// probabilities (any order). Incorrect counts are left at zero.
BinTable build_bins(std::span<const double> correct_probs, const EvalConfig& config);

/// Accumulates counts against a fixed bin layout. Integer counts only, so
/// merging partial accumulators in any order gives identical results.
class CountAccumulator {
 public:
  explicit CountAccumulator(const BinTable& layout);

  void add(const PredictionRecord& record);
  void add(std::span<const PredictionRecord> records);
  void merge(const CountAccumulator& other);

  /// Layout with counts, fractions and weights filled in.
  BinTable finish() const;

 private:
  const BinTable* layout_;
  std::vector<std::uint64_t> correct_;
  std::vector<std::uint64_t> incorrect_;
  std::uint64_t out_of_range_ = 0;
  std::uint64_t unbinned_correct_ = 0;
};

/// Counts every class probability of every record against `table`.
/// `threads` > 1 splits the records into contiguous chunks.
BinTable fill_counts(const BinTable& table, std::span<const PredictionRecord> records,
                     unsigned threads = 1);

/// Floored per-bin fractions averaged with weight n_correct.
MetricTriple truth_metrics(const BinTable& table, const EvalConfig& config);

SlopeResult slope(const MetricTriple& reported, const MetricTriple& truth, const EvalConfig& config);

}  // namespace decisive
