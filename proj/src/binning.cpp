#include "decisive/binning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

namespace decisive {

namespace {

struct Interval {
  double lo;
  double hi;
  bool closed_lo;  // [lo, hi] rather than (lo, hi]
  bool singular;
  std::uint64_t members = 0;
};

bool contains(const Interval& iv, double x) {
  return x <= iv.hi && (x > iv.lo || (iv.closed_lo && x == iv.lo));
}

std::vector<Interval> singularity_intervals(std::span<const double> singular, double gamma) {
  std::vector<Interval> out;
  for (double v : singular) {
    Interval iv{v - gamma, v, false, true};
    if (iv.lo <= 0.0) iv = Interval{0.0, std::max(v, gamma), true, true};
    if (!out.empty() && iv.lo < out.back().hi) {
      iv.lo = out.back().hi;
      iv.closed_lo = false;
    }
    if (iv.lo >= iv.hi) continue;  // absorbed by the previous singularity bin
    out.push_back(iv);
  }
  return out;
}

// Edges e_0 < ... < e_Q of the quantile groups over `remaining` (sorted).
// Group j is (e_j, e_{j+1}], group 0 closed at e_0.
std::vector<double> quantile_edges(std::span<const double> remaining, std::size_t groups,
                                   double first_lo) {
  const std::size_t n = remaining.size();
  std::vector<double> edges{first_lo};
  std::size_t split = 0;
  for (std::size_t j = 0; j + 1 < groups; ++j) {
    split += n / groups + (j < n % groups ? 1 : 0);
    edges.push_back((remaining[split - 1] + remaining[split]) / 2.0);
  }
  edges.push_back(1.0);

  // Ties at an edge go to the lower group; a group emptied that way is
  // merged into the one below by dropping its lower edge.
  std::vector<double> kept{edges.front()};
  std::size_t pos = 0;
  for (std::size_t j = 1; j < edges.size(); ++j) {
    const std::size_t begin = pos;
    while (pos < n && remaining[pos] <= edges[j]) ++pos;
    if (pos == begin && kept.size() > 1)
      kept.back() = edges[j];
    else
      kept.push_back(edges[j]);
  }
  return kept;
}

// Pieces of the group (a, b] left after removing the singularity intervals.
void subtract_singularities(double a, double b, bool closed_a, const std::vector<Interval>& sing,
                            std::vector<Interval>& out) {
  double cur = a;
  bool cur_closed = closed_a;
  for (const auto& s : sing) {
    if (s.hi < cur || s.lo >= b) continue;
    if (s.hi == cur) {
      cur_closed = false;  // the closed point belongs to the singularity bin
      continue;
    }
    if (s.lo > cur) {
      out.push_back({cur, std::min(b, s.lo), cur_closed, false});
    } else if (s.lo == cur && cur_closed && !s.closed_lo) {
      out.push_back({cur, cur, true, false});
    }
    cur = s.hi;
    cur_closed = false;
    if (cur >= b) return;
  }
  if (cur < b || (cur == b && cur_closed)) out.push_back({cur, b, cur_closed, false});
}

}  // namespace

std::optional<std::size_t> BinTable::locate(double p) const {
  const auto it = std::lower_bound(bins.begin(), bins.end(), p,
                                   [](const BinStats& b, double v) { return b.hi < v; });
  if (it == bins.end()) return std::nullopt;
  const auto idx = static_cast<std::size_t>(it - bins.begin());
  if (p > it->lo || (idx == 0 && p >= it->lo)) return idx;
  return std::nullopt;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::overconfident: return "overconfident";
    case Verdict::underconfident: return "underconfident";
    case Verdict::calibrated: return "calibrated";
    case Verdict::undefined: return "undefined";
  }
  return "undefined";
}

Verdict verdict_from_string(std::string_view name) {
  for (auto v : {Verdict::overconfident, Verdict::underconfident, Verdict::calibrated,
                 Verdict::undefined})
    if (to_string(v) == name) return v;
  throw UsageError("unknown slope verdict '" + std::string(name) + "'");
}

std::vector<double> detect_singularities(std::span<const double> sorted_probs,
                                         const EvalConfig& config) {
  config.validate();
  if (!std::is_sorted(sorted_probs.begin(), sorted_probs.end()))
    throw UsageError("detect_singularities requires ascending input");
  const std::size_t n = sorted_probs.size();
  const std::size_t capacity = (n + config.bins - 1) / config.bins;
  std::vector<double> out;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && sorted_probs[j + 1] - sorted_probs[i] <= config.value_epsilon) ++j;
    if (j - i + 1 > capacity) out.push_back(sorted_probs[j]);
    i = j + 1;
  }
  return out;
}

BinTable build_bins(std::span<const double> correct_probs, const EvalConfig& config) {
  config.validate();
  if (correct_probs.empty()) throw UsageError("cannot bin an empty set of probabilities");
  for (std::size_t i = 0; i < correct_probs.size(); ++i)
    if (!(correct_probs[i] >= 0.0 && correct_probs[i] <= 1.0))
      throw DomainError("correct-class probability outside [0, 1]", i);

  std::vector<double> sorted(correct_probs.begin(), correct_probs.end());
  std::sort(sorted.begin(), sorted.end());

  const auto singular = detect_singularities(sorted, config);
  std::vector<Interval> sing;
  if (!singular.empty()) {
    if (config.gamma == 0.0)
      throw UsageError("gamma = 0 leaves no width for the singularity bin at " +
                       std::to_string(singular.front()));
    sing = singularity_intervals(singular, config.gamma);
    if (config.bins <= sing.size())
      throw UsageError("too few bins: " + std::to_string(config.bins) + " bins for " +
                       std::to_string(sing.size()) + " singularities");
  }

  std::vector<double> remaining;
  remaining.reserve(sorted.size());
  for (double x : sorted) {
    const bool in_sing =
        std::any_of(sing.begin(), sing.end(), [x](const Interval& s) { return contains(s, x); });
    if (!in_sing) remaining.push_back(x);
  }

  std::vector<Interval> pieces;
  const std::size_t groups = std::min(config.bins - sing.size(), remaining.size());
  if (groups > 0) {
    const auto edges = quantile_edges(remaining, groups, sorted.front());
    for (std::size_t j = 0; j + 1 < edges.size(); ++j)
      subtract_singularities(edges[j], edges[j + 1], j == 0, sing, pieces);
  }
  pieces.insert(pieces.end(), sing.begin(), sing.end());
  std::sort(pieces.begin(), pieces.end(), [](const Interval& a, const Interval& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });

  for (auto& p : pieces)
    for (double x : sorted)
      if (contains(p, x)) ++p.members;

  // Empty quantile pieces fold into a contiguous quantile neighbour.
  std::vector<Interval> merged;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    Interval p = pieces[i];
    if (p.singular || p.members > 0) {
      merged.push_back(p);
      continue;
    }
    if (i + 1 < pieces.size() && !pieces[i + 1].singular && pieces[i + 1].lo == p.hi) {
      pieces[i + 1].lo = p.lo;
      pieces[i + 1].closed_lo = p.closed_lo;
    } else if (!merged.empty() && !merged.back().singular && merged.back().hi == p.lo) {
      merged.back().hi = p.hi;
    }
  }

  BinTable table;
  table.bins.reserve(merged.size());
  for (const auto& p : merged) {
    BinStats b;
    b.lo = p.lo;
    b.hi = p.hi;
    b.is_singularity = p.singular;
    table.bins.push_back(b);
  }

  std::vector<CompensatedSum> sums(table.bins.size());
  for (double x : sorted) {
    const auto idx = table.locate(x);
    if (!idx) throw std::logic_error("correct-class probability left unbinned");
    ++table.bins[*idx].n_correct;
    sums[*idx].add(x);
  }
  for (std::size_t i = 0; i < table.bins.size(); ++i) {
    auto& b = table.bins[i];
    if (b.n_correct == 0) throw std::logic_error("bin without correct-class members");
    b.mean_reported = sums[i].value() / static_cast<double>(b.n_correct);
    b.weight = static_cast<double>(b.n_correct);
    b.fraction = 1.0;
  }
  table.total_correct = sorted.size();
  return table;
}

CountAccumulator::CountAccumulator(const BinTable& layout)
    : layout_(&layout), correct_(layout.bins.size(), 0), incorrect_(layout.bins.size(), 0) {}

void CountAccumulator::add(const PredictionRecord& record) {
  for (std::size_t c = 0; c < record.probs.size(); ++c) {
    const auto idx = layout_->locate(record.probs[c]);
    if (c == record.label) {
      if (idx)
        ++correct_[*idx];
      else
        ++unbinned_correct_;
    } else if (idx) {
      ++incorrect_[*idx];
    } else {
      ++out_of_range_;
    }
  }
}

void CountAccumulator::add(std::span<const PredictionRecord> records) {
  for (const auto& r : records) add(r);
}

void CountAccumulator::merge(const CountAccumulator& other) {
  if (other.layout_ != layout_) throw UsageError("merging counts built on different bin layouts");
  for (std::size_t i = 0; i < correct_.size(); ++i) {
    correct_[i] += other.correct_[i];
    incorrect_[i] += other.incorrect_[i];
  }
  out_of_range_ += other.out_of_range_;
  unbinned_correct_ += other.unbinned_correct_;
}

BinTable CountAccumulator::finish() const {
  if (unbinned_correct_ > 0)
    throw UsageError("bin table was not built from these records (" +
                     std::to_string(unbinned_correct_) + " correct-class probabilities unbinned)");
  BinTable table = *layout_;
  table.total_correct = 0;
  table.total_incorrect = 0;
  for (std::size_t i = 0; i < table.bins.size(); ++i) {
    auto& b = table.bins[i];
    b.n_correct = correct_[i];
    b.n_incorrect = incorrect_[i];
    const auto total = b.n_correct + b.n_incorrect;
    b.fraction = total == 0 ? 0.0 : static_cast<double>(b.n_correct) / static_cast<double>(total);
    b.weight = static_cast<double>(b.n_correct);
    table.total_correct += b.n_correct;
    table.total_incorrect += b.n_incorrect;
  }
  table.out_of_range_incorrect = out_of_range_;
  return table;
}

BinTable fill_counts(const BinTable& table, std::span<const PredictionRecord> records,
                     unsigned threads) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(records.size())));
  if (threads <= 1) {
    CountAccumulator acc(table);
    acc.add(records);
    return acc.finish();
  }
  std::vector<CountAccumulator> parts(threads, CountAccumulator(table));
  std::vector<std::thread> workers;
  const std::size_t chunk = (records.size() + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(records.size(), t * chunk);
    const std::size_t end = std::min(records.size(), begin + chunk);
    workers.emplace_back([&parts, t, sub = records.subspan(begin, end - begin)] { parts[t].add(sub); });
  }
  for (auto& w : workers) w.join();
  for (unsigned t = 1; t < threads; ++t) parts[0].merge(parts[t]);
  return parts[0].finish();
}

MetricTriple truth_metrics(const BinTable& table, const EvalConfig& config) {
  config.validate();
  if (table.bins.empty()) throw UsageError("truth metrics need at least one bin");
  std::vector<double> fractions;
  std::vector<double> weights;
  fractions.reserve(table.bins.size());
  weights.reserve(table.bins.size());
  for (const auto& b : table.bins) {
    fractions.push_back(b.fraction);
    weights.push_back(b.weight);
  }
  return generalized_means(floor_gamma(fractions, config.gamma), weights);
}

SlopeResult slope(const MetricTriple& reported, const MetricTriple& truth, const EvalConfig& config) {
  SlopeResult r;
  r.d_truth = truth.decisiveness;
  r.r_truth = truth.robustness;
  r.d_reported = reported.decisiveness;
  r.r_reported = reported.robustness;
  const double denominator = r.d_reported - r.r_reported;
  if (!(std::fabs(denominator) > config.value_epsilon)) {
    r.slope = std::numeric_limits<double>::quiet_NaN();
    r.verdict = Verdict::undefined;
    return r;
  }
  r.slope = (r.d_truth - r.r_truth) / denominator;
  if (r.slope > 1.0 + config.value_epsilon)
    r.verdict = Verdict::underconfident;
  else if (r.slope < 1.0 - config.value_epsilon)
    r.verdict = Verdict::overconfident;
  else
    r.verdict = Verdict::calibrated;
  return r;
}

}  // namespace decisive
