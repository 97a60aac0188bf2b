#include "decisive/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <quadmath.h>
#include <string>

namespace decisive {

namespace {

__extension__ typedef __float128 Wide;

bool is_probability(double v) { return v >= 0.0 && v <= 1.0; }

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw UsageError("gamma must lie in [0, 1)");
}

}  // namespace

void EvalConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw UsageError("gamma must lie in [0, 1)");
  if (bins < 1) throw UsageError("bins must be >= 1");
  if (!(prob_sum_tolerance > 0.0)) throw UsageError("prob_sum_tolerance must be > 0");
  if (!(value_epsilon >= 0.0)) throw UsageError("value_epsilon must be >= 0");
}

std::vector<double> floor_gamma(std::span<const double> values, double gamma) {
  check_gamma(gamma);
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!is_probability(values[i])) throw DomainError("probability outside [0, 1]", i);
    out.push_back(std::max(values[i], gamma));
  }
  return out;
}

double generalized_mean(std::span<const double> values, std::span<const double> weights,
                        GeneralizedOrder order) {
  if (values.empty()) throw UsageError("generalized mean of an empty sequence");
  const bool weighted = !weights.empty();
  if (weighted && weights.size() != values.size())
    throw UsageError("weights length does not match values length");

  // The robustness order is carried as the double nearest -2/3; widen it exactly.
  const Wide rho = order.rho() == ROBUSTNESS.rho() ? Wide(-2) / 3 : Wide(order.rho());
  BasicCompensatedSum<Wide> total_weight;
  BasicCompensatedSum<Wide> acc;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  bool has_zero = false;

  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = values[i];
    const double w = weighted ? weights[i] : 1.0;
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("mean input must be finite and >= 0", i);
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("weight must be finite and >= 0", i);
    if (w == 0.0) continue;
    total_weight.add(w);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    if (x == 0.0) {
      has_zero = true;
      if (rho <= 0.0) continue;
    }
    const Wide wx = static_cast<Wide>(w);
    if (rho == 0)
      acc.add(wx * logq(x));
    else if (rho == 1)
      acc.add(wx * x);
    else
      acc.add(wx * powq(x, rho));
  }

  const Wide w_sum = total_weight.value();
  if (!(w_sum > 0)) throw UsageError("weights sum to zero");
  if (has_zero && rho <= 0) return 0.0;

  Wide result;
  if (rho == 0)
    result = expq(acc.value() / w_sum);
  else if (rho == 1)
    result = acc.value() / w_sum;
  else
    result = powq(acc.value() / w_sum, 1 / rho);
  return std::clamp(static_cast<double>(result), lo, hi);
}

MetricTriple generalized_means(std::span<const double> values, std::span<const double> weights) {
  return {generalized_mean(values, weights, ROBUSTNESS), generalized_mean(values, weights, GEOMETRIC),
          generalized_mean(values, weights, DECISIVENESS)};
}

std::size_t argmax(std::span<const double> probs) {
  if (probs.empty()) throw UsageError("argmax of an empty probability vector");
  std::size_t best = 0;
  for (std::size_t c = 1; c < probs.size(); ++c)
    if (probs[c] > probs[best]) best = c;
  return best;
}

double prediction_accuracy(std::span<const PredictionRecord> records) {
  if (records.empty()) throw UsageError("prediction accuracy of an empty record set");
  std::size_t correct = 0;
  for (const auto& r : records)
    if (argmax(r.probs) == r.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

double cross_entropy_from_correct(std::span<const double> correct_probs, double gamma) {
  if (correct_probs.empty()) throw UsageError("cross entropy of an empty record set");
  const auto floored = floor_gamma(correct_probs, gamma);
  // Same accumulation as generalized_mean at rho = 0 so exp(-H) matches it.
  BasicCompensatedSum<Wide> acc;
  for (double x : floored) {
    if (x == 0.0) return std::numeric_limits<double>::infinity();
    acc.add(logq(x));
  }
  return static_cast<double>(0 - acc.value() / static_cast<Wide>(floored.size()));
}

double cross_entropy(std::span<const PredictionRecord> records, double gamma) {
  std::vector<double> correct;
  correct.reserve(records.size());
  for (const auto& r : records) correct.push_back(r.correct_prob());
  return cross_entropy_from_correct(correct, gamma);
}

MetricTriple reported_metrics_from_correct(std::span<const double> correct_probs, double gamma) {
  if (correct_probs.empty()) throw UsageError("reported metrics of an empty record set");
  const auto floored = floor_gamma(correct_probs, gamma);
  return generalized_means(floored, {});
}

MetricTriple reported_metrics(std::span<const PredictionRecord> records, const EvalConfig& config) {
  config.validate();
  if (records.empty()) throw UsageError("reported metrics of an empty record set");
  std::vector<double> correct;
  correct.reserve(records.size());
  for (const auto& r : records) {
    if (config.correct_decisions_only && argmax(r.probs) != r.label) continue;
    correct.push_back(r.correct_prob());
  }
  if (correct.empty()) throw UsageError("no correctly decided samples to average");
  return reported_metrics_from_correct(correct, config.gamma);
}

}  // namespace decisive
