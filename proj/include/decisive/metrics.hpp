#pragma once

// Generalized-mean accuracy metrics over correct-class probabilities.
//
// The three canonical orders of the power mean
//
//     M_rho(x; w) = ( sum_i w_i x_i^rho / sum_i w_i )^(1/rho),   M_0 = exp(mean log x)
//
// give robustness (rho = -2/3), geometric accuracy (rho = 0) and
// decisiveness (rho = 1). Probabilities are floored at gamma before
// averaging so a single zero does not collapse the rho <= 0 means.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "decisive/error.hpp"

namespace decisive {

/// Exponent of a power mean. Always finite.
class GeneralizedOrder {
 public:
  constexpr explicit GeneralizedOrder(double rho) : rho_(rho) {
    // x - x is NaN for NaN and +-inf.
    if (!(rho - rho == 0.0)) throw UsageError("generalized mean order must be finite");
  }

  constexpr double rho() const noexcept { return rho_; }

  static constexpr GeneralizedOrder robustness() { return GeneralizedOrder(-2.0 / 3.0); }
  static constexpr GeneralizedOrder geometric() { return GeneralizedOrder(0.0); }
  static constexpr GeneralizedOrder decisiveness() { return GeneralizedOrder(1.0); }

  friend constexpr bool operator==(GeneralizedOrder, GeneralizedOrder) = default;

 private:
  double rho_;
};

inline constexpr GeneralizedOrder ROBUSTNESS = GeneralizedOrder::robustness();
inline constexpr GeneralizedOrder GEOMETRIC = GeneralizedOrder::geometric();
inline constexpr GeneralizedOrder DECISIVENESS = GeneralizedOrder::decisiveness();

struct EvalConfig {
  double gamma = 0.005;
  std::size_t bins = 20;
  double prob_sum_tolerance = 1e-4;
  double value_epsilon = 1e-12;
  // Average reported probabilities only over samples whose argmax is the label.
  bool correct_decisions_only = false;

  /// Throws UsageError naming the offending field.
  void validate() const;
};

struct PredictionRecord {
  std::vector<double> probs;
  std::size_t label = 0;

  double correct_prob() const { return probs[label]; }
  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

struct MetricTriple {
  double robustness = 0.0;
  double geometric = 0.0;
  double decisiveness = 0.0;

  friend bool operator==(const MetricTriple&, const MetricTriple&) = default;
};

/// Neumaier compensated sum. Order of add() calls is the summation order.
template <typename T>
class BasicCompensatedSum {
 public:
  void add(T x) noexcept {
    const T t = sum_ + x;
    if ((sum_ < 0 ? -sum_ : sum_) >= (x < 0 ? -x : x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  T value() const noexcept { return sum_ + comp_; }

 private:
  T sum_ = 0;
  T comp_ = 0;
};

using CompensatedSum = BasicCompensatedSum<double>;

/// max(values[i], gamma) elementwise. Values must lie in [0, 1].
std::vector<double> floor_gamma(std::span<const double> values, double gamma);

/// Weighted power mean, accumulated in binary128 and rounded once to double.
/// An empty `weights` span means uniform weights.
/// For rho <= 0 any zero value (with positive weight) gives 0.
/// The result is clamped to [min, max] of the positively weighted values.
double generalized_mean(std::span<const double> values, std::span<const double> weights,
                        GeneralizedOrder order);

inline double generalized_mean(std::span<const double> values, GeneralizedOrder order) {
  return generalized_mean(values, {}, order);
}

/// All three canonical orders at once.
MetricTriple generalized_means(std::span<const double> values, std::span<const double> weights);

/// Index of the largest probability; ties go to the lowest index.
std::size_t argmax(std::span<const double> probs);

double prediction_accuracy(std::span<const PredictionRecord> records);

/// Mean negative natural log of the floored correct-class probabilities.
/// +infinity when gamma == 0 and some correct-class probability is 0.
double cross_entropy(std::span<const PredictionRecord> records, double gamma);
double cross_entropy_from_correct(std::span<const double> correct_probs, double gamma);

MetricTriple reported_metrics(std::span<const PredictionRecord> records, const EvalConfig& config);
/// Reported metrics from already-extracted correct-class probabilities.
MetricTriple reported_metrics_from_correct(std::span<const double> correct_probs, double gamma);

}  // namespace decisive
