#pragma once

// Seeded synthetic classifiers with known calibration.
//
// Random numbers come from std::mt19937_64, whose output sequence is fixed by
// the C++ standard. Uniform, normal, gamma and beta variates are derived here
// rather than through <random> distributions (whose algorithms are
// implementation-defined), so a seed reproduces the same file everywhere:
//
//   uniform   53 high bits of one engine draw, scaled to [0, 1)
//   normal    Marsaglia polar method
//   gamma     Marsaglia-Tsang squeeze; shape < 1 via Gamma(shape + 1) * U^(1/shape)
//   beta      X / (X + Y) with X ~ Gamma(alpha), Y ~ Gamma(beta)

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "decisive/metrics.hpp"

namespace decisive {

struct Calibrated {
  friend bool operator==(const Calibrated&, const Calibrated&) = default;
};
/// Reported vector = calibrated vector^(1/t), renormalized; labels still
/// follow the calibrated vector. t < 1 sharpens (overconfident).
struct Temperature {
  double t = 1.0;
  friend bool operator==(const Temperature&, const Temperature&) = default;
};
/// All mass on one class; the label matches it with probability `accuracy`.
struct OneHot {
  double accuracy = 1.0;
  friend bool operator==(const OneHot&, const OneHot&) = default;
};

using SynthKind = std::variant<Calibrated, Temperature, OneHot>;

/// Parses `calibrated`, `temperature:T` or `one-hot:A`.
SynthKind parse_synth_kind(std::string_view text);
std::string to_string(const SynthKind& kind);

struct SynthSpec {
  std::size_t n_records = 1000;
  std::size_t n_classes = 10;
  std::uint64_t seed = 1;
  SynthKind kind = Calibrated{};
  // Top probability is 1/K + (1 - 1/K) * Beta(alpha, beta).
  double alpha = 1.0;
  double beta = 1.5;

  void validate() const;
};

class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);
  double normal();
  double gamma(double shape);
  double beta(double a, double b);

 private:
  std::mt19937_64 engine_;
};

/// Streams the records of a spec one at a time.
class SynthGenerator {
 public:
  explicit SynthGenerator(SynthSpec spec);

  bool done() const noexcept { return emitted_ == spec_.n_records; }
  /// Fills `out` with the next record. Must not be called once done().
  void next(PredictionRecord& out);

 private:
  SynthSpec spec_;
  SynthRng rng_;
  std::size_t emitted_ = 0;
};

std::vector<PredictionRecord> generate(const SynthSpec& spec);

}  // namespace decisive
