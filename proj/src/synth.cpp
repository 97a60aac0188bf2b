#include "decisive/synth.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "decisive/error.hpp"

namespace decisive {

namespace {

double parse_param(std::string_view text, std::string_view kind) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw UsageError("bad parameter '" + std::string(text) + "' for synth kind " + std::string(kind));
  return v;
}

std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

SynthKind parse_synth_kind(std::string_view text) {
  if (text == "calibrated") return Calibrated{};
  const auto colon = text.find(':');
  const auto name = text.substr(0, colon);
  if (colon == std::string_view::npos)
    throw UsageError("unknown synth kind '" + std::string(text) +
                     "' (expected calibrated, temperature:T or one-hot:A)");
  const double value = parse_param(text.substr(colon + 1), name);
  if (name == "temperature") {
    if (!(value > 0.0) || !std::isfinite(value)) throw UsageError("temperature must be a positive real");
    return Temperature{value};
  }
  if (name == "one-hot") {
    if (!(value >= 0.0 && value <= 1.0)) throw UsageError("one-hot accuracy must lie in [0, 1]");
    return OneHot{value};
  }
  throw UsageError("unknown synth kind '" + std::string(name) + "'");
}

std::string to_string(const SynthKind& kind) {
  if (std::holds_alternative<Calibrated>(kind)) return "calibrated";
  if (const auto* t = std::get_if<Temperature>(&kind)) return "temperature:" + shortest(t->t);
  return "one-hot:" + shortest(std::get<OneHot>(kind).accuracy);
}

void SynthSpec::validate() const {
  if (n_classes < 2) throw UsageError("synthetic data needs at least 2 classes");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw UsageError("alpha must be a positive real");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw UsageError("beta must be a positive real");
  if (const auto* t = std::get_if<Temperature>(&kind))
    if (!(t->t > 0.0) || !std::isfinite(t->t)) throw UsageError("temperature must be a positive real");
  if (const auto* o = std::get_if<OneHot>(&kind))
    if (!(o->accuracy >= 0.0 && o->accuracy <= 1.0))
      throw UsageError("one-hot accuracy must lie in [0, 1]");
}

double SynthRng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::size_t SynthRng::below(std::size_t n) {
  const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return i < n ? i : n - 1;
}

double SynthRng::normal() {
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  // The second variate is discarded so each call consumes a fixed pattern.
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

double SynthRng::gamma(double shape) {
  if (shape < 1.0) {
    const double g = gamma(shape + 1.0);
    double u;
    do u = uniform();
    while (u == 0.0);
    return g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double SynthRng::beta(double a, double b) {
  const double x = gamma(a);
  const double y = gamma(b);
  const double s = x + y;
  return s > 0.0 ? x / s : 0.5;
}

SynthGenerator::SynthGenerator(SynthSpec spec) : spec_(std::move(spec)), rng_(spec_.seed) {
  spec_.validate();
}

void SynthGenerator::next(PredictionRecord& out) {
  if (done()) throw UsageError("synthetic generator exhausted");
  ++emitted_;
  const std::size_t k = spec_.n_classes;
  out.probs.assign(k, 0.0);

  if (const auto* one_hot = std::get_if<OneHot>(&spec_.kind)) {
    const std::size_t top = rng_.below(k);
    out.probs[top] = 1.0;
    const bool hit = rng_.uniform() < one_hot->accuracy;
    const std::size_t other = rng_.below(k - 1);
    out.label = hit ? top : (other < top ? other : other + 1);
    return;
  }

  const double floor = 1.0 / static_cast<double>(k);
  const double p = floor + (1.0 - floor) * rng_.beta(spec_.alpha, spec_.beta);
  const double rest = (1.0 - p) / static_cast<double>(k - 1);
  const std::size_t top = rng_.below(k);
  for (std::size_t c = 0; c < k; ++c) out.probs[c] = c == top ? p : rest;

  const bool hit = rng_.uniform() < p;
  const std::size_t other = rng_.below(k - 1);
  out.label = hit ? top : (other < top ? other : other + 1);

  if (const auto* temp = std::get_if<Temperature>(&spec_.kind); temp && temp->t != 1.0) {
    const double inv_t = 1.0 / temp->t;
    CompensatedSum total;
    for (auto& q : out.probs) {
      q = std::pow(q, inv_t);
      total.add(q);
    }
    const double z = total.value();
    for (auto& q : out.probs) q /= z;
  }
}

std::vector<PredictionRecord> generate(const SynthSpec& spec) {
  SynthGenerator gen(spec);
  std::vector<PredictionRecord> out(spec.n_records);
  for (auto& r : out) gen.next(r);
  return out;
}

}  // namespace decisive
