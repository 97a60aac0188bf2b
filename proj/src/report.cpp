#include "decisive/report.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "decisive/error.hpp"

namespace decisive {

namespace {

struct FirstPass {
  std::vector<double> correct;  // every record's correct-class probability
  std::vector<double> decided;  // only records whose argmax is the label
  std::uint64_t n_decided = 0;
  std::size_t n_classes = 0;
};

FirstPass collect(const RecordSource& source, const EvalConfig& config, std::size_t window) {
  FirstPass pass;
  source.scan(window, [&](std::span<const PredictionRecord> batch) {
    for (const auto& r : batch) {
      if (pass.correct.empty()) pass.n_classes = r.probs.size();
      if (r.probs.size() != pass.n_classes)
        throw UsageError("records disagree on the class count (" + std::to_string(r.probs.size()) +
                         " vs " + std::to_string(pass.n_classes) + ")");
      if (r.label >= r.probs.size())
        throw UsageError("label " + std::to_string(r.label) + " out of range for " +
                         std::to_string(r.probs.size()) + " classes");
      const double p = r.correct_prob();
      pass.correct.push_back(p);
      if (argmax(r.probs) == r.label) {
        ++pass.n_decided;
        if (config.correct_decisions_only) pass.decided.push_back(p);
      }
    }
  });
  if (pass.correct.empty()) throw ValidationError("no-records", 0, "no valid records to evaluate");
  return pass;
}

MetricTriple reported_from_pass(const FirstPass& pass, const EvalConfig& config) {
  if (!config.correct_decisions_only) return reported_metrics_from_correct(pass.correct, config.gamma);
  if (pass.decided.empty()) throw UsageError("no correctly decided samples to average");
  return reported_metrics_from_correct(pass.decided, config.gamma);
}

// Splits a batch across threads; each partial accumulator is merged into `acc`.
void count_batch(CountAccumulator& acc, const BinTable& layout,
                 std::span<const PredictionRecord> batch, unsigned threads) {
  threads = std::min<unsigned>(threads, static_cast<unsigned>(batch.size()));
  if (threads <= 1) {
    acc.add(batch);
    return;
  }
  std::vector<CountAccumulator> parts(threads, CountAccumulator(layout));
  std::vector<std::thread> workers;
  const std::size_t chunk = (batch.size() + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(batch.size(), t * chunk);
    const std::size_t end = std::min(batch.size(), begin + chunk);
    workers.emplace_back([&parts, t, sub = batch.subspan(begin, end - begin)] { parts[t].add(sub); });
  }
  for (auto& w : workers) w.join();
  for (const auto& p : parts) acc.merge(p);
}

std::string num(double v) {
  if (!std::isfinite(v)) return "null";
  return fmt::format("{:.17g}", v);
}

std::string json_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20)
          out += fmt::format("\\u{:04x}", static_cast<unsigned>(c));
        else
          out += c;
    }
  }
  return out + "\"";
}

std::string triple_json(const MetricTriple& t) {
  return fmt::format("{{\"robustness\": {}, \"geometric\": {}, \"decisiveness\": {}}}", num(t.robustness),
                     num(t.geometric), num(t.decisiveness));
}

std::string render_json(const MetricReport& r) {
  std::string s = "{\n  \"format_version\": 1,\n";
  s += "  \"dataset\": {\"name\": " + json_quote(r.dataset.name) +
       fmt::format(", \"n_records\": {}, \"n_classes\": {}, \"n_rejected\": {}, \"rejection_reasons\": {{",
                   r.dataset.n_records, r.dataset.n_classes, r.dataset.n_rejected);
  bool first = true;
  for (const auto& [reason, count] : r.dataset.rejection_reasons) {
    s += fmt::format("{}{}: {}", first ? "" : ", ", json_quote(reason), count);
    first = false;
  }
  s += "}},\n";
  s += fmt::format(
      "  \"config\": {{\"gamma\": {}, \"bins\": {}, \"prob_sum_tolerance\": {}, \"value_epsilon\": {}, "
      "\"correct_decisions_only\": {}}},\n",
      num(r.config.gamma), r.config.bins, num(r.config.prob_sum_tolerance), num(r.config.value_epsilon),
      r.config.correct_decisions_only);
  s += fmt::format("  \"prediction_accuracy\": {},\n", num(r.prediction_accuracy));
  s += fmt::format("  \"cross_entropy\": {},\n", num(r.cross_entropy));
  s += fmt::format("  \"cross_entropy_infinite\": {},\n", r.cross_entropy_infinite());
  s += "  \"reported\": " + triple_json(r.reported) + ",\n";
  s += "  \"measured\": " + triple_json(r.truth) + ",\n";
  s += fmt::format(
      "  \"slope\": {{\"slope\": {}, \"d_truth\": {}, \"r_truth\": {}, \"d_reported\": {}, \"r_reported\": {}, "
      "\"verdict\": {}}},\n",
      num(r.slope.slope), num(r.slope.d_truth), num(r.slope.r_truth), num(r.slope.d_reported),
      num(r.slope.r_reported), json_quote(to_string(r.slope.verdict)));
  s += fmt::format("  \"out_of_range_incorrect\": {},\n", r.out_of_range_incorrect);
  s += fmt::format("  \"total_correct\": {},\n", r.bin_table.total_correct);
  s += fmt::format("  \"total_incorrect\": {},\n", r.bin_table.total_incorrect);
  s += "  \"bins\": [";
  for (std::size_t i = 0; i < r.bin_table.bins.size(); ++i) {
    const auto& b = r.bin_table.bins[i];
    s += fmt::format(
        "{}\n    {{\"lo\": {}, \"hi\": {}, \"n_correct\": {}, \"n_incorrect\": {}, \"fraction\": {}, "
        "\"weight\": {}, \"is_singularity\": {}, \"mean_reported\": {}}}",
        i ? "," : "", num(b.lo), num(b.hi), b.n_correct, b.n_incorrect, num(b.fraction), num(b.weight),
        b.is_singularity, num(b.mean_reported));
  }
  s += r.bin_table.bins.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return s;
}

double real_or(const nlohmann::json& j, double fallback) {
  return j.is_null() ? fallback : j.get<double>();
}

MetricTriple triple_from(const nlohmann::json& j) {
  return {j.at("robustness").get<double>(), j.at("geometric").get<double>(),
          j.at("decisiveness").get<double>()};
}

}  // namespace

bool MetricReport::cross_entropy_infinite() const { return std::isinf(cross_entropy); }

MetricReport evaluate(const RecordSource& source, const EvalConfig& config, const EvalOptions& options) {
  config.validate();
  const auto pass = collect(source, config, options.window);

  MetricReport report;
  report.config = config;
  report.prediction_accuracy =
      static_cast<double>(pass.n_decided) / static_cast<double>(pass.correct.size());
  report.cross_entropy = cross_entropy_from_correct(pass.correct, config.gamma);
  report.reported = reported_from_pass(pass, config);

  const BinTable layout = build_bins(pass.correct, config);
  CountAccumulator acc(layout);
  source.scan(options.window, [&](std::span<const PredictionRecord> batch) {
    count_batch(acc, layout, batch, options.threads);
  });
  report.bin_table = acc.finish();
  report.out_of_range_incorrect = report.bin_table.out_of_range_incorrect;
  report.truth = truth_metrics(report.bin_table, config);
  report.slope = slope(report.reported, report.truth, config);
  report.dataset = source.summary();
  return report;
}

MetricReport evaluate(std::span<const PredictionRecord> records, const EvalConfig& config,
                      const EvalOptions& options) {
  return evaluate(SpanSource(records), config, options);
}

std::vector<SweepRow> gamma_sweep(const RecordSource& source, const EvalConfig& config,
                                  std::span<const double> gammas, const EvalOptions& options) {
  config.validate();
  std::vector<EvalConfig> configs;
  for (double g : gammas) {
    EvalConfig c = config;
    c.gamma = g;
    c.validate();
    configs.push_back(c);
  }
  const auto pass = collect(source, config, options.window);

  std::vector<SweepRow> rows(configs.size());
  std::vector<BinTable> layouts;
  layouts.reserve(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    rows[i].gamma = configs[i].gamma;
    rows[i].reported = reported_from_pass(pass, configs[i]);
    layouts.push_back(build_bins(pass.correct, configs[i]));
  }
  std::vector<CountAccumulator> accs;
  accs.reserve(layouts.size());
  for (const auto& l : layouts) accs.emplace_back(l);

  source.scan(options.window, [&](std::span<const PredictionRecord> batch) {
    if (options.threads <= 1 || accs.size() <= 1) {
      for (auto& a : accs) a.add(batch);
      return;
    }
    // Rows are independent; each worker owns a strided subset of them.
    const unsigned n = std::min<unsigned>(options.threads, static_cast<unsigned>(accs.size()));
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < n; ++t)
      workers.emplace_back([&, t] {
        for (std::size_t i = t; i < accs.size(); i += n) accs[i].add(batch);
      });
    for (auto& w : workers) w.join();
  });

  for (std::size_t i = 0; i < rows.size(); ++i)
    rows[i].truth = truth_metrics(accs[i].finish(), configs[i]);
  return rows;
}

std::vector<SweepRow> gamma_sweep(std::span<const PredictionRecord> records, const EvalConfig& config,
                                  std::span<const double> gammas, const EvalOptions& options) {
  return gamma_sweep(SpanSource(records), config, gammas, options);
}

std::size_t write_report(const MetricReport& report, ReportFormat format, std::ostream& out) {
  std::string text;
  if (format == ReportFormat::json) {
    text = render_json(report);
  } else {
    text = "metric\treported\tmeasured\n";
    text += fmt::format("prediction_accuracy\t{}\t{}\n", num(report.prediction_accuracy),
                        num(report.prediction_accuracy));
    text += fmt::format("geometric\t{}\t{}\n", num(report.reported.geometric), num(report.truth.geometric));
    text += fmt::format("robustness\t{}\t{}\n", num(report.reported.robustness), num(report.truth.robustness));
    text += fmt::format("decisiveness\t{}\t{}\n", num(report.reported.decisiveness),
                        num(report.truth.decisiveness));
    text += fmt::format("slope\t{}\t{}\n", num(report.slope.slope), to_string(report.slope.verdict));
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("report write failure");
  return text.size();
}

void write_report(const MetricReport& report, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_report(report, format, out);
  out.close();
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

MetricReport read_report_json(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("bad-report", 0, e.what());
  }
  try {
    MetricReport r;
    const auto& d = j.at("dataset");
    r.dataset.name = d.at("name").get<std::string>();
    r.dataset.n_records = d.at("n_records").get<std::uint64_t>();
    r.dataset.n_classes = d.at("n_classes").get<std::uint64_t>();
    r.dataset.n_rejected = d.at("n_rejected").get<std::uint64_t>();
    for (const auto& [reason, count] : d.at("rejection_reasons").items())
      r.dataset.rejection_reasons[reason] = count.get<std::uint64_t>();

    const auto& c = j.at("config");
    r.config.gamma = c.at("gamma").get<double>();
    r.config.bins = c.at("bins").get<std::size_t>();
    r.config.prob_sum_tolerance = c.at("prob_sum_tolerance").get<double>();
    r.config.value_epsilon = c.at("value_epsilon").get<double>();
    r.config.correct_decisions_only = c.at("correct_decisions_only").get<bool>();

    r.prediction_accuracy = j.at("prediction_accuracy").get<double>();
    r.cross_entropy = real_or(j.at("cross_entropy"), std::numeric_limits<double>::infinity());
    r.reported = triple_from(j.at("reported"));
    r.truth = triple_from(j.at("measured"));

    const auto& s = j.at("slope");
    r.slope.slope = real_or(s.at("slope"), std::numeric_limits<double>::quiet_NaN());
    r.slope.d_truth = s.at("d_truth").get<double>();
    r.slope.r_truth = s.at("r_truth").get<double>();
    r.slope.d_reported = s.at("d_reported").get<double>();
    r.slope.r_reported = s.at("r_reported").get<double>();
    r.slope.verdict = verdict_from_string(s.at("verdict").get<std::string>());

    r.out_of_range_incorrect = j.at("out_of_range_incorrect").get<std::uint64_t>();
    r.bin_table.out_of_range_incorrect = r.out_of_range_incorrect;
    r.bin_table.total_correct = j.at("total_correct").get<std::uint64_t>();
    r.bin_table.total_incorrect = j.at("total_incorrect").get<std::uint64_t>();
    for (const auto& b : j.at("bins")) {
      BinStats bin;
      bin.lo = b.at("lo").get<double>();
      bin.hi = b.at("hi").get<double>();
      bin.n_correct = b.at("n_correct").get<std::uint64_t>();
      bin.n_incorrect = b.at("n_incorrect").get<std::uint64_t>();
      bin.fraction = b.at("fraction").get<double>();
      bin.weight = b.at("weight").get<double>();
      bin.is_singularity = b.at("is_singularity").get<bool>();
      bin.mean_reported = b.at("mean_reported").get<double>();
      r.bin_table.bins.push_back(bin);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("bad-report", 0, e.what());
  }
}

MetricReport read_report_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return read_report_json(in);
}

std::size_t write_sweep_tsv(std::span<const SweepRow> rows, std::ostream& out) {
  std::string text =
      "gamma\treported_robustness\treported_geometric\treported_decisiveness\t"
      "measured_robustness\tmeasured_geometric\tmeasured_decisiveness\n";
  for (const auto& r : rows)
    text += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", num(r.gamma), num(r.reported.robustness),
                        num(r.reported.geometric), num(r.reported.decisiveness), num(r.truth.robustness),
                        num(r.truth.geometric), num(r.truth.decisiveness));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("sweep write failure");
  return text.size();
}

void print_summary(const MetricReport& r, std::ostream& out) {
  const auto& d = r.dataset;
  fmt::print(out, "dataset              {} ({} records, {} classes, {} rejected)\n",
             d.name.empty() ? "<memory>" : d.name, d.n_records, d.n_classes, d.n_rejected);
  fmt::print(out, "gamma / bins         {} / {}\n", r.config.gamma, r.config.bins);
  fmt::print(out, "prediction accuracy  {:.3f}\n", r.prediction_accuracy);
  fmt::print(out, "                     reported / measured\n");
  fmt::print(out, "geometric accuracy   {:.3f} / {:.3f}\n", r.reported.geometric, r.truth.geometric);
  fmt::print(out, "robustness           {:.3f} / {:.3f}\n", r.reported.robustness, r.truth.robustness);
  fmt::print(out, "decisiveness         {:.3f} / {:.3f}\n", r.reported.decisiveness, r.truth.decisiveness);
  if (r.cross_entropy_infinite())
    fmt::print(out, "cross entropy        inf (zero correct-class probability with gamma = 0)\n");
  else
    fmt::print(out, "cross entropy        {:.4f}\n", r.cross_entropy);
  if (r.slope.verdict == Verdict::undefined)
    fmt::print(out, "slope                undefined\n");
  else
    fmt::print(out, "slope                {:.3f} ({})\n", r.slope.slope, to_string(r.slope.verdict));
  fmt::print(out, "bins                 {} ({} out-of-range incorrect probabilities)\n",
             r.bin_table.bins.size(), r.out_of_range_incorrect);
}

}  // namespace decisive
