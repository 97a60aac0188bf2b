#include "decisive/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <ostream>

#include "decisive/error.hpp"
#include "decisive/ingest.hpp"
#include "decisive/report.hpp"
#include "decisive/svg.hpp"
#include "decisive/synth.hpp"

namespace decisive::cli {

namespace {

struct ConfigFlags {
  EvalConfig config;
  std::string format = "auto";
  bool strict = false;
  unsigned threads = 1;
};

void add_config_flags(CLI::App& cmd, ConfigFlags& flags) {
  cmd.add_option("--format", flags.format, "Input format; auto picks jsonl for .jsonl/.ndjson, else csv")
      ->check(CLI::IsMember({"auto", "csv", "jsonl"}));
  cmd.add_option("--gamma", flags.config.gamma, "Probability floor, in [0, 1)")
      ->check(CLI::Validator(
          [](std::string& v) {
            double g = 0.0;
            const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), g);
            return ec == std::errc() && g >= 0.0 && g < 1.0 ? std::string{} : "must lie in [0, 1)";
          },
          "[0,1)"));
  cmd.add_option("--bins", flags.config.bins, "Number of equal-population bins")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20));
  cmd.add_option("--prob-sum-tolerance", flags.config.prob_sum_tolerance,
                 "Allowed deviation of a probability vector's sum from 1")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--value-epsilon", flags.config.value_epsilon,
                 "Values closer than this count as equal when finding singularities")
      ->check(CLI::NonNegativeNumber);
  cmd.add_flag("--strict", flags.strict, "Fail on the first invalid row instead of skipping it");
  cmd.add_flag("--correct-decisions-only", flags.config.correct_decisions_only,
               "Average reported probabilities only over correctly decided samples");
  cmd.add_option("--threads", flags.threads, "Worker threads for the counting pass")
      ->check(CLI::Range(1u, 256u));
}

DataFormat resolve_format(const std::string& flag, const std::string& path) {
  return flag == "auto" ? format_from_path(path) : parse_format(flag);
}

std::vector<double> parse_gamma_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    double g = 0.0;
    const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), g);
    if (item.empty() || ec != std::errc() || p != item.data() + item.size() || !(g >= 0.0 && g < 1.0))
      throw UsageError("--gammas: '" + item + "' is not a value in [0, 1)");
    out.push_back(g);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  body(out);
  out.close();
  if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized-mean accuracy, decisiveness and robustness of probabilistic classifiers"};
  app.name("decisive");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  // evaluate
  ConfigFlags eval_flags;
  std::string eval_input, eval_output, eval_svg, eval_tsv;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Compute reported and measured metrics for a prediction file");
  evaluate_cmd->add_option("--input", eval_input, "Prediction file (csv or jsonl)")->required();
  evaluate_cmd->add_option("--output", eval_output, "Write the JSON report here");
  evaluate_cmd->add_option("--svg", eval_svg, "Write the reliability diagram here");
  evaluate_cmd->add_option("--tsv", eval_tsv, "Write the metric table here");
  add_config_flags(*evaluate_cmd, eval_flags);

  // sweep
  ConfigFlags sweep_flags;
  std::string sweep_input, sweep_output, sweep_gammas = "0.05,0.01,0.005,0.001,0";
  auto* sweep_cmd = app.add_subcommand("sweep", "Metrics for a list of gamma floors");
  sweep_cmd->add_option("--input", sweep_input, "Prediction file (csv or jsonl)")->required();
  sweep_cmd->add_option("--gammas", sweep_gammas, "Comma-separated gamma values");
  sweep_cmd->add_option("--output", sweep_output, "Write the sweep table (TSV) here");
  add_config_flags(*sweep_cmd, sweep_flags);

  // synth
  SynthSpec synth_spec;
  std::string synth_kind = "calibrated", synth_output, synth_format = "auto";
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic prediction file");
  synth_cmd->add_option("--kind", synth_kind, "calibrated | temperature:T | one-hot:A");
  synth_cmd->add_option("--n", synth_spec.n_records, "Number of records");
  synth_cmd->add_option("--classes", synth_spec.n_classes, "Number of classes")->check(CLI::Range(2ul, 1ul << 24));
  synth_cmd->add_option("--seed", synth_spec.seed, "RNG seed");
  synth_cmd->add_option("--alpha", synth_spec.alpha, "Top-probability Beta shape alpha")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--beta", synth_spec.beta, "Top-probability Beta shape beta")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--output", synth_output, "Output file")->required();
  synth_cmd->add_option("--format", synth_format, "Output format; auto picks jsonl for .jsonl/.ndjson, else csv")
      ->check(CLI::IsMember({"auto", "csv", "jsonl"}));

  // plot
  std::string plot_report, plot_svg;
  auto* plot_cmd = app.add_subcommand("plot", "Render a reliability diagram from a saved JSON report");
  plot_cmd->add_option("--report", plot_report, "JSON report written by evaluate")->required();
  plot_cmd->add_option("--svg", plot_svg, "Output SVG file")->required();

  std::vector<const char*> argv{"decisive"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "decisive: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*evaluate_cmd) {
      FileSource source(eval_input, resolve_format(eval_flags.format, eval_input), eval_flags.config,
                        eval_flags.strict);
      const auto report = evaluate(source, eval_flags.config, {.threads = eval_flags.threads});
      if (!eval_output.empty())
        write_file(eval_output, [&](std::ostream& o) { write_report(report, ReportFormat::json, o); });
      if (!eval_tsv.empty())
        write_file(eval_tsv, [&](std::ostream& o) { write_report(report, ReportFormat::tsv, o); });
      if (!eval_svg.empty()) write_file(eval_svg, [&](std::ostream& o) { render_reliability_svg(report, o); });
      print_summary(report, out);
    } else if (*sweep_cmd) {
      const auto gammas = parse_gamma_list(sweep_gammas);
      FileSource source(sweep_input, resolve_format(sweep_flags.format, sweep_input), sweep_flags.config,
                        sweep_flags.strict);
      const auto rows = gamma_sweep(source, sweep_flags.config, gammas, {.threads = sweep_flags.threads});
      if (!sweep_output.empty()) write_file(sweep_output, [&](std::ostream& o) { write_sweep_tsv(rows, o); });
      write_sweep_tsv(rows, out);
    } else if (*synth_cmd) {
      synth_spec.kind = parse_synth_kind(synth_kind);
      synth_spec.validate();
      std::size_t written = 0;
      write_file(synth_output, [&](std::ostream& o) {
        SynthGenerator gen(synth_spec);
        PredictionWriter writer(o, resolve_format(synth_format, synth_output), synth_spec.n_classes);
        PredictionRecord rec;
        while (!gen.done()) {
          gen.next(rec);
          writer.write(rec);
        }
        written = writer.count();
      });
      out << "wrote " << written << " records (" << to_string(synth_spec.kind) << ", " << synth_spec.n_classes
          << " classes, seed " << synth_spec.seed << ") to " << synth_output << "\n";
    } else if (*plot_cmd) {
      const auto report = read_report_json(std::filesystem::path(plot_report));
      write_file(plot_svg, [&](std::ostream& o) { render_reliability_svg(report, o); });
      out << "wrote " << plot_svg << "\n";
    }
  } catch (const UsageError& e) {
    err << "decisive: " << e.what() << "\n";
    return kUsage;
  } catch (const ValidationError& e) {
    err << "decisive: " << e.what() << "\n";
    return kValidation;
  } catch (const DomainError& e) {
    err << "decisive: " << e.what() << "\n";
    return kValidation;
  } catch (const IoError& e) {
    err << "decisive: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    err << "decisive: internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kSuccess;
}

}  // namespace decisive::cli
