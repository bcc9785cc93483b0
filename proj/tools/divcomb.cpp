// Command-line front end: divcomb <subcommand> [flags]
#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

#include "divcomb/pipeline/runner.hpp"

using namespace divcomb;

int main(int argc, char** argv) {
  CLI::App app{"Diversity-based forecast combination"};
  app.require_subcommand(1);

  std::string config_path;
  std::string data;
  std::string test_data;
  std::vector<std::string> frequencies;
  std::optional<double> level;
  std::optional<int> rounds;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;

  auto add_flags = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--data", data, "M4 train file, M4 directory or long CSV");
    sub->add_option("--test-data", test_data, "held-out actuals (file or directory)");
    sub->add_option("--frequency", frequencies, "frequencies to process (repeatable)");
    sub->add_option("--level", level, "prediction interval level")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--rounds", rounds, "boosting rounds")->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", threads, "worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", seed, "run seed");
    sub->add_option("--out", out, "output directory");
    sub->add_flag("--quiet", quiet, "suppress progress output");
  };
  const std::vector<std::pair<std::string, std::string>> commands{
      {"pool-forecast", "fit the method pool and write forecast matrices"},
      {"extract", "write diversity features and training costs"},
      {"train", "train one weight model per frequency"},
      {"forecast", "combine pool forecasts with trained models"},
      {"evaluate", "write the evaluation report bundle"},
      {"all", "run the full pipeline"}};
  for (const auto& [name, help] : commands) add_flags(app.add_subcommand(name, help));

  CLI11_PARSE(app, argc, argv);
  const auto stage = pipeline::parse_stage(app.get_subcommands().front()->get_name());

  pipeline::RunConfig config = pipeline::default_config();
  try {
    if (!config_path.empty()) config = pipeline::load_config(config_path);
    if (!data.empty()) config.data = data;
    if (!test_data.empty()) config.test_data = test_data;
    if (!frequencies.empty()) config.frequencies = frequencies;
    if (level) config.level = *level;
    if (rounds) config.gbm.rounds = *rounds;
    if (threads) config.threads = *threads;
    if (seed) config.seed = *seed;
    if (!out.empty()) config.out = out;
    // Re-validate the merged configuration.
    config = pipeline::config_from_json(pipeline::config_to_json(config));

    std::ostringstream sink;
    std::ostream& log = quiet ? static_cast<std::ostream&>(sink) : std::cerr;
    const auto report = pipeline::run(*stage, config, log);
    return report.exit_code;
  } catch (const Error& e) {
    std::cerr << fmt::format("error [{}]: {}\n", error_kind_name(e.kind()), e.what());
    pipeline::log_fatal(config, error_kind_name(e.kind()), e.what());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    pipeline::log_fatal(config, "internal", e.what());
  }
  return pipeline::kExitFatal;
}
