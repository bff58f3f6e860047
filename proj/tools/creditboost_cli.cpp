// creditboost command-line front end.

#include <omp.h>

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "creditboost/pipeline.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
};

creditboost::ExperimentConfig resolve(const CommonFlags& f) {
  auto config =
      f.config_path.empty() ? creditboost::default_config() : creditboost::load_config(f.config_path);
  if (f.seed) config = config.with_seed(*f.seed);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subset-wise GBDT credit scoring with model fusion"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = OpenMP default)")
      ->check(CLI::NonNegativeNumber);

  CommonFlags flags;
  std::size_t rows = 5000;
  std::string model_path;
  std::string data_path;

  auto* generate = app.add_subcommand("generate", "Write a synthetic data set as CSV");
  generate->add_option("--rows", rows, "Number of rows")->check(CLI::PositiveNumber);
  generate->add_option("--seed", flags.seed, "Generator seed (default 42)");
  generate->add_option("--out", flags.out, "Output CSV path")->required();

  auto add_experiment_flags = [&](CLI::App* cmd, const char* out_help) {
    cmd->add_option("--config", flags.config_path, "Experiment config file");
    cmd->add_option("--seed", flags.seed, "Overrides the config seed");
    cmd->add_option("--out", flags.out, out_help);
  };
  auto* bases = app.add_subcommand("compare-bases", "Compare LR, DT, RF and GBDT per subset");
  add_experiment_flags(bases, "Report directory (overrides output.dir)");
  auto* fusion = app.add_subcommand("compare-fusion", "Compare fusion strategies");
  add_experiment_flags(fusion, "Report directory (overrides output.dir)");
  auto* train = app.add_subcommand("train", "Fit one fusion model and save it");
  add_experiment_flags(train, "Model file path");
  train->get_option("--out")->required();
  auto* predict = app.add_subcommand("predict", "Score a CSV file with a saved model");
  predict->add_option("--model", model_path, "Model file written by train")->required();
  predict->add_option("--data", data_path, "Input CSV")->required();
  predict->add_option("--out", flags.out, "Output CSV path")->required();

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (generate->parsed()) {
      creditboost::cmd_generate(rows, flags.seed.value_or(42), flags.out);
    } else if (bases->parsed() || fusion->parsed()) {
      auto config = resolve(flags);
      if (!flags.out.empty()) config.output_dir = flags.out;
      std::cout << (bases->parsed() ? creditboost::cmd_compare_bases(config)
                                    : creditboost::cmd_compare_fusion(config));
    } else if (train->parsed()) {
      std::cout << creditboost::cmd_train(resolve(flags), flags.out);
    } else if (predict->parsed()) {
      creditboost::cmd_predict(model_path, data_path, flags.out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
