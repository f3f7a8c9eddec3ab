// Command-line front end: training runs, ablation grids, beta sensitivity
// sweeps, oracle self-checks, synthetic data generation, feature export.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "llpdew/cli.hpp"

namespace {

void add_common_options(CLI::App* cmd, llpdew::cli::CommonArgs& common,
                        bool out_required) {
  cmd->add_option("--config", common.config_path,
                  "config file with key = value lines");
  cmd->add_option("--set", common.overrides,
                  "override one config key (repeatable), e.g. --set epochs=5");
  auto* out =
      cmd->add_option("--out", common.out_dir, "output directory for results");
  if (out_required) out->required();
  cmd->add_flag("--overwrite", common.overwrite,
                "replace results already present in --out");
  cmd->add_flag("--deterministic", common.deterministic,
                "single-worker mode with ordered reductions");
  cmd->add_option("--threads", common.threads,
                  "worker count in parallel mode (0 = hardware)");
}

void add_data_options(CLI::App* cmd, llpdew::cli::DataArgs& data,
                      bool with_bags) {
  cmd->add_option("--train-csv", data.train_csv,
                  "training dataset CSV (features..., integer label)");
  cmd->add_option("--test-csv", data.test_csv, "test dataset CSV");
  cmd->add_option("--classes", data.csv_classes,
                  "class count for CSV datasets");
  if (with_bags) {
    cmd->add_option("--bags", data.bags_path,
                    "bag assignment file (default: generated from the seed)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Label-proportion training with entropy-based confidence weighting"};
  app.require_subcommand(1);

  // train
  llpdew::cli::CommonArgs train_common;
  llpdew::cli::DataArgs train_data;
  std::string train_mode;
  CLI::App* train_cmd =
      app.add_subcommand("train", "run one training configuration");
  add_common_options(train_cmd, train_common, true);
  add_data_options(train_cmd, train_data, true);
  train_cmd->add_option(
      "--mode", train_mode,
      "dew | bag-only | instance-only | unweighted | dllp");

  // ablate
  llpdew::cli::CommonArgs ablate_common;
  llpdew::cli::DataArgs ablate_data;
  std::vector<int> ablate_bag_sizes;
  std::vector<std::uint64_t> ablate_seeds;
  CLI::App* ablate_cmd = app.add_subcommand(
      "ablate", "run the weight-mode x bag-size x seed grid");
  add_common_options(ablate_cmd, ablate_common, true);
  add_data_options(ablate_cmd, ablate_data, false);
  ablate_cmd->add_option("--bag-sizes", ablate_bag_sizes, "bag sizes to sweep")
      ->required();
  ablate_cmd->add_option("--seeds", ablate_seeds, "seeds to average over")
      ->required();

  // sweep-beta
  llpdew::cli::CommonArgs sweep_common;
  llpdew::cli::DataArgs sweep_data;
  std::vector<double> sweep_beta_b;
  std::vector<double> sweep_beta_i;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep-beta", "grid over the two confidence sharpness parameters");
  add_common_options(sweep_cmd, sweep_common, true);
  add_data_options(sweep_cmd, sweep_data, false);
  sweep_cmd->add_option("--beta-b", sweep_beta_b, "bag-level beta grid")
      ->required();
  sweep_cmd->add_option("--beta-i", sweep_beta_i, "instance-level beta grid")
      ->required();

  // oracle-check
  std::uint64_t oracle_seed = 1;
  int oracle_cases = 10000;
  int oracle_fd_cases = 100;
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle-check",
      "compare the library against independent reference implementations");
  oracle_cmd->add_option("--seed", oracle_seed, "base seed for random cases");
  oracle_cmd->add_option("--cases", oracle_cases,
                         "random weighting cases (default 10000)");
  oracle_cmd->add_option("--fd-cases", oracle_fd_cases,
                         "random gradient-check cases (default 100)");

  // gen-data
  llpdew::BlobSpec gen_spec;
  std::string gen_out;
  bool gen_overwrite = false;
  std::optional<int> gen_bag_size;
  int gen_bag_size_value = 0;
  CLI::App* gen_cmd =
      app.add_subcommand("gen-data", "write synthetic blob datasets to CSV");
  gen_cmd->add_option("--out", gen_out, "output directory")->required();
  gen_cmd->add_flag("--overwrite", gen_overwrite,
                    "replace results already present in --out");
  gen_cmd->add_option("--classes", gen_spec.class_count, "class count");
  gen_cmd->add_option("--dim", gen_spec.feature_dim, "feature dimension");
  gen_cmd->add_option("--per-class", gen_spec.samples_per_class,
                      "samples per class (before the 80/20 split)");
  gen_cmd->add_option("--center-scale", gen_spec.center_scale,
                      "class centers drawn uniformly in +/- this box");
  gen_cmd->add_option("--sigma", gen_spec.within_class_sigma,
                      "within-class standard deviation");
  gen_cmd->add_option("--seed", gen_spec.seed, "generator seed");
  auto* gen_bag_opt = gen_cmd->add_option(
      "--bag-size", gen_bag_size_value, "also write bags.txt at this bag size");

  // export-features
  llpdew::cli::CommonArgs export_common;
  llpdew::cli::DataArgs export_data;
  std::string export_checkpoint;
  std::string export_split = "test";
  CLI::App* export_cmd = app.add_subcommand(
      "export-features",
      "write penultimate-layer activations for a trained checkpoint");
  add_common_options(export_cmd, export_common, true);
  add_data_options(export_cmd, export_data, false);
  export_cmd->add_option("--checkpoint", export_checkpoint,
                         "checkpoint file from a train run")
      ->required();
  export_cmd->add_option("--split", export_split, "train or test");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return llpdew::cli::kExitConfig;
  }

  if (train_cmd->parsed()) {
    return llpdew::cli::cmd_train(train_common, train_data, train_mode);
  }
  if (ablate_cmd->parsed()) {
    return llpdew::cli::cmd_ablate(ablate_common, ablate_data,
                                   ablate_bag_sizes, ablate_seeds);
  }
  if (sweep_cmd->parsed()) {
    return llpdew::cli::cmd_sweep_beta(sweep_common, sweep_data, sweep_beta_b,
                                       sweep_beta_i);
  }
  if (oracle_cmd->parsed()) {
    return llpdew::cli::cmd_oracle_check(oracle_seed, oracle_cases,
                                         oracle_fd_cases);
  }
  if (gen_cmd->parsed()) {
    if (gen_bag_opt->count() > 0) gen_bag_size = gen_bag_size_value;
    return llpdew::cli::cmd_gen_data(gen_spec, gen_out, gen_overwrite,
                                     gen_bag_size);
  }
  if (export_cmd->parsed()) {
    return llpdew::cli::cmd_export_features(export_common, export_data,
                                            export_checkpoint, export_split);
  }
  std::cerr << "no subcommand selected\n";
  return llpdew::cli::kExitConfig;
}
