#include "llpdew/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "llpdew/bagging.hpp"
#include "llpdew/config.hpp"
#include "llpdew/metrics.hpp"
#include "llpdew/oracles/suites.hpp"
#include "llpdew/trainer.hpp"

namespace llpdew::cli {
namespace {

namespace fs = std::filesystem;

/// User/configuration mistakes → exit 2; everything else → exit 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kAblationModes = {"dew", "bag-only",
                                                 "instance-only", "unweighted"};

TrainConfig load_config(const CommonArgs& common) {
  TrainConfig config;
  if (!common.config_path.empty()) {
    if (!fs::exists(common.config_path)) {
      throw ConfigError("config file not found: " + common.config_path);
    }
    try {
      config = parse_config_file(common.config_path);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }
  try {
    apply_overrides(config, common.overrides);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return config;
}

void apply_mode(TrainConfig& config, const std::string& mode) {
  if (mode.empty()) return;
  if (mode == "dew") {
    config.ablation_use_bag_weight = true;
    config.ablation_use_instance_weight = true;
  } else if (mode == "bag-only") {
    config.ablation_use_bag_weight = true;
    config.ablation_use_instance_weight = false;
  } else if (mode == "instance-only") {
    config.ablation_use_bag_weight = false;
    config.ablation_use_instance_weight = true;
  } else if (mode == "unweighted") {
    config.ablation_use_bag_weight = false;
    config.ablation_use_instance_weight = false;
  } else if (mode == "dllp") {
    config.lambda = 0.0;
  } else {
    throw ConfigError(
        "unknown mode '" + mode +
        "' (expected dew, bag-only, instance-only, unweighted, or dllp)");
  }
}

std::string mode_label(const TrainConfig& config, const std::string& mode) {
  if (!mode.empty()) return mode;
  if (config.lambda == 0.0) return "dllp";
  if (config.ablation_use_bag_weight && config.ablation_use_instance_weight) {
    return "dew";
  }
  if (config.ablation_use_bag_weight) return "bag-only";
  if (config.ablation_use_instance_weight) return "instance-only";
  return "unweighted";
}

/// Seed precedence: config value, then LLP_DEW_SEED, then 1.
void resolve_seed(TrainConfig& config) {
  if (config.seed) return;
  if (const char* env = std::getenv("LLP_DEW_SEED")) {
    std::uint64_t value = 0;
    const char* end = env + std::string_view(env).size();
    auto [ptr, ec] = std::from_chars(env, end, value);
    if (ec != std::errc{} || ptr != end || env == end) {
      throw ConfigError(std::string("LLP_DEW_SEED is not an integer: '") +
                        env + "'");
    }
    config.seed = value;
    return;
  }
  config.seed = 1;
}

void validate_or_throw(const TrainConfig& config) {
  std::vector<std::string> problems = validate_config(config);
  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "invalid config:";
    for (const std::string& p : problems) msg << "\n  - " << p;
    throw ConfigError(msg.str());
  }
}

struct RunData {
  Dataset train;
  Dataset test;
};

RunData load_data(const DataArgs& data, std::uint64_t seed) {
  RunData out;
  const bool have_train = !data.train_csv.empty();
  const bool have_test = !data.test_csv.empty();
  if (have_train != have_test) {
    throw ConfigError("--train-csv and --test-csv must be given together");
  }
  if (have_train) {
    if (data.csv_classes < 2) {
      throw ConfigError("--classes (>= 2) is required with CSV datasets");
    }
    out.train = read_csv_dataset(data.train_csv, data.csv_classes);
    out.test = read_csv_dataset(data.test_csv, data.csv_classes);
    out.train.split_tag = SplitTag::train;
    out.test.split_tag = SplitTag::test;
    return out;
  }
  BlobSpec spec;
  spec.seed = seed;
  BlobData blobs = generate_blobs(spec);
  out.train = std::move(blobs.train);
  out.test = std::move(blobs.test);
  return out;
}

BagCollection load_bags(const DataArgs& data, const Dataset& train,
                        const TrainConfig& config) {
  if (!data.bags_path.empty()) {
    return read_bags(data.bags_path, train);
  }
  return generate_bags(train, config.bag_size, *config.seed);
}

/// Refuses to clobber earlier results unless --overwrite; with it, removes
/// exactly the artifacts this command is about to regenerate.
void prepare_out_dir(const std::string& out_dir,
                     const std::vector<std::string>& files,
                     const std::vector<std::string>& dirs, bool overwrite) {
  if (out_dir.empty()) throw ConfigError("--out DIR is required");
  fs::create_directories(out_dir);
  for (const std::string& name : files) {
    const fs::path path = fs::path(out_dir) / name;
    if (fs::exists(path)) {
      if (!overwrite) {
        throw ConfigError("refusing to overwrite " + path.string() +
                          " (pass --overwrite)");
      }
      fs::remove(path);
    }
  }
  for (const std::string& name : dirs) {
    const fs::path path = fs::path(out_dir) / name;
    if (fs::exists(path)) {
      if (!overwrite) {
        throw ConfigError("refusing to overwrite " + path.string() +
                          " (pass --overwrite)");
      }
      fs::remove_all(path);
    }
  }
}

struct CellResult {
  SummaryRow row;
  TrainResult outcome;
};

/// One complete training run: resolves the plan, streams per-epoch metrics
/// to metrics_path (when non-empty), and reduces the series to a summary row.
CellResult run_one(const Dataset& train_set, const Dataset& test_set,
                   const BagCollection& bags, const TrainConfig& config,
                   const std::string& label, const TrainOptions& options,
                   const std::string& metrics_path,
                   const std::string& config_echo_path) {
  RunPlan plan = resolve_plan(config, train_set, bags);
  if (!config_echo_path.empty()) {
    std::ofstream echo(config_echo_path);
    if (!echo) {
      throw std::runtime_error("cannot open '" + config_echo_path + "'");
    }
    echo << serialize_config(plan.config);
  }

  std::ofstream metrics_out;
  if (!metrics_path.empty()) {
    metrics_out.open(metrics_path);
    if (!metrics_out) {
      throw std::runtime_error("cannot open '" + metrics_path + "'");
    }
  }
  EpochCallback on_epoch;
  if (metrics_out.is_open()) {
    on_epoch = [&metrics_out](const EpochMetrics& m) {
      metrics_out << epoch_metrics_json_line(m) << "\n";
    };
  }

  CellResult cell;
  cell.outcome =
      train(train_set, test_set, bags, plan.config, options, on_epoch);
  if (metrics_out.is_open() && !metrics_out) {
    throw std::runtime_error("write to '" + metrics_path + "' failed");
  }

  cell.row.mode = label;
  cell.row.bag_size = plan.config.bag_size;
  cell.row.seed = plan.seed;
  if (cell.outcome.series.empty()) {
    cell.row.test_accuracy = test_accuracy(cell.outcome.params, test_set);
  } else {
    const EpochMetrics& last = cell.outcome.series.back();
    cell.row.test_accuracy = last.test_accuracy;
    cell.row.pseudo_label_accuracy = last.pseudo_label_accuracy;
    cell.row.mean_normalized_entropy = last.mean_normalized_entropy;
    cell.row.mean_weight = last.mean_weight;
  }
  return cell;
}

TrainOptions make_options(const CommonArgs& common) {
  TrainOptions options;
  options.deterministic = common.deterministic;
  options.threads = common.threads;
  return options;
}

int classify_and_report(const char* command) {
  try {
    throw;
  } catch (const ConfigError& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return kExitRuntime;
  }
}

std::string format_real_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

int cmd_train(const CommonArgs& common, const DataArgs& data,
              const std::string& mode) {
  try {
    TrainConfig config = load_config(common);
    apply_mode(config, mode);
    resolve_seed(config);
    validate_or_throw(config);
    prepare_out_dir(
        common.out_dir,
        {"config_used.txt", "metrics.jsonl", "checkpoint.txt", "summary.csv"},
        {}, common.overwrite);

    RunData run_data = load_data(data, *config.seed);
    BagCollection bags = load_bags(data, run_data.train, config);

    const fs::path out(common.out_dir);
    CellResult cell =
        run_one(run_data.train, run_data.test, bags, config,
                mode_label(config, mode), make_options(common),
                (out / "metrics.jsonl").string(),
                (out / "config_used.txt").string());
    save_checkpoint(cell.outcome.params, (out / "checkpoint.txt").string());
    write_summary_csv({&cell.row, 1}, (out / "summary.csv").string());

    std::cout << "train " << cell.row.mode << " M=" << cell.row.bag_size
              << " seed=" << cell.row.seed
              << " test_accuracy=" << format_real_short(cell.row.test_accuracy)
              << " -> " << common.out_dir << "\n";
    return kExitOk;
  } catch (...) {
    return classify_and_report("train");
  }
}

int cmd_ablate(const CommonArgs& common, const DataArgs& data,
               const std::vector<int>& bag_sizes,
               const std::vector<std::uint64_t>& seeds) {
  try {
    if (bag_sizes.empty()) throw ConfigError("ablate needs --bag-sizes");
    if (seeds.empty()) throw ConfigError("ablate needs --seeds");
    if (!data.bags_path.empty()) {
      throw ConfigError("--bags cannot be combined with the ablation grid");
    }
    TrainConfig base = load_config(common);
    resolve_seed(base);
    validate_or_throw(base);
    prepare_out_dir(common.out_dir,
                    {"summary.csv", "ablation_table.csv", "failures.txt"},
                    {"cells"}, common.overwrite);
    const fs::path out(common.out_dir);
    fs::create_directories(out / "cells");

    const TrainOptions options = make_options(common);
    std::vector<SummaryRow> rows;
    std::vector<std::string> failures;

    for (std::uint64_t seed : seeds) {
      TrainConfig seeded = base;
      seeded.seed = seed;
      RunData run_data = load_data(data, seed);
      for (int bag_size : bag_sizes) {
        TrainConfig sized = seeded;
        sized.bag_size = bag_size;
        BagCollection bags;
        try {
          bags = generate_bags(run_data.train, bag_size, seed);
        } catch (const std::exception& e) {
          for (const std::string& m : kAblationModes) {
            std::ostringstream msg;
            msg << m << " M=" << bag_size << " seed=" << seed << ": "
                << e.what();
            failures.push_back(msg.str());
          }
          continue;
        }
        for (const std::string& m : kAblationModes) {
          TrainConfig cell_config = sized;
          apply_mode(cell_config, m);
          std::ostringstream cell_name;
          cell_name << m << "-M" << bag_size << "-s" << seed;
          const fs::path cell_dir = out / "cells" / cell_name.str();
          fs::create_directories(cell_dir);
          try {
            CellResult cell = run_one(
                run_data.train, run_data.test, bags, cell_config, m, options,
                (cell_dir / "metrics.jsonl").string(),
                (cell_dir / "config_used.txt").string());
            rows.push_back(cell.row);
            std::cerr << "ablate cell " << cell_name.str() << " test_accuracy="
                      << format_real_short(cell.row.test_accuracy) << "\n";
          } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << m << " M=" << bag_size << " seed=" << seed << ": "
                << e.what();
            failures.push_back(msg.str());
            std::cerr << "ablate cell " << cell_name.str() << " FAILED: "
                      << e.what() << "\n";
          }
        }
      }
    }

    auto mode_rank = [](const std::string& m) {
      for (std::size_t i = 0; i < kAblationModes.size(); ++i) {
        if (kAblationModes[i] == m) return i;
      }
      return kAblationModes.size();
    };
    std::sort(rows.begin(), rows.end(),
              [&](const SummaryRow& a, const SummaryRow& b) {
                if (a.mode != b.mode) return mode_rank(a.mode) < mode_rank(b.mode);
                if (a.bag_size != b.bag_size) return a.bag_size < b.bag_size;
                return a.seed < b.seed;
              });
    write_summary_csv(rows, (out / "summary.csv").string());

    // mean ± std (sample convention) per (mode, bag size) cell of the table.
    {
      std::ofstream table(out / "ablation_table.csv");
      if (!table) throw std::runtime_error("cannot open ablation_table.csv");
      table << "mode,bag_size,mean_test_accuracy,std_test_accuracy,runs\n";
      for (const std::string& m : kAblationModes) {
        for (int bag_size : bag_sizes) {
          std::vector<double> accs;
          for (const SummaryRow& row : rows) {
            if (row.mode == m && row.bag_size == bag_size) {
              accs.push_back(row.test_accuracy);
            }
          }
          if (accs.empty()) continue;
          double mean = 0.0;
          for (double a : accs) mean += a;
          mean /= static_cast<double>(accs.size());
          double var = 0.0;
          for (double a : accs) var += (a - mean) * (a - mean);
          const double stddev =
              accs.size() > 1
                  ? std::sqrt(var / static_cast<double>(accs.size() - 1))
                  : 0.0;
          char buf[128];
          std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g,%zu\n", m.c_str(),
                        bag_size, mean, stddev, accs.size());
          table << buf;
        }
      }
      if (!table) throw std::runtime_error("write to ablation_table.csv failed");
    }

    if (!failures.empty()) {
      std::ofstream fail_out(out / "failures.txt");
      for (const std::string& f : failures) fail_out << f << "\n";
      std::cerr << "ablate: " << failures.size() << " cell(s) failed, see "
                << (out / "failures.txt").string() << "\n";
      return kExitRuntime;
    }
    std::cout << "ablate complete: " << rows.size() << " cells -> "
              << common.out_dir << "\n";
    return kExitOk;
  } catch (...) {
    return classify_and_report("ablate");
  }
}

int cmd_sweep_beta(const CommonArgs& common, const DataArgs& data,
                   const std::vector<double>& beta_b_grid,
                   const std::vector<double>& beta_i_grid) {
  try {
    if (beta_b_grid.empty() || beta_i_grid.empty()) {
      throw ConfigError("sweep-beta needs --beta-b and --beta-i grids");
    }
    for (double b : beta_b_grid) {
      if (b <= 0) throw ConfigError("beta_b grid values must be > 0");
    }
    for (double b : beta_i_grid) {
      if (b <= 0) throw ConfigError("beta_i grid values must be > 0");
    }
    if (!data.bags_path.empty()) {
      throw ConfigError("--bags cannot be combined with the sweep grid");
    }
    TrainConfig base = load_config(common);
    resolve_seed(base);
    validate_or_throw(base);
    prepare_out_dir(common.out_dir, {"sweep.csv", "summary.csv"}, {"cells"},
                    common.overwrite);
    const fs::path out(common.out_dir);
    fs::create_directories(out / "cells");

    RunData run_data = load_data(data, *base.seed);
    BagCollection bags =
        generate_bags(run_data.train, base.bag_size, *base.seed);
    const TrainOptions options = make_options(common);

    std::vector<SummaryRow> rows;
    std::ofstream sweep(out / "sweep.csv");
    if (!sweep) throw std::runtime_error("cannot open sweep.csv");
    sweep << "beta_b,beta_i,test_accuracy,mean_weight\n";
    bool any_failed = false;

    for (double beta_b : beta_b_grid) {
      for (double beta_i : beta_i_grid) {
        TrainConfig cell_config = base;
        cell_config.beta_b = beta_b;
        cell_config.beta_i = beta_i;
        std::ostringstream cell_name;
        cell_name << "beta-" << format_real_short(beta_b) << "-"
                  << format_real_short(beta_i);
        const fs::path cell_dir = out / "cells" / cell_name.str();
        fs::create_directories(cell_dir);
        try {
          CellResult cell = run_one(run_data.train, run_data.test, bags,
                                    cell_config, "dew", options,
                                    (cell_dir / "metrics.jsonl").string(),
                                    (cell_dir / "config_used.txt").string());
          rows.push_back(cell.row);
          char buf[128];
          std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", beta_b,
                        beta_i, cell.row.test_accuracy, cell.row.mean_weight);
          sweep << buf;
          std::cerr << "sweep cell " << cell_name.str() << " test_accuracy="
                    << format_real_short(cell.row.test_accuracy) << "\n";
        } catch (const std::exception& e) {
          any_failed = true;
          std::cerr << "sweep cell " << cell_name.str() << " FAILED: "
                    << e.what() << "\n";
        }
      }
    }
    if (!sweep) throw std::runtime_error("write to sweep.csv failed");
    write_summary_csv(rows, (out / "summary.csv").string());
    if (any_failed) return kExitRuntime;
    std::cout << "sweep-beta complete: " << rows.size() << " cells -> "
              << common.out_dir << "\n";
    return kExitOk;
  } catch (...) {
    return classify_and_report("sweep-beta");
  }
}

int cmd_oracle_check(std::uint64_t seed, int dew_cases, int fd_cases) {
  try {
    if (dew_cases < 0 || fd_cases < 0) {
      throw ConfigError("case counts must be >= 0");
    }
    oracle::DewSuiteReport dew_report =
        oracle::run_dew_oracle_suite(seed, dew_cases);
    std::cout << "dew-oracle: cases=" << dew_report.cases
              << " max_abs_error=" << dew_report.max_abs_error
              << " tolerance=" << dew_report.tolerance << " "
              << (dew_report.pass ? "PASS" : "FAIL") << "\n";
    if (!dew_report.pass) {
      std::cerr << "dew-oracle failing case:\n" << dew_report.worst_case
                << "\n";
    }

    oracle::FdSuiteReport fd_report = oracle::run_fd_suite(seed, fd_cases);
    std::cout << "gradient-oracle: cases=" << fd_report.cases
              << " max_rel_error=" << fd_report.max_rel_error
              << " tolerance=" << fd_report.tolerance << " "
              << (fd_report.pass ? "PASS" : "FAIL") << "\n";
    if (!fd_report.pass) {
      std::cerr << "gradient-oracle failing case:\n" << fd_report.worst_case
                << "\n";
    }
    return dew_report.pass && fd_report.pass ? kExitOk : kExitRuntime;
  } catch (...) {
    return classify_and_report("oracle-check");
  }
}

int cmd_gen_data(const BlobSpec& spec, const std::string& out_dir,
                 bool overwrite, std::optional<int> bag_size) {
  try {
    std::vector<std::string> files = {"train.csv", "test.csv"};
    if (bag_size) files.push_back("bags.txt");
    prepare_out_dir(out_dir, files, {}, overwrite);
    const fs::path out(out_dir);

    BlobData blobs = generate_blobs(spec);
    write_csv_dataset(blobs.train, (out / "train.csv").string());
    write_csv_dataset(blobs.test, (out / "test.csv").string());
    if (bag_size) {
      BagCollection bags = generate_bags(blobs.train, *bag_size, spec.seed);
      write_bags(bags, (out / "bags.txt").string());
    }
    std::cout << "gen-data: " << blobs.train.size() << " train + "
              << blobs.test.size() << " test instances -> " << out_dir << "\n";
    return kExitOk;
  } catch (...) {
    return classify_and_report("gen-data");
  }
}

int cmd_export_features(const CommonArgs& common, const DataArgs& data,
                        const std::string& checkpoint_path,
                        const std::string& split) {
  try {
    if (checkpoint_path.empty()) {
      throw ConfigError("export-features needs --checkpoint PATH");
    }
    if (split != "train" && split != "test") {
      throw ConfigError("--split must be train or test");
    }
    TrainConfig config = load_config(common);
    resolve_seed(config);
    prepare_out_dir(common.out_dir, {"features.csv"}, {}, common.overwrite);

    ModelParams params = load_checkpoint(checkpoint_path);
    RunData run_data = load_data(data, *config.seed);
    const Dataset& dataset =
        split == "train" ? run_data.train : run_data.test;
    const fs::path out(common.out_dir);
    export_features(params, dataset, (out / "features.csv").string());
    std::cout << "export-features: " << dataset.size() << " rows -> "
              << (out / "features.csv").string() << "\n";
    return kExitOk;
  } catch (...) {
    return classify_and_report("export-features");
  }
}

}  // namespace llpdew::cli
