#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "llpdew/synth.hpp"

namespace llpdew::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Flags shared by every run command.
struct CommonArgs {
  std::string config_path;             // empty: built-in defaults
  std::vector<std::string> overrides;  // --set key=value, applied in order
  std::string out_dir;
  bool overwrite = false;
  bool deterministic = false;  // single worker, ordered reductions
  int threads = 0;             // parallel mode worker count, 0 = hardware
};

/// Where the instances come from.  Default: the built-in synthetic blobs,
/// generated from the run seed.  Explicit CSVs (train + test + class count)
/// override that; a bag file can replace seeded bag generation for `train`.
struct DataArgs {
  std::string train_csv;
  std::string test_csv;
  int csv_classes = 0;
  std::string bags_path;
};

/// One full run.  mode ∈ {dew, bag-only, instance-only, unweighted, dllp}
/// or empty to take the weighting exactly as configured.  Writes
/// config_used.txt, metrics.jsonl, checkpoint.txt, summary.csv.
int cmd_train(const CommonArgs& common, const DataArgs& data,
              const std::string& mode);

/// The 4-weight-mode × bag-size × seed grid.  Per-cell metrics land under
/// cells/, per-seed rows in summary.csv, mean±std per (mode, bag size) in
/// ablation_table.csv.  Failed cells are recorded and skipped, not fatal.
int cmd_ablate(const CommonArgs& common, const DataArgs& data,
               const std::vector<int>& bag_sizes,
               const std::vector<std::uint64_t>& seeds);

/// One run per (β_b, β_i) pair; grid results in sweep.csv.
int cmd_sweep_beta(const CommonArgs& common, const DataArgs& data,
                   const std::vector<double>& beta_b_grid,
                   const std::vector<double>& beta_i_grid);

/// Runs the independent-reference suites: confidence weights against the
/// brute-force oracle, analytic gradients against central differences.
/// Prints worst-case errors; exit 1 serializes the failing case.
int cmd_oracle_check(std::uint64_t seed, int dew_cases, int fd_cases);

/// Writes train.csv/test.csv for the blob spec; optionally bags.txt too.
int cmd_gen_data(const BlobSpec& spec, const std::string& out_dir,
                 bool overwrite, std::optional<int> bag_size);

/// Loads a checkpoint and writes penultimate-layer features (+ true label)
/// for the chosen split to features.csv.
int cmd_export_features(const CommonArgs& common, const DataArgs& data,
                        const std::string& checkpoint_path,
                        const std::string& split);

}  // namespace llpdew::cli
