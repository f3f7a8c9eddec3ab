#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace llpdew {

/// Every run hyperparameter, read from a flat key=value file.  Fields left
/// as "auto" in the file stay unset here and are resolved against the data
/// when the run plan is built (see resolve_plan): bags_per_step targets a
/// batch of ~1024 instances, total_steps = epochs × steps_per_epoch, noise
/// sigmas scale with the training features, seed falls back to LLP_DEW_SEED
/// and then to 1.
struct TrainConfig {
  double lambda = 0.5;
  double beta_b = 1.0;
  double beta_i = 1.0;
  int bag_size = 64;
  std::optional<int> bags_per_step;
  double lr0 = 0.03;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::optional<long long> total_steps;
  int epochs = 200;
  std::optional<std::uint64_t> seed;
  bool ablation_use_bag_weight = true;
  bool ablation_use_instance_weight = true;
  std::optional<double> weak_noise_sigma;
  std::optional<double> strong_noise_sigma;
  double strong_dropout_rate = 0.2;
  std::vector<int> hidden_sizes = {64};
};

/// Parses `key = value` lines ('#' comments, blank lines allowed).  Unknown
/// or repeated keys are errors; so are malformed values.  Messages carry the
/// line number.
TrainConfig parse_config_text(const std::string& text,
                              const std::string& origin);
TrainConfig parse_config_file(const std::string& path);

/// Applies one `key=value` override (the --set flag).  Key errors and value
/// errors throw with the offending text.
void set_config_field(TrainConfig& config, const std::string& key,
                      const std::string& value);
void apply_overrides(TrainConfig& config,
                     const std::vector<std::string>& overrides);

/// Field-level validation; returns one message per violation, empty if ok.
std::vector<std::string> validate_config(const TrainConfig& config);

/// Full round-trippable rendering, one key per line, unset optionals as
/// "auto".  parse(serialize(c)) == c.
std::string serialize_config(const TrainConfig& config);

}  // namespace llpdew
