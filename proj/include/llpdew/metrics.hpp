#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "llpdew/matrix.hpp"
#include "llpdew/model.hpp"
#include "llpdew/types.hpp"

namespace llpdew {

/// One row of the per-epoch diagnostics series.  The pseudo-label and weight
/// fields are averaged over every training instance the epoch touched; the
/// losses are averaged over the epoch's steps.
struct EpochMetrics {
  int epoch = 0;
  double bag_loss = 0.0;
  double instance_loss = 0.0;
  double pseudo_label_accuracy = 0.0;
  double mean_normalized_entropy = 0.0;
  double mean_weight = 0.0;
  double mean_bag_weight = 0.0;
  double mean_instance_weight = 0.0;
  double test_accuracy = 0.0;
};

/// Fraction of rows whose hardened prediction matches the true label.
/// Ground truth is measurement-only; training never sees it.
double pseudo_label_accuracy(const Matrix& weak_probs,
                             std::span<const int> true_labels);

/// Mean of H(row)/ln C over rows — 0 for one-hot rows, 1 for uniform ones.
/// Computed on the soft predictions; the hardened labels are always at 0.
double mean_normalized_entropy(const Matrix& weak_probs, int class_count);

/// Argmax-match rate on un-augmented inputs.
double test_accuracy(const ModelParams& params, const Dataset& test_set);

/// Writes penultimate-layer activations, one CSV row per instance, true
/// label last.  Feeds external embedding/plotting tools.
void export_features(const ModelParams& params, const Dataset& dataset,
                     const std::string& path);

/// One JSON object per epoch, keys sorted, no whitespace — identical metric
/// values serialize to identical bytes.
std::string epoch_metrics_json_line(const EpochMetrics& metrics);

/// End-of-run summary row: one per (mode, bag size, seed) run.
struct SummaryRow {
  std::string mode;
  int bag_size = 0;
  std::uint64_t seed = 0;
  double test_accuracy = 0.0;
  double pseudo_label_accuracy = 0.0;
  double mean_normalized_entropy = 0.0;
  double mean_weight = 0.0;
};

extern const char* const kSummaryHeader;

std::string format_summary_row(const SummaryRow& row);
void write_summary_csv(std::span<const SummaryRow> rows,
                       const std::string& path);
std::vector<SummaryRow> read_summary_csv(const std::string& path);

}  // namespace llpdew
