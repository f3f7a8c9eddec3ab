#pragma once

#include <span>
#include <vector>

#include "llpdew/matrix.hpp"
#include "llpdew/types.hpp"

namespace llpdew {

/// Per-class prediction column of one bag, L1-normalized: values[j] is
/// instance j's share of the bag's total probability mass on class c.
/// reference_count carries the bag's true count m for that class; degenerate
/// marks an all-zero column (no mass on the class anywhere in the bag).
struct BagClassDistribution {
  int class_index = 0;
  std::vector<double> values;
  int reference_count = 0;
  bool degenerate = false;
};

/// Toggles for the ablation grid.  A disabled factor is replaced by 1.
struct DewSettings {
  double beta_bag = 1.0;
  double beta_instance = 1.0;
  bool use_bag_weight = true;
  bool use_instance_weight = true;
};

/// Shannon entropy in nats, 0·log 0 = 0.  Rejects negative entries.
double entropy(std::span<const double> dist);

/// The confidence mapping exp(-x²/β): 1 at x = 0, decaying in |x|.
double mapping_sigma(double x, double beta);

/// Argmax with ties broken toward the smallest index.
std::size_t argmax_tie_smallest(std::span<const double> values);

/// Collects class c's probability across the bag's M weak predictions and
/// L1-normalizes.  An all-zero column is flagged degenerate instead.
BagClassDistribution bag_class_distribution(const Matrix& weak_probs,
                                            int class_index,
                                            int reference_count);

/// Bag-level confidence: exp(-[H(dist) - ln m]²/β).  Zero when the class is
/// absent from the bag (m = 0) or the column is degenerate: a pseudo-label
/// the proportions rule out gets no weight.
double bag_weight(const BagClassDistribution& dist, double beta_bag);

/// Instance-level confidence: exp(-H(prediction)²/β); the reference
/// distribution is one-hot, entropy 0, so sharper predictions score higher.
double instance_weight(std::span<const double> weak_prediction,
                       double beta_instance);

/// Full weighting for one bag: per instance j, takes c* = argmax of the weak
/// prediction and returns {ω^b_{c*}, ω^i_j, product}.  Predictions are
/// treated as constants — confidence never feeds gradients.  Rows of
/// weak_probs follow the bag's instance order.
std::vector<DewWeights> combined_weights(const Bag& bag,
                                         const Matrix& weak_probs,
                                         const DewSettings& settings);

}  // namespace llpdew
