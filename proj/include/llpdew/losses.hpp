#pragma once

#include <span>
#include <vector>

#include "llpdew/dew.hpp"
#include "llpdew/matrix.hpp"
#include "llpdew/types.hpp"

namespace llpdew {

/// Mean of a bag's weak predictions, p̄_c = (1/M) Σ_j ŷ_{j,c}.
struct BagProportionEstimate {
  std::vector<double> values;
};

BagProportionEstimate predicted_proportion(const Matrix& weak_probs);

/// Loss components for one batch of bags.  total = bag_loss + λ·instance_loss.
struct LossReport {
  double bag_loss = 0.0;
  double instance_loss = 0.0;
  double total = 0.0;
  double lambda = 0.0;
  std::vector<double> per_bag;  // unaveraged cross-entropy term per bag
  double mean_combined_weight = 0.0;
};

struct BagLossResult {
  double loss = 0.0;
  std::vector<double> per_bag;
  Matrix dprobs;  // d(loss)/d(weak prob), same shape as the stacked probs
};

/// Proportion loss over a batch: (1/N) Σ_i H(p_i, p̄_i), cross-entropy
/// between the bag's true proportions and its predicted mean.  Rows of
/// weak_probs are all bags' instances concatenated in bag order.  Log
/// arguments clamp at 1e-12 (gradient 0 there), so empty predicted mass
/// costs a large finite penalty instead of infinity.
BagLossResult bag_loss(std::span<const Bag* const> bags,
                       const Matrix& weak_probs);

/// One-hot at the argmax, ties toward the smallest class index.
PseudoLabel harden(std::span<const double> weak_prediction);
std::vector<PseudoLabel> harden_all(const Matrix& weak_probs);

struct InstanceLossResult {
  double loss = 0.0;
  Matrix dprobs;  // d(loss)/d(strong prob)
};

/// Confidence-weighted self-training loss: mean over all rows of
/// ω_j · (−log ŷ^s_{j,c̃_j}).  Weights are constants (no gradient through ω).
InstanceLossResult instance_loss(std::span<const PseudoLabel> pseudo_labels,
                                 const Matrix& strong_probs,
                                 std::span<const DewWeights> weights);

struct LossConfig {
  double lambda = 0.5;
  DewSettings dew;
};

struct TotalLossResult {
  LossReport report;
  Matrix dweak;    // bag-loss gradient (pseudo-labels/weights are constants)
  Matrix dstrong;  // λ-scaled instance-loss gradient
};

/// The full objective: hardens the weak predictions, computes confidence
/// weights per bag, and combines both losses.  λ=0 reduces the objective to
/// proportion matching alone (the plain aggregate-output baseline).
TotalLossResult total_loss(std::span<const Bag* const> bags,
                           const Matrix& weak_probs,
                           const Matrix& strong_probs,
                           const LossConfig& config);

/// Same objective with caller-supplied pseudo-labels and weights, for checks
/// that must hold both fixed while the predictions vary.
TotalLossResult total_loss_fixed(std::span<const Bag* const> bags,
                                 const Matrix& weak_probs,
                                 const Matrix& strong_probs,
                                 std::span<const PseudoLabel> pseudo_labels,
                                 std::span<const DewWeights> weights,
                                 double lambda);

}  // namespace llpdew
