#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "llpdew/matrix.hpp"

namespace llpdew {

/// Probability vectors are checked at this tolerance (post-softmax sums).
inline constexpr double kProbabilitySumTol = 1e-9;
/// Exact-rational sums (counts / M) are checked at this tighter tolerance.
inline constexpr double kProportionSumTol = 1e-12;

enum class SplitTag { train, test };

/// A feature matrix with ground-truth labels. Labels feed bag-proportion
/// computation and evaluation metrics only; the training loss never sees
/// them.
struct Dataset {
  Matrix features;          // one row per instance
  std::vector<int> labels;  // each in [0, class_count)
  int class_count = 0;
  SplitTag split_tag = SplitTag::train;

  std::size_t size() const { return features.rows(); }
  std::size_t feature_dim() const { return features.cols(); }
};

/// Throws std::invalid_argument if the dataset violates its invariants
/// (label range, row/label alignment, C >= 2, D >= 1).
void check_dataset(const Dataset& dataset);

/// A fixed-size group of instance indices with its per-class counts.
/// Counts are canonical; proportions are derived as counts / M.
struct Bag {
  std::vector<std::size_t> instance_indices;
  std::vector<int> counts;          // length C, sums to M
  std::vector<double> proportions;  // length C, derived from counts

  std::size_t size() const { return instance_indices.size(); }
};

/// counts / sum(counts). Throws std::invalid_argument on negative entries
/// or an all-zero vector ("empty bag").
std::vector<double> proportions_from_counts(std::span<const int> counts);

/// Builds a Bag with derived proportions. Throws if counts are negative,
/// sum to something other than indices.size(), or are all zero.
Bag make_bag(std::vector<std::size_t> indices, std::vector<int> counts);

struct BagCollection {
  std::vector<Bag> bags;
  std::string source_dataset_id;
};

/// One probability vector over C classes.
struct Prediction {
  std::vector<double> probs;
};

/// entries in [0,1] and sum within tol of 1
bool is_probability_vector(std::span<const double> probs,
                           double tol = kProbabilitySumTol);

/// Hardened prediction: one-hot at the argmax class.
struct PseudoLabel {
  int class_index = 0;
  std::vector<double> onehot;
};

/// Per-instance confidence: bag-level factor, instance-level factor, and
/// their product. Degenerate cases (class absent from the bag) force the
/// bag factor, and hence the product, to zero.
struct DewWeights {
  double bag_weight = 1.0;
  double instance_weight = 1.0;
  double combined = 1.0;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

/// Checks every Bag invariant against the dataset: unique in-range indices,
/// counts summing to the bag size, proportions consistent with counts, and
/// counts matching the dataset's ground-truth labels.
ValidationReport validate_bag(const Bag& bag, const Dataset& dataset);

/// Checks each bag plus pairwise disjointness across the collection.
ValidationReport validate_collection(const BagCollection& collection,
                                     const Dataset& dataset);

}  // namespace llpdew
