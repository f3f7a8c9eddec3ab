#include "llpdew/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace llpdew {
namespace {

constexpr double kLogFloor = 1e-12;

std::size_t total_bag_instances(std::span<const Bag* const> bags) {
  std::size_t total = 0;
  for (const Bag* bag : bags) {
    if (bag == nullptr) throw std::invalid_argument("null bag in batch");
    total += bag->size();
  }
  return total;
}

}  // namespace

BagProportionEstimate predicted_proportion(const Matrix& weak_probs) {
  if (weak_probs.rows() == 0) {
    throw std::invalid_argument("no predictions to average");
  }
  BagProportionEstimate estimate;
  estimate.values.assign(weak_probs.cols(), 0.0);
  for (std::size_t j = 0; j < weak_probs.rows(); ++j) {
    for (std::size_t c = 0; c < weak_probs.cols(); ++c) {
      estimate.values[c] += weak_probs(j, c);
    }
  }
  for (double& v : estimate.values) {
    v /= static_cast<double>(weak_probs.rows());
  }
  return estimate;
}

BagLossResult bag_loss(std::span<const Bag* const> bags,
                       const Matrix& weak_probs) {
  if (bags.empty()) throw std::invalid_argument("empty bag batch");
  if (total_bag_instances(bags) != weak_probs.rows()) {
    throw std::invalid_argument("prediction rows do not cover the bag batch");
  }
  const double bag_count = static_cast<double>(bags.size());

  BagLossResult result;
  result.per_bag.reserve(bags.size());
  result.dprobs = Matrix(weak_probs.rows(), weak_probs.cols());

  std::size_t offset = 0;
  for (const Bag* bag : bags) {
    const std::size_t m = bag->size();
    if (bag->proportions.size() != weak_probs.cols()) {
      throw std::invalid_argument("bag class count mismatch");
    }
    std::vector<double> mean(weak_probs.cols(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t c = 0; c < weak_probs.cols(); ++c) {
        mean[c] += weak_probs(offset + j, c);
      }
    }
    for (double& v : mean) v /= static_cast<double>(m);

    double ce = 0.0;
    for (std::size_t c = 0; c < weak_probs.cols(); ++c) {
      const double p = bag->proportions[c];
      if (p == 0.0) continue;
      if (mean[c] < kLogFloor) {
        ce -= p * std::log(kLogFloor);
        // clamped: flat in the prediction, so no gradient contribution
      } else {
        ce -= p * std::log(mean[c]);
        const double g = -p / (bag_count * static_cast<double>(m) * mean[c]);
        for (std::size_t j = 0; j < m; ++j) {
          result.dprobs(offset + j, c) = g;
        }
      }
    }
    result.per_bag.push_back(ce);
    result.loss += ce;
    offset += m;
  }
  result.loss /= bag_count;
  return result;
}

PseudoLabel harden(std::span<const double> weak_prediction) {
  PseudoLabel label;
  label.class_index = static_cast<int>(argmax_tie_smallest(weak_prediction));
  label.onehot.assign(weak_prediction.size(), 0.0);
  label.onehot[static_cast<std::size_t>(label.class_index)] = 1.0;
  return label;
}

std::vector<PseudoLabel> harden_all(const Matrix& weak_probs) {
  std::vector<PseudoLabel> labels;
  labels.reserve(weak_probs.rows());
  for (std::size_t j = 0; j < weak_probs.rows(); ++j) {
    labels.push_back(harden(weak_probs.row(j)));
  }
  return labels;
}

InstanceLossResult instance_loss(std::span<const PseudoLabel> pseudo_labels,
                                 const Matrix& strong_probs,
                                 std::span<const DewWeights> weights) {
  if (pseudo_labels.size() != strong_probs.rows() ||
      weights.size() != strong_probs.rows()) {
    throw std::invalid_argument("instance loss inputs are misaligned");
  }
  if (strong_probs.rows() == 0) {
    throw std::invalid_argument("empty instance batch");
  }
  InstanceLossResult result;
  result.dprobs = Matrix(strong_probs.rows(), strong_probs.cols());
  const double n = static_cast<double>(strong_probs.rows());
  for (std::size_t j = 0; j < strong_probs.rows(); ++j) {
    const double w = weights[j].combined;
    if (w == 0.0) continue;
    const std::size_t c =
        static_cast<std::size_t>(pseudo_labels[j].class_index);
    if (c >= strong_probs.cols()) {
      throw std::out_of_range("pseudo-label class out of range");
    }
    const double p = strong_probs(j, c);
    if (p < kLogFloor) {
      result.loss -= w * std::log(kLogFloor);
    } else {
      result.loss -= w * std::log(p);
      result.dprobs(j, c) = -w / (n * p);
    }
  }
  result.loss /= n;
  return result;
}

TotalLossResult total_loss_fixed(std::span<const Bag* const> bags,
                                 const Matrix& weak_probs,
                                 const Matrix& strong_probs,
                                 std::span<const PseudoLabel> pseudo_labels,
                                 std::span<const DewWeights> weights,
                                 double lambda) {
  if (lambda < 0) throw std::invalid_argument("lambda must be >= 0");
  if (!weak_probs.same_shape(strong_probs)) {
    throw std::invalid_argument("weak/strong prediction shapes differ");
  }
  BagLossResult bag_part = bag_loss(bags, weak_probs);
  InstanceLossResult inst_part =
      instance_loss(pseudo_labels, strong_probs, weights);

  TotalLossResult result;
  result.report.bag_loss = bag_part.loss;
  result.report.instance_loss = inst_part.loss;
  result.report.lambda = lambda;
  result.report.total = bag_part.loss + lambda * inst_part.loss;
  result.report.per_bag = std::move(bag_part.per_bag);
  double weight_sum = 0.0;
  for (const DewWeights& w : weights) weight_sum += w.combined;
  result.report.mean_combined_weight =
      weights.empty() ? 0.0 : weight_sum / static_cast<double>(weights.size());

  result.dweak = std::move(bag_part.dprobs);
  result.dstrong = std::move(inst_part.dprobs);
  if (lambda != 1.0) {
    for (double& g : result.dstrong.flat()) g *= lambda;
  }
  return result;
}

TotalLossResult total_loss(std::span<const Bag* const> bags,
                           const Matrix& weak_probs,
                           const Matrix& strong_probs,
                           const LossConfig& config) {
  std::vector<PseudoLabel> pseudo_labels = harden_all(weak_probs);
  std::vector<DewWeights> weights;
  weights.reserve(weak_probs.rows());
  std::size_t offset = 0;
  for (const Bag* bag : bags) {
    if (bag == nullptr) throw std::invalid_argument("null bag in batch");
    const std::size_t m = bag->size();
    if (offset + m > weak_probs.rows()) {
      throw std::invalid_argument("prediction rows do not cover the bag batch");
    }
    Matrix bag_probs(m, weak_probs.cols());
    for (std::size_t j = 0; j < m; ++j) {
      bag_probs.set_row(j, weak_probs.row(offset + j));
    }
    std::vector<DewWeights> bag_w =
        combined_weights(*bag, bag_probs, config.dew);
    weights.insert(weights.end(), bag_w.begin(), bag_w.end());
    offset += m;
  }
  if (offset != weak_probs.rows()) {
    throw std::invalid_argument("prediction rows do not cover the bag batch");
  }
  return total_loss_fixed(bags, weak_probs, strong_probs, pseudo_labels,
                          weights, config.lambda);
}

}  // namespace llpdew
