#include "llpdew/dew.hpp"

#include <cmath>
#include <stdexcept>

namespace llpdew {

double entropy(std::span<const double> dist) {
  double h = 0.0;
  for (double p : dist) {
    if (p < 0) throw std::invalid_argument("entropy of negative probability");
    if (p > 0) h -= p * std::log(p);
  }
  return h;
}

double mapping_sigma(double x, double beta) {
  if (beta <= 0) throw std::invalid_argument("beta must be positive");
  return std::exp(-(x * x) / beta);
}

std::size_t argmax_tie_smallest(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

BagClassDistribution bag_class_distribution(const Matrix& weak_probs,
                                            int class_index,
                                            int reference_count) {
  if (weak_probs.rows() == 0) {
    throw std::invalid_argument("bag has no predictions");
  }
  if (class_index < 0 ||
      static_cast<std::size_t>(class_index) >= weak_probs.cols()) {
    throw std::out_of_range("class index out of range");
  }
  if (reference_count < 0) {
    throw std::invalid_argument("reference count must be >= 0");
  }
  BagClassDistribution dist;
  dist.class_index = class_index;
  dist.reference_count = reference_count;
  dist.values.resize(weak_probs.rows());
  double sum = 0.0;
  for (std::size_t j = 0; j < weak_probs.rows(); ++j) {
    const double p = weak_probs(j, static_cast<std::size_t>(class_index));
    if (p < 0) {
      throw std::invalid_argument("negative probability in prediction");
    }
    dist.values[j] = p;
    sum += p;
  }
  if (sum == 0.0) {
    dist.degenerate = true;
    return dist;
  }
  for (double& v : dist.values) v /= sum;
  return dist;
}

double bag_weight(const BagClassDistribution& dist, double beta_bag) {
  if (beta_bag <= 0) throw std::invalid_argument("beta_bag must be positive");
  if (dist.degenerate || dist.reference_count == 0) return 0.0;
  const double reference_entropy =
      std::log(static_cast<double>(dist.reference_count));
  return mapping_sigma(entropy(dist.values) - reference_entropy, beta_bag);
}

double instance_weight(std::span<const double> weak_prediction,
                       double beta_instance) {
  if (beta_instance <= 0) {
    throw std::invalid_argument("beta_instance must be positive");
  }
  return mapping_sigma(entropy(weak_prediction), beta_instance);
}

std::vector<DewWeights> combined_weights(const Bag& bag,
                                         const Matrix& weak_probs,
                                         const DewSettings& settings) {
  const std::size_t m = bag.size();
  if (weak_probs.rows() != m) {
    throw std::invalid_argument("prediction count does not match bag size");
  }
  const std::size_t class_count = bag.counts.size();
  if (weak_probs.cols() != class_count) {
    throw std::invalid_argument("prediction width does not match class count");
  }

  // One bag-level weight per class, shared by every instance argmaxed to it.
  std::vector<double> bag_weights(class_count, 1.0);
  if (settings.use_bag_weight) {
    for (std::size_t c = 0; c < class_count; ++c) {
      bag_weights[c] = bag_weight(
          bag_class_distribution(weak_probs, static_cast<int>(c),
                                 bag.counts[c]),
          settings.beta_bag);
    }
  }

  std::vector<DewWeights> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t c_star = argmax_tie_smallest(weak_probs.row(j));
    DewWeights& w = out[j];
    w.bag_weight = bag_weights[c_star];
    w.instance_weight =
        settings.use_instance_weight
            ? instance_weight(weak_probs.row(j), settings.beta_instance)
            : 1.0;
    w.combined = w.bag_weight * w.instance_weight;
  }
  return out;
}

}  // namespace llpdew
