#include "llpdew/augment.hpp"

#include <random>
#include <stdexcept>

namespace llpdew {

AugmentPolicy weak_policy(double noise_sigma) {
  if (noise_sigma < 0) throw std::invalid_argument("noise_sigma must be >= 0");
  return AugmentPolicy{AugmentKind::weak, noise_sigma, 0.0};
}

AugmentPolicy strong_policy(double noise_sigma, double dropout_rate) {
  if (noise_sigma < 0) throw std::invalid_argument("noise_sigma must be >= 0");
  if (dropout_rate < 0 || dropout_rate >= 1) {
    throw std::invalid_argument("dropout_rate must lie in [0,1)");
  }
  return AugmentPolicy{AugmentKind::strong, noise_sigma, dropout_rate};
}

std::vector<double> apply(const AugmentPolicy& policy,
                          std::span<const double> x, RngEngine& rng) {
  std::vector<double> out(x.begin(), x.end());
  if (policy.noise_sigma > 0) {
    std::normal_distribution<double> noise(0.0, policy.noise_sigma);
    for (double& v : out) v += noise(rng);
  }
  if (policy.dropout_rate > 0) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (double& v : out) {
      if (unif(rng) < policy.dropout_rate) v = 0.0;
    }
  }
  return out;
}

Matrix apply_rows(const AugmentPolicy& policy, const Matrix& features,
                  std::span<const std::size_t> indices, RngEngine& rng) {
  Matrix out(indices.size(), features.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= features.rows()) {
      throw std::out_of_range("augment row index out of range");
    }
    out.set_row(r, apply(policy, features.row(indices[r]), rng));
  }
  return out;
}

}  // namespace llpdew
