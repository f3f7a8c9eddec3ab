#pragma once

#include <span>
#include <vector>

#include "llpdew/matrix.hpp"
#include "llpdew/rng.hpp"

namespace llpdew {

enum class AugmentKind { weak, strong };

/// Perturbation recipe for one view of a feature vector.  Weak = additive
/// Gaussian noise only; strong = stronger noise followed by per-coordinate
/// dropout.  Feature-space stand-in for image crops/flips/RandAugment.
struct AugmentPolicy {
  AugmentKind kind = AugmentKind::weak;
  double noise_sigma = 0.0;
  double dropout_rate = 0.0;  // always 0 for weak policies
};

AugmentPolicy weak_policy(double noise_sigma);
AugmentPolicy strong_policy(double noise_sigma, double dropout_rate);

/// Applies the policy to one feature vector.  Draw order per call, fixed so
/// seeded runs can be replayed: D normals when noise_sigma > 0, then D
/// uniforms when dropout_rate > 0 (coordinate zeroed when u < dropout_rate).
std::vector<double> apply(const AugmentPolicy& policy,
                          std::span<const double> x, RngEngine& rng);

/// Applies the policy to each selected row of `features`, in the order given
/// by `indices`, consuming draws from `rng` row by row.
Matrix apply_rows(const AugmentPolicy& policy, const Matrix& features,
                  std::span<const std::size_t> indices, RngEngine& rng);

}  // namespace llpdew
