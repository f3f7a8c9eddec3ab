#pragma once

#include <vector>

// Brute-force reference for the confidence weighting, kept deliberately
// independent of the main library: plain nested vectors in, plain structs
// out, formulas transcribed directly with no shared helpers.  The test
// suites compare the fast implementation against this one on random cases.

namespace llpdew::oracle {

struct DewCase {
  std::vector<int> counts;                       // per-class true counts
  std::vector<std::vector<double>> predictions;  // M rows of C probabilities
  double beta_b = 1.0;
  double beta_i = 1.0;
  bool use_bag_weight = true;
  bool use_instance_weight = true;
};

struct DewTriple {
  double bag_weight = 1.0;
  double instance_weight = 1.0;
  double combined = 1.0;
};

std::vector<DewTriple> reference_combined_weights(const DewCase& dew_case);

}  // namespace llpdew::oracle
