#include "llpdew/oracles/dew_reference.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace llpdew::oracle {

// Everything below recomputes from scratch per instance — no caching, no
// shared subroutines — so a bookkeeping bug in the main library cannot be
// mirrored here.
std::vector<DewTriple> reference_combined_weights(const DewCase& dew_case) {
  const std::size_t m_total = dew_case.predictions.size();
  if (m_total == 0) throw std::invalid_argument("oracle: empty bag");
  const std::size_t class_count = dew_case.counts.size();
  for (const auto& row : dew_case.predictions) {
    if (row.size() != class_count) {
      throw std::invalid_argument("oracle: ragged prediction row");
    }
  }

  std::vector<DewTriple> result(m_total);
  for (std::size_t j = 0; j < m_total; ++j) {
    const std::vector<double>& row = dew_case.predictions[j];

    // Hardened class: first index attaining the maximum.
    std::size_t hard = 0;
    for (std::size_t c = 1; c < class_count; ++c) {
      if (row[c] > row[hard]) hard = c;
    }

    double w_bag = 1.0;
    if (dew_case.use_bag_weight) {
      // Column of the hardened class across the whole bag, L1-normalized.
      double column_sum = 0.0;
      for (std::size_t r = 0; r < m_total; ++r) {
        column_sum += dew_case.predictions[r][hard];
      }
      const int ref_count = dew_case.counts[hard];
      if (ref_count <= 0 || column_sum <= 0.0) {
        w_bag = 0.0;
      } else {
        double column_entropy = 0.0;
        for (std::size_t r = 0; r < m_total; ++r) {
          const double q = dew_case.predictions[r][hard] / column_sum;
          if (q > 0.0) column_entropy -= q * std::log(q);
        }
        const double gap =
            column_entropy - std::log(static_cast<double>(ref_count));
        w_bag = std::exp(-(gap * gap) / dew_case.beta_b);
      }
    }

    double w_inst = 1.0;
    if (dew_case.use_instance_weight) {
      double row_entropy = 0.0;
      for (std::size_t c = 0; c < class_count; ++c) {
        if (row[c] > 0.0) row_entropy -= row[c] * std::log(row[c]);
      }
      w_inst = std::exp(-(row_entropy * row_entropy) / dew_case.beta_i);
    }

    result[j].bag_weight = w_bag;
    result[j].instance_weight = w_inst;
    result[j].combined = w_bag * w_inst;
  }
  return result;
}

}  // namespace llpdew::oracle
