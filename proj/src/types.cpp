#include "llpdew/types.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace llpdew {

void check_dataset(const Dataset& dataset) {
  if (dataset.class_count < 2)
    throw std::invalid_argument("dataset: class_count must be >= 2");
  if (dataset.feature_dim() < 1)
    throw std::invalid_argument("dataset: feature_dim must be >= 1");
  if (dataset.labels.size() != dataset.features.rows())
    throw std::invalid_argument("dataset: one label per feature row required");
  for (std::size_t i = 0; i < dataset.labels.size(); ++i) {
    if (dataset.labels[i] < 0 || dataset.labels[i] >= dataset.class_count) {
      std::ostringstream msg;
      msg << "dataset: label out of range at row " << i;
      throw std::invalid_argument(msg.str());
    }
  }
}

std::vector<double> proportions_from_counts(std::span<const int> counts) {
  long long total = 0;
  for (int c : counts) {
    if (c < 0) throw std::invalid_argument("counts must be non-negative");
    total += c;
  }
  if (total == 0) throw std::invalid_argument("empty bag");
  std::vector<double> proportions(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    proportions[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  return proportions;
}

Bag make_bag(std::vector<std::size_t> indices, std::vector<int> counts) {
  long long total = 0;
  for (int c : counts) {
    if (c < 0) throw std::invalid_argument("counts must be non-negative");
    total += c;
  }
  if (total != static_cast<long long>(indices.size()))
    throw std::invalid_argument("counts must sum to the number of indices");
  Bag bag;
  bag.proportions = proportions_from_counts(counts);
  bag.instance_indices = std::move(indices);
  bag.counts = std::move(counts);
  return bag;
}

bool is_probability_vector(std::span<const double> probs, double tol) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= tol;
}

std::string ValidationReport::to_string() const {
  if (ok()) return "ok";
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) out << "; ";
    out << violations[i];
  }
  return out.str();
}

ValidationReport validate_bag(const Bag& bag, const Dataset& dataset) {
  ValidationReport report;
  auto add = [&report](const std::string& msg) { report.violations.push_back(msg); };

  const std::size_t M = bag.size();
  const std::size_t C = static_cast<std::size_t>(dataset.class_count);
  if (M == 0) add("bag is empty");
  if (bag.counts.size() != C) add("counts length != class_count");
  if (bag.proportions.size() != C) add("proportions length != class_count");

  std::unordered_set<std::size_t> seen;
  bool all_in_range = true;
  for (std::size_t idx : bag.instance_indices) {
    if (!seen.insert(idx).second) {
      add("indices not unique");
      break;
    }
  }
  for (std::size_t idx : bag.instance_indices) {
    if (idx >= dataset.size()) {
      add("index out of dataset range");
      all_in_range = false;
      break;
    }
  }

  long long count_sum = 0;
  for (int c : bag.counts) {
    if (c < 0) add("negative count");
    count_sum += c;
  }
  if (count_sum != static_cast<long long>(M)) add("counts do not sum to M");

  double prop_sum = 0.0;
  for (double p : bag.proportions) prop_sum += p;
  if (std::abs(prop_sum - 1.0) > kProportionSumTol)
    add("proportions do not sum to 1");

  if (bag.counts.size() == bag.proportions.size()) {
    for (std::size_t c = 0; c < bag.counts.size(); ++c) {
      if (std::abs(bag.proportions[c] * static_cast<double>(M) -
                   static_cast<double>(bag.counts[c])) > 1e-6) {
        add("proportions[c]*M != counts[c]");
        break;
      }
    }
  }

  // Counts must be the histogram of ground-truth labels over the indices.
  if (all_in_range && bag.counts.size() == C) {
    std::vector<int> observed(C, 0);
    for (std::size_t idx : bag.instance_indices) ++observed[dataset.labels[idx]];
    if (observed != bag.counts) add("counts do not match dataset labels");
  }

  return report;
}

ValidationReport validate_collection(const BagCollection& collection,
                                     const Dataset& dataset) {
  ValidationReport report;
  std::unordered_set<std::size_t> used;
  for (std::size_t b = 0; b < collection.bags.size(); ++b) {
    ValidationReport bag_report = validate_bag(collection.bags[b], dataset);
    for (const std::string& v : bag_report.violations) {
      std::ostringstream msg;
      msg << "bag " << b << ": " << v;
      report.violations.push_back(msg.str());
    }
    for (std::size_t idx : collection.bags[b].instance_indices) {
      if (!used.insert(idx).second) {
        std::ostringstream msg;
        msg << "bag " << b << ": index " << idx << " appears in two bags";
        report.violations.push_back(msg.str());
      }
    }
  }
  return report;
}

}  // namespace llpdew
