#pragma once

#include <cstdint>
#include <string>

#include "llpdew/types.hpp"

namespace llpdew {

/// One serialized bag line: `bag_id<TAB>indices<TAB>counts`.
struct BagFileRecord {
  long long bag_id = 0;
  std::vector<std::size_t> instance_indices;
  std::vector<int> counts;
};

/// Partitions the dataset into floor(N/M) disjoint bags of exactly M
/// instances via a seeded uniform shuffle followed by consecutive chunking.
/// Leftover instances are dropped. Counts come from ground-truth labels.
BagCollection generate_bags(const Dataset& dataset, int bag_size,
                            std::uint64_t seed);

/// Line-oriented text format, header `#llp-bags v1 C=<C> M=<M>`.
/// read(write(x)) == x exactly.
void write_bags(const BagCollection& collection, const std::string& path);
BagCollection read_bags(const std::string& path, const Dataset& dataset);

BagFileRecord parse_bag_record(const std::string& line, std::size_t line_number,
                               const std::string& origin);
std::string format_bag_record(const BagFileRecord& record);

}  // namespace llpdew
