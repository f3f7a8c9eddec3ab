#pragma once

#include <cstdint>
#include <random>

namespace llpdew {

using RngEngine = std::mt19937_64;

/// Named random streams derived from the single run seed. Streams are
/// independent: drawing from one never affects another.
enum class RngStream : std::uint32_t {
  model_init = 0,
  bag_order = 1,
  weak_augment = 2,
  strong_augment = 3,
  data_gen = 4,
  bag_gen = 5,
};

RngEngine make_stream(std::uint64_t seed, std::uint32_t stream_id);
RngEngine make_stream(std::uint64_t seed, RngStream stream);

}  // namespace llpdew
