#include "llpdew/rng.hpp"

namespace llpdew {

RngEngine make_stream(std::uint64_t seed, std::uint32_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), stream_id,
                    0x6c6c7064u};
  return RngEngine(seq);
}

RngEngine make_stream(std::uint64_t seed, RngStream stream) {
  return make_stream(seed, static_cast<std::uint32_t>(stream));
}

}  // namespace llpdew
