#pragma once

#include <cstdint>
#include <random>

namespace fkl {

/// Engine for the `stream`-th independent substream of a run seeded with `seed`.
/// Monte Carlo work is partitioned into fixed blocks, each drawing from its
/// own stream, so results never depend on scheduling.
inline std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x6b79u};
  return std::mt19937_64(seq);
}

}  // namespace fkl
