#pragma once

#include <cstdint>
#include <random>

namespace stochprox {

/// Derives an independent mt19937_64 stream from a base seed and up to two
/// stream identifiers (replication id, purpose tag, ...). Same inputs give the
/// same stream, so runs are reproducible and replications can be generated in
/// parallel without sharing generator state.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t id0 = 0,
                                   std::uint64_t id1 = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id0), static_cast<std::uint32_t>(id0 >> 32),
                    static_cast<std::uint32_t>(id1), static_cast<std::uint32_t>(id1 >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace stochprox
