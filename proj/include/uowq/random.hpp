#pragma once

#include <cstdint>
#include <random>

namespace uowq {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Derives an independent stream seed from a master seed and up to two stream indices.
// Used so that trial i of a run draws the same numbers no matter which thread runs it.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t substream = 0) noexcept;

Rng make_rng(std::uint64_t master, std::uint64_t stream = 0, std::uint64_t substream = 0);

}  // namespace uowq
