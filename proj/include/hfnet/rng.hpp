#pragma once

#include <cstdint>
#include <random>

namespace hfnet {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Stream splitting rule: stream s of master seed m is seeded with
// splitmix64(m ^ splitmix64(s + 1)). Every replicate, pair batch or worker
// derives its own stream this way, so results never depend on scheduling.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream);

Rng make_stream(std::uint64_t master, std::uint64_t stream);

// Combines two stream keys (e.g. grid index and replicate) into one.
std::uint64_t stream_key(std::uint64_t a, std::uint64_t b);

}  // namespace hfnet
