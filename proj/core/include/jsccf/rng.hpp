#pragma once

#include <cstdint>
#include <random>

namespace jsccf {

using Rng = std::mt19937_64;

// Independent noise sources within one image transmission.
enum class Link : std::uint64_t {
  Forward = 1,
  Feedback = 2,
  Fading = 3,
  Broadcast1 = 4,
  Broadcast2 = 5,
};

std::uint64_t splitmix64(std::uint64_t x);

// One reproducible stream per (master seed, image, block, link).
Rng derive_stream(std::uint64_t master, std::uint64_t image, std::uint64_t block, Link link);

}  // namespace jsccf
