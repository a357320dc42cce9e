#include "jsccf/rng.hpp"

namespace jsccf {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng derive_stream(std::uint64_t master, std::uint64_t image, std::uint64_t block, Link link) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ image);
  h = splitmix64(h ^ (block << 8));
  h = splitmix64(h ^ static_cast<std::uint64_t>(link));
  return Rng(h);
}

}  // namespace jsccf
