#pragma once

#include <cstdint>

namespace dynnet {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream seed for (fold, repetition) under a base seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t fold,
                                    std::uint64_t rep) {
  return splitmix64(base ^ splitmix64((fold << 32) ^ rep));
}

}  // namespace dynnet
