#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace roughkit {

using Seed = std::uint64_t;

// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_tag(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Counter-based split: the sub-seed depends only on (master, tag, counters),
// never on how many draws were taken elsewhere, so sample k of a Monte Carlo
// loop is reproducible in isolation and independent of worker scheduling.
constexpr Seed derive_seed(Seed master, std::string_view tag,
                           std::initializer_list<std::uint64_t> counters = {}) noexcept {
  std::uint64_t s = mix64(master ^ mix64(hash_tag(tag)));
  for (std::uint64_t c : counters) s = mix64(s ^ mix64(c + 0x632be59bd9b4e019ULL));
  return s;
}

class Rng {
 public:
  explicit Rng(Seed seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace roughkit
