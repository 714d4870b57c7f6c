#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace argbench {

// SplitMix64 finalizer; used to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for the (a, b)-th child stream of parent.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(mix64(mix64(parent) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

// mt19937_64 with bounded draws done here rather than through
// std::uniform_int_distribution, whose algorithm differs between standard
// libraries. Output is identical on every platform for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

  // Fisher-Yates, back to front.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace argbench
