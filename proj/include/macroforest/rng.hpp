#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "macroforest/common.hpp"

namespace macroforest {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from (seed, stream id). Used for
// per-tree and per-repetition substreams so that parallel and serial
// execution draw identical numbers.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
  splitmix64(s);
  return splitmix64(s);
}

// xoshiro256** with splitmix64 seeding. All randomness in the library goes
// through this generator; std:: distributions are avoided because their
// output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(substream_seed(seed, stream));
  }

  std::uint64_t next() {
    auto rotl = [](std::uint64_t x, int k) {
      return (x << k) | (x >> (64 - k));
    };
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform on [0, 1)
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1], safe for log()
  double uniform_pos() { return double((next() >> 11) + 1) * 0x1.0p-53; }

  // uniform integer in [0, n), n >= 1 (Lemire's multiply-shift with rejection)
  std::uint64_t below(std::uint64_t n) {
    while (true) {
      std::uint64_t x = next();
      __uint128_t m = static_cast<__uint128_t>(x) * n;
      std::uint64_t lo = static_cast<std::uint64_t>(m);
      if (lo >= n || lo >= std::uint64_t(-n) % n) {
        return static_cast<std::uint64_t>(m >> 64);
      }
    }
  }

  // standard normal via Box-Muller
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // Fisher-Yates; shuffles the first k positions of [first, last)
  template <class It>
  void shuffle_prefix(It first, It last, std::size_t k) {
    const std::size_t n = static_cast<std::size_t>(last - first);
    for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
      std::swap(first[i], first[i + below(n - i)]);
    }
  }

 private:
  std::array<std::uint64_t, 4> state_;
};

// Draws floor(fraction*n) indices without replacement; both halves come back
// sorted ascending. Shared by train/test splitting, forest subsampling and
// the repeated out-of-sample protocol so their partitions agree by
// construction.
inline std::pair<std::vector<Index>, std::vector<Index>> split_indices(
    Index n, double fraction, std::uint64_t seed) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index(0));
  Rng rng(seed);
  const auto k = static_cast<std::size_t>(fraction * double(n));
  rng.shuffle_prefix(idx.begin(), idx.end(), k);
  std::vector<Index> first(idx.begin(), idx.begin() + k);
  std::vector<Index> second(idx.begin() + k, idx.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {std::move(first), std::move(second)};
}

}  // namespace macroforest
