// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace sforge {

/// Seeded generator whose output sequence is pinned across platforms and
/// standard libraries. std::mt19937_64 itself is bit-specified by the
/// standard, but the std distributions are not, so bounded integers and
/// normals are derived here with fixed algorithms.
class Rng {
 public:
  /// Recorded in manifests and digests. Bump when any derivation changes.
  static constexpr const char* kAlgorithm = "mt19937_64+rejection+boxmuller/v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_below(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  /// Standard normal via the Box-Muller transform (caches the second value).
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// splitmix64 finalizer; used to derive independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Fisher-Yates over [0, n); returns the first k positions of the shuffle,
/// i.e. a uniformly random ordered k-subset without replacement.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                    Rng& rng);

/// In-place Fisher-Yates.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace sforge
