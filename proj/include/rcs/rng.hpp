// Copyright 2026 The rcsbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace rcs {

/// SplitMix64 finalizer: a bijective avalanche mix on 64 bits.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Keyed counter PRF: maps (key, counter) to a uniform 64-bit word with O(1)
/// random access.  Every random decision in this library is a deterministic
/// function of such a (key, counter) pair, which is what makes point queries,
/// re-runs and thread-count changes reproducible bit for bit.
constexpr std::uint64_t prf64(std::uint64_t key, std::uint64_t ctr) noexcept {
  std::uint64_t k = mix64(key ^ 0xD1B54A32D192ED03ULL);
  return mix64(k ^ (0x9E3779B97F4A7C15ULL * (ctr + 1)));
}

/// FNV-1a over a byte string; used to fold human-readable stage names into
/// seed material.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Derives an independent child seed from a master seed.
///
/// Convention used throughout: every logically distinct consumer of
/// randomness (a repetition, a qubit, a trajectory, a pipeline stage) gets
/// `derive_seed(master, stage_name, index)` and never shares raw streams.
/// The stage name keeps unrelated stages decorrelated even when their
/// indices coincide.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stage,
                                    std::uint64_t index = 0) noexcept {
  return prf64(master ^ fnv1a64(stage), index);
}

/// Sequential view over a counter stream.  Cheap to construct, no state
/// beyond (key, position); safe to copy.
class Prng {
 public:
  explicit Prng(std::uint64_t key, std::uint64_t start = 0) noexcept
      : key_(key), ctr_(start) {}

  std::uint64_t next_u64() noexcept { return prf64(key_, ctr_++); }

  /// Uniform double in (0, 1]; never returns 0, so -log stays finite.
  double next_unit() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Exp(1) draw via inverse CDF.
  double next_exp() noexcept { return -std::log(next_unit()); }

  /// Standard normal via Box-Muller (the spare is cached).
  double next_normal() noexcept {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u = next_unit();
    double v = next_unit();
    double r = std::sqrt(-2.0 * std::log(u));
    double a = 6.283185307179586476925286766559 * v;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  bool next_bernoulli(double p) noexcept { return next_unit() <= p; }

  /// Unbiased integer in [0, bound) via rejection (Lemire's method).
  std::uint64_t next_below(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    const std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
      std::uint64_t r = next_u64();
      __uint128_t m = static_cast<__uint128_t>(r) * bound;
      if (static_cast<std::uint64_t>(m) >= threshold) {
        return static_cast<std::uint64_t>(m >> 64);
      }
    }
  }

  std::uint64_t position() const noexcept { return ctr_; }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Point query: the Exp(1) value a Porter-Thomas table keyed by `seed`
/// assigns to basis index `x` (before any normalization).  Shared by the
/// dense generator and the O(1) synthetic-circuit path so both views of the
/// same seed agree exactly.
inline double exp1_at(std::uint64_t seed, std::uint64_t x) noexcept {
  double u = static_cast<double>((prf64(seed, x) >> 11) + 1) * 0x1.0p-53;
  return -std::log(u);
}

}  // namespace rcs
