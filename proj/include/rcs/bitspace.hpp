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

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "rcs/errors.hpp"
#include "rcs/rng.hpp"

namespace rcs {

/// Dense probability tables are capped at n = 24 (128 MB of 8-byte reals);
/// larger requests must go through the O(1) synthetic point-query path.
inline constexpr int kMaxDenseQubits = 24;
/// Occurrence counts switch from a dense vector to a hash map above n = 16.
inline constexpr int kMaxDenseCountQubits = 16;

/// Fixed-width bit vector over the computational basis.  `value` holds qubit
/// q in bit q, so the textual form (most-significant qubit first) prints
/// qubit n-1 leftmost.
struct BitString {
  std::uint64_t value = 0;
  int n = 0;

  bool bit(int q) const { return (value >> q) & 1ULL; }
  std::string str() const;

  /// Parses a 0/1 string, most-significant qubit first.
  static BitString parse(const std::string& text);
};

/// A full distribution over the 2^n basis states.  `probs[x]` is the
/// probability of basis state x.  Exact tables sum to 1; expected-mode
/// tables carry the idealized normalization 2^-n per mean entry and sum to
/// 1 only on average.
struct ProbabilityTable {
  int n = 0;
  Eigen::ArrayXd probs;

  Eigen::Index size() const { return probs.size(); }
};

enum class TableMode { kExact, kExpected };

/// A seeded stand-in for the output distribution of a random circuit:
/// entries are i.i.d. Exp(1) draws scaled by 2^-n, addressable point by
/// point in O(1) through a counter PRF, so it works far beyond the dense
/// cap.  Exact mode materializes and normalizes the dense table (n <= 24).
class SyntheticCircuit {
 public:
  SyntheticCircuit(std::uint64_t seed, int n, TableMode mode);

  int n() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  TableMode mode() const { return mode_; }

  /// Probability assigned to basis state x.
  double prob(std::uint64_t x) const {
    if (mode_ == TableMode::kExact) return table_.probs[static_cast<Eigen::Index>(x)];
    return exp1_at(seed_, x) * inv_m_;
  }

  /// Dense view; requires n <= 24.
  ProbabilityTable materialize() const;

 private:
  std::uint64_t seed_;
  int n_;
  TableMode mode_;
  double inv_m_;
  ProbabilityTable table_;  // populated in exact mode only
};

/// An ordered list of measured bitstrings plus provenance metadata.  Order
/// is meaningful: stationarity and drift diagnostics read the draws as a
/// time series.
struct SampleRecord {
  int n = 0;
  std::vector<std::uint64_t> draws;
  std::string source;  // label of the producing table/circuit
  std::uint64_t seed = 0;
  std::string noise;  // human-readable description, empty if none

  Eigen::Index size() const { return static_cast<Eigen::Index>(draws.size()); }
};

/// Occurrence counts per basis state; dense below kMaxDenseCountQubits,
/// hash-map backed above.
class OccurrenceCounts {
 public:
  OccurrenceCounts() = default;
  explicit OccurrenceCounts(int n);

  int n() const { return n_; }
  std::int64_t total() const { return total_; }
  bool dense() const { return !dense_.empty(); }

  void add(std::uint64_t x, std::int64_t k = 1);
  std::int64_t count(std::uint64_t x) const;

  /// Sum of squared counts; the collision statistic everything downstream
  /// builds on.
  double sum_squares() const;

  /// Visits only occupied cells (ascending x in dense mode, unspecified
  /// order in sparse mode).
  template <typename F>
  void for_each_nonzero(F&& f) const {
    if (!dense_.empty()) {
      for (std::size_t x = 0; x < dense_.size(); ++x) {
        if (dense_[x] != 0) f(static_cast<std::uint64_t>(x), dense_[x]);
      }
    } else {
      for (const auto& [x, k] : sparse_) f(x, k);
    }
  }

  /// Dense count vector, all 2^n cells; requires n <= kMaxDenseQubits.
  Eigen::ArrayXd to_dense() const;

 private:
  int n_ = 0;
  std::int64_t total_ = 0;
  std::vector<std::int64_t> dense_;
  std::unordered_map<std::uint64_t, std::int64_t> sparse_;
};

/// Porter-Thomas table for `seed`.  Exact mode normalizes the realized sum
/// to 1; expected mode leaves every entry at its idealized scale e/2^n.
ProbabilityTable generate_porter_thomas(int n, std::uint64_t seed, TableMode mode);

OccurrenceCounts count_occurrences(const SampleRecord& sample);

/// Marginal distribution over a qubit subset: bit j of the result indexes
/// input qubit `qubits[j]`; all other qubits are summed out.  Throws
/// ConfigError on duplicate or out-of-range indices.
ProbabilityTable marginal_table(const ProbabilityTable& table,
                                const std::vector<int>& qubits);

enum class SplitKind {
  kOrdered,  // first floor(N/2) draws vs. the rest
  kRandom,   // seeded uniform partition into the same two sizes
};

std::pair<SampleRecord, SampleRecord> split_half(const SampleRecord& sample,
                                                 SplitKind kind,
                                                 std::uint64_t seed = 0);

/// Walker/Vose alias sampler: O(M) build, O(1) per draw, deterministic for
/// a given probability vector and PRF stream.
class AliasSampler {
 public:
  explicit AliasSampler(const Eigen::Ref<const Eigen::ArrayXd>& weights);

  std::uint64_t draw(Prng& rng) const {
    const std::uint64_t col = rng.next_below(static_cast<std::uint64_t>(prob_.size()));
    return rng.next_unit() <= prob_[static_cast<Eigen::Index>(col)]
               ? col
               : static_cast<std::uint64_t>(alias_[static_cast<Eigen::Index>(col)]);
  }

 private:
  Eigen::ArrayXd prob_;
  Eigen::Array<std::int64_t, Eigen::Dynamic, 1> alias_;
};

// --- file formats ---------------------------------------------------------
//
// Probability table, text:    "ptable v1 n=<n>" then 2^n decimal floats,
//                             one per line.
// Probability table, binary:  magic "PTB1", little-endian u32 n, then 2^n
//                             little-endian f64.
// Sample, text:               "sample v1 n=<n>" then one 0/1 bitstring per
//                             line, most-significant qubit first.
// The *_plain readers adapt headerless files (floats / bitstrings only).

void write_ptable_text(const ProbabilityTable& table, const std::string& path);
void write_ptable_binary(const ProbabilityTable& table, const std::string& path);
/// Reads either on-disk representation, detected by the leading bytes.
ProbabilityTable read_ptable(const std::string& path);
/// Headerless adapter: one float per line, 2^n lines for some n.
ProbabilityTable read_ptable_plain(const std::string& path);

void write_sample_text(const SampleRecord& sample, const std::string& path);
SampleRecord read_sample(const std::string& path);
/// Headerless adapter: one bitstring per line, constant width.
SampleRecord read_sample_plain(const std::string& path);

}  // namespace rcs
