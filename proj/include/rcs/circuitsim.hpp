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

#include <array>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "rcs/bitspace.hpp"
#include "rcs/rng.hpp"

namespace rcs {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Parameters of one 2-qubit gate occurrence.  The gate acts as identity on
/// |00>, rotates the {|01>,|10>} subspace (cos(theta) on-diagonal,
/// -i sin(theta) off-diagonal) and multiplies |11> by exp(-i phi).  The
/// optional Z-rotations Rz(a) = diag(1, exp(i a)) act on the two
/// participating qubits before (z_pre) and after (z_post) the gate.
/// Nominal, uncalibrated values: theta = pi/2, phi = pi/6, all z = 0.
struct TwoGateParams {
  double theta = std::numbers::pi / 2;
  double phi = std::numbers::pi / 6;
  std::array<double, 2> z_pre = {0.0, 0.0};
  std::array<double, 2> z_post = {0.0, 0.0};

  bool is_nominal() const;
};

/// An undirected coupler between two grid qubits.
struct Coupler {
  int a = 0;
  int b = 0;

  friend bool operator==(const Coupler& x, const Coupler& y) {
    return (x.a == y.a && x.b == y.b) || (x.a == y.b && x.b == y.a);
  }
};

/// Built-in coupler-set sequences on the rectangular grid.  EFGH cycles four
/// sets (horizontal even/odd column, vertical even/odd row); ABCDCDAB cycles
/// eight entries of four sets split by (row+column) parity.  These are grid
/// approximations of the experiment layouts, not the exact device geometry.
enum class PatternLabel { kEFGH, kABCDCDAB, kCustom };

enum class CircuitVariant { kFull, kPatch, kElided };

/// 1-gate generator.  kSqrtPaulis draws uniformly from {sqrt(X), sqrt(Y),
/// sqrt(W)} with W = (X+Y)/sqrt(2), never repeating on the same qubit in
/// consecutive layers; kHaar draws an independent Haar-random SU(2) per
/// occurrence.
enum class OneGateSet { kSqrtPaulis, kHaar };

/// Declarative circuit description.  Qubits live on a rows x cols grid with
/// rows * cols = n (the most square factorization; prime n degenerates to a
/// chain).  A circuit is m 2-gate layers interleaved with m+1 1-gate layers.
struct CircuitSpec {
  int n = 12;
  int m = 14;  // number of 2-gate layers; must be >= 1
  PatternLabel pattern = PatternLabel::kEFGH;
  /// Used when pattern == kCustom: the period of coupler-sets to cycle.
  std::vector<std::vector<Coupler>> custom_pattern;
  std::uint64_t seed = 0;  // seeds the 1-gate generator
  OneGateSet gate_set = OneGateSet::kSqrtPaulis;
  CircuitVariant variant = CircuitVariant::kFull;
  /// kPatch: qubits of the first block; couplers crossing the partition are
  /// removed.  Empty selects the left half of the grid columns.
  std::vector<int> patch_block;
  /// kElided: these couplers are removed wherever they occur.
  std::vector<Coupler> elided;
};

/// Fully materialized circuit: per-layer 1-gate matrices and coupler lists.
/// one_gates/one_kinds have m+1 layers of n entries (kinds: 0 = sqrt(X),
/// 1 = sqrt(Y), 2 = sqrt(W), 3 = custom); two_layers has m entries.
struct Circuit {
  int n = 0;
  int rows = 0;
  int cols = 0;
  std::vector<std::vector<int>> one_kinds;
  std::vector<std::vector<Eigen::Matrix2cd>> one_gates;
  std::vector<std::vector<Coupler>> two_layers;

  std::int64_t g1_count() const;
  std::int64_t g2_count() const;
};

/// Per-gate error model for trajectory simulation.  kDepolarizing draws a
/// uniform Pauli including identity at a failed gate (4 resp. 16 outcomes);
/// kUniformPauli draws uniformly from the non-identity Paulis (3 resp. 15).
/// eq is the per-qubit readout flip probability; a flip is an error event.
enum class ErrorChannel { kDepolarizing, kUniformPauli };

struct GateErrorSpec {
  double e1 = 0.0016;
  double e2 = 0.0062;
  double eq = 0.038;
  ErrorChannel channel = ErrorChannel::kDepolarizing;
};

struct TrajectoryResult {
  SampleRecord sample;
  double p_no_err = 0.0;          // fraction of trajectories with zero events
  std::int64_t clean_count = 0;   // trajectories with zero error events
  std::int64_t pattern_count = 0; // distinct non-trivial error patterns simulated
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Most-square grid factorization rows x cols, rows <= cols.
std::pair<int, int> grid_shape(int n);

/// The period of coupler-sets for a built-in pattern on a rows x cols grid
/// (4 layers for EFGH, 8 for ABCDCDAB).
std::vector<std::vector<Coupler>> pattern_layers(PatternLabel label, int rows,
                                                 int cols);

/// Materializes a spec: draws the seeded 1-gates, cycles and filters the
/// coupler-sets per variant, and validates layer disjointness.
/// Throws ConfigError on malformed specs (m < 1, overlapping couplers,
/// out-of-range qubits, empty/full patch block).
Circuit build_circuit(const CircuitSpec& spec);

/// One nominal TwoGateParams per 2-gate occurrence, in execution order
/// (layer by layer, list order within a layer).
std::vector<TwoGateParams> nominal_params(const Circuit& circuit);

/// Dense statevector simulation from |0...0>.  `params` must be empty
/// (nominal everywhere) or have exactly g2_count() entries.
/// Throws ConfigError beyond kMaxDenseQubits or on a size mismatch.
Eigen::VectorXcd simulate_state(const Circuit& circuit,
                                const std::vector<TwoGateParams>& params = {});

/// |amplitude|^2 of simulate_state; sums to 1 within 1e-9.
ProbabilityTable simulate_ideal(const Circuit& circuit,
                                const std::vector<TwoGateParams>& params = {});
ProbabilityTable simulate_ideal(const CircuitSpec& spec,
                                const std::vector<TwoGateParams>& params = {});

/// Which occurrences revert to nominal, and which components revert.
enum class CalibrationScope { kAll, kSingle };
enum class CalibrationComponent { kFull, kThetaPhiOnly, kZOnly };

/// Returns `params` with the selected occurrences reset to nominal values:
/// the whole gate, only the (theta, phi) adjustments, or only the
/// Z-rotations.  kSingle resets occurrence k; throws ConfigError if k is out
/// of range.
std::vector<TwoGateParams> remove_calibration(
    std::vector<TwoGateParams> params, CalibrationScope scope,
    CalibrationComponent component = CalibrationComponent::kFull,
    std::int64_t k = -1);

/// Monte-Carlo trajectory sampler.  Each trajectory walks the circuit in
/// execution order; every gate independently fails with its error
/// probability, drawing a Pauli insertion from the configured channel, and
/// every readout bit flips with probability eq.  The returned p_no_err is
/// the observed fraction of trajectories with zero error events.
/// Trajectories use substreams derived from (seed, index), so results do not
/// depend on internal batching.
TrajectoryResult simulate_noisy_trajectories(
    const Circuit& circuit, const std::vector<TwoGateParams>& params,
    const GateErrorSpec& errors, std::int64_t count, std::uint64_t seed);

}  // namespace rcs
