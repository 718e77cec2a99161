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
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "rcs/bitspace.hpp"
#include "rcs/errors.hpp"

namespace rcs {

/// Per-gate error rates used by the a priori fidelity predictors.  The
/// product formula conventionally uses e2 = 0.0062 while the deviation
/// bound uses the rounded-up 0.0063; both defaults are provided and every
/// entry point accepts overrides.
struct GateRates {
  double e1 = 0.0016;  // single-qubit gate error
  double e2 = 0.0062;  // two-qubit gate error
  double eq = 0.038;   // per-qubit readout error
};

inline constexpr GateRates kProductFormulaRates{0.0016, 0.0062, 0.038};
inline constexpr GateRates kDeviationRates{0.0016, 0.0063, 0.038};
/// Aggregate rate folding single-qubit errors into the two-qubit count.
inline constexpr double kTwoGateAggregateRate = 0.0093;

struct XebEstimate {
  double value = 0.0;      // (1/N) sum 2^n P(x_i) - 1
  double std_error = 0.0;  // sample standard error of the mean
  std::int64_t count = 0;
};

/// Linear cross-entropy fidelity of a sample against a dense table.
XebEstimate xeb(const SampleRecord& sample, const ProbabilityTable& table);
/// Same against a synthetic circuit via O(1) point queries (any n).
XebEstimate xeb(const SampleRecord& sample, const SyntheticCircuit& circuit);

/// Core estimator over precomputed per-draw probabilities; `values[i]` must
/// be P(x_i) under the scoring distribution of an n-qubit table.
XebEstimate xeb_from_probs(const Eigen::Ref<const Eigen::ArrayXd>& values, int n);

struct PatchXeb {
  std::vector<XebEstimate> per_patch;
  double product = 1.0;
};

/// Patch-circuit estimator: scores disjoint qubit blocks against their own
/// tables and multiplies the per-patch fidelities.  `patch_qubits[k][j]`
/// names the sample qubit that becomes bit j of patch k.
PatchXeb xeb_patch(const SampleRecord& sample,
                   const std::vector<ProbabilityTable>& patch_tables,
                   const std::vector<std::vector<int>>& patch_qubits);

struct TEstimate {
  double t2 = 0.0;  // unbiased estimate of phi^2
  double t = 0.0;   // sign(t2) sqrt(|t2|)
  std::int64_t draws = 0;
};

/// Collision-statistic fidelity estimator.  With M = 2^n, N draws and
/// occurrence counts O(x),
///   T^2 = M(M+1) / ((N^2-N)(M-1)) * (sum O^2 - N - (N^2-N)/M),
/// whose expectation is phi^2 under the mixture model.  Degenerate inputs
/// pin the scale: all draws identical gives T^2 = M+1, a perfectly flat
/// occupancy gives T^2 = -(M+1)/(N-1).
TEstimate t_estimator(const OccurrenceCounts& counts);

/// Convenience overload: counts the sample first.
TEstimate t_estimator(const SampleRecord& sample);

struct DistanceReport {
  double chi2 = 0.0;
  std::int64_t dof_lower = 0;  // M - 2 (one fitted parameter)
  std::int64_t dof_upper = 0;  // M - 1
  double l1 = 0.0;
  double l2 = 0.0;
  double kl = 0.0;
  bool kl_infinite = false;  // sample mass on a model-zero cell
  double pearson = 0.0;      // correlation between counts and expectations
};

/// Distance battery between observed counts and the expected counts
/// N * model(x).  Chi-square and KL use the plug-in empirical distribution;
/// 0 log 0 counts as 0 and model-zero cells with observed mass set the
/// kl_infinite flag instead of poisoning the sum.  Dense only (n <= 24).
DistanceReport distances(const OccurrenceCounts& counts, const ProbabilityTable& model);

/// sqrt(2^n) * ||a - b||_2: the scaling under which the distance between
/// the uniform table and a signal-phi model table concentrates at phi.
double normalized_l2(const ProbabilityTable& a, const ProbabilityTable& b);

/// Product fidelity formula with explicit per-gate rates:
///   prod (1-e_g) over both gate lists times prod (1-e_q) over qubits.
double formula77(const std::vector<double>& onegate_errors,
                 const std::vector<double>& twogate_errors,
                 const std::vector<double>& readout_errors);

/// Flat-rate simplification: (1-e1)^|G1| (1-e2)^|G2| (1-eq)^n.
double formula77_simplified(int n, std::int64_t onegate_count,
                            std::int64_t twogate_count,
                            const GateRates& rates = kProductFormulaRates);

/// Two-gate aggregate variant: (1-r2)^|G2| (1-eq)^n with r2 = 0.0093 by
/// default, folding single-qubit errors into the two-qubit count.
double formula77_simplified_2g(int n, std::int64_t twogate_count,
                               double twogate_rate = kTwoGateAggregateRate,
                               double readout_rate = 0.038);

/// One-sigma deviation scale for the product formula:
///   0.2 (sqrt(n) eq + sqrt(|G1|) e1 + sqrt(|G2|) e2).
double dev_estimate(int n, std::int64_t onegate_count, std::int64_t twogate_count,
                    const GateRates& rates = kDeviationRates);

/// Interpolation between the independent-error deviation and the fully
/// correlated worst case, with correlation weight t in [0, 0.5]:
///   (1-2t) DEV + 2t (n eq + |G1| e1 + |G2| e2).
double biased_dev_estimate(int n, std::int64_t onegate_count,
                           std::int64_t twogate_count, double t,
                           const GateRates& rates = kDeviationRates);

/// Predicted fidelity retained when one calibrated two-qubit gate at
/// (theta, phi) is replaced by the nominal gate (pi/2, pi/6):
///   psi = (4 + cos 2(theta-pi/2) + cos(phi-pi/6)
///            + 2 cos(theta-pi/2) (1 + cos(phi-pi/6))) / 10.
/// This is the average-gate-fidelity of the residual two-qubit rotation.
double calibration_effect(double theta, double phi);

/// Product of calibration_effect over a set of (theta, phi) adjustments.
double calibration_effect_total(const std::vector<std::pair<double, double>>& angles);

/// Convenience grid search: the phi in [lo, hi] whose mixture model
/// minimizes chi-square against the counts.  Provided for exploratory use
/// only; it is a plain scan, not a calibrated estimator.
double fidelity_from_chi2(const OccurrenceCounts& counts, const ProbabilityTable& ideal,
                          double lo = 0.0, double hi = 1.0, int steps = 200);

}  // namespace rcs
