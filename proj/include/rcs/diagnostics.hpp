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
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rcs/bitspace.hpp"

namespace rcs {

// ---------------------------------------------------------------------------
// Size-biased histogram
// ---------------------------------------------------------------------------

/// Binning and overlay configuration for the size-biased values
/// v = M * P(sampled bitstring).  Cells are uniform over [0, x_max]; values
/// beyond x_max land in the last cell so counts always sum to N.
struct HistogramSpec {
  int cell_count = 200;
  double x_max = 8.0;
  double phi = 0.0;  // overlay mixture weight
};

struct SizeBiasedHistogram {
  Eigen::ArrayXd bin_left;
  Eigen::ArrayXd bin_right;
  Eigen::ArrayXd counts;
  /// Mixture density phi v e^-v + (1-phi) e^-v at the bin centers.
  Eigen::ArrayXd overlay_density;
  std::int64_t total = 0;
};

SizeBiasedHistogram size_biased_histogram(const SampleRecord& sample,
                                          const ProbabilityTable& scored,
                                          const HistogramSpec& spec = {});
/// Point-query overload for tables beyond the dense cap.
SizeBiasedHistogram size_biased_histogram(const SampleRecord& sample,
                                          const SyntheticCircuit& scored,
                                          const HistogramSpec& spec = {});

/// phi v e^-v + (1-phi) e^-v.
double size_biased_density(double v, double phi);

/// KS test of the size-biased values against the asymptotic mixture CDF
/// 1 - e^-v (1 + phi v).  The asymptotic curve differs from the
/// realized-table mixture by O(1/sqrt(M)), so at very large N the test would
/// reject on table granularity alone; `max_draws` = 0 therefore caps the
/// tested draws at min(N, max(256, M/8)) by even striding, keeping the KS
/// resolution above the granularity floor.
struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
  std::int64_t used = 0;
};
KsResult size_biased_ks(const SampleRecord& sample, const ProbabilityTable& scored,
                        double phi, std::int64_t max_draws = 0);

/// Chi-square fit of the binned size-biased values against the bin masses
/// implied by `model` (the hypothesized sampling distribution), binning by
/// v = M * scored(x).  Exact at any N: the expected count of a cell is
/// N * sum of model probabilities over the cell.  Cells are merged
/// left-to-right until each expected count reaches 10.
struct HistogramFit {
  double chi2 = 0.0;
  double dof = 0.0;
  double p_value = 0.0;  // Wilson-Hilferty upper tail
};
HistogramFit size_biased_fit(const SampleRecord& sample,
                             const ProbabilityTable& scored,
                             const ProbabilityTable& model,
                             const HistogramSpec& spec = {});

// ---------------------------------------------------------------------------
// Quantile group statistics
// ---------------------------------------------------------------------------

/// Bitstrings sorted by descending model probability and cut into groups of
/// `group_size` (last group may be short).  observed_stddev is the RMS of
/// O(x) - N q(x) within the group; model_stddev the multinomial prediction
/// sqrt(mean N q (1-q)).
struct QuantileGroupRow {
  std::int64_t group = 0;
  std::int64_t size = 0;
  double mean_prob = 0.0;
  double expected_total = 0.0;
  double observed_mean = 0.0;
  double observed_stddev = 0.0;
  double model_stddev = 0.0;
};
std::vector<QuantileGroupRow> quantile_group_stats(const OccurrenceCounts& counts,
                                                   const ProbabilityTable& model,
                                                   int group_size);

// ---------------------------------------------------------------------------
// Stationarity split test
// ---------------------------------------------------------------------------

/// L1 distance between the empirical distributions of the first and second
/// half of the sampling order, compared against `partitions` random
/// halvings.  p = (k+1)/(R+1) with k the number of null values >= observed.
struct SplitTestResult {
  double ordered_l1 = 0.0;
  Eigen::ArrayXd null_l1;
  double p_value = 1.0;
};
SplitTestResult stationarity_split_test(const SampleRecord& sample,
                                        int partitions = 100,
                                        std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Second-half predictability
// ---------------------------------------------------------------------------

/// Spearman rank correlation between the per-cell occurrence deviations
/// O(x) - N_half q(x) of the two ordered sample halves.  A stable mismatch
/// between the sampling distribution and the scoring model makes the first
/// half predictive of the second (rho pinned away from 0: zero_z / zero_p
/// grade that against the no-correlation null, sd = 1/sqrt(M-1)).  Drift in
/// time instead makes the ordered split extreme against `partitions` random
/// halvings (split_p, two-sided (k+1)/(R+1)).  This statistic is a minimal
/// surrogate for "predicting one half from the other"; no canonical
/// procedure exists.
struct PredictabilityResult {
  double ordered_rho = 0.0;
  Eigen::ArrayXd null_rho;
  double split_p = 1.0;
  double zero_z = 0.0;
  double zero_p = 1.0;
};
PredictabilityResult second_half_predictability(const SampleRecord& sample,
                                                const ProbabilityTable& model,
                                                int partitions = 100,
                                                std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Bit drift
// ---------------------------------------------------------------------------

/// Per-bit linear regression of the fraction of ones over `group_count`
/// contiguous groups of draws.  t_stat is the least-squares slope over its
/// standard error (0 when the residual variance vanishes); p_value the
/// two-sided normal tail.
struct BitDriftRow {
  int bit = 0;
  double mean = 0.0;
  double slope = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
};
std::vector<BitDriftRow> bit_drift(const SampleRecord& sample,
                                   int group_count = 250);

// ---------------------------------------------------------------------------
// Deviation asymmetry
// ---------------------------------------------------------------------------

/// Distribution shape of the signed deviations O(x) - N q(x) over all cells:
/// third standardized moment, and a sign test restricted to deviations
/// exceeding twice the per-cell sampling sigma.  Multinomial noise makes
/// both statistics skewed even under the correct model, so p-values come
/// from a parametric bootstrap of `bootstrap` model-simulated replicates
/// (upper tail, (k+1)/(R+1)); z-scores against the bootstrap null allow
/// grading detections far beyond the bootstrap resolution.
struct AsymmetryResult {
  Eigen::ArrayXd deviations;
  double skewness = 0.0;
  std::int64_t pos_exceed = 0;
  std::int64_t neg_exceed = 0;
  double sign_ratio = 0.0;  // pos / (pos + neg), 0.5 when no exceedances
  double skew_p = 1.0;
  double sign_p = 1.0;
  double skew_z = 0.0;
  double sign_z = 0.0;
  double skew_null_mean = 0.0;
  double skew_null_sd = 0.0;
  double sign_null_mean = 0.0;
  double sign_null_sd = 0.0;
};
AsymmetryResult deviation_asymmetry(const OccurrenceCounts& counts,
                                    const ProbabilityTable& model,
                                    std::int64_t bootstrap = 200,
                                    std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// CSV emission (one block per diagnostic, for plotting)
// ---------------------------------------------------------------------------

std::string histogram_csv(const SizeBiasedHistogram& histogram);
std::string quantile_groups_csv(const std::vector<QuantileGroupRow>& rows);
std::string split_test_csv(const SplitTestResult& result);
std::string predictability_csv(const PredictabilityResult& result);
std::string bit_drift_csv(const std::vector<BitDriftRow>& rows);
/// Binned histogram of the signed deviations.
std::string asymmetry_csv(const AsymmetryResult& result, int bins = 101);

}  // namespace rcs
