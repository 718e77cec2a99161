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

#include "rcs/estimators.hpp"

#include <cmath>

#include "rcs/noise.hpp"
#include "rcs/stats.hpp"

namespace rcs {
namespace {

constexpr double kPi = 3.14159265358979323846;

void check_counts(std::int64_t c, const char* name) {
  if (c < 0) throw ConfigError(std::string(name) + ": gate count must be >= 0");
}

void check_rates(const GateRates& r) {
  for (double e : {r.e1, r.e2, r.eq}) {
    if (!(e >= 0.0 && e < 1.0)) throw ConfigError("gate rates must be in [0, 1)");
  }
}

}  // namespace

XebEstimate xeb_from_probs(const Eigen::Ref<const Eigen::ArrayXd>& values, int n) {
  const Eigen::Index count = values.size();
  if (count == 0) throw ConfigError("xeb: empty sample");
  const double scale = std::ldexp(1.0, n);
  const Eigen::ArrayXd v = scale * values - 1.0;
  XebEstimate est;
  est.count = count;
  est.value = v.mean();
  est.std_error = count > 1 ? stddev_of(v) / std::sqrt(static_cast<double>(count)) : 0.0;
  return est;
}

XebEstimate xeb(const SampleRecord& sample, const ProbabilityTable& table) {
  if (sample.n != table.n) throw ConfigError("xeb: sample/table width mismatch");
  Eigen::ArrayXd values(sample.size());
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    values[i] = table.probs[static_cast<Eigen::Index>(sample.draws[static_cast<std::size_t>(i)])];
  }
  return xeb_from_probs(values, table.n);
}

XebEstimate xeb(const SampleRecord& sample, const SyntheticCircuit& circuit) {
  if (sample.n != circuit.n()) throw ConfigError("xeb: sample/circuit width mismatch");
  Eigen::ArrayXd values(sample.size());
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    values[i] = circuit.prob(sample.draws[static_cast<std::size_t>(i)]);
  }
  return xeb_from_probs(values, circuit.n());
}

PatchXeb xeb_patch(const SampleRecord& sample,
                   const std::vector<ProbabilityTable>& patch_tables,
                   const std::vector<std::vector<int>>& patch_qubits) {
  if (patch_tables.size() != patch_qubits.size() || patch_tables.empty()) {
    throw ConfigError("xeb_patch: need one qubit list per patch table");
  }
  PatchXeb result;
  result.per_patch.reserve(patch_tables.size());
  for (std::size_t k = 0; k < patch_tables.size(); ++k) {
    const auto& qubits = patch_qubits[k];
    if (static_cast<int>(qubits.size()) != patch_tables[k].n) {
      throw ConfigError("xeb_patch: patch width mismatch");
    }
    for (int q : qubits) {
      if (q < 0 || q >= sample.n) throw ConfigError("xeb_patch: qubit index out of range");
    }
    SampleRecord sub;
    sub.n = patch_tables[k].n;
    sub.draws.resize(sample.draws.size());
    for (std::size_t i = 0; i < sample.draws.size(); ++i) {
      std::uint64_t y = 0;
      for (std::size_t j = 0; j < qubits.size(); ++j) {
        y |= ((sample.draws[i] >> qubits[j]) & 1ULL) << j;
      }
      sub.draws[i] = y;
    }
    result.per_patch.push_back(xeb(sub, patch_tables[k]));
    result.product *= result.per_patch.back().value;
  }
  return result;
}

TEstimate t_estimator(const SampleRecord& sample) {
  return t_estimator(count_occurrences(sample));
}

TEstimate t_estimator(const OccurrenceCounts& counts) {
  const double n = static_cast<double>(counts.total());
  const double m = std::ldexp(1.0, counts.n());
  if (counts.total() < 2) throw ConfigError("t_estimator: need at least 2 draws");
  if (counts.n() < 1) throw ConfigError("t_estimator: need at least 1 qubit");
  const double pairs = n * n - n;
  const double sum_sq = counts.sum_squares();
  TEstimate est;
  est.draws = counts.total();
  est.t2 = m * (m + 1.0) / (pairs * (m - 1.0)) * (sum_sq - n - pairs / m);
  est.t = std::copysign(std::sqrt(std::abs(est.t2)), est.t2);
  return est;
}

DistanceReport distances(const OccurrenceCounts& counts, const ProbabilityTable& model) {
  if (counts.n() != model.n) throw ConfigError("distances: width mismatch");
  const Eigen::ArrayXd observed = counts.to_dense();
  const double n = static_cast<double>(counts.total());
  if (!(n > 0)) throw ConfigError("distances: empty sample");
  const Eigen::ArrayXd expected = n * model.probs;
  const Eigen::ArrayXd diff = observed - expected;

  DistanceReport report;
  const Eigen::Index m = model.size();
  report.dof_upper = m - 1;
  report.dof_lower = m - 2;
  report.l1 = diff.abs().sum();
  report.l2 = std::sqrt(diff.square().sum());
  report.pearson = pearson_correlation(observed, expected);

  double chi2 = 0.0;
  double kl = 0.0;
  for (Eigen::Index x = 0; x < m; ++x) {
    if (expected[x] > 0.0) {
      chi2 += diff[x] * diff[x] / expected[x];
    } else if (observed[x] > 0.0) {
      report.kl_infinite = true;
    }
    if (observed[x] > 0.0 && model.probs[x] > 0.0) {
      const double f = observed[x] / n;
      kl += f * std::log(f / model.probs[x]);
    }
  }
  report.chi2 = chi2;
  report.kl = kl;
  return report;
}

double normalized_l2(const ProbabilityTable& a, const ProbabilityTable& b) {
  if (a.n != b.n) throw ConfigError("normalized_l2: width mismatch");
  return std::sqrt(std::ldexp(1.0, a.n)) * std::sqrt((a.probs - b.probs).square().sum());
}

double formula77(const std::vector<double>& onegate_errors,
                 const std::vector<double>& twogate_errors,
                 const std::vector<double>& readout_errors) {
  double product = 1.0;
  for (const auto* list : {&onegate_errors, &twogate_errors, &readout_errors}) {
    for (double e : *list) {
      if (!(e >= 0.0 && e < 1.0)) throw ConfigError("formula77: rates must be in [0, 1)");
      product *= 1.0 - e;
    }
  }
  return product;
}

double formula77_simplified(int n, std::int64_t onegate_count,
                            std::int64_t twogate_count, const GateRates& rates) {
  check_counts(onegate_count, "formula77_simplified");
  check_counts(twogate_count, "formula77_simplified");
  check_rates(rates);
  if (n < 0) throw ConfigError("formula77_simplified: n must be >= 0");
  return std::pow(1.0 - rates.e1, static_cast<double>(onegate_count)) *
         std::pow(1.0 - rates.e2, static_cast<double>(twogate_count)) *
         std::pow(1.0 - rates.eq, n);
}

double formula77_simplified_2g(int n, std::int64_t twogate_count, double twogate_rate,
                               double readout_rate) {
  check_counts(twogate_count, "formula77_simplified_2g");
  if (n < 0) throw ConfigError("formula77_simplified_2g: n must be >= 0");
  for (double e : {twogate_rate, readout_rate}) {
    if (!(e >= 0.0 && e < 1.0)) throw ConfigError("formula77_simplified_2g: bad rate");
  }
  return std::pow(1.0 - twogate_rate, static_cast<double>(twogate_count)) *
         std::pow(1.0 - readout_rate, n);
}

double dev_estimate(int n, std::int64_t onegate_count, std::int64_t twogate_count,
                    const GateRates& rates) {
  check_counts(onegate_count, "dev_estimate");
  check_counts(twogate_count, "dev_estimate");
  check_rates(rates);
  if (n < 0) throw ConfigError("dev_estimate: n must be >= 0");
  return 0.2 * (std::sqrt(static_cast<double>(n)) * rates.eq +
                std::sqrt(static_cast<double>(onegate_count)) * rates.e1 +
                std::sqrt(static_cast<double>(twogate_count)) * rates.e2);
}

double biased_dev_estimate(int n, std::int64_t onegate_count,
                           std::int64_t twogate_count, double t,
                           const GateRates& rates) {
  if (!(t >= 0.0 && t <= 0.5)) {
    throw ConfigError("biased_dev_estimate: t must be in [0, 0.5]");
  }
  const double dev = dev_estimate(n, onegate_count, twogate_count, rates);
  const double linear = static_cast<double>(n) * rates.eq +
                        static_cast<double>(onegate_count) * rates.e1 +
                        static_cast<double>(twogate_count) * rates.e2;
  return (1.0 - 2.0 * t) * dev + 2.0 * t * linear;
}

double calibration_effect(double theta, double phi) {
  const double dt = theta - kPi / 2.0;
  const double dp = phi - kPi / 6.0;
  return (4.0 + std::cos(2.0 * dt) + std::cos(dp) +
          2.0 * std::cos(dt) * (1.0 + std::cos(dp))) /
         10.0;
}

double calibration_effect_total(const std::vector<std::pair<double, double>>& angles) {
  double product = 1.0;
  for (const auto& [theta, phi] : angles) product *= calibration_effect(theta, phi);
  return product;
}

double fidelity_from_chi2(const OccurrenceCounts& counts, const ProbabilityTable& ideal,
                          double lo, double hi, int steps) {
  if (!(lo >= 0.0 && hi <= 1.0 && lo < hi) || steps < 2) {
    throw ConfigError("fidelity_from_chi2: bad grid");
  }
  double best_phi = lo;
  double best_chi2 = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double phi = lo + (hi - lo) * i / steps;
    const double c = distances(counts, google_model(ideal, phi)).chi2;
    if (i == 0 || c < best_chi2) {
      best_chi2 = c;
      best_phi = phi;
    }
  }
  return best_phi;
}

}  // namespace rcs
