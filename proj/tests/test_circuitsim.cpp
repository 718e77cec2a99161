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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "rcs/bitspace.hpp"
#include "rcs/circuitsim.hpp"
#include "rcs/errors.hpp"
#include "rcs/estimators.hpp"
#include "rcs/noise.hpp"
#include "rcs/stats.hpp"

using namespace rcs;

namespace {

CircuitSpec base_spec(int n, int m, std::uint64_t seed) {
  CircuitSpec spec;
  spec.n = n;
  spec.m = m;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("grid factorization is most-square") {
  CHECK(grid_shape(12) == std::pair<int, int>(3, 4));
  CHECK(grid_shape(10) == std::pair<int, int>(2, 5));
  CHECK(grid_shape(16) == std::pair<int, int>(4, 4));
  CHECK(grid_shape(14) == std::pair<int, int>(2, 7));
  CHECK(grid_shape(7) == std::pair<int, int>(1, 7));
  CHECK(grid_shape(1) == std::pair<int, int>(1, 1));
  CHECK_THROWS_AS(grid_shape(0), ConfigError);
}

TEST_CASE("built-in patterns have the frozen layer sizes on the 3x4 grid") {
  const auto efgh = pattern_layers(PatternLabel::kEFGH, 3, 4);
  REQUIRE(efgh.size() == 4);
  CHECK(efgh[0].size() == 6);  // E: horizontal, even column
  CHECK(efgh[1].size() == 3);  // F: horizontal, odd column
  CHECK(efgh[2].size() == 4);  // G: vertical, even row
  CHECK(efgh[3].size() == 4);  // H: vertical, odd row

  const auto abcd = pattern_layers(PatternLabel::kABCDCDAB, 3, 4);
  REQUIRE(abcd.size() == 8);
  // The eight entries reuse four sets: A B C D C D A B.
  CHECK(abcd[0].size() == 5);
  CHECK(abcd[1].size() == 4);
  CHECK(abcd[2].size() == 4);
  CHECK(abcd[3].size() == 4);
  CHECK(abcd[4] == abcd[2]);
  CHECK(abcd[5] == abcd[3]);
  CHECK(abcd[6] == abcd[0]);
  CHECK(abcd[7] == abcd[1]);
}

TEST_CASE("the reference geometry reproduces the published gate counts") {
  const Circuit c = build_circuit(base_spec(12, 14, 1));
  CHECK(c.g1_count() == 180);  // n (m+1)
  CHECK(c.g2_count() == 60);
  CHECK(c.rows == 3);
  CHECK(c.cols == 4);
}

TEST_CASE("one-gate generator draws sqrt-Paulis without consecutive repeats") {
  const Circuit c = build_circuit(base_spec(12, 14, 7));
  REQUIRE(c.one_kinds.size() == 15);
  for (std::size_t l = 0; l < c.one_kinds.size(); ++l) {
    for (int q = 0; q < 12; ++q) {
      const int k = c.one_kinds[l][q];
      CHECK(k >= 0);
      CHECK(k <= 2);
      if (l > 0) CHECK(k != c.one_kinds[l - 1][q]);
      // Unitarity of the materialized matrix.
      const Eigen::Matrix2cd u = c.one_gates[l][q];
      CHECK((u.adjoint() * u - Eigen::Matrix2cd::Identity()).norm() < 1e-12);
    }
  }
  // Determinism and seed sensitivity.
  const Circuit again = build_circuit(base_spec(12, 14, 7));
  CHECK(again.one_kinds == c.one_kinds);
  const Circuit other = build_circuit(base_spec(12, 14, 8));
  CHECK(other.one_kinds != c.one_kinds);
}

TEST_CASE("sqrt-Pauli gates square to X, Y and W") {
  const Circuit c = build_circuit(base_spec(3, 2, 0));
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd paulis[3];
  paulis[0] << 0, 1, 1, 0;                                              // X
  paulis[1] << 0, std::complex<double>(0, -1), std::complex<double>(0, 1), 0;  // Y
  paulis[2] << 0, std::complex<double>(r, -r), std::complex<double>(r, r), 0;  // W
  for (std::size_t l = 0; l < c.one_kinds.size(); ++l) {
    for (int q = 0; q < 3; ++q) {
      const Eigen::Matrix2cd u = c.one_gates[l][q];
      CHECK((u * u - paulis[c.one_kinds[l][q]]).norm() < 1e-12);
    }
  }
}

TEST_CASE("haar gate set yields unitary per-occurrence gates") {
  CircuitSpec spec = base_spec(4, 3, 5);
  spec.gate_set = OneGateSet::kHaar;
  const Circuit c = build_circuit(spec);
  for (const auto& layer : c.one_gates) {
    for (const auto& u : layer) {
      CHECK((u.adjoint() * u - Eigen::Matrix2cd::Identity()).norm() < 1e-12);
    }
  }
  CHECK(c.one_kinds[0][0] == 3);
}

TEST_CASE("spec validation rejects malformed circuits") {
  CHECK_THROWS_AS(build_circuit(base_spec(0, 14, 1)), ConfigError);
  CHECK_THROWS_AS(build_circuit(base_spec(12, 0, 1)), ConfigError);
  CircuitSpec custom = base_spec(4, 2, 1);
  custom.pattern = PatternLabel::kCustom;
  CHECK_THROWS_AS(build_circuit(custom), ConfigError);  // empty period
  custom.custom_pattern = {{{0, 1}, {1, 2}}};           // overlapping couplers
  CHECK_THROWS_AS(build_circuit(custom), ConfigError);
  custom.custom_pattern = {{{0, 0}}};
  CHECK_THROWS_AS(build_circuit(custom), ConfigError);
  custom.custom_pattern = {{{0, 7}}};
  CHECK_THROWS_AS(build_circuit(custom), ConfigError);
  custom.custom_pattern = {{{0, 1}, {2, 3}}};
  CHECK(build_circuit(custom).g2_count() == 4);
}

TEST_CASE("a circuit with zero layers leaves the all-zeros state") {
  Circuit empty;
  empty.n = 3;
  const auto table = simulate_ideal(empty);
  CHECK(table.probs[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(table.probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ideal tables are normalized for every variant") {
  for (const auto variant :
       {CircuitVariant::kFull, CircuitVariant::kPatch, CircuitVariant::kElided}) {
    CircuitSpec spec = base_spec(12, 6, 33);
    spec.variant = variant;
    if (variant == CircuitVariant::kElided) spec.elided = {{1, 2}};
    const auto table = simulate_ideal(spec);
    CHECK(std::abs(table.probs.sum() - 1.0) < 1e-9);
    CHECK((table.probs >= 0).all());
  }
}

TEST_CASE("zero-angle two-gates act as identity") {
  const Circuit c = build_circuit(base_spec(6, 4, 9));
  std::vector<TwoGateParams> off(static_cast<std::size_t>(c.g2_count()));
  for (auto& p : off) {
    p.theta = 0.0;
    p.phi = 0.0;
  }
  Circuit stripped = c;
  for (auto& layer : stripped.two_layers) layer.clear();
  const Eigen::VectorXcd with = simulate_state(c, off);
  const Eigen::VectorXcd without = simulate_state(stripped);
  CHECK((with - without).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("two-gate parameter list size is enforced") {
  const Circuit c = build_circuit(base_spec(6, 4, 9));
  std::vector<TwoGateParams> wrong(3);
  CHECK_THROWS_AS(simulate_state(c, wrong), ConfigError);
}

TEST_CASE("patch variant factorizes exactly across the cut") {
  CircuitSpec spec = base_spec(12, 14, 21);
  spec.variant = CircuitVariant::kPatch;  // default block: left two columns
  const Circuit c = build_circuit(spec);
  CHECK(c.g2_count() == 48);  // 12 F-couplers cross the cut
  const auto table = simulate_ideal(c);

  const std::vector<int> block_a = {0, 1, 4, 5, 8, 9};
  const std::vector<int> block_b = {2, 3, 6, 7, 10, 11};
  const auto pa = marginal_table(table, block_a);
  const auto pb = marginal_table(table, block_b);
  double worst = 0.0;
  for (Eigen::Index x = 0; x < table.probs.size(); ++x) {
    Eigen::Index xa = 0, xb = 0;
    for (int j = 0; j < 6; ++j) {
      xa |= ((x >> block_a[j]) & 1) << j;
      xb |= ((x >> block_b[j]) & 1) << j;
    }
    worst = std::max(worst, std::abs(table.probs[x] - pa.probs[xa] * pb.probs[xb]));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("elided variant removes exactly the listed couplers") {
  CircuitSpec spec = base_spec(12, 14, 21);
  spec.variant = CircuitVariant::kElided;
  spec.elided = {{2, 1}};  // reversed order must still match {1,2}
  const Circuit c = build_circuit(spec);
  CHECK(c.g2_count() == 56);  // the {1,2} F-coupler occurs in 4 of 14 layers
  spec.elided = {{0, 40}};
  CHECK_THROWS_AS(build_circuit(spec), ConfigError);
}

TEST_CASE("deep-circuit output fits the exponential shape") {
  const auto table = simulate_ideal(base_spec(12, 14, 20260825));
  const double m = static_cast<double>(table.probs.size());
  std::vector<double> scaled(table.probs.size());
  for (Eigen::Index i = 0; i < table.probs.size(); ++i) scaled[i] = m * table.probs[i];
  const double d = ks_statistic(scaled, [](double v) { return 1.0 - std::exp(-v); });
  CHECK(ks_pvalue(d, scaled.size()) > 0.001);
}

TEST_CASE("patch marginals also fit the exponential shape") {
  CircuitSpec spec = base_spec(12, 14, 41);
  spec.variant = CircuitVariant::kPatch;
  const auto table = simulate_ideal(spec);
  const auto pa = marginal_table(table, {0, 1, 4, 5, 8, 9});
  std::vector<double> scaled(pa.probs.size());
  for (Eigen::Index i = 0; i < pa.probs.size(); ++i) scaled[i] = 64.0 * pa.probs[i];
  const double d = ks_statistic(scaled, [](double v) { return 1.0 - std::exp(-v); });
  CHECK(ks_pvalue(d, scaled.size()) > 0.001);
}

TEST_CASE("calibration removal is scoped and idempotent at nominal") {
  const Circuit c = build_circuit(base_spec(6, 4, 2));
  auto params = nominal_params(c);
  REQUIRE(params.size() == static_cast<std::size_t>(c.g2_count()));

  // Removing everything from a nominal circuit changes nothing.
  const auto same = remove_calibration(params, CalibrationScope::kAll);
  const auto t0 = simulate_ideal(c, params);
  const auto t1 = simulate_ideal(c, same);
  CHECK((t0.probs - t1.probs).abs().maxCoeff() < 1e-15);

  // Perturb occurrence 2 in all components.
  params[2].theta += 0.3;
  params[2].phi -= 0.2;
  params[2].z_pre = {0.1, -0.4};
  params[2].z_post = {0.2, 0.05};

  const auto full = remove_calibration(params, CalibrationScope::kSingle,
                                       CalibrationComponent::kFull, 2);
  CHECK(full[2].is_nominal());
  CHECK(full[0].is_nominal());

  const auto tp = remove_calibration(params, CalibrationScope::kSingle,
                                     CalibrationComponent::kThetaPhiOnly, 2);
  CHECK(tp[2].theta == doctest::Approx(std::numbers::pi / 2));
  CHECK(tp[2].phi == doctest::Approx(std::numbers::pi / 6));
  CHECK(tp[2].z_pre[1] == doctest::Approx(-0.4));

  const auto zo = remove_calibration(params, CalibrationScope::kAll,
                                     CalibrationComponent::kZOnly);
  CHECK(zo[2].theta == doctest::Approx(std::numbers::pi / 2 + 0.3));
  CHECK(zo[2].z_pre[0] == 0.0);
  CHECK(zo[2].z_post[1] == 0.0);

  CHECK_THROWS_AS(remove_calibration(params, CalibrationScope::kSingle,
                                     CalibrationComponent::kFull, 99),
                  ConfigError);
  CHECK_THROWS_AS(remove_calibration(params, CalibrationScope::kSingle,
                                     CalibrationComponent::kFull, -1),
                  ConfigError);
}

TEST_CASE("error-free trajectories reproduce the ideal distribution") {
  const Circuit c = build_circuit(base_spec(8, 6, 3));
  GateErrorSpec quiet;
  quiet.e1 = quiet.e2 = quiet.eq = 0.0;
  const auto result = simulate_noisy_trajectories(c, {}, quiet, 100000, 10);
  CHECK(result.p_no_err == 1.0);
  CHECK(result.clean_count == 100000);
  CHECK(result.pattern_count == 0);
  const auto ideal = simulate_ideal(c);
  const auto report = distances(count_occurrences(result.sample), ideal);
  const double dof = 255.0;
  CHECK(report.chi2 > chi2_upper_quantile_wh(0.9995, dof));
  CHECK(report.chi2 < chi2_upper_quantile_wh(0.0005, dof));
}

TEST_CASE("no-error fraction matches the closed-form product") {
  const Circuit c = build_circuit(base_spec(12, 14, 4));
  REQUIRE(c.g2_count() == 60);
  GateErrorSpec errors;
  errors.e1 = 0.0;
  errors.e2 = 0.01;
  errors.eq = 0.0;
  const std::int64_t reps = 4000;
  const auto result = simulate_noisy_trajectories(c, {}, errors, reps, 11);
  const double expected = std::pow(0.99, 60);
  const double sigma = std::sqrt(expected * (1.0 - expected) / reps);
  CHECK(std::abs(result.p_no_err - expected) < 3.0 * sigma);
}

TEST_CASE("no-error fraction is monotone in every rate under common seeds") {
  const Circuit c = build_circuit(base_spec(8, 6, 5));
  GateErrorSpec low;
  low.e1 = 0.002;
  low.e2 = 0.005;
  low.eq = 0.01;
  GateErrorSpec mid = low;
  mid.e1 *= 2;
  mid.e2 *= 2;
  mid.eq *= 2;
  GateErrorSpec high = mid;
  high.e1 *= 2;
  high.e2 *= 2;
  high.eq *= 2;
  const auto a = simulate_noisy_trajectories(c, {}, low, 800, 12);
  const auto b = simulate_noisy_trajectories(c, {}, mid, 800, 12);
  const auto d = simulate_noisy_trajectories(c, {}, high, 800, 12);
  CHECK(a.p_no_err >= b.p_no_err);
  CHECK(b.p_no_err >= d.p_no_err);
}

TEST_CASE("trajectory sampling is deterministic in the seed") {
  const Circuit c = build_circuit(base_spec(6, 4, 6));
  GateErrorSpec errors;
  const auto a = simulate_noisy_trajectories(c, {}, errors, 500, 77);
  const auto b = simulate_noisy_trajectories(c, {}, errors, 500, 77);
  const auto d = simulate_noisy_trajectories(c, {}, errors, 500, 78);
  CHECK(a.sample.draws == b.sample.draws);
  CHECK(a.p_no_err == b.p_no_err);
  CHECK(a.sample.draws != d.sample.draws);

  GateErrorSpec bad;
  bad.e1 = 1.5;
  CHECK_THROWS_AS(simulate_noisy_trajectories(c, {}, bad, 10, 1), ConfigError);
  CHECK_THROWS_AS(simulate_noisy_trajectories(c, {}, errors, 0, 1), ConfigError);
}

TEST_CASE("noisy fidelity exceeds the no-error fraction") {
  // Inflated rates make the surviving-error contribution visible quickly.
  const Circuit c = build_circuit(base_spec(10, 8, 8));
  GateErrorSpec errors;
  errors.e1 = 0.004;
  errors.e2 = 0.015;
  errors.eq = 0.05;
  const std::int64_t reps = 30000;
  const auto result = simulate_noisy_trajectories(c, {}, errors, reps, 13);
  const auto ideal = simulate_ideal(c);
  const auto est = xeb(result.sample, ideal);
  const double binom_se =
      std::sqrt(result.p_no_err * (1.0 - result.p_no_err) / reps);
  const double se = std::sqrt(est.std_error * est.std_error + binom_se * binom_se);
  CHECK(est.value - result.p_no_err > 2.5 * se);
}

TEST_CASE("uniform-pauli channel never draws identity insertions") {
  const Circuit c = build_circuit(base_spec(6, 4, 14));
  GateErrorSpec errors;
  errors.channel = ErrorChannel::kUniformPauli;
  errors.e1 = 0.05;
  errors.e2 = 0.05;
  errors.eq = 0.0;
  const auto result = simulate_noisy_trajectories(c, {}, errors, 2000, 15);
  // Without identity draws and without readout flips, every errored
  // trajectory must carry at least one insertion, so the clean fraction is
  // exactly the no-event fraction and patterns exist.
  CHECK(result.pattern_count > 0);
  const double expected = std::pow(0.95, c.g1_count()) * std::pow(0.95, c.g2_count());
  const double sigma = std::sqrt(expected * (1.0 - expected) / 2000.0);
  CHECK(std::abs(result.p_no_err - expected) < 4.0 * sigma);
}

TEST_CASE("single-gate miscalibration costs the predicted fidelity factor") {
  // Perturb one occurrence, sample from the perturbed circuit, and score the
  // sample against both tables; the cross/true ratio is the fidelity drop.
  const double dtheta = 0.18;
  const double dphi = -0.12;
  const double predicted = calibration_effect(std::numbers::pi / 2 + dtheta,
                                              std::numbers::pi / 6 + dphi);
  const int reps = 5;
  Eigen::ArrayXd drops(reps);
  for (int r = 0; r < reps; ++r) {
    const Circuit c = build_circuit(base_spec(12, 8, 100 + r));
    auto params = nominal_params(c);
    const std::size_t k = params.size() / 2;
    params[k].theta += dtheta;
    params[k].phi += dphi;
    const auto true_table = simulate_ideal(c, params);
    const auto nominal_table = simulate_ideal(c);
    const auto sample = draw_sample(true_table, 30000, derive_seed(55, "drop", r));
    drops[r] = xeb(sample, nominal_table).value / xeb(sample, true_table).value;
  }
  const double mean = mean_of(drops);
  const double se = stddev_of(drops) / std::sqrt(double(reps));
  CHECK(std::abs(mean - predicted) < std::max(3.0 * se, 0.015));
  CHECK(predicted > 0.95);  // small perturbation regime
  CHECK(mean < 1.0);
}
