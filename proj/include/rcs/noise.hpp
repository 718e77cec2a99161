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

#include <Eigen/Core>

#include "rcs/bitspace.hpp"

namespace rcs {

/// Cell-wise multiplicative perturbation law for gamma_perturb.
enum class GammaKind { kExponential, kUniform, kPoint, kLogNormal };

struct GammaSpec {
  GammaKind kind = GammaKind::kExponential;
  double a = 0.0;      // uniform lower bound
  double b = 1.0;      // uniform upper bound
  double c = 1.0;      // point mass location
  double mu = 0.0;     // lognormal log-mean
  double sigma = 1.0;  // lognormal log-sd

  static GammaSpec exponential() { return {GammaKind::kExponential, 0, 1, 1, 0, 1}; }
  static GammaSpec uniform(double a, double b) { return {GammaKind::kUniform, a, b, 1, 0, 1}; }
  static GammaSpec point(double c) { return {GammaKind::kPoint, 0, 1, c, 0, 1}; }
  static GammaSpec lognormal(double mu, double sigma) {
    return {GammaKind::kLogNormal, 0, 1, 1, mu, sigma};
  }
};

/// Families of data-generating models layered on an ideal table P:
///
///  kUniform            N(x) = 2^-n, ignoring P entirely (phi = 0).
///  kGoogle             N(x) = phi P(x) + (1 - phi) 2^-n.
///  kSymmetricReadout   N = phi_g Blur_r(P) + (1 - phi_g) 2^-n, where Blur_r
///                      flips each output bit independently at rate r and
///                      phi_g = phi / (1-r)^n, so the no-flip part of the
///                      blur contributes exactly phi P.
///  kAsymmetricReadout  same with flip rates r01 (0 read as 1) and r10,
///                      phi_g = phi / (1 - (r01+r10)/2)^n by convention.
///  kComposite          phi P + phi_ro N_ro + (1 - phi_g) N_g, where N_ro is
///                      the flipped remainder of Blur_r(P), N_g is an
///                      independent seeded Porter-Thomas table (uncorrelated
///                      noise), and an optional gamma overlay models
///                      system-level drift.
///  kGammaPerturb       gamma-perturbation of the kGoogle model: each cell
///                      is reweighted by an independent draw gamma_x ~ D and
///                      the table renormalized.
enum class NoiseKind {
  kUniform,
  kGoogle,
  kSymmetricReadout,
  kAsymmetricReadout,
  kComposite,
  kGammaPerturb,
};

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kGoogle;
  double phi = 1.0;
  double flip_rate = 0.038;  // symmetric readout rate
  double flip01 = 0.026;     // asymmetric: P(read 1 | true 0)
  double flip10 = 0.050;     // asymmetric: P(read 0 | true 1)
  GammaSpec gamma;
  std::uint64_t gamma_seed = 0;
  std::uint64_t g_seed = 0;      // seed of the uncorrelated composite table
  bool composite_gamma = false;  // enable the composite gamma overlay

  static NoiseSpec uniform() {
    NoiseSpec s;
    s.kind = NoiseKind::kUniform;
    s.phi = 0.0;
    return s;
  }
  static NoiseSpec google(double phi) {
    NoiseSpec s;
    s.kind = NoiseKind::kGoogle;
    s.phi = phi;
    return s;
  }
  static NoiseSpec gamma_perturbed(double phi, GammaSpec g, std::uint64_t seed) {
    NoiseSpec s;
    s.kind = NoiseKind::kGammaPerturb;
    s.phi = phi;
    s.gamma = g;
    s.gamma_seed = seed;
    return s;
  }
};

/// Readout bookkeeping for a symmetric per-qubit flip rate:
///   phi_g  = phi / (1 - flip_rate)^n   (no-gate-error weight)
///   phi_ro = phi_g - phi               (weight ending in >= 1 flip)
struct ReadoutCoefficients {
  double phi_ro = 0.0;
  double phi_g = 0.0;
};

ReadoutCoefficients readout_coefficients(double phi, int n, double flip_rate);

/// The gamma draw assigned to cell x; deterministic in (seed, x).
double gamma_at(const GammaSpec& spec, std::uint64_t seed, std::uint64_t x);

/// Reweights each cell by gamma_x ~ D and renormalizes to total mass 1.
ProbabilityTable gamma_perturb(const ProbabilityTable& table, const GammaSpec& spec,
                               std::uint64_t seed);

/// Convenience: phi * P + (1 - phi) * 2^-n.
ProbabilityTable google_model(const ProbabilityTable& ideal, double phi);

/// Pushes the ideal table through the readout flip kernel (product channel
/// over qubits).  Symmetric when r01 == r10.
ProbabilityTable blur_readout(const ProbabilityTable& ideal, double r01, double r10);

/// Dense model table N(x) for the given noise specification.
ProbabilityTable apply_noise(const ProbabilityTable& ideal, const NoiseSpec& spec);

/// Draws N bitstrings i.i.d. from a dense table.
SampleRecord draw_sample(const ProbabilityTable& table, std::int64_t count,
                         std::uint64_t seed);

/// Draws N bitstrings from the noise model layered over a synthetic circuit.
/// Works in O(1) memory per draw for every kind except kGammaPerturb (and
/// the composite gamma overlay), which need the dense table and therefore
/// respect the n <= 24 cap.  Signal draws from an expected-mode synthetic
/// table use rejection with an Exp(1) envelope truncated at 30 (acceptance
/// bias below 1e-13).
SampleRecord draw_sample(const SyntheticCircuit& circuit, const NoiseSpec& spec,
                         std::int64_t count, std::uint64_t seed);

/// One-line human-readable description, recorded in SampleRecord::noise.
std::string describe(const NoiseSpec& spec);

}  // namespace rcs
