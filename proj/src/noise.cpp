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

#include "rcs/noise.hpp"

#include <cmath>
#include <cstdio>

#include "rcs/errors.hpp"
#include "rcs/stats.hpp"

namespace rcs {
namespace {

// Exp(1) rejection envelope for expected-mode signal draws.  P(e > 30) is
// below 1e-13, so the truncation bias is negligible against every tolerance
// used in this library.
constexpr double kExpEnvelope = 30.0;

void check_phi(double phi) {
  if (!(phi >= 0.0 && phi <= 1.0)) throw ConfigError("noise: phi must be in [0, 1]");
}

void check_rate(double r, const char* name) {
  if (!(r >= 0.0 && r < 0.5)) {
    throw ConfigError(std::string("noise: ") + name + " must be in [0, 0.5)");
  }
}

double gate_success_weight(double phi, int n, double mean_rate) {
  const double phi_g = phi / std::pow(1.0 - mean_rate, n);
  if (phi_g > 1.0 + 1e-12) {
    throw ConfigError("noise: phi / (1-r)^n exceeds 1; inconsistent readout model");
  }
  return std::min(phi_g, 1.0);
}

std::uint64_t flip_bits(std::uint64_t x, int n, double r01, double r10, Prng& rng) {
  for (int q = 0; q < n; ++q) {
    const double r = ((x >> q) & 1ULL) ? r10 : r01;
    if (r > 0.0 && rng.next_bernoulli(r)) x ^= 1ULL << q;
  }
  return x;
}

// Signal draw from an expected-mode synthetic table: uniform proposals
// accepted in proportion to their Exp(1) weight.
std::uint64_t rejection_draw(std::uint64_t table_seed, int n, Prng& rng) {
  const std::uint64_t m = 1ULL << n;
  while (true) {
    const std::uint64_t x = rng.next_below(m);
    if (rng.next_unit() * kExpEnvelope <= exp1_at(table_seed, x)) return x;
  }
}

}  // namespace

ReadoutCoefficients readout_coefficients(double phi, int n, double flip_rate) {
  check_phi(phi);
  check_rate(flip_rate, "flip_rate");
  if (n < 0) throw ConfigError("readout_coefficients: n must be >= 0");
  const double phi_g = phi / std::pow(1.0 - flip_rate, n);
  return {phi_g - phi, phi_g};
}

double gamma_at(const GammaSpec& spec, std::uint64_t seed, std::uint64_t x) {
  const std::uint64_t key = derive_seed(seed, "gamma");
  const double u = static_cast<double>((prf64(key, x) >> 11) + 1) * 0x1.0p-53;
  switch (spec.kind) {
    case GammaKind::kExponential:
      return -std::log(u);
    case GammaKind::kUniform:
      return spec.a + (spec.b - spec.a) * u;
    case GammaKind::kPoint:
      return spec.c;
    case GammaKind::kLogNormal:
      // Inverse-CDF keeps the draw a pure function of (seed, x).
      return std::exp(spec.mu + spec.sigma * normal_quantile(u));
  }
  throw ConfigError("gamma_at: unknown gamma kind");
}

namespace {

void check_gamma(const GammaSpec& spec) {
  if (spec.kind == GammaKind::kUniform && !(spec.a >= 0.0 && spec.b > spec.a)) {
    throw ConfigError("gamma: uniform bounds need 0 <= a < b");
  }
  if (spec.kind == GammaKind::kPoint && !(spec.c > 0.0)) {
    throw ConfigError("gamma: point mass must be positive");
  }
  if (spec.kind == GammaKind::kLogNormal && !(spec.sigma >= 0.0)) {
    throw ConfigError("gamma: lognormal sigma must be >= 0");
  }
}

}  // namespace

ProbabilityTable gamma_perturb(const ProbabilityTable& table, const GammaSpec& spec,
                               std::uint64_t seed) {
  check_gamma(spec);
  ProbabilityTable out;
  out.n = table.n;
  out.probs.resize(table.size());
  for (Eigen::Index x = 0; x < table.size(); ++x) {
    out.probs[x] = table.probs[x] * gamma_at(spec, seed, static_cast<std::uint64_t>(x));
  }
  const double sum = out.probs.sum();
  if (!(sum > 0.0)) throw RunError("gamma_perturb: perturbed table has zero mass");
  out.probs /= sum;
  return out;
}

ProbabilityTable google_model(const ProbabilityTable& ideal, double phi) {
  check_phi(phi);
  ProbabilityTable out;
  out.n = ideal.n;
  out.probs = phi * ideal.probs + (1.0 - phi) * std::ldexp(1.0, -ideal.n);
  return out;
}

ProbabilityTable blur_readout(const ProbabilityTable& ideal, double r01, double r10) {
  check_rate(r01, "flip01");
  check_rate(r10, "flip10");
  ProbabilityTable out;
  out.n = ideal.n;
  out.probs = ideal.probs;
  const Eigen::Index m = out.size();
  for (int q = 0; q < ideal.n; ++q) {
    const Eigen::Index stride = Eigen::Index(1) << q;
    for (Eigen::Index base = 0; base < m; base += 2 * stride) {
      for (Eigen::Index i = base; i < base + stride; ++i) {
        const double p0 = out.probs[i];
        const double p1 = out.probs[i + stride];
        out.probs[i] = (1.0 - r01) * p0 + r10 * p1;
        out.probs[i + stride] = r01 * p0 + (1.0 - r10) * p1;
      }
    }
  }
  return out;
}

ProbabilityTable apply_noise(const ProbabilityTable& ideal, const NoiseSpec& spec) {
  check_phi(spec.phi);
  const double uniform_mass = std::ldexp(1.0, -ideal.n);
  switch (spec.kind) {
    case NoiseKind::kUniform: {
      ProbabilityTable out;
      out.n = ideal.n;
      out.probs = Eigen::ArrayXd::Constant(ideal.size(), uniform_mass);
      return out;
    }
    case NoiseKind::kGoogle:
      return google_model(ideal, spec.phi);
    case NoiseKind::kSymmetricReadout: {
      const double phi_g = gate_success_weight(spec.phi, ideal.n, spec.flip_rate);
      ProbabilityTable blurred = blur_readout(ideal, spec.flip_rate, spec.flip_rate);
      blurred.probs = phi_g * blurred.probs + (1.0 - phi_g) * uniform_mass;
      return blurred;
    }
    case NoiseKind::kAsymmetricReadout: {
      const double mean_rate = 0.5 * (spec.flip01 + spec.flip10);
      const double phi_g = gate_success_weight(spec.phi, ideal.n, mean_rate);
      ProbabilityTable blurred = blur_readout(ideal, spec.flip01, spec.flip10);
      blurred.probs = phi_g * blurred.probs + (1.0 - phi_g) * uniform_mass;
      return blurred;
    }
    case NoiseKind::kComposite: {
      const double phi_g = gate_success_weight(spec.phi, ideal.n, spec.flip_rate);
      ProbabilityTable blurred = blur_readout(ideal, spec.flip_rate, spec.flip_rate);
      const ProbabilityTable junk =
          generate_porter_thomas(ideal.n, spec.g_seed, TableMode::kExact);
      blurred.probs = phi_g * blurred.probs + (1.0 - phi_g) * junk.probs;
      if (spec.composite_gamma) {
        return gamma_perturb(blurred, spec.gamma, spec.gamma_seed);
      }
      return blurred;
    }
    case NoiseKind::kGammaPerturb:
      return gamma_perturb(google_model(ideal, spec.phi), spec.gamma, spec.gamma_seed);
  }
  throw ConfigError("apply_noise: unknown noise kind");
}

SampleRecord draw_sample(const ProbabilityTable& table, std::int64_t count,
                         std::uint64_t seed) {
  if (count < 0) throw ConfigError("draw_sample: negative count");
  const AliasSampler sampler(table.probs);
  Prng rng(derive_seed(seed, "sample"));
  SampleRecord sample;
  sample.n = table.n;
  sample.seed = seed;
  sample.source = "table";
  sample.draws.resize(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    sample.draws[static_cast<std::size_t>(i)] = sampler.draw(rng);
  }
  return sample;
}

SampleRecord draw_sample(const SyntheticCircuit& circuit, const NoiseSpec& spec,
                         std::int64_t count, std::uint64_t seed) {
  if (count < 0) throw ConfigError("draw_sample: negative count");
  check_phi(spec.phi);
  const int n = circuit.n();
  const std::uint64_t m = 1ULL << n;

  // Kinds that need the dense model table fall back to the alias path.
  if (spec.kind == NoiseKind::kGammaPerturb ||
      (spec.kind == NoiseKind::kComposite && spec.composite_gamma)) {
    if (n > kMaxDenseQubits) {
      throw RunError("draw_sample: gamma perturbation needs a dense table (n <= 24)");
    }
    ProbabilityTable model = apply_noise(circuit.materialize(), spec);
    SampleRecord sample = draw_sample(model, count, seed);
    sample.source = "synthetic";
    sample.noise = describe(spec);
    return sample;
  }

  const bool exact = circuit.mode() == TableMode::kExact;
  // In exact mode signal draws go through an alias sampler over the
  // realized table; expected mode uses O(1) rejection point queries.
  const AliasSampler* signal_alias = nullptr;
  AliasSampler alias_storage = exact ? AliasSampler(circuit.materialize().probs)
                                     : AliasSampler(Eigen::ArrayXd::Ones(1));
  if (exact) signal_alias = &alias_storage;
  auto draw_signal = [&](std::uint64_t table_seed, Prng& rng) {
    if (exact && table_seed == circuit.seed()) return signal_alias->draw(rng);
    return rejection_draw(table_seed, n, rng);
  };

  Prng rng(derive_seed(seed, "sample"));
  SampleRecord sample;
  sample.n = n;
  sample.seed = seed;
  sample.source = "synthetic";
  sample.noise = describe(spec);
  sample.draws.resize(static_cast<std::size_t>(count));

  for (std::int64_t i = 0; i < count; ++i) {
    std::uint64_t x = 0;
    switch (spec.kind) {
      case NoiseKind::kUniform:
        x = rng.next_below(m);
        break;
      case NoiseKind::kGoogle:
        x = rng.next_bernoulli(spec.phi) ? draw_signal(circuit.seed(), rng)
                                         : rng.next_below(m);
        break;
      case NoiseKind::kSymmetricReadout:
      case NoiseKind::kAsymmetricReadout: {
        const bool symmetric = spec.kind == NoiseKind::kSymmetricReadout;
        const double r01 = symmetric ? spec.flip_rate : spec.flip01;
        const double r10 = symmetric ? spec.flip_rate : spec.flip10;
        const double phi_g = gate_success_weight(spec.phi, n, 0.5 * (r01 + r10));
        if (rng.next_bernoulli(phi_g)) {
          x = flip_bits(draw_signal(circuit.seed(), rng), n, r01, r10, rng);
        } else {
          x = rng.next_below(m);
        }
        break;
      }
      case NoiseKind::kComposite: {
        const double phi_g = gate_success_weight(spec.phi, n, spec.flip_rate);
        if (rng.next_bernoulli(phi_g)) {
          x = flip_bits(draw_signal(circuit.seed(), rng), n, spec.flip_rate,
                        spec.flip_rate, rng);
        } else {
          x = rejection_draw(spec.g_seed, n, rng);
        }
        break;
      }
      case NoiseKind::kGammaPerturb:
        break;  // handled above
    }
    sample.draws[static_cast<std::size_t>(i)] = x;
  }
  return sample;
}

std::string describe(const NoiseSpec& spec) {
  char buf[160];
  switch (spec.kind) {
    case NoiseKind::kUniform:
      return "uniform";
    case NoiseKind::kGoogle:
      std::snprintf(buf, sizeof(buf), "google(phi=%g)", spec.phi);
      return buf;
    case NoiseKind::kSymmetricReadout:
      std::snprintf(buf, sizeof(buf), "symmetric_readout(phi=%g,r=%g)", spec.phi,
                    spec.flip_rate);
      return buf;
    case NoiseKind::kAsymmetricReadout:
      std::snprintf(buf, sizeof(buf), "asymmetric_readout(phi=%g,r01=%g,r10=%g)",
                    spec.phi, spec.flip01, spec.flip10);
      return buf;
    case NoiseKind::kComposite:
      std::snprintf(buf, sizeof(buf), "composite(phi=%g,r=%g,g_seed=%llu%s)", spec.phi,
                    spec.flip_rate, static_cast<unsigned long long>(spec.g_seed),
                    spec.composite_gamma ? ",gamma" : "");
      return buf;
    case NoiseKind::kGammaPerturb: {
      const char* kind = "exponential";
      char params[64] = "";
      switch (spec.gamma.kind) {
        case GammaKind::kExponential:
          break;
        case GammaKind::kUniform:
          kind = "uniform";
          std::snprintf(params, sizeof(params), "[%g,%g]", spec.gamma.a, spec.gamma.b);
          break;
        case GammaKind::kPoint:
          kind = "point";
          std::snprintf(params, sizeof(params), "[%g]", spec.gamma.c);
          break;
        case GammaKind::kLogNormal:
          kind = "lognormal";
          std::snprintf(params, sizeof(params), "[%g,%g]", spec.gamma.mu,
                        spec.gamma.sigma);
          break;
      }
      std::snprintf(buf, sizeof(buf), "gamma_perturb(%s%s,phi=%g,seed=%llu)", kind,
                    params, spec.phi, static_cast<unsigned long long>(spec.gamma_seed));
      return buf;
    }
  }
  return "unknown";
}

}  // namespace rcs
