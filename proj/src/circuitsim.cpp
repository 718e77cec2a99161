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

#include "rcs/circuitsim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <optional>

#include "rcs/errors.hpp"

namespace rcs {
namespace {

using Complex = std::complex<double>;

constexpr double kPi = std::numbers::pi;

Eigen::Matrix2cd sqrt_pauli_matrix(int kind) {
  // sqrt(P) = exp(i pi/4) (I - i P) / sqrt(2) for P in {X, Y, W},
  // W = (X + Y) / sqrt(2).
  const Complex g = std::polar(1.0 / std::sqrt(2.0), kPi / 4);
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd u;
  switch (kind) {
    case 0:  // sqrt(X)
      u << Complex(1, 0), Complex(0, -1), Complex(0, -1), Complex(1, 0);
      break;
    case 1:  // sqrt(Y)
      u << Complex(1, 0), Complex(-1, 0), Complex(1, 0), Complex(1, 0);
      break;
    default:  // sqrt(W)
      u << Complex(1, 0), Complex(-r, -r), Complex(r, -r), Complex(1, 0);
      break;
  }
  return g * u;
}

Eigen::Matrix2cd haar_su2(Prng& rng) {
  // A unit quaternion is Haar on SU(2).
  double w, x, y, z, norm;
  do {
    w = rng.next_normal();
    x = rng.next_normal();
    y = rng.next_normal();
    z = rng.next_normal();
    norm = std::sqrt(w * w + x * x + y * y + z * z);
  } while (norm < 1e-12);
  w /= norm;
  x /= norm;
  y /= norm;
  z /= norm;
  Eigen::Matrix2cd u;
  u << Complex(w, x), Complex(y, z), Complex(-y, z), Complex(w, -x);
  return u;
}

void apply_one_gate(Eigen::VectorXcd& state, int q, const Eigen::Matrix2cd& u) {
  const Eigen::Index step = Eigen::Index(1) << q;
  for (Eigen::Index base = 0; base < state.size(); base += 2 * step) {
    for (Eigen::Index i = base; i < base + step; ++i) {
      const Complex a0 = state[i];
      const Complex a1 = state[i + step];
      state[i] = u(0, 0) * a0 + u(0, 1) * a1;
      state[i + step] = u(1, 0) * a0 + u(1, 1) * a1;
    }
  }
}

void apply_two_gate(Eigen::VectorXcd& state, const Coupler& cp,
                    const TwoGateParams& p) {
  const Eigen::Index ma = Eigen::Index(1) << cp.a;
  const Eigen::Index mb = Eigen::Index(1) << cp.b;
  const Complex pre_a = std::polar(1.0, p.z_pre[0]);
  const Complex pre_b = std::polar(1.0, p.z_pre[1]);
  const Complex post_a = std::polar(1.0, p.z_post[0]);
  const Complex post_b = std::polar(1.0, p.z_post[1]);
  const double c = std::cos(p.theta);
  const Complex mis(0.0, -std::sin(p.theta));
  const Complex ph11 = pre_a * pre_b * post_a * post_b * std::polar(1.0, -p.phi);
  for (Eigen::Index x = 0; x < state.size(); ++x) {
    if ((x & ma) != 0 || (x & mb) != 0) continue;
    const Eigen::Index xa = x | ma;
    const Eigen::Index xb = x | mb;
    const Complex va = pre_a * state[xa];
    const Complex vb = pre_b * state[xb];
    state[xa] = post_a * (c * va + mis * vb);
    state[xb] = post_b * (mis * va + c * vb);
    state[xa | mb] *= ph11;
  }
}

void apply_pauli(Eigen::VectorXcd& state, int q, int pauli) {
  const Eigen::Index step = Eigen::Index(1) << q;
  const Complex iu(0.0, 1.0);
  for (Eigen::Index base = 0; base < state.size(); base += 2 * step) {
    for (Eigen::Index i = base; i < base + step; ++i) {
      const Complex a0 = state[i];
      const Complex a1 = state[i + step];
      switch (pauli) {
        case 1:  // X
          state[i] = a1;
          state[i + step] = a0;
          break;
        case 2:  // Y
          state[i] = -iu * a1;
          state[i + step] = iu * a0;
          break;
        default:  // Z
          state[i + step] = -a1;
          break;
      }
    }
  }
}

void validate_layer(const std::vector<Coupler>& layer, int n) {
  std::uint64_t used = 0;
  for (const Coupler& cp : layer) {
    if (cp.a < 0 || cp.a >= n || cp.b < 0 || cp.b >= n) {
      throw ConfigError("coupler qubit out of range");
    }
    if (cp.a == cp.b) throw ConfigError("coupler joins a qubit to itself");
    const std::uint64_t mask =
        (std::uint64_t{1} << cp.a) | (std::uint64_t{1} << cp.b);
    if ((used & mask) != 0) throw ConfigError("overlapping couplers in a layer");
    used |= mask;
  }
}

std::vector<TwoGateParams> resolve_params(const Circuit& circuit,
                                          const std::vector<TwoGateParams>& params) {
  if (params.empty()) return nominal_params(circuit);
  if (static_cast<std::int64_t>(params.size()) != circuit.g2_count()) {
    throw ConfigError("two-gate parameter list does not match gate count");
  }
  return params;
}

ProbabilityTable table_from_state(const Eigen::VectorXcd& state, int n) {
  ProbabilityTable table;
  table.n = n;
  table.probs = state.array().abs2();
  const double sum = table.probs.sum();
  if (std::abs(sum - 1.0) > 1e-9) {
    throw RunError("simulated state lost normalization");
  }
  table.probs /= sum;
  return table;
}

// Error-pattern element: the Pauli `p` applied to qubit `q` right after the
// gate at execution slot `slot`.
std::uint64_t encode_insertion(std::int64_t slot, int q, int p, int n) {
  return (static_cast<std::uint64_t>(slot) * n + static_cast<std::uint64_t>(q)) * 4 +
         static_cast<std::uint64_t>(p);
}

}  // namespace

bool TwoGateParams::is_nominal() const {
  return theta == kPi / 2 && phi == kPi / 6 && z_pre[0] == 0.0 && z_pre[1] == 0.0 &&
         z_post[0] == 0.0 && z_post[1] == 0.0;
}

std::int64_t Circuit::g1_count() const {
  std::int64_t total = 0;
  for (const auto& layer : one_gates) total += static_cast<std::int64_t>(layer.size());
  return total;
}

std::int64_t Circuit::g2_count() const {
  std::int64_t total = 0;
  for (const auto& layer : two_layers) total += static_cast<std::int64_t>(layer.size());
  return total;
}

std::pair<int, int> grid_shape(int n) {
  if (n < 1) throw ConfigError("qubit count must be positive");
  int rows = static_cast<int>(std::sqrt(static_cast<double>(n)));
  while (rows > 1 && n % rows != 0) --rows;
  return {rows, n / rows};
}

std::vector<std::vector<Coupler>> pattern_layers(PatternLabel label, int rows,
                                                 int cols) {
  if (rows < 1 || cols < 1) throw ConfigError("grid shape must be positive");
  const auto q = [cols](int r, int c) { return r * cols + c; };
  // Horizontal couplers keyed by their left column, vertical by their top row.
  const auto horizontal = [&](auto&& keep) {
    std::vector<Coupler> out;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c + 1 < cols; ++c) {
        if (keep(r, c)) out.push_back({q(r, c), q(r, c + 1)});
      }
    }
    return out;
  };
  const auto vertical = [&](auto&& keep) {
    std::vector<Coupler> out;
    for (int r = 0; r + 1 < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        if (keep(r, c)) out.push_back({q(r, c), q(r + 1, c)});
      }
    }
    return out;
  };

  switch (label) {
    case PatternLabel::kEFGH: {
      return {
          horizontal([](int, int c) { return c % 2 == 0; }),  // E
          horizontal([](int, int c) { return c % 2 == 1; }),  // F
          vertical([](int r, int) { return r % 2 == 0; }),    // G
          vertical([](int r, int) { return r % 2 == 1; }),    // H
      };
    }
    case PatternLabel::kABCDCDAB: {
      auto a = horizontal([](int r, int c) { return (r + c) % 2 == 0; });
      auto b = horizontal([](int r, int c) { return (r + c) % 2 == 1; });
      auto c = vertical([](int r, int cc) { return (r + cc) % 2 == 0; });
      auto d = vertical([](int r, int cc) { return (r + cc) % 2 == 1; });
      return {a, b, c, d, c, d, a, b};
    }
    case PatternLabel::kCustom:
      throw ConfigError("custom pattern has no built-in layers");
  }
  throw ConfigError("unknown pattern label");
}

Circuit build_circuit(const CircuitSpec& spec) {
  if (spec.n < 1) throw ConfigError("qubit count must be positive");
  if (spec.m < 1) throw ConfigError("depth must be at least 1");
  if (spec.n > 63) throw ConfigError("qubit count exceeds bit budget");

  Circuit circuit;
  circuit.n = spec.n;
  const auto [rows, cols] = grid_shape(spec.n);
  circuit.rows = rows;
  circuit.cols = cols;

  // Coupler-set period, cycled over the m 2-gate layers.
  std::vector<std::vector<Coupler>> period;
  if (spec.pattern == PatternLabel::kCustom) {
    if (spec.custom_pattern.empty()) {
      throw ConfigError("custom pattern requires at least one coupler set");
    }
    period = spec.custom_pattern;
  } else {
    period = pattern_layers(spec.pattern, rows, cols);
  }
  for (const auto& layer : period) validate_layer(layer, spec.n);

  // Variant filters.
  std::vector<char> in_block;
  if (spec.variant == CircuitVariant::kPatch) {
    std::vector<int> block = spec.patch_block;
    if (block.empty()) {
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols / 2; ++c) block.push_back(r * cols + c);
      }
    }
    in_block.assign(spec.n, 0);
    for (const int qb : block) {
      if (qb < 0 || qb >= spec.n) throw ConfigError("patch qubit out of range");
      if (in_block[qb]) throw ConfigError("duplicate patch qubit");
      in_block[qb] = 1;
    }
    const auto size = std::count(in_block.begin(), in_block.end(), char{1});
    if (size == 0 || size == spec.n) {
      throw ConfigError("patch block must be a proper subset of the qubits");
    }
  }
  if (spec.variant == CircuitVariant::kElided) {
    for (const Coupler& cp : spec.elided) {
      if (cp.a < 0 || cp.a >= spec.n || cp.b < 0 || cp.b >= spec.n) {
        throw ConfigError("elided coupler out of range");
      }
    }
  }
  const auto removed = [&](const Coupler& cp) {
    switch (spec.variant) {
      case CircuitVariant::kFull:
        return false;
      case CircuitVariant::kPatch:
        return in_block[cp.a] != in_block[cp.b];
      case CircuitVariant::kElided:
        return std::find(spec.elided.begin(), spec.elided.end(), cp) !=
               spec.elided.end();
    }
    return false;
  };

  circuit.two_layers.resize(spec.m);
  for (int l = 0; l < spec.m; ++l) {
    for (const Coupler& cp : period[l % period.size()]) {
      if (!removed(cp)) circuit.two_layers[l].push_back(cp);
    }
  }

  // Seeded 1-gates: m+1 layers.
  Prng rng(derive_seed(spec.seed, "one-gates"));
  circuit.one_kinds.assign(spec.m + 1, std::vector<int>(spec.n, 3));
  circuit.one_gates.assign(spec.m + 1,
                           std::vector<Eigen::Matrix2cd>(spec.n, Eigen::Matrix2cd::Identity()));
  std::vector<int> prev(spec.n, -1);
  const Eigen::Matrix2cd mats[3] = {sqrt_pauli_matrix(0), sqrt_pauli_matrix(1),
                                    sqrt_pauli_matrix(2)};
  for (int l = 0; l <= spec.m; ++l) {
    for (int qb = 0; qb < spec.n; ++qb) {
      if (spec.gate_set == OneGateSet::kHaar) {
        circuit.one_gates[l][qb] = haar_su2(rng);
        continue;
      }
      int kind;
      if (prev[qb] < 0) {
        kind = static_cast<int>(rng.next_below(3));
      } else {
        // Uniform over the two gates different from the previous one.
        const int r = static_cast<int>(rng.next_below(2));
        kind = (prev[qb] + 1 + r) % 3;
      }
      prev[qb] = kind;
      circuit.one_kinds[l][qb] = kind;
      circuit.one_gates[l][qb] = mats[kind];
    }
  }
  return circuit;
}

std::vector<TwoGateParams> nominal_params(const Circuit& circuit) {
  return std::vector<TwoGateParams>(static_cast<std::size_t>(circuit.g2_count()));
}

Eigen::VectorXcd simulate_state(const Circuit& circuit,
                                const std::vector<TwoGateParams>& params0) {
  if (circuit.n < 1) throw ConfigError("circuit has no qubits");
  if (circuit.n > kMaxDenseQubits) {
    throw ConfigError("statevector simulation capped at 24 qubits");
  }
  const auto params = resolve_params(circuit, params0);

  Eigen::VectorXcd state = Eigen::VectorXcd::Zero(Eigen::Index(1) << circuit.n);
  state[0] = Complex(1.0, 0.0);
  const int m = static_cast<int>(circuit.two_layers.size());
  std::size_t occurrence = 0;
  for (int l = 0; l < static_cast<int>(circuit.one_gates.size()); ++l) {
    for (int qb = 0; qb < circuit.n; ++qb) {
      apply_one_gate(state, qb, circuit.one_gates[l][qb]);
    }
    if (l < m) {
      for (const Coupler& cp : circuit.two_layers[l]) {
        apply_two_gate(state, cp, params[occurrence++]);
      }
    }
  }
  return state;
}

ProbabilityTable simulate_ideal(const Circuit& circuit,
                                const std::vector<TwoGateParams>& params) {
  return table_from_state(simulate_state(circuit, params), circuit.n);
}

ProbabilityTable simulate_ideal(const CircuitSpec& spec,
                                const std::vector<TwoGateParams>& params) {
  return simulate_ideal(build_circuit(spec), params);
}

std::vector<TwoGateParams> remove_calibration(std::vector<TwoGateParams> params,
                                              CalibrationScope scope,
                                              CalibrationComponent component,
                                              std::int64_t k) {
  const auto reset = [component](TwoGateParams& p) {
    switch (component) {
      case CalibrationComponent::kFull:
        p = TwoGateParams{};
        break;
      case CalibrationComponent::kThetaPhiOnly:
        p.theta = kPi / 2;
        p.phi = kPi / 6;
        break;
      case CalibrationComponent::kZOnly:
        p.z_pre = {0.0, 0.0};
        p.z_post = {0.0, 0.0};
        break;
    }
  };
  if (scope == CalibrationScope::kAll) {
    for (auto& p : params) reset(p);
    return params;
  }
  if (k < 0 || k >= static_cast<std::int64_t>(params.size())) {
    throw ConfigError("calibration removal index out of range");
  }
  reset(params[static_cast<std::size_t>(k)]);
  return params;
}

TrajectoryResult simulate_noisy_trajectories(const Circuit& circuit,
                                             const std::vector<TwoGateParams>& params0,
                                             const GateErrorSpec& errors,
                                             std::int64_t count, std::uint64_t seed) {
  for (const double e : {errors.e1, errors.e2, errors.eq}) {
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("error probability outside [0,1]");
  }
  if (count < 1) throw ConfigError("trajectory count must be positive");
  if (circuit.n > kMaxDenseQubits) {
    throw ConfigError("trajectory simulation capped at 24 qubits");
  }
  const auto params = resolve_params(circuit, params0);
  const int n = circuit.n;
  const int m = static_cast<int>(circuit.two_layers.size());
  const bool depol = errors.channel == ErrorChannel::kDepolarizing;

  const Eigen::VectorXcd ideal = simulate_state(circuit, params);
  const AliasSampler ideal_alias(ideal.array().abs2());

  // Pass 1: draw every trajectory's error pattern and park its stream at the
  // measurement point.  Trajectories sharing a pattern share one simulation.
  std::vector<Prng> streams;
  streams.reserve(static_cast<std::size_t>(count));
  std::vector<char> gate_event(static_cast<std::size_t>(count), 0);
  std::map<std::vector<std::uint64_t>, std::vector<std::int64_t>> groups;
  for (std::int64_t i = 0; i < count; ++i) {
    Prng rng(derive_seed(seed, "trajectory", static_cast<std::uint64_t>(i)));
    std::vector<std::uint64_t> pattern;
    bool event = false;
    std::int64_t slot = 0;
    for (int l = 0; l <= m; ++l) {
      for (int qb = 0; qb < n; ++qb, ++slot) {
        if (errors.e1 > 0 && rng.next_bernoulli(errors.e1)) {
          event = true;
          const int p = depol ? static_cast<int>(rng.next_below(4))
                              : 1 + static_cast<int>(rng.next_below(3));
          if (p != 0) pattern.push_back(encode_insertion(slot, qb, p, n));
        }
      }
      if (l == m) break;
      for (const Coupler& cp : circuit.two_layers[l]) {
        if (errors.e2 > 0 && rng.next_bernoulli(errors.e2)) {
          event = true;
          const int pp = depol ? static_cast<int>(rng.next_below(16))
                               : 1 + static_cast<int>(rng.next_below(15));
          const int pa = (pp >> 2) & 3;
          const int pb = pp & 3;
          if (pa != 0) pattern.push_back(encode_insertion(slot, cp.a, pa, n));
          if (pb != 0) pattern.push_back(encode_insertion(slot, cp.b, pb, n));
        }
        ++slot;
      }
    }
    gate_event[static_cast<std::size_t>(i)] = event ? 1 : 0;
    streams.push_back(rng);
    groups[std::move(pattern)].push_back(i);
  }

  // Pass 2: simulate each distinct pattern once, then let every trajectory
  // draw its measurement and readout flips from its own parked stream.
  TrajectoryResult result;
  result.sample.n = n;
  result.sample.seed = seed;
  result.sample.source = "trajectory";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "trajectories(e1=%g,e2=%g,eq=%g,%s)", errors.e1,
                errors.e2, errors.eq, depol ? "depolarizing" : "uniform-pauli");
  result.sample.noise = buf;
  result.sample.draws.assign(static_cast<std::size_t>(count), 0);

  std::int64_t clean = 0;
  for (const auto& [pattern, indices] : groups) {
    const AliasSampler* alias = &ideal_alias;
    std::optional<AliasSampler> local;
    if (!pattern.empty()) {
      ++result.pattern_count;
      Eigen::VectorXcd state = Eigen::VectorXcd::Zero(Eigen::Index(1) << n);
      state[0] = Complex(1.0, 0.0);
      std::size_t next = 0;
      std::int64_t slot = 0;
      std::size_t occurrence = 0;
      const auto drain = [&](std::int64_t s) {
        while (next < pattern.size() &&
               static_cast<std::int64_t>(pattern[next] >> 2) / n == s) {
          const int p = static_cast<int>(pattern[next] & 3);
          const int qb = static_cast<int>((pattern[next] >> 2) % n);
          apply_pauli(state, qb, p);
          ++next;
        }
      };
      for (int l = 0; l <= m; ++l) {
        for (int qb = 0; qb < n; ++qb, ++slot) {
          apply_one_gate(state, qb, circuit.one_gates[l][qb]);
          drain(slot);
        }
        if (l == m) break;
        for (const Coupler& cp : circuit.two_layers[l]) {
          apply_two_gate(state, cp, params[occurrence++]);
          drain(slot);
          ++slot;
        }
      }
      local.emplace(state.array().abs2());
      alias = &*local;
    }
    for (const std::int64_t i : indices) {
      Prng rng = streams[static_cast<std::size_t>(i)];
      std::uint64_t x = alias->draw(rng);
      bool flipped = false;
      for (int qb = 0; qb < n; ++qb) {
        if (errors.eq > 0 && rng.next_bernoulli(errors.eq)) {
          x ^= std::uint64_t{1} << qb;
          flipped = true;
        }
      }
      result.sample.draws[static_cast<std::size_t>(i)] = x;
      if (!flipped && !gate_event[static_cast<std::size_t>(i)]) ++clean;
    }
  }
  result.clean_count = clean;
  result.p_no_err = static_cast<double>(clean) / static_cast<double>(count);
  return result;
}

}  // namespace rcs
