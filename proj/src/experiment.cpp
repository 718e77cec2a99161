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

#include "rcs/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <utility>

#include "json.hpp"

#include "rcs/diagnostics.hpp"
#include "rcs/errors.hpp"
#include "rcs/estimators.hpp"
#include "rcs/rng.hpp"
#include "rcs/stats.hpp"

namespace rcs {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// --- enum spellings --------------------------------------------------------

const char* name_of(TableMode m) {
  return m == TableMode::kExact ? "exact" : "expected";
}
const char* name_of(TableSource s) {
  switch (s) {
    case TableSource::kSynthetic: return "synthetic";
    case TableSource::kCircuit: return "circuit";
    case TableSource::kFile: return "file";
  }
  return "synthetic";
}
const char* name_of(NoiseKind k) {
  switch (k) {
    case NoiseKind::kUniform: return "uniform";
    case NoiseKind::kGoogle: return "google";
    case NoiseKind::kSymmetricReadout: return "symmetric_readout";
    case NoiseKind::kAsymmetricReadout: return "asymmetric_readout";
    case NoiseKind::kComposite: return "composite";
    case NoiseKind::kGammaPerturb: return "gamma_perturb";
  }
  return "google";
}
const char* name_of(GammaKind k) {
  switch (k) {
    case GammaKind::kExponential: return "exponential";
    case GammaKind::kUniform: return "uniform";
    case GammaKind::kPoint: return "point";
    case GammaKind::kLogNormal: return "lognormal";
  }
  return "exponential";
}
const char* name_of(PatternLabel p) {
  switch (p) {
    case PatternLabel::kEFGH: return "efgh";
    case PatternLabel::kABCDCDAB: return "abcdcdab";
    case PatternLabel::kCustom: return "custom";
  }
  return "efgh";
}
const char* name_of(CircuitVariant v) {
  switch (v) {
    case CircuitVariant::kFull: return "full";
    case CircuitVariant::kPatch: return "patch";
    case CircuitVariant::kElided: return "elided";
  }
  return "full";
}
const char* name_of(OneGateSet g) {
  return g == OneGateSet::kSqrtPaulis ? "sqrt_paulis" : "haar";
}

template <typename Enum>
Enum enum_of(const std::string& text, std::initializer_list<Enum> values,
             const std::string& path) {
  for (Enum v : values) {
    if (text == name_of(v)) return v;
  }
  throw ConfigError(path + " has unknown value '" + text + "'");
}

// --- checked JSON access ----------------------------------------------------

json parse_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + " is not valid JSON: " + e.what());
  }
}

const json& object_at(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + " must be a JSON object");
  return j;
}

template <typename T>
T field_or(const json& j, const char* key, const T& fallback,
           const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + " has the wrong type");
  }
}

// --- component (de)serialization ---------------------------------------------

json couplers_to_json(const std::vector<Coupler>& couplers) {
  json arr = json::array();
  for (const Coupler& c : couplers) arr.push_back({c.a, c.b});
  return arr;
}

std::vector<Coupler> couplers_from_json(const json& arr, const std::string& path) {
  if (!arr.is_array()) throw ConfigError(path + " must be an array of [a,b] pairs");
  std::vector<Coupler> out;
  for (const json& e : arr) {
    if (!e.is_array() || e.size() != 2) {
      throw ConfigError(path + " entries must be [a,b] pairs");
    }
    out.push_back({e[0].get<int>(), e[1].get<int>()});
  }
  return out;
}

json circuit_to_json(const CircuitSpec& s) {
  json j;
  j["n"] = s.n;
  j["m"] = s.m;
  j["pattern"] = name_of(s.pattern);
  json custom = json::array();
  for (const auto& layer : s.custom_pattern) custom.push_back(couplers_to_json(layer));
  j["custom_pattern"] = custom;
  j["seed"] = s.seed;
  j["gate_set"] = name_of(s.gate_set);
  j["variant"] = name_of(s.variant);
  j["patch_block"] = s.patch_block;
  j["elided"] = couplers_to_json(s.elided);
  return j;
}

CircuitSpec circuit_from_json(const json& j, const std::string& path) {
  object_at(j, path);
  CircuitSpec s;
  s.n = field_or(j, "n", s.n, path);
  s.m = field_or(j, "m", s.m, path);
  s.pattern = enum_of(field_or<std::string>(j, "pattern", name_of(s.pattern), path),
                      {PatternLabel::kEFGH, PatternLabel::kABCDCDAB, PatternLabel::kCustom},
                      path + ".pattern");
  if (const auto it = j.find("custom_pattern"); it != j.end() && !it->empty()) {
    for (const json& layer : *it) {
      s.custom_pattern.push_back(couplers_from_json(layer, path + ".custom_pattern"));
    }
  }
  if (s.pattern == PatternLabel::kCustom && s.custom_pattern.empty()) {
    throw ConfigError(path + ".custom_pattern is required for a custom pattern");
  }
  s.seed = field_or<std::uint64_t>(j, "seed", s.seed, path);
  s.gate_set = enum_of(field_or<std::string>(j, "gate_set", name_of(s.gate_set), path),
                       {OneGateSet::kSqrtPaulis, OneGateSet::kHaar}, path + ".gate_set");
  s.variant =
      enum_of(field_or<std::string>(j, "variant", name_of(s.variant), path),
              {CircuitVariant::kFull, CircuitVariant::kPatch, CircuitVariant::kElided},
              path + ".variant");
  s.patch_block = field_or(j, "patch_block", s.patch_block, path);
  if (const auto it = j.find("elided"); it != j.end()) {
    s.elided = couplers_from_json(*it, path + ".elided");
  }
  return s;
}

json gate_params_to_json(const TwoGateParams& p) {
  json j;
  j["theta"] = p.theta;
  j["phi"] = p.phi;
  j["z_pre"] = {p.z_pre[0], p.z_pre[1]};
  j["z_post"] = {p.z_post[0], p.z_post[1]};
  return j;
}

TwoGateParams gate_params_from_json(const json& j, const std::string& path) {
  object_at(j, path);
  TwoGateParams p;
  p.theta = field_or(j, "theta", p.theta, path);
  p.phi = field_or(j, "phi", p.phi, path);
  const auto pair_of = [&](const char* key, std::array<double, 2> fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_array() || it->size() != 2) {
      throw ConfigError(path + "." + key + " must be a pair of angles");
    }
    return std::array<double, 2>{(*it)[0].get<double>(), (*it)[1].get<double>()};
  };
  p.z_pre = pair_of("z_pre", p.z_pre);
  p.z_post = pair_of("z_post", p.z_post);
  return p;
}

json gamma_to_json(const GammaSpec& g) {
  json j;
  j["kind"] = name_of(g.kind);
  j["a"] = g.a;
  j["b"] = g.b;
  j["c"] = g.c;
  j["mu"] = g.mu;
  j["sigma"] = g.sigma;
  return j;
}

GammaSpec gamma_from_json(const json& j, const std::string& path) {
  object_at(j, path);
  GammaSpec g;
  g.kind = enum_of(field_or<std::string>(j, "kind", name_of(g.kind), path),
                   {GammaKind::kExponential, GammaKind::kUniform, GammaKind::kPoint,
                    GammaKind::kLogNormal},
                   path + ".kind");
  g.a = field_or(j, "a", g.a, path);
  g.b = field_or(j, "b", g.b, path);
  g.c = field_or(j, "c", g.c, path);
  g.mu = field_or(j, "mu", g.mu, path);
  g.sigma = field_or(j, "sigma", g.sigma, path);
  return g;
}

json noise_to_json(const NoiseSpec& s) {
  json j;
  j["kind"] = name_of(s.kind);
  j["phi"] = s.phi;
  j["flip_rate"] = s.flip_rate;
  j["flip01"] = s.flip01;
  j["flip10"] = s.flip10;
  j["gamma"] = gamma_to_json(s.gamma);
  j["gamma_seed"] = s.gamma_seed;
  j["g_seed"] = s.g_seed;
  j["composite_gamma"] = s.composite_gamma;
  return j;
}

NoiseSpec noise_from_json(const json& j, const std::string& path) {
  object_at(j, path);
  NoiseSpec s;
  s.kind = enum_of(field_or<std::string>(j, "kind", name_of(s.kind), path),
                   {NoiseKind::kUniform, NoiseKind::kGoogle, NoiseKind::kSymmetricReadout,
                    NoiseKind::kAsymmetricReadout, NoiseKind::kComposite,
                    NoiseKind::kGammaPerturb},
                   path + ".kind");
  s.phi = field_or(j, "phi", s.phi, path);
  s.flip_rate = field_or(j, "flip_rate", s.flip_rate, path);
  s.flip01 = field_or(j, "flip01", s.flip01, path);
  s.flip10 = field_or(j, "flip10", s.flip10, path);
  if (const auto it = j.find("gamma"); it != j.end()) {
    s.gamma = gamma_from_json(*it, path + ".gamma");
  }
  s.gamma_seed = field_or<std::uint64_t>(j, "gamma_seed", s.gamma_seed, path);
  s.g_seed = field_or<std::uint64_t>(j, "g_seed", s.g_seed, path);
  s.composite_gamma = field_or(j, "composite_gamma", s.composite_gamma, path);
  return s;
}

json source_to_json(const SourceSpec& s) {
  json j;
  j["kind"] = name_of(s.kind);
  j["n"] = s.n;
  j["mode"] = name_of(s.mode);
  j["table_seed"] = s.table_seed;
  j["reps_per_table"] = s.reps_per_table;
  j["circuit"] = circuit_to_json(s.circuit);
  json params = json::array();
  for (const TwoGateParams& p : s.params) params.push_back(gate_params_to_json(p));
  j["params"] = params;
  j["path"] = s.path;
  return j;
}

SourceSpec source_from_json(const json& j, const std::string& path) {
  object_at(j, path);
  SourceSpec s;
  s.kind = enum_of(field_or<std::string>(j, "kind", name_of(s.kind), path),
                   {TableSource::kSynthetic, TableSource::kCircuit, TableSource::kFile},
                   path + ".kind");
  s.n = field_or(j, "n", s.n, path);
  s.mode = enum_of(field_or<std::string>(j, "mode", name_of(s.mode), path),
                   {TableMode::kExact, TableMode::kExpected}, path + ".mode");
  s.table_seed = field_or<std::uint64_t>(j, "table_seed", s.table_seed, path);
  s.reps_per_table = field_or(j, "reps_per_table", s.reps_per_table, path);
  if (const auto it = j.find("circuit"); it != j.end()) {
    s.circuit = circuit_from_json(*it, path + ".circuit");
  }
  if (const auto it = j.find("params"); it != j.end()) {
    for (const json& p : *it) {
      s.params.push_back(gate_params_from_json(p, path + ".params"));
    }
  }
  s.path = field_or(j, "path", s.path, path);
  return s;
}

json analysis_to_json(const AnalysisSpec& a) {
  json j;
  j["kind"] = a.kind;
  j["phi"] = a.phi;
  j["cells"] = a.cells;
  j["group_size"] = a.group_size;
  j["partitions"] = a.partitions;
  j["group_count"] = a.group_count;
  j["bootstrap"] = a.bootstrap;
  return j;
}

AnalysisSpec analysis_from_json(const json& j, const std::string& path) {
  object_at(j, path);
  AnalysisSpec a;
  a.kind = field_or(j, "kind", a.kind, path);
  a.phi = field_or(j, "phi", a.phi, path);
  a.cells = field_or(j, "cells", a.cells, path);
  a.group_size = field_or(j, "group_size", a.group_size, path);
  a.partitions = field_or(j, "partitions", a.partitions, path);
  a.group_count = field_or(j, "group_count", a.group_count, path);
  a.bootstrap = field_or(j, "bootstrap", a.bootstrap, path);
  return a;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["master_seed"] = c.master_seed;
  j["source"] = source_to_json(c.source);
  j["noise"] = noise_to_json(c.noise);
  j["sample_size"] = c.sample_size;
  j["repetitions"] = c.repetitions;
  json analyses = json::array();
  for (const AnalysisSpec& a : c.analyses) analyses.push_back(analysis_to_json(a));
  j["analyses"] = analyses;
  j["out_dir"] = c.out_dir;
  j["write_samples"] = c.write_samples;
  return j;
}

const std::initializer_list<const char*> kAnalysisKinds = {
    "xeb",   "t",     "distances", "ks",        "fit",
    "groups", "split", "drift",     "asymmetry", "predictability"};

void validate_config(const ExperimentConfig& c) {
  if (c.schema_version != kConfigSchemaVersion) {
    throw ConfigError("schema_version must be " + std::to_string(kConfigSchemaVersion));
  }
  if (c.sample_size < 1) throw ConfigError("sample_size must be >= 1");
  if (c.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (c.source.reps_per_table < 0) {
    throw ConfigError("source.reps_per_table must be >= 0");
  }
  if (c.source.kind == TableSource::kSynthetic &&
      (c.source.n < 1 || c.source.n > kMaxDenseQubits)) {
    throw ConfigError("source.n must lie in [1, " + std::to_string(kMaxDenseQubits) +
                      "] for a dense run");
  }
  if (c.source.kind == TableSource::kFile && c.source.path.empty()) {
    throw ConfigError("source.path is required for a file source");
  }
  if (!(c.noise.phi >= 0.0 && c.noise.phi <= 1.0)) {
    throw ConfigError("noise.phi must lie in [0, 1]");
  }
  for (std::size_t i = 0; i < c.analyses.size(); ++i) {
    const AnalysisSpec& a = c.analyses[i];
    const std::string path = "analyses[" + std::to_string(i) + "]";
    const bool known = std::any_of(kAnalysisKinds.begin(), kAnalysisKinds.end(),
                                   [&a](const char* k) { return a.kind == k; });
    if (!known) throw ConfigError(path + ".kind unknown: '" + a.kind + "'");
    if (a.phi > 1.0) throw ConfigError(path + ".phi must be <= 1");
    if (a.cells < 2) throw ConfigError(path + ".cells must be >= 2");
    if (a.group_size < 1) throw ConfigError(path + ".group_size must be >= 1");
    if (a.partitions < 1) throw ConfigError(path + ".partitions must be >= 1");
    if (a.group_count < 3) throw ConfigError(path + ".group_count must be >= 3");
    if (a.bootstrap < 1) throw ConfigError(path + ".bootstrap must be >= 1");
  }
}

// --- file helpers -----------------------------------------------------------

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RunError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RunError("cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw RunError("write failed for " + path.string());
}

// --- per-repetition work ------------------------------------------------------

using RepMetrics = std::vector<std::pair<std::string, double>>;

double effective_phi(const NoiseSpec& noise) {
  return noise.kind == NoiseKind::kUniform ? 0.0 : noise.phi;
}

ProbabilityTable base_table(const SourceSpec& s, int table_index) {
  switch (s.kind) {
    case TableSource::kSynthetic: {
      const std::uint64_t seed = s.reps_per_table > 0
                                     ? derive_seed(s.table_seed, "table", table_index)
                                     : s.table_seed;
      return generate_porter_thomas(s.n, seed, s.mode);
    }
    case TableSource::kCircuit:
      return simulate_ideal(s.circuit, s.params);
    case TableSource::kFile:
      return read_ptable(s.path);
  }
  throw ConfigError("source.kind is invalid");
}

RepMetrics run_rep(const ExperimentConfig& c, const ProbabilityTable& ideal,
                   const ProbabilityTable& model, std::uint64_t seed,
                   SampleRecord* keep_sample) {
  RepMetrics out;
  SampleRecord sample = draw_sample(model, c.sample_size, seed);
  std::optional<OccurrenceCounts> counts;
  const auto the_counts = [&]() -> const OccurrenceCounts& {
    if (!counts) counts.emplace(count_occurrences(sample));
    return *counts;
  };

  for (std::size_t i = 0; i < c.analyses.size(); ++i) {
    const AnalysisSpec& a = c.analyses[i];
    const double phi = a.phi >= 0.0 ? a.phi : effective_phi(c.noise);
    if (a.kind == "xeb") {
      const XebEstimate e = xeb(sample, ideal);
      out.emplace_back("xeb", e.value);
      out.emplace_back("xeb_se", e.std_error);
    } else if (a.kind == "t") {
      const TEstimate e = t_estimator(the_counts());
      out.emplace_back("t", e.t);
      out.emplace_back("t2", e.t2);
    } else if (a.kind == "distances") {
      const DistanceReport d = distances(the_counts(), model);
      out.emplace_back("chi2", d.chi2);
      out.emplace_back("l1", d.l1);
      out.emplace_back("l2", d.l2);
      out.emplace_back("kl", d.kl);
      out.emplace_back("kl_infinite", d.kl_infinite ? 1.0 : 0.0);
      out.emplace_back("pearson", d.pearson);
    } else if (a.kind == "ks") {
      const KsResult k = size_biased_ks(sample, ideal, phi);
      out.emplace_back("ks_stat", k.statistic);
      out.emplace_back("ks_p", k.p_value);
    } else if (a.kind == "fit") {
      HistogramSpec spec;
      spec.cell_count = a.cells;
      spec.phi = phi;
      const HistogramFit f = size_biased_fit(sample, ideal, model, spec);
      out.emplace_back("fit_chi2", f.chi2);
      out.emplace_back("fit_dof", f.dof);
      out.emplace_back("fit_p", f.p_value);
    } else if (a.kind == "groups") {
      const auto rows = quantile_group_stats(the_counts(), model, a.group_size);
      double ratio = 0.0;
      int used = 0;
      for (const QuantileGroupRow& r : rows) {
        if (r.model_stddev > 0.0) {
          ratio += r.observed_stddev / r.model_stddev;
          ++used;
        }
      }
      out.emplace_back("group_ratio", used > 0 ? ratio / used : 0.0);
    } else if (a.kind == "split") {
      const SplitTestResult s =
          stationarity_split_test(sample, a.partitions, derive_seed(seed, "split", i));
      out.emplace_back("split_l1", s.ordered_l1);
      out.emplace_back("split_p", s.p_value);
    } else if (a.kind == "drift") {
      double t_max = 0.0;
      for (const BitDriftRow& r : bit_drift(sample, a.group_count)) {
        t_max = std::max(t_max, std::abs(r.t_stat));
      }
      out.emplace_back("drift_max_t", t_max);
    } else if (a.kind == "asymmetry") {
      const AsymmetryResult r = deviation_asymmetry(the_counts(), model, a.bootstrap,
                                                    derive_seed(seed, "asymmetry", i));
      out.emplace_back("skew_z", r.skew_z);
      out.emplace_back("skew_p", r.skew_p);
      out.emplace_back("sign_z", r.sign_z);
    } else if (a.kind == "predictability") {
      const PredictabilityResult r = second_half_predictability(
          sample, model, a.partitions, derive_seed(seed, "predict", i));
      out.emplace_back("pred_rho", r.ordered_rho);
      out.emplace_back("pred_zero_z", r.zero_z);
      out.emplace_back("pred_split_p", r.split_p);
    }
  }

  if (keep_sample) *keep_sample = std::move(sample);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public JSON round-trips
// ---------------------------------------------------------------------------

std::string circuit_spec_json(const CircuitSpec& spec) {
  return circuit_to_json(spec).dump(2) + "\n";
}

CircuitSpec parse_circuit_spec(const std::string& text) {
  return circuit_from_json(parse_text(text, "circuit spec"), "circuit");
}

std::string noise_spec_json(const NoiseSpec& spec) {
  return noise_to_json(spec).dump(2) + "\n";
}

NoiseSpec parse_noise_spec(const std::string& text) {
  return noise_from_json(parse_text(text, "noise spec"), "noise");
}

std::string config_json(const ExperimentConfig& config) {
  return config_to_json(config).dump(2) + "\n";
}

ExperimentConfig parse_config(const std::string& text) {
  const json j = parse_text(text, "config");
  object_at(j, "config");
  ExperimentConfig c;
  c.schema_version = field_or(j, "schema_version", c.schema_version, "config");
  c.master_seed = field_or<std::uint64_t>(j, "master_seed", c.master_seed, "config");
  if (const auto it = j.find("source"); it != j.end()) {
    c.source = source_from_json(*it, "source");
  }
  if (const auto it = j.find("noise"); it != j.end()) {
    c.noise = noise_from_json(*it, "noise");
  }
  c.sample_size = field_or<std::int64_t>(j, "sample_size", c.sample_size, "config");
  c.repetitions = field_or(j, "repetitions", c.repetitions, "config");
  if (const auto it = j.find("analyses"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("analyses must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      c.analyses.push_back(
          analysis_from_json((*it)[i], "analyses[" + std::to_string(i) + "]"));
    }
  }
  c.out_dir = field_or(j, "out_dir", c.out_dir, "config");
  c.write_samples = field_or(j, "write_samples", c.write_samples, "config");
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config(read_text_file(path));
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = config_json(config);
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------------

ExperimentResult run_experiment(const ExperimentConfig& config, int threads,
                                const std::string& out_dir_override) {
  validate_config(config);
  const int reps = config.repetitions;

  // Distinct base tables, built serially up front and shared read-only.
  const auto table_index = [&config](int r) {
    return config.source.kind == TableSource::kSynthetic &&
                   config.source.reps_per_table > 0
               ? r / config.source.reps_per_table
               : 0;
  };
  const int distinct = table_index(reps - 1) + 1;
  std::vector<ProbabilityTable> ideals(static_cast<std::size_t>(distinct));
  std::vector<ProbabilityTable> models(static_cast<std::size_t>(distinct));
  for (int k = 0; k < distinct; ++k) {
    ideals[static_cast<std::size_t>(k)] = base_table(config.source, k);
    models[static_cast<std::size_t>(k)] =
        apply_noise(ideals[static_cast<std::size_t>(k)], config.noise);
  }

  ExperimentResult result;
  result.manifest.config_hash = config_hash(config);
  result.manifest.version = kToolkitVersion;
  result.manifest.rep_seeds.resize(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    result.manifest.rep_seeds[static_cast<std::size_t>(r)] =
        derive_seed(config.master_seed, "rep", r);
  }

  // Repetitions are independent; dispatch order does not matter because
  // results land in per-index slots and aggregation walks them in order.
  std::vector<RepMetrics> per_rep(static_cast<std::size_t>(reps));
  std::vector<SampleRecord> samples(
      config.write_samples ? static_cast<std::size_t>(reps) : 0);
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  const auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= reps) break;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error) break;
      }
      try {
        const std::size_t idx = static_cast<std::size_t>(r);
        per_rep[idx] = run_rep(config, ideals[static_cast<std::size_t>(table_index(r))],
                               models[static_cast<std::size_t>(table_index(r))],
                               result.manifest.rep_seeds[idx],
                               config.write_samples ? &samples[idx] : nullptr);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        break;
      }
    }
  };

  const int worker_count = std::clamp(threads, 1, reps);
  if (worker_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(worker_count));
    for (int t = 0; t < worker_count; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // Fixed-order aggregation: repetition 0 defines the metric layout.
  const std::size_t metric_count = per_rep[0].size();
  result.aggregates.resize(metric_count);
  for (std::size_t m = 0; m < metric_count; ++m) {
    AggregateRow& row = result.aggregates[m];
    row.metric = per_rep[0][m].first;
    row.values.resize(reps);
    for (int r = 0; r < reps; ++r) {
      row.values[r] = per_rep[static_cast<std::size_t>(r)][m].second;
    }
    row.mean = mean_of(row.values);
    row.stddev = stddev_of(row.values);
  }

  // Artifacts.  The list is fixed before writing so every file (including
  // summary.json) carries the complete inventory.
  const std::string out_dir =
      out_dir_override.empty() ? config.out_dir : out_dir_override;
  if (!out_dir.empty()) {
    result.manifest.artifacts.push_back("config.json");
    std::vector<std::string> sample_names;
    if (config.write_samples) {
      for (int r = 0; r < reps; ++r) {
        sample_names.push_back("rep_" + std::to_string(r) + "_sample.txt");
        result.manifest.artifacts.push_back(sample_names.back());
      }
    }
    result.manifest.artifacts.push_back("summary.csv");
    result.manifest.artifacts.push_back("summary.json");
    result.manifest.artifacts.push_back("manifest.json");

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw RunError("cannot create " + out_dir + ": " + ec.message());
    const fs::path dir(out_dir);
    write_text_file(dir / "config.json", config_json(config));
    for (std::size_t r = 0; r < sample_names.size(); ++r) {
      write_sample_text(samples[r], (dir / sample_names[r]).string());
    }
    write_text_file(dir / "summary.csv", aggregates_csv(result));
    write_text_file(dir / "summary.json", result_json(result));
    json manifest;
    manifest["config_hash"] = result.manifest.config_hash;
    manifest["version"] = result.manifest.version;
    manifest["rep_seeds"] = result.manifest.rep_seeds;
    manifest["artifacts"] = result.manifest.artifacts;
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
  }
  return result;
}

std::string aggregates_csv(const ExperimentResult& result) {
  std::string out = "metric,mean,stddev,reps\n";
  for (const AggregateRow& row : result.aggregates) {
    out += row.metric;
    out += ',';
    out += fmt_double(row.mean);
    out += ',';
    out += fmt_double(row.stddev);
    out += ',';
    out += std::to_string(row.values.size());
    out += '\n';
  }
  return out;
}

std::string result_json(const ExperimentResult& result) {
  json j;
  j["manifest"]["config_hash"] = result.manifest.config_hash;
  j["manifest"]["version"] = result.manifest.version;
  j["manifest"]["rep_seeds"] = result.manifest.rep_seeds;
  j["manifest"]["artifacts"] = result.manifest.artifacts;
  json rows = json::array();
  for (const AggregateRow& row : result.aggregates) {
    json r;
    r["metric"] = row.metric;
    r["mean"] = row.mean;
    r["stddev"] = row.stddev;
    r["values"] = std::vector<double>(row.values.data(),
                                      row.values.data() + row.values.size());
    rows.push_back(r);
  }
  j["aggregates"] = rows;
  return j.dump(2) + "\n";
}

ExperimentResult parse_result(const std::string& text) {
  const json j = parse_text(text, "result");
  object_at(j, "result");
  ExperimentResult result;
  if (const auto it = j.find("manifest"); it != j.end()) {
    result.manifest.config_hash =
        field_or<std::string>(*it, "config_hash", "", "manifest");
    result.manifest.version = field_or<std::string>(*it, "version", "", "manifest");
    result.manifest.rep_seeds =
        field_or(*it, "rep_seeds", result.manifest.rep_seeds, "manifest");
    result.manifest.artifacts =
        field_or(*it, "artifacts", result.manifest.artifacts, "manifest");
  }
  const auto rows = j.find("aggregates");
  if (rows == j.end() || !rows->is_array()) {
    throw ConfigError("result.aggregates must be an array");
  }
  for (const json& r : *rows) {
    AggregateRow row;
    row.metric = field_or<std::string>(r, "metric", "", "aggregates");
    row.mean = field_or(r, "mean", 0.0, "aggregates");
    row.stddev = field_or(r, "stddev", 0.0, "aggregates");
    const auto values = field_or(r, "values", std::vector<double>{}, "aggregates");
    row.values = Eigen::Map<const Eigen::ArrayXd>(values.data(),
                                                  static_cast<Eigen::Index>(values.size()));
    result.aggregates.push_back(std::move(row));
  }
  return result;
}

}  // namespace rcs
