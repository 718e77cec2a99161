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
#include <vector>

#include <Eigen/Core>

#include "rcs/bitspace.hpp"
#include "rcs/circuitsim.hpp"
#include "rcs/noise.hpp"

namespace rcs {

inline constexpr const char* kToolkitVersion = "1.0.0";
inline constexpr int kConfigSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Where the ideal (scored) distribution comes from.
enum class TableSource { kSynthetic, kCircuit, kFile };

struct SourceSpec {
  TableSource kind = TableSource::kSynthetic;
  // kSynthetic
  int n = 12;
  TableMode mode = TableMode::kExact;
  std::uint64_t table_seed = 0;
  /// > 0: rotate to a fresh synthetic table every `reps_per_table`
  /// repetitions (table k seeded by derive_seed(table_seed, "table", k)).
  /// 0: one table for the whole run.
  int reps_per_table = 0;
  // kCircuit
  CircuitSpec circuit;
  /// Per-occurrence 2-gate parameter overrides; empty = nominal.
  std::vector<TwoGateParams> params;
  // kFile
  std::string path;
};

/// One requested per-repetition analysis.  `kind` is one of: xeb, t,
/// distances, ks, fit, groups, split, drift, asymmetry, predictability.
/// phi < 0 selects the noise model's phi for the scoring mixture.
struct AnalysisSpec {
  std::string kind = "xeb";
  double phi = -1.0;
  int cells = 200;        // fit histogram cells
  int group_size = 128;   // quantile groups
  int partitions = 100;   // split / predictability null partitions
  int group_count = 250;  // drift regression groups
  int bootstrap = 200;    // asymmetry bootstrap replicates
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::uint64_t master_seed = 0;
  SourceSpec source;
  NoiseSpec noise;
  std::int64_t sample_size = 1000;
  int repetitions = 1;
  std::vector<AnalysisSpec> analyses;
  std::string out_dir;          // empty: no files written
  bool write_samples = false;   // also emit per-repetition sample files
};

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct AggregateRow {
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;     // sample stddev across repetitions
  Eigen::ArrayXd values;   // per-repetition values, repetition order
};

struct RunManifest {
  std::string config_hash;  // FNV-1a of the canonical config JSON
  std::string version;
  std::vector<std::uint64_t> rep_seeds;
  /// Files written, as names relative to the output directory, in write
  /// order.  Empty when no output directory was configured.
  std::vector<std::string> artifacts;
};

struct ExperimentResult {
  RunManifest manifest;
  std::vector<AggregateRow> aggregates;
};

// ---------------------------------------------------------------------------
// JSON round-trips
// ---------------------------------------------------------------------------

std::string circuit_spec_json(const CircuitSpec& spec);
CircuitSpec parse_circuit_spec(const std::string& text);

std::string noise_spec_json(const NoiseSpec& spec);
NoiseSpec parse_noise_spec(const std::string& text);

/// Canonical (sorted-key, round-trip precision) dump; hashing input.
std::string config_json(const ExperimentConfig& config);
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// 64-bit FNV-1a of config_json, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------------

/// Runs every repetition (squeezing them onto `threads` workers), aggregates
/// per-metric mean/stddev in repetition order, and, when an output directory
/// is set (config.out_dir, overridden by `out_dir_override`), writes
/// config.json, summary.csv, summary.json, manifest.json and optional
/// per-repetition samples.  Identical config and seed give byte-identical
/// outputs for any thread count.
ExperimentResult run_experiment(const ExperimentConfig& config, int threads = 1,
                                const std::string& out_dir_override = "");

/// "metric,mean,stddev,reps" rows, full round-trip decimals.
std::string aggregates_csv(const ExperimentResult& result);
/// Manifest plus aggregates (including per-repetition values).
std::string result_json(const ExperimentResult& result);
/// Inverse of result_json, for report post-processing.
ExperimentResult parse_result(const std::string& text);

}  // namespace rcs
