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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rcs/bitspace.hpp"
#include "rcs/circuitsim.hpp"
#include "rcs/diagnostics.hpp"
#include "rcs/errors.hpp"
#include "rcs/estimators.hpp"
#include "rcs/experiment.hpp"
#include "rcs/noise.hpp"
#include "rcs/rng.hpp"
#include "rcs/stats.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rcs;

struct GlobalOpts {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir;
  std::string format = "json";
};

void print_summary(const json& j, const std::string& format) {
  if (format == "csv") {
    std::string out = "key,value\n";
    for (const auto& [key, value] : j.items()) {
      out += key;
      out += ',';
      out += value.is_string() ? value.get<std::string>() : value.dump();
      out += '\n';
    }
    std::fputs(out.c_str(), stdout);
  } else {
    std::fputs((j.dump(2) + "\n").c_str(), stdout);
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RunError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RunError("cannot write " + path);
  out << content;
  out.flush();
  if (!out) throw RunError("write failed for " + path);
}

std::string sniff_head(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RunError("cannot open " + path);
  char head[16] = {};
  in.read(head, sizeof(head));
  return std::string(head, static_cast<std::size_t>(in.gcount()));
}

/// Self-describing formats when the header is present, the headerless
/// adapters otherwise.
ProbabilityTable load_table_any(const std::string& path) {
  const std::string head = sniff_head(path);
  if (head.rfind("ptable v", 0) == 0 || head.rfind("PTB1", 0) == 0) {
    return read_ptable(path);
  }
  return read_ptable_plain(path);
}

SampleRecord load_sample_any(const std::string& path) {
  const std::string head = sniff_head(path);
  if (head.rfind("sample v", 0) == 0) return read_sample(path);
  return read_sample_plain(path);
}

TableMode mode_of(const std::string& text) {
  if (text == "exact") return TableMode::kExact;
  if (text == "expected") return TableMode::kExpected;
  throw ConfigError("unknown table mode '" + text + "'");
}

PatternLabel pattern_of(const std::string& text) {
  if (text == "efgh") return PatternLabel::kEFGH;
  if (text == "abcdcdab") return PatternLabel::kABCDCDAB;
  throw ConfigError("unknown pattern '" + text + "' (efgh|abcdcdab)");
}

CircuitVariant variant_of(const std::string& text) {
  if (text == "full") return CircuitVariant::kFull;
  if (text == "patch") return CircuitVariant::kPatch;
  if (text == "elided") return CircuitVariant::kElided;
  throw ConfigError("unknown variant '" + text + "'");
}

OneGateSet gate_set_of(const std::string& text) {
  if (text == "sqrt_paulis") return OneGateSet::kSqrtPaulis;
  if (text == "haar") return OneGateSet::kHaar;
  throw ConfigError("unknown gate set '" + text + "'");
}

/// Shared noise-model options for sampling commands.
struct NoiseOpts {
  std::string kind = "google";
  double phi = 1.0;
  double flip_rate = 0.038;
  double flip01 = 0.026;
  double flip10 = 0.050;
  std::string gamma_kind = "exponential";
  double gamma_a = 0.0;
  double gamma_b = 1.0;
  double gamma_c = 1.0;
  double gamma_mu = 0.0;
  double gamma_sigma = 1.0;
  std::uint64_t gamma_seed = 0;
  std::uint64_t g_seed = 0;
  bool composite_gamma = false;
};

void add_noise_options(CLI::App* cmd, NoiseOpts& o) {
  cmd->add_option("--noise", o.kind,
                  "uniform|google|symmetric_readout|asymmetric_readout|composite|"
                  "gamma_perturb");
  cmd->add_option("--phi", o.phi, "signal fidelity phi in [0,1]");
  cmd->add_option("--flip-rate", o.flip_rate, "symmetric readout flip rate");
  cmd->add_option("--flip01", o.flip01, "P(read 1 | true 0)");
  cmd->add_option("--flip10", o.flip10, "P(read 0 | true 1)");
  cmd->add_option("--gamma-kind", o.gamma_kind, "exponential|uniform|point|lognormal");
  cmd->add_option("--gamma-a", o.gamma_a, "uniform lower bound");
  cmd->add_option("--gamma-b", o.gamma_b, "uniform upper bound");
  cmd->add_option("--gamma-c", o.gamma_c, "point mass location");
  cmd->add_option("--gamma-mu", o.gamma_mu, "lognormal log-mean");
  cmd->add_option("--gamma-sigma", o.gamma_sigma, "lognormal log-sd");
  cmd->add_option("--gamma-seed", o.gamma_seed, "cell-weight seed");
  cmd->add_option("--g-seed", o.g_seed, "composite uncorrelated-table seed");
  cmd->add_flag("--composite-gamma", o.composite_gamma, "composite gamma overlay");
}

NoiseSpec noise_of(const NoiseOpts& o) {
  NoiseSpec s;
  if (o.kind == "uniform") {
    s.kind = NoiseKind::kUniform;
    s.phi = 0.0;
  } else if (o.kind == "google") {
    s.kind = NoiseKind::kGoogle;
  } else if (o.kind == "symmetric_readout") {
    s.kind = NoiseKind::kSymmetricReadout;
  } else if (o.kind == "asymmetric_readout") {
    s.kind = NoiseKind::kAsymmetricReadout;
  } else if (o.kind == "composite") {
    s.kind = NoiseKind::kComposite;
  } else if (o.kind == "gamma_perturb") {
    s.kind = NoiseKind::kGammaPerturb;
  } else {
    throw ConfigError("unknown noise kind '" + o.kind + "'");
  }
  if (s.kind != NoiseKind::kUniform) s.phi = o.phi;
  s.flip_rate = o.flip_rate;
  s.flip01 = o.flip01;
  s.flip10 = o.flip10;
  GammaSpec g;
  if (o.gamma_kind == "exponential") {
    g = GammaSpec::exponential();
  } else if (o.gamma_kind == "uniform") {
    g = GammaSpec::uniform(o.gamma_a, o.gamma_b);
  } else if (o.gamma_kind == "point") {
    g = GammaSpec::point(o.gamma_c);
  } else if (o.gamma_kind == "lognormal") {
    g = GammaSpec::lognormal(o.gamma_mu, o.gamma_sigma);
  } else {
    throw ConfigError("unknown gamma kind '" + o.gamma_kind + "'");
  }
  s.gamma = g;
  s.gamma_seed = o.gamma_seed;
  s.g_seed = o.g_seed;
  s.composite_gamma = o.composite_gamma;
  return s;
}

std::vector<Coupler> pairs_of(const std::vector<int>& flat) {
  if (flat.size() % 2 != 0) {
    throw ConfigError("--elide expects an even number of qubit indices");
  }
  std::vector<Coupler> out;
  for (std::size_t i = 0; i < flat.size(); i += 2) {
    out.push_back({flat[i], flat[i + 1]});
  }
  return out;
}

void write_plain_sample(const SampleRecord& sample, const std::string& path) {
  std::string out;
  out.reserve(sample.draws.size() * (static_cast<std::size_t>(sample.n) + 1));
  for (const std::uint64_t x : sample.draws) {
    out += BitString{x, sample.n}.str();
    out += '\n';
  }
  write_text_file(path, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "rcsbench: simulation and statistical analysis of random circuit "
      "sampling experiments"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "master seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads for batch runs")
      ->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "directory for emitted files");
  app.add_option("--format", g.format, "stdout format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  // --- gen-pt ---------------------------------------------------------------
  auto* gen = app.add_subcommand("gen-pt", "Generate a seeded Porter-Thomas table");
  int gp_n = 12;
  std::uint64_t gp_seed = 0;
  std::string gp_mode = "exact", gp_out;
  bool gp_binary = false;
  gen->add_option("--n", gp_n, "qubit count")->required();
  auto* gp_seed_opt = gen->add_option("--table-seed", gp_seed, "table seed");
  gen->add_option("--mode", gp_mode, "exact|expected");
  gen->add_option("--out", gp_out, "output table path")->required();
  gen->add_flag("--binary", gp_binary, "write the binary format");
  gen->callback([&]() {
    if (gp_seed_opt->count() == 0) gp_seed = g.seed;
    const ProbabilityTable table = generate_porter_thomas(gp_n, gp_seed, mode_of(gp_mode));
    if (gp_binary) {
      write_ptable_binary(table, gp_out);
    } else {
      write_ptable_text(table, gp_out);
    }
    print_summary({{"n", gp_n},
                   {"table_seed", gp_seed},
                   {"mode", gp_mode},
                   {"mass", table.probs.sum()},
                   {"path", gp_out}},
                  g.format);
  });

  // --- simulate ---------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate",
                                 "Build a random circuit and compute its exact "
                                 "output distribution");
  CircuitSpec sim_spec;
  std::string sim_pattern = "efgh", sim_variant = "full", sim_gates = "sqrt_paulis";
  std::vector<int> sim_patch, sim_elide;
  std::string sim_out, sim_circuit_out;
  bool sim_binary = false;
  sim->add_option("--n", sim_spec.n, "qubit count")->required();
  sim->add_option("--m", sim_spec.m, "number of 2-gate layers")->required();
  sim->add_option("--pattern", sim_pattern, "efgh|abcdcdab");
  sim->add_option("--gate-set", sim_gates, "sqrt_paulis|haar");
  sim->add_option("--variant", sim_variant, "full|patch|elided");
  sim->add_option("--patch-block", sim_patch, "first patch's qubits");
  sim->add_option("--elide", sim_elide, "flattened a b pairs of elided couplers");
  auto* sim_seed_opt = sim->add_option("--circuit-seed", sim_spec.seed, "1-gate seed");
  sim->add_option("--out", sim_out, "output table path")->required();
  sim->add_option("--circuit-out", sim_circuit_out, "also write the circuit spec JSON");
  sim->add_flag("--binary", sim_binary, "write the binary table format");
  sim->callback([&]() {
    if (sim_seed_opt->count() == 0) sim_spec.seed = g.seed;
    sim_spec.pattern = pattern_of(sim_pattern);
    sim_spec.gate_set = gate_set_of(sim_gates);
    sim_spec.variant = variant_of(sim_variant);
    sim_spec.patch_block = sim_patch;
    sim_spec.elided = pairs_of(sim_elide);
    const Circuit circuit = build_circuit(sim_spec);
    const ProbabilityTable table = simulate_ideal(circuit);
    if (sim_binary) {
      write_ptable_binary(table, sim_out);
    } else {
      write_ptable_text(table, sim_out);
    }
    if (!sim_circuit_out.empty()) {
      write_text_file(sim_circuit_out, circuit_spec_json(sim_spec));
    }
    print_summary({{"n", circuit.n},
                   {"m", sim_spec.m},
                   {"rows", circuit.rows},
                   {"cols", circuit.cols},
                   {"g1", circuit.g1_count()},
                   {"g2", circuit.g2_count()},
                   {"mass", table.probs.sum()},
                   {"path", sim_out}},
                  g.format);
  });

  // --- sample ---------------------------------------------------------------
  auto* smp = app.add_subcommand("sample", "Draw bitstrings from a noise model");
  std::string smp_table;
  int smp_syn_n = 0;
  std::uint64_t smp_table_seed = 0;
  std::string smp_mode = "exact", smp_out;
  std::int64_t smp_draws = 0;
  bool smp_plain = false;
  NoiseOpts smp_noise;
  smp->add_option("--table", smp_table, "scored table file");
  smp->add_option("--synthetic-n", smp_syn_n, "synthetic table qubit count");
  smp->add_option("--table-seed", smp_table_seed, "synthetic table seed");
  smp->add_option("--mode", smp_mode, "synthetic mode: exact|expected");
  add_noise_options(smp, smp_noise);
  smp->add_option("--draws", smp_draws, "number of bitstrings")->required();
  smp->add_option("--out", smp_out, "output sample path")->required();
  smp->add_flag("--plain", smp_plain, "write headerless bitstrings");
  smp->callback([&]() {
    const NoiseSpec spec = noise_of(smp_noise);
    SampleRecord sample;
    if (!smp_table.empty()) {
      const ProbabilityTable table = load_table_any(smp_table);
      sample = draw_sample(apply_noise(table, spec), smp_draws, g.seed);
      sample.source = smp_table;
      sample.noise = describe(spec);
    } else if (smp_syn_n > 0) {
      const SyntheticCircuit circuit(smp_table_seed, smp_syn_n, mode_of(smp_mode));
      sample = draw_sample(circuit, spec, smp_draws, g.seed);
    } else {
      throw ConfigError("give either --table or --synthetic-n");
    }
    if (smp_plain) {
      write_plain_sample(sample, smp_out);
    } else {
      write_sample_text(sample, smp_out);
    }
    print_summary({{"n", sample.n},
                   {"draws", static_cast<std::int64_t>(sample.draws.size())},
                   {"seed", g.seed},
                   {"noise", describe(spec)},
                   {"path", smp_out}},
                  g.format);
  });

  // --- analyze ---------------------------------------------------------------
  auto* ana = app.add_subcommand("analyze", "Fidelity estimators for a sample");
  std::string ana_sample, ana_table, ana_kinds = "xeb,t";
  int ana_syn_n = 0;
  std::uint64_t ana_table_seed = 0;
  std::string ana_mode = "exact";
  double ana_phi = -1.0;
  ana->add_option("--sample", ana_sample, "sample file")->required();
  ana->add_option("--table", ana_table, "scored table file");
  ana->add_option("--synthetic-n", ana_syn_n, "synthetic table qubit count");
  ana->add_option("--table-seed", ana_table_seed, "synthetic table seed");
  ana->add_option("--mode", ana_mode, "synthetic mode: exact|expected");
  ana->add_option("--phi", ana_phi,
                  "model phi for distance comparisons (< 0: score the raw table)");
  ana->add_option("--estimators", ana_kinds, "comma list: xeb,t,distances");
  ana->callback([&]() {
    const SampleRecord sample = load_sample_any(ana_sample);
    json out;
    out["n"] = sample.n;
    out["draws"] = static_cast<std::int64_t>(sample.draws.size());
    std::stringstream kinds(ana_kinds);
    std::string kind;
    while (std::getline(kinds, kind, ',')) {
      if (kind == "xeb") {
        XebEstimate e;
        if (!ana_table.empty()) {
          e = xeb(sample, load_table_any(ana_table));
        } else if (ana_syn_n > 0) {
          e = xeb(sample, SyntheticCircuit(ana_table_seed, ana_syn_n, mode_of(ana_mode)));
        } else {
          throw ConfigError("xeb needs --table or --synthetic-n");
        }
        out["xeb"] = e.value;
        out["xeb_se"] = e.std_error;
      } else if (kind == "t") {
        const TEstimate e = t_estimator(sample);
        out["t"] = e.t;
        out["t2"] = e.t2;
      } else if (kind == "distances") {
        if (ana_table.empty()) throw ConfigError("distances needs --table");
        const ProbabilityTable table = load_table_any(ana_table);
        const ProbabilityTable model =
            ana_phi >= 0.0 ? apply_noise(table, NoiseSpec::google(ana_phi)) : table;
        const DistanceReport d = distances(count_occurrences(sample), model);
        out["chi2"] = d.chi2;
        out["l1"] = d.l1;
        out["l2"] = d.l2;
        out["kl"] = d.kl;
        out["kl_infinite"] = d.kl_infinite;
        out["pearson"] = d.pearson;
      } else if (!kind.empty()) {
        throw ConfigError("unknown estimator '" + kind + "'");
      }
    }
    print_summary(out, g.format);
  });

  // --- diagnose ---------------------------------------------------------------
  auto* dia = app.add_subcommand("diagnose",
                                 "Distribution-shape and stationarity checks "
                                 "with CSV blocks for plotting");
  std::string dia_sample, dia_table;
  double dia_phi = 1.0;
  std::string dia_checks = "histogram,ks,fit,groups,split,drift,asymmetry,predictability";
  int dia_cells = 200, dia_group_size = 128, dia_partitions = 100;
  int dia_drift_groups = 250, dia_asym_bins = 101;
  std::int64_t dia_bootstrap = 200;
  double dia_x_max = 8.0;
  dia->add_option("--sample", dia_sample, "sample file")->required();
  dia->add_option("--table", dia_table, "ideal table file")->required();
  dia->add_option("--phi", dia_phi, "model phi of the scored mixture");
  dia->add_option("--checks", dia_checks, "comma list of checks");
  dia->add_option("--cells", dia_cells, "histogram cells");
  dia->add_option("--x-max", dia_x_max, "histogram range in units of 2^n P");
  dia->add_option("--group-size", dia_group_size, "quantile group size");
  dia->add_option("--partitions", dia_partitions, "random halvings");
  dia->add_option("--drift-groups", dia_drift_groups, "drift regression groups");
  dia->add_option("--bootstrap", dia_bootstrap, "asymmetry bootstrap replicates");
  dia->add_option("--asym-bins", dia_asym_bins, "deviation histogram bins");
  dia->callback([&]() {
    const SampleRecord sample = load_sample_any(dia_sample);
    const ProbabilityTable table = load_table_any(dia_table);
    const ProbabilityTable model = apply_noise(table, NoiseSpec::google(dia_phi));
    const OccurrenceCounts counts = count_occurrences(sample);
    const std::string dir = g.out_dir.empty() ? "." : g.out_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw RunError("cannot create " + dir + ": " + ec.message());
    const std::string stem = (fs::path(dir) / fs::path(dia_sample).stem()).string();

    json out;
    out["n"] = sample.n;
    out["draws"] = static_cast<std::int64_t>(sample.draws.size());
    json files = json::array();
    const auto emit = [&files](const std::string& path, const std::string& content) {
      write_text_file(path, content);
      files.push_back(path);
    };

    std::stringstream checks(dia_checks);
    std::string check;
    while (std::getline(checks, check, ',')) {
      if (check == "histogram") {
        HistogramSpec spec;
        spec.cell_count = dia_cells;
        spec.x_max = dia_x_max;
        spec.phi = dia_phi;
        emit(stem + "_histogram.csv", histogram_csv(size_biased_histogram(sample, table, spec)));
      } else if (check == "ks") {
        const KsResult k = size_biased_ks(sample, table, dia_phi);
        out["ks_stat"] = k.statistic;
        out["ks_p"] = k.p_value;
        out["ks_used"] = k.used;
      } else if (check == "fit") {
        HistogramSpec spec;
        spec.cell_count = dia_cells;
        spec.x_max = dia_x_max;
        spec.phi = dia_phi;
        const HistogramFit f = size_biased_fit(sample, table, model, spec);
        out["fit_chi2"] = f.chi2;
        out["fit_dof"] = f.dof;
        out["fit_p"] = f.p_value;
      } else if (check == "groups") {
        emit(stem + "_quantile_groups.csv",
             quantile_groups_csv(quantile_group_stats(counts, model, dia_group_size)));
      } else if (check == "split") {
        const SplitTestResult s = stationarity_split_test(
            sample, dia_partitions, derive_seed(g.seed, "split", 0));
        out["split_l1"] = s.ordered_l1;
        out["split_p"] = s.p_value;
        emit(stem + "_split.csv", split_test_csv(s));
      } else if (check == "drift") {
        const auto rows = bit_drift(sample, dia_drift_groups);
        double t_max = 0.0;
        for (const BitDriftRow& r : rows) t_max = std::max(t_max, std::abs(r.t_stat));
        out["drift_max_t"] = t_max;
        emit(stem + "_drift.csv", bit_drift_csv(rows));
      } else if (check == "asymmetry") {
        const AsymmetryResult r =
            deviation_asymmetry(counts, model, dia_bootstrap, derive_seed(g.seed, "asymmetry", 0));
        out["skewness"] = r.skewness;
        out["skew_z"] = r.skew_z;
        out["skew_p"] = r.skew_p;
        out["sign_z"] = r.sign_z;
        out["sign_p"] = r.sign_p;
        emit(stem + "_asymmetry.csv", asymmetry_csv(r, dia_asym_bins));
      } else if (check == "predictability") {
        const PredictabilityResult r = second_half_predictability(
            sample, model, dia_partitions, derive_seed(g.seed, "predict", 0));
        out["pred_rho"] = r.ordered_rho;
        out["pred_zero_z"] = r.zero_z;
        out["pred_zero_p"] = r.zero_p;
        out["pred_split_p"] = r.split_p;
        emit(stem + "_predictability.csv", predictability_csv(r));
      } else if (!check.empty()) {
        throw ConfigError("unknown check '" + check + "'");
      }
    }
    out["files"] = files;
    print_summary(out, g.format);
  });

  // --- predict ---------------------------------------------------------------
  auto* prd = app.add_subcommand("predict",
                                 "A priori fidelity prediction from gate counts");
  int prd_n = 0, prd_m = 0;
  std::string prd_pattern = "efgh";
  double prd_e1 = kProductFormulaRates.e1, prd_e2 = kProductFormulaRates.e2,
         prd_eq = kProductFormulaRates.eq;
  prd->add_option("--n", prd_n, "qubit count")->required();
  prd->add_option("--m", prd_m, "number of 2-gate layers")->required();
  prd->add_option("--pattern", prd_pattern, "efgh|abcdcdab");
  prd->add_option("--e1", prd_e1, "single-qubit gate error");
  prd->add_option("--e2", prd_e2, "two-qubit gate error");
  prd->add_option("--eq", prd_eq, "per-qubit readout error");
  prd->callback([&]() {
    CircuitSpec spec;
    spec.n = prd_n;
    spec.m = prd_m;
    spec.pattern = pattern_of(prd_pattern);
    const Circuit circuit = build_circuit(spec);
    const std::int64_t g1 = circuit.g1_count();
    const std::int64_t g2 = circuit.g2_count();
    const double f = formula77_simplified(prd_n, g1, g2, {prd_e1, prd_e2, prd_eq});
    const double f2g = formula77_simplified_2g(prd_n, g2);
    const double dev = dev_estimate(prd_n, g1, g2);
    print_summary({{"n", prd_n},
                   {"m", prd_m},
                   {"g1", g1},
                   {"g2", g2},
                   {"fidelity", f},
                   {"fidelity_2g", f2g},
                   {"dev", dev},
                   {"lower", f - dev},
                   {"upper", f + dev}},
                  g.format);
  });

  // --- calib-experiment --------------------------------------------------------
  auto* cal = app.add_subcommand("calib-experiment",
                                 "Measure the fidelity drop from perturbing one "
                                 "2-gate's calibration against the prediction");
  int cal_n = 10, cal_m = 8;
  std::int64_t cal_occurrence = 0, cal_draws = 20000;
  int cal_reps = 6;
  std::uint64_t cal_circuit_seed = 3;
  double cal_dtheta = 0.0, cal_dphi = 0.0;
  cal->add_option("--n", cal_n, "qubit count");
  cal->add_option("--m", cal_m, "number of 2-gate layers");
  cal->add_option("--occurrence", cal_occurrence, "which 2-gate occurrence");
  cal->add_option("--dtheta", cal_dtheta, "swap-angle offset from pi/2");
  cal->add_option("--dphi", cal_dphi, "phase offset from pi/6");
  cal->add_option("--draws", cal_draws, "draws per repetition");
  cal->add_option("--reps", cal_reps, "measurement repetitions");
  cal->add_option("--circuit-seed", cal_circuit_seed, "1-gate seed");
  cal->callback([&]() {
    CircuitSpec spec;
    spec.n = cal_n;
    spec.m = cal_m;
    spec.seed = cal_circuit_seed;
    const Circuit circuit = build_circuit(spec);
    std::vector<TwoGateParams> params = nominal_params(circuit);
    if (cal_occurrence < 0 || cal_occurrence >= static_cast<std::int64_t>(params.size())) {
      throw ConfigError("--occurrence out of range");
    }
    TwoGateParams& gate = params[static_cast<std::size_t>(cal_occurrence)];
    gate.theta += cal_dtheta;
    gate.phi += cal_dphi;
    const double psi = calibration_effect(gate.theta, gate.phi);
    const ProbabilityTable nominal = simulate_ideal(circuit);
    const ProbabilityTable adjusted = simulate_ideal(circuit, params);
    // Samples come from the adjusted circuit; the cross/self XEB ratio is the
    // fidelity retained when the adjustment is dropped, with the finite-table
    // wobble cancelling between numerator and denominator.
    Eigen::ArrayXd drops(cal_reps);
    for (int r = 0; r < cal_reps; ++r) {
      const SampleRecord sample =
          draw_sample(adjusted, cal_draws, derive_seed(g.seed, "calib", r));
      drops[r] = xeb(sample, nominal).value / xeb(sample, adjusted).value;
    }
    const double mean = mean_of(drops);
    const double se = stddev_of(drops) / std::sqrt(static_cast<double>(cal_reps));
    print_summary({{"theta", gate.theta},
                   {"phi", gate.phi},
                   {"psi", psi},
                   {"measured_drop", mean},
                   {"measured_se", se},
                   {"z", se > 0.0 ? (mean - psi) / se : 0.0},
                   {"reps", cal_reps},
                   {"draws", cal_draws}},
                  g.format);
  });

  // --- run ---------------------------------------------------------------
  auto* run = app.add_subcommand("run", "Config-driven batch experiment");
  std::string run_config;
  run->add_option("--config", run_config, "experiment config JSON")->required();
  run->callback([&]() {
    const ExperimentConfig config = load_config(run_config);
    const ExperimentResult result = run_experiment(config, g.threads, g.out_dir);
    if (g.format == "csv") {
      std::fputs(aggregates_csv(result).c_str(), stdout);
    } else {
      std::fputs(result_json(result).c_str(), stdout);
    }
  });

  // --- report ---------------------------------------------------------------
  auto* rep = app.add_subcommand("report",
                                 "Re-emit a summary JSON as CSV/JSON for plotting");
  std::string rep_input;
  rep->add_option("--input", rep_input, "summary.json from a run")->required();
  rep->callback([&]() {
    const ExperimentResult result = parse_result(read_text_file(rep_input));
    if (g.format == "csv") {
      std::fputs(aggregates_csv(result).c_str(), stdout);
    } else {
      std::fputs(result_json(result).c_str(), stdout);
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const rcs::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const rcs::RunError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
