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

#include "rcs/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "rcs/errors.hpp"
#include "rcs/noise.hpp"
#include "rcs/rng.hpp"
#include "rcs/stats.hpp"

namespace rcs {
namespace {

void validate_spec(const HistogramSpec& spec) {
  if (spec.cell_count < 2) throw ConfigError("histogram needs at least 2 cells");
  if (!(spec.x_max > 0.0)) throw ConfigError("histogram range must be positive");
  if (!(spec.phi >= 0.0 && spec.phi <= 1.0)) {
    throw ConfigError("overlay phi must lie in [0,1]");
  }
}

template <typename ProbFn>
SizeBiasedHistogram build_histogram(const SampleRecord& sample, ProbFn&& prob,
                                    const HistogramSpec& spec) {
  validate_spec(spec);
  const int cells = spec.cell_count;
  const double width = spec.x_max / cells;
  const double scale = std::ldexp(1.0, sample.n);

  SizeBiasedHistogram h;
  h.bin_left.resize(cells);
  h.bin_right.resize(cells);
  h.counts = Eigen::ArrayXd::Zero(cells);
  h.overlay_density.resize(cells);
  for (int i = 0; i < cells; ++i) {
    h.bin_left[i] = i * width;
    h.bin_right[i] = (i + 1) * width;
    h.overlay_density[i] = size_biased_density((i + 0.5) * width, spec.phi);
  }
  for (const std::uint64_t x : sample.draws) {
    const double v = scale * prob(x);
    const int cell = std::min(cells - 1, static_cast<int>(v / width));
    h.counts[cell] += 1.0;
  }
  h.total = static_cast<std::int64_t>(sample.draws.size());
  return h;
}

double empirical_l1(const SampleRecord& a, const SampleRecord& b) {
  const OccurrenceCounts ca = count_occurrences(a);
  const OccurrenceCounts cb = count_occurrences(b);
  const double na = static_cast<double>(a.draws.size());
  const double nb = static_cast<double>(b.draws.size());
  double l1 = 0.0;
  ca.for_each_nonzero([&](std::uint64_t x, std::int64_t k) {
    l1 += std::abs(static_cast<double>(k) / na -
                   static_cast<double>(cb.count(x)) / nb);
  });
  cb.for_each_nonzero([&](std::uint64_t x, std::int64_t k) {
    if (ca.count(x) == 0) l1 += static_cast<double>(k) / nb;
  });
  return l1;
}

/// Average ranks (1-based, ties share the mean rank).
Eigen::ArrayXd average_ranks(const Eigen::ArrayXd& values) {
  const Eigen::Index m = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&values](Eigen::Index a, Eigen::Index b) {
    return values[a] < values[b];
  });
  Eigen::ArrayXd ranks(m);
  Eigen::Index i = 0;
  while (i < m) {
    Eigen::Index j = i;
    while (j + 1 < m && values[order[static_cast<std::size_t>(j + 1)]] ==
                            values[order[static_cast<std::size_t>(i)]]) {
      ++j;
    }
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) {
      ranks[order[static_cast<std::size_t>(k)]] = shared;
    }
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
  return pearson_correlation(average_ranks(a), average_ranks(b));
}

/// Per-cell deviations O(x) - N_half q(x) of a half-sample.
Eigen::ArrayXd half_deviations(const SampleRecord& half,
                               const ProbabilityTable& model) {
  const Eigen::ArrayXd observed = count_occurrences(half).to_dense();
  return observed - static_cast<double>(half.draws.size()) * model.probs;
}

struct AsymmetryStats {
  double skewness = 0.0;
  std::int64_t pos = 0;
  std::int64_t neg = 0;
  double ratio = 0.5;
};

AsymmetryStats asymmetry_stats(const Eigen::ArrayXd& observed,
                               const Eigen::ArrayXd& expected,
                               const Eigen::ArrayXd& sigma) {
  AsymmetryStats s;
  const Eigen::ArrayXd dev = observed - expected;
  s.skewness = skewness_of(dev);
  for (Eigen::Index x = 0; x < dev.size(); ++x) {
    if (sigma[x] <= 0.0) continue;
    if (dev[x] > 2.0 * sigma[x]) ++s.pos;
    if (dev[x] < -2.0 * sigma[x]) ++s.neg;
  }
  s.ratio = (s.pos + s.neg) == 0
                ? 0.5
                : static_cast<double>(s.pos) / static_cast<double>(s.pos + s.neg);
  return s;
}

void append_row(std::string& out, const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  out += buf;
}

}  // namespace

double size_biased_density(double v, double phi) {
  return std::exp(-v) * (phi * v + (1.0 - phi));
}

SizeBiasedHistogram size_biased_histogram(const SampleRecord& sample,
                                          const ProbabilityTable& scored,
                                          const HistogramSpec& spec) {
  if (sample.n != scored.n) throw ConfigError("sample and table qubit counts differ");
  return build_histogram(
      sample, [&scored](std::uint64_t x) { return scored.probs[static_cast<Eigen::Index>(x)]; },
      spec);
}

SizeBiasedHistogram size_biased_histogram(const SampleRecord& sample,
                                          const SyntheticCircuit& scored,
                                          const HistogramSpec& spec) {
  if (sample.n != scored.n()) throw ConfigError("sample and table qubit counts differ");
  return build_histogram(sample, [&scored](std::uint64_t x) { return scored.prob(x); },
                         spec);
}

KsResult size_biased_ks(const SampleRecord& sample, const ProbabilityTable& scored,
                        double phi, std::int64_t max_draws) {
  if (sample.n != scored.n) throw ConfigError("sample and table qubit counts differ");
  if (sample.draws.empty()) throw ConfigError("empty sample");
  const std::int64_t n_draws = static_cast<std::int64_t>(sample.draws.size());
  const std::int64_t m = std::int64_t{1} << scored.n;
  std::int64_t cap = max_draws > 0 ? max_draws : std::max<std::int64_t>(256, m / 8);
  cap = std::min(cap, n_draws);

  const double scale = static_cast<double>(m);
  std::vector<double> values(static_cast<std::size_t>(cap));
  for (std::int64_t j = 0; j < cap; ++j) {
    const std::uint64_t x = sample.draws[static_cast<std::size_t>(j * n_draws / cap)];
    values[static_cast<std::size_t>(j)] =
        scale * scored.probs[static_cast<Eigen::Index>(x)];
  }
  KsResult result;
  result.used = cap;
  result.statistic = ks_statistic(
      values, [phi](double v) { return size_biased_mixture_cdf(v, phi); });
  result.p_value = ks_pvalue(result.statistic, cap);
  return result;
}

HistogramFit size_biased_fit(const SampleRecord& sample,
                             const ProbabilityTable& scored,
                             const ProbabilityTable& model,
                             const HistogramSpec& spec) {
  validate_spec(spec);
  if (sample.n != scored.n || sample.n != model.n) {
    throw ConfigError("sample, scored and model qubit counts must agree");
  }
  const int cells = spec.cell_count;
  const double width = spec.x_max / cells;
  const double scale = std::ldexp(1.0, sample.n);
  const auto cell_of = [&](double v) {
    return std::min(cells - 1, static_cast<int>(v / width));
  };

  Eigen::ArrayXd expected = Eigen::ArrayXd::Zero(cells);
  for (Eigen::Index x = 0; x < model.probs.size(); ++x) {
    expected[cell_of(scale * scored.probs[x])] += model.probs[x];
  }
  expected *= static_cast<double>(sample.draws.size());
  Eigen::ArrayXd observed = Eigen::ArrayXd::Zero(cells);
  for (const std::uint64_t x : sample.draws) {
    observed[cell_of(scale * scored.probs[static_cast<Eigen::Index>(x)])] += 1.0;
  }

  // Merge cells left-to-right until each carries an expected count of 10,
  // folding any underfull remainder into the final merged cell.
  HistogramFit fit;
  double obs_acc = 0.0;
  double exp_acc = 0.0;
  double chi2 = 0.0;
  std::int64_t merged = 0;
  double last_obs = 0.0, last_exp = 0.0;
  for (int i = 0; i < cells; ++i) {
    obs_acc += observed[i];
    exp_acc += expected[i];
    if (exp_acc >= 10.0) {
      chi2 += (obs_acc - exp_acc) * (obs_acc - exp_acc) / exp_acc;
      last_obs = obs_acc;
      last_exp = exp_acc;
      obs_acc = exp_acc = 0.0;
      ++merged;
    }
  }
  if (exp_acc > 0.0 && merged > 0) {
    // Undo the final cell and refold it with the remainder.
    chi2 -= (last_obs - last_exp) * (last_obs - last_exp) / last_exp;
    const double o = last_obs + obs_acc;
    const double e = last_exp + exp_acc;
    chi2 += (o - e) * (o - e) / e;
  } else if (merged == 0) {
    throw ConfigError("model mass too small for a histogram fit");
  }
  fit.chi2 = chi2;
  fit.dof = static_cast<double>(merged - 1);
  fit.p_value = fit.dof > 0 ? chi2_sf_wh(fit.chi2, fit.dof) : 1.0;
  return fit;
}

std::vector<QuantileGroupRow> quantile_group_stats(const OccurrenceCounts& counts,
                                                   const ProbabilityTable& model,
                                                   int group_size) {
  if (counts.n() != model.n) throw ConfigError("counts and model qubit counts differ");
  const Eigen::Index m = model.probs.size();
  if (group_size < 1 || group_size > m) {
    throw ConfigError("group size must lie in [1, 2^n]");
  }
  const double n_draws = static_cast<double>(counts.total());

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&model](Eigen::Index a, Eigen::Index b) {
    if (model.probs[a] != model.probs[b]) return model.probs[a] > model.probs[b];
    return a < b;
  });

  std::vector<QuantileGroupRow> rows;
  for (Eigen::Index start = 0; start < m; start += group_size) {
    const Eigen::Index end = std::min<Eigen::Index>(start + group_size, m);
    QuantileGroupRow row;
    row.group = static_cast<std::int64_t>(rows.size());
    row.size = static_cast<std::int64_t>(end - start);
    double sq_dev = 0.0;
    double sq_model = 0.0;
    for (Eigen::Index i = start; i < end; ++i) {
      const double q = model.probs[order[static_cast<std::size_t>(i)]];
      const double o = static_cast<double>(
          counts.count(static_cast<std::uint64_t>(order[static_cast<std::size_t>(i)])));
      row.mean_prob += q;
      row.expected_total += n_draws * q;
      row.observed_mean += o;
      sq_dev += (o - n_draws * q) * (o - n_draws * q);
      sq_model += n_draws * q * (1.0 - q);
    }
    const double size = static_cast<double>(row.size);
    row.mean_prob /= size;
    row.observed_mean /= size;
    row.observed_stddev = std::sqrt(sq_dev / size);
    row.model_stddev = std::sqrt(std::max(0.0, sq_model / size));
    rows.push_back(row);
  }
  return rows;
}

SplitTestResult stationarity_split_test(const SampleRecord& sample, int partitions,
                                        std::uint64_t seed) {
  if (sample.draws.size() < 2) throw ConfigError("split test needs at least 2 draws");
  if (partitions < 1) throw ConfigError("need at least one random partition");

  SplitTestResult result;
  const auto ordered = split_half(sample, SplitKind::kOrdered);
  result.ordered_l1 = empirical_l1(ordered.first, ordered.second);
  result.null_l1.resize(partitions);
  std::int64_t exceed = 0;
  for (int r = 0; r < partitions; ++r) {
    const auto random = split_half(sample, SplitKind::kRandom,
                                   derive_seed(seed, "partition", r));
    result.null_l1[r] = empirical_l1(random.first, random.second);
    if (result.null_l1[r] >= result.ordered_l1) ++exceed;
  }
  result.p_value = static_cast<double>(exceed + 1) / (partitions + 1.0);
  return result;
}

PredictabilityResult second_half_predictability(const SampleRecord& sample,
                                                const ProbabilityTable& model,
                                                int partitions,
                                                std::uint64_t seed) {
  if (sample.n != model.n) throw ConfigError("sample and model qubit counts differ");
  if (sample.draws.size() < 4) throw ConfigError("predictability needs at least 4 draws");
  if (partitions < 1) throw ConfigError("need at least one random partition");

  const auto rho_of = [&model](const std::pair<SampleRecord, SampleRecord>& halves) {
    return spearman_rho(half_deviations(halves.first, model),
                        half_deviations(halves.second, model));
  };

  PredictabilityResult result;
  result.ordered_rho = rho_of(split_half(sample, SplitKind::kOrdered));
  result.null_rho.resize(partitions);
  std::int64_t above = 0;
  std::int64_t below = 0;
  for (int r = 0; r < partitions; ++r) {
    result.null_rho[r] =
        rho_of(split_half(sample, SplitKind::kRandom, derive_seed(seed, "predict", r)));
    if (result.null_rho[r] >= result.ordered_rho) ++above;
    if (result.null_rho[r] <= result.ordered_rho) ++below;
  }
  const double p_hi = static_cast<double>(above + 1) / (partitions + 1.0);
  const double p_lo = static_cast<double>(below + 1) / (partitions + 1.0);
  result.split_p = std::min(1.0, 2.0 * std::min(p_hi, p_lo));

  const double m = static_cast<double>(model.probs.size());
  result.zero_z = result.ordered_rho * std::sqrt(m - 1.0);
  result.zero_p = 2.0 * normal_cdf(-std::abs(result.zero_z));
  return result;
}

std::vector<BitDriftRow> bit_drift(const SampleRecord& sample, int group_count) {
  const std::int64_t n_draws = static_cast<std::int64_t>(sample.draws.size());
  if (group_count < 3) throw ConfigError("drift regression needs at least 3 groups");
  if (group_count > n_draws) throw ConfigError("more groups than draws");

  // Group means per bit.
  Eigen::ArrayXXd means = Eigen::ArrayXXd::Zero(group_count, sample.n);
  for (int g = 0; g < group_count; ++g) {
    const std::int64_t begin = static_cast<std::int64_t>(g) * n_draws / group_count;
    const std::int64_t end =
        static_cast<std::int64_t>(g + 1) * n_draws / group_count;
    for (std::int64_t i = begin; i < end; ++i) {
      const std::uint64_t x = sample.draws[static_cast<std::size_t>(i)];
      for (int b = 0; b < sample.n; ++b) {
        means(g, b) += static_cast<double>((x >> b) & 1);
      }
    }
    means.row(g) /= static_cast<double>(end - begin);
  }

  const double gc = static_cast<double>(group_count);
  const double x_mean = (gc - 1.0) / 2.0;
  double sxx = 0.0;
  for (int g = 0; g < group_count; ++g) sxx += (g - x_mean) * (g - x_mean);

  std::vector<BitDriftRow> rows(static_cast<std::size_t>(sample.n));
  for (int b = 0; b < sample.n; ++b) {
    BitDriftRow& row = rows[static_cast<std::size_t>(b)];
    row.bit = b;
    const Eigen::ArrayXd y = means.col(b);
    row.mean = y.mean();
    double sxy = 0.0;
    for (int g = 0; g < group_count; ++g) sxy += (g - x_mean) * (y[g] - row.mean);
    row.slope = sxy / sxx;
    double ss_res = 0.0;
    for (int g = 0; g < group_count; ++g) {
      const double fit = row.mean + row.slope * (g - x_mean);
      ss_res += (y[g] - fit) * (y[g] - fit);
    }
    const double var_res = ss_res / (gc - 2.0);
    if (var_res > 0.0) {
      row.t_stat = row.slope / std::sqrt(var_res / sxx);
      row.p_value = 2.0 * normal_cdf(-std::abs(row.t_stat));
    } else {
      row.t_stat = 0.0;
      row.p_value = row.slope == 0.0 ? 1.0 : 0.0;
    }
  }
  return rows;
}

AsymmetryResult deviation_asymmetry(const OccurrenceCounts& counts,
                                    const ProbabilityTable& model,
                                    std::int64_t bootstrap, std::uint64_t seed) {
  if (counts.n() != model.n) throw ConfigError("counts and model qubit counts differ");
  if (model.n > kMaxDenseQubits) throw ConfigError("asymmetry needs a dense model");
  if (bootstrap < 1) throw ConfigError("need at least one bootstrap replicate");
  const double n_draws = static_cast<double>(counts.total());

  const Eigen::ArrayXd expected = n_draws * model.probs;
  const Eigen::ArrayXd sigma =
      (n_draws * model.probs * (1.0 - model.probs)).max(0.0).sqrt();
  const Eigen::ArrayXd observed = counts.to_dense();

  AsymmetryResult result;
  const AsymmetryStats obs = asymmetry_stats(observed, expected, sigma);
  result.deviations = observed - expected;
  result.skewness = obs.skewness;
  result.pos_exceed = obs.pos;
  result.neg_exceed = obs.neg;
  result.sign_ratio = obs.ratio;

  // Parametric bootstrap under the model.
  const AliasSampler alias(model.probs);
  Eigen::ArrayXd null_skew(bootstrap);
  Eigen::ArrayXd null_ratio(bootstrap);
  std::int64_t skew_ge = 0;
  std::int64_t ratio_ge = 0;
  Eigen::ArrayXd replicate(model.probs.size());
  for (std::int64_t r = 0; r < bootstrap; ++r) {
    Prng rng(derive_seed(seed, "asym-boot", static_cast<std::uint64_t>(r)));
    replicate.setZero();
    for (std::int64_t i = 0; i < counts.total(); ++i) {
      replicate[static_cast<Eigen::Index>(alias.draw(rng))] += 1.0;
    }
    const AsymmetryStats s = asymmetry_stats(replicate, expected, sigma);
    null_skew[r] = s.skewness;
    null_ratio[r] = s.ratio;
    if (s.skewness >= obs.skewness) ++skew_ge;
    if (s.ratio >= obs.ratio) ++ratio_ge;
  }
  result.skew_p = static_cast<double>(skew_ge + 1) / (bootstrap + 1.0);
  result.sign_p = static_cast<double>(ratio_ge + 1) / (bootstrap + 1.0);
  result.skew_null_mean = mean_of(null_skew);
  result.skew_null_sd = stddev_of(null_skew);
  result.sign_null_mean = mean_of(null_ratio);
  result.sign_null_sd = stddev_of(null_ratio);
  result.skew_z = result.skew_null_sd > 0
                      ? (result.skewness - result.skew_null_mean) / result.skew_null_sd
                      : 0.0;
  result.sign_z = result.sign_null_sd > 0
                      ? (result.sign_ratio - result.sign_null_mean) / result.sign_null_sd
                      : 0.0;
  return result;
}

std::string histogram_csv(const SizeBiasedHistogram& histogram) {
  std::string out = "bin_left,bin_right,count,overlay_density\n";
  for (Eigen::Index i = 0; i < histogram.counts.size(); ++i) {
    append_row(out, "%.17g,%.17g,%lld,%.17g\n", histogram.bin_left[i],
               histogram.bin_right[i],
               static_cast<long long>(histogram.counts[i]),
               histogram.overlay_density[i]);
  }
  return out;
}

std::string quantile_groups_csv(const std::vector<QuantileGroupRow>& rows) {
  std::string out =
      "group,size,mean_prob,expected_total,observed_mean,observed_stddev,"
      "model_stddev\n";
  for (const QuantileGroupRow& r : rows) {
    append_row(out, "%lld,%lld,%.17g,%.17g,%.17g,%.17g,%.17g\n",
               static_cast<long long>(r.group), static_cast<long long>(r.size),
               r.mean_prob, r.expected_total, r.observed_mean, r.observed_stddev,
               r.model_stddev);
  }
  return out;
}

std::string split_test_csv(const SplitTestResult& result) {
  std::string out = "kind,l1\n";
  append_row(out, "ordered,%.17g\n", result.ordered_l1);
  for (Eigen::Index i = 0; i < result.null_l1.size(); ++i) {
    append_row(out, "null,%.17g\n", result.null_l1[i]);
  }
  return out;
}

std::string predictability_csv(const PredictabilityResult& result) {
  std::string out = "kind,rho\n";
  append_row(out, "ordered,%.17g\n", result.ordered_rho);
  for (Eigen::Index i = 0; i < result.null_rho.size(); ++i) {
    append_row(out, "null,%.17g\n", result.null_rho[i]);
  }
  return out;
}

std::string bit_drift_csv(const std::vector<BitDriftRow>& rows) {
  std::string out = "bit,mean,slope,t_stat,p_value\n";
  for (const BitDriftRow& r : rows) {
    append_row(out, "%d,%.17g,%.17g,%.17g,%.17g\n", r.bit, r.mean, r.slope,
               r.t_stat, r.p_value);
  }
  return out;
}

std::string asymmetry_csv(const AsymmetryResult& result, int bins) {
  if (bins < 3) throw ConfigError("need at least 3 deviation bins");
  const double radius =
      std::max(result.deviations.abs().maxCoeff(), 1e-12);
  const double width = 2.0 * radius / bins;
  Eigen::ArrayXd counts = Eigen::ArrayXd::Zero(bins);
  for (Eigen::Index i = 0; i < result.deviations.size(); ++i) {
    const int cell = std::min(
        bins - 1, static_cast<int>((result.deviations[i] + radius) / width));
    counts[std::max(0, cell)] += 1.0;
  }
  std::string out = "bin_left,bin_right,count\n";
  for (int i = 0; i < bins; ++i) {
    append_row(out, "%.17g,%.17g,%lld\n", -radius + i * width,
               -radius + (i + 1) * width, static_cast<long long>(counts[i]));
  }
  return out;
}

}  // namespace rcs
