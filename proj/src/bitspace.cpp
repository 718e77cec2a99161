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

#include "rcs/bitspace.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

namespace rcs {
namespace {

void check_qubit_count(int n, int cap, const char* what) {
  if (n < 1) throw ConfigError(std::string(what) + ": qubit count must be >= 1");
  if (n > cap) {
    throw RunError(std::string(what) + ": dense request for n=" + std::to_string(n) +
                   " exceeds the n=" + std::to_string(cap) + " memory cap");
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string BitString::str() const {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int q = 0; q < n; ++q) {
    if (bit(q)) s[static_cast<std::size_t>(n - 1 - q)] = '1';
  }
  return s;
}

BitString BitString::parse(const std::string& text) {
  if (text.empty() || text.size() > 63) {
    throw RunError("BitString::parse: width must be in [1, 63]");
  }
  BitString b{0, static_cast<int>(text.size())};
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '0' && c != '1') throw RunError("BitString::parse: invalid character");
    if (c == '1') b.value |= 1ULL << (text.size() - 1 - i);
  }
  return b;
}

SyntheticCircuit::SyntheticCircuit(std::uint64_t seed, int n, TableMode mode)
    : seed_(seed), n_(n), mode_(mode) {
  if (n < 1 || n > 62) throw ConfigError("SyntheticCircuit: n must be in [1, 62]");
  inv_m_ = std::ldexp(1.0, -n);
  if (mode_ == TableMode::kExact) {
    check_qubit_count(n, kMaxDenseQubits, "SyntheticCircuit(exact)");
    table_ = generate_porter_thomas(n, seed, TableMode::kExact);
  }
}

ProbabilityTable SyntheticCircuit::materialize() const {
  if (mode_ == TableMode::kExact) return table_;
  return generate_porter_thomas(n_, seed_, TableMode::kExpected);
}

ProbabilityTable generate_porter_thomas(int n, std::uint64_t seed, TableMode mode) {
  check_qubit_count(n, kMaxDenseQubits, "generate_porter_thomas");
  const Eigen::Index m = Eigen::Index(1) << n;
  ProbabilityTable table;
  table.n = n;
  table.probs.resize(m);
  for (Eigen::Index x = 0; x < m; ++x) {
    table.probs[x] = exp1_at(seed, static_cast<std::uint64_t>(x));
  }
  if (mode == TableMode::kExact) {
    table.probs /= table.probs.sum();
  } else {
    table.probs *= std::ldexp(1.0, -n);
  }
  return table;
}

OccurrenceCounts::OccurrenceCounts(int n) : n_(n) {
  if (n < 1 || n > 62) throw ConfigError("OccurrenceCounts: n must be in [1, 62]");
  if (n <= kMaxDenseCountQubits) {
    dense_.assign(std::size_t(1) << n, 0);
  }
}

void OccurrenceCounts::add(std::uint64_t x, std::int64_t k) {
  if (n_ == 0) throw ConfigError("OccurrenceCounts: not initialized");
  if (x >> n_) throw RunError("OccurrenceCounts::add: value out of range for n");
  if (!dense_.empty()) {
    dense_[static_cast<std::size_t>(x)] += k;
  } else {
    sparse_[x] += k;
  }
  total_ += k;
}

std::int64_t OccurrenceCounts::count(std::uint64_t x) const {
  if (!dense_.empty()) return dense_[static_cast<std::size_t>(x)];
  const auto it = sparse_.find(x);
  return it == sparse_.end() ? 0 : it->second;
}

double OccurrenceCounts::sum_squares() const {
  double s = 0.0;
  for_each_nonzero([&s](std::uint64_t, std::int64_t k) {
    s += static_cast<double>(k) * static_cast<double>(k);
  });
  return s;
}

Eigen::ArrayXd OccurrenceCounts::to_dense() const {
  check_qubit_count(n_, kMaxDenseQubits, "OccurrenceCounts::to_dense");
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(Eigen::Index(1) << n_);
  for_each_nonzero([&out](std::uint64_t x, std::int64_t k) {
    out[static_cast<Eigen::Index>(x)] = static_cast<double>(k);
  });
  return out;
}

OccurrenceCounts count_occurrences(const SampleRecord& sample) {
  OccurrenceCounts counts(sample.n);
  for (const std::uint64_t x : sample.draws) counts.add(x);
  return counts;
}

ProbabilityTable marginal_table(const ProbabilityTable& table,
                                const std::vector<int>& qubits) {
  std::uint64_t seen = 0;
  for (const int q : qubits) {
    if (q < 0 || q >= table.n) throw ConfigError("marginal qubit out of range");
    if (seen & (std::uint64_t{1} << q)) throw ConfigError("duplicate marginal qubit");
    seen |= std::uint64_t{1} << q;
  }
  const int k = static_cast<int>(qubits.size());
  ProbabilityTable out;
  out.n = k;
  out.probs = Eigen::ArrayXd::Zero(Eigen::Index(1) << k);
  for (Eigen::Index x = 0; x < table.probs.size(); ++x) {
    Eigen::Index y = 0;
    for (int j = 0; j < k; ++j) {
      y |= ((x >> qubits[j]) & 1) << j;
    }
    out.probs[y] += table.probs[x];
  }
  return out;
}

std::pair<SampleRecord, SampleRecord> split_half(const SampleRecord& sample,
                                                 SplitKind kind, std::uint64_t seed) {
  const std::size_t total = sample.draws.size();
  const std::size_t first = total / 2;
  SampleRecord a, b;
  a.n = b.n = sample.n;
  a.source = b.source = sample.source;
  a.seed = b.seed = sample.seed;
  a.noise = b.noise = sample.noise;
  a.draws.reserve(first);
  b.draws.reserve(total - first);
  if (kind == SplitKind::kOrdered) {
    a.draws.assign(sample.draws.begin(), sample.draws.begin() + static_cast<std::ptrdiff_t>(first));
    b.draws.assign(sample.draws.begin() + static_cast<std::ptrdiff_t>(first), sample.draws.end());
    return {std::move(a), std::move(b)};
  }
  // Random partition: Fisher-Yates over the index set, then a stable sweep so
  // each half preserves the original draw order.
  std::vector<std::uint32_t> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  Prng rng(derive_seed(seed, "split_half"));
  for (std::size_t i = total; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(idx[i - 1], idx[j]);
  }
  std::vector<char> in_first(total, 0);
  for (std::size_t i = 0; i < first; ++i) in_first[idx[i]] = 1;
  for (std::size_t i = 0; i < total; ++i) {
    (in_first[i] ? a : b).draws.push_back(sample.draws[i]);
  }
  return {std::move(a), std::move(b)};
}

AliasSampler::AliasSampler(const Eigen::Ref<const Eigen::ArrayXd>& weights) {
  const Eigen::Index m = weights.size();
  if (m == 0) throw ConfigError("AliasSampler: empty weight vector");
  const double sum = weights.sum();
  if (!(sum > 0.0) || (weights < 0.0).any()) {
    throw ConfigError("AliasSampler: weights must be nonnegative with positive sum");
  }
  prob_.resize(m);
  alias_.resize(m);
  Eigen::ArrayXd scaled = weights * (static_cast<double>(m) / sum);
  std::vector<Eigen::Index> small, large;
  small.reserve(static_cast<std::size_t>(m));
  large.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const Eigen::Index s = small.back();
    const Eigen::Index l = large.back();
    small.pop_back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (const Eigen::Index l : large) {
    prob_[l] = 1.0;
    alias_[l] = l;
  }
  for (const Eigen::Index s : small) {  // numerical leftovers
    prob_[s] = 1.0;
    alias_[s] = s;
  }
}

namespace {

std::ifstream open_input(const std::string& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw RunError("cannot open for reading: " + path);
  return in;
}

std::ofstream open_output(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw RunError("cannot open for writing: " + path);
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

int parse_header_n(const std::string& line, const std::string& magic,
                   const std::string& path) {
  const std::string prefix = magic + " n=";
  if (line.rfind(prefix, 0) != 0) {
    throw RunError(path + ": expected header '" + prefix + "<n>'");
  }
  int n = 0;
  const char* first = line.c_str() + prefix.size();
  const char* last = line.c_str() + line.size();
  const auto [ptr, ec] = std::from_chars(first, last, n);
  if (ec != std::errc() || ptr != last || n < 1 || n > 62) {
    throw RunError(path + ": malformed qubit count in header");
  }
  return n;
}

ProbabilityTable read_ptable_lines(std::ifstream& in, int n, const std::string& path) {
  check_qubit_count(n, kMaxDenseQubits, "read_ptable");
  const Eigen::Index m = Eigen::Index(1) << n;
  ProbabilityTable table;
  table.n = n;
  table.probs.resize(m);
  std::string line;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!std::getline(in, line)) throw RunError(path + ": truncated table");
    strip_cr(line);
    try {
      std::size_t pos = 0;
      table.probs[i] = std::stod(line, &pos);
      if (pos != line.size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw RunError(path + ": bad float on line " + std::to_string(i + 2));
    }
    if (!(table.probs[i] >= 0.0) || !std::isfinite(table.probs[i])) {
      throw RunError(path + ": probabilities must be finite and nonnegative");
    }
  }
  while (std::getline(in, line)) {
    strip_cr(line);
    if (!line.empty()) throw RunError(path + ": trailing data after table");
  }
  return table;
}

}  // namespace

void write_ptable_text(const ProbabilityTable& table, const std::string& path) {
  auto out = open_output(path, false);
  out << "ptable v1 n=" << table.n << '\n';
  for (Eigen::Index i = 0; i < table.size(); ++i) {
    out << format_double(table.probs[i]) << '\n';
  }
  if (!out) throw RunError("write failed: " + path);
}

void write_ptable_binary(const ProbabilityTable& table, const std::string& path) {
  auto out = open_output(path, true);
  out.write("PTB1", 4);
  const std::uint32_t n = static_cast<std::uint32_t>(table.n);
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(table.probs.data()),
            static_cast<std::streamsize>(sizeof(double)) * table.size());
  if (!out) throw RunError("write failed: " + path);
}

ProbabilityTable read_ptable(const std::string& path) {
  auto in = open_input(path, true);
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() == 4 && std::memcmp(magic, "PTB1", 4) == 0) {
    std::uint32_t n = 0;
    in.read(reinterpret_cast<char*>(&n), 4);
    if (!in) throw RunError(path + ": truncated binary header");
    check_qubit_count(static_cast<int>(n), kMaxDenseQubits, "read_ptable");
    const Eigen::Index m = Eigen::Index(1) << n;
    ProbabilityTable table;
    table.n = static_cast<int>(n);
    table.probs.resize(m);
    in.read(reinterpret_cast<char*>(table.probs.data()),
            static_cast<std::streamsize>(sizeof(double)) * m);
    if (!in || in.gcount() != static_cast<std::streamsize>(sizeof(double)) * m) {
      throw RunError(path + ": truncated binary table");
    }
    char extra;
    if (in.read(&extra, 1)) throw RunError(path + ": trailing data after table");
    if (!(table.probs >= 0.0).all() || !table.probs.isFinite().all()) {
      throw RunError(path + ": probabilities must be finite and nonnegative");
    }
    return table;
  }
  in.close();
  auto text = open_input(path, false);
  std::string header;
  if (!std::getline(text, header)) throw RunError(path + ": empty file");
  strip_cr(header);
  const int n = parse_header_n(header, "ptable v1", path);
  return read_ptable_lines(text, n, path);
}

ProbabilityTable read_ptable_plain(const std::string& path) {
  auto in = open_input(path, false);
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    try {
      std::size_t pos = 0;
      values.push_back(std::stod(line, &pos));
      if (pos != line.size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw RunError(path + ": bad float on line " + std::to_string(lineno));
    }
  }
  if (values.empty()) throw RunError(path + ": empty table");
  int n = 0;
  while ((std::size_t(1) << n) < values.size() && n <= kMaxDenseQubits) ++n;
  if ((std::size_t(1) << n) != values.size()) {
    throw RunError(path + ": plain table length must be a power of two (was " +
                   std::to_string(values.size()) + ")");
  }
  ProbabilityTable table;
  table.n = n;
  table.probs = Eigen::Map<const Eigen::ArrayXd>(values.data(),
                                                 static_cast<Eigen::Index>(values.size()));
  if (!(table.probs >= 0.0).all() || !table.probs.isFinite().all()) {
    throw RunError(path + ": probabilities must be finite and nonnegative");
  }
  return table;
}

void write_sample_text(const SampleRecord& sample, const std::string& path) {
  auto out = open_output(path, false);
  out << "sample v1 n=" << sample.n << '\n';
  std::string buf;
  for (const std::uint64_t x : sample.draws) {
    buf.assign(static_cast<std::size_t>(sample.n), '0');
    for (int q = 0; q < sample.n; ++q) {
      if ((x >> q) & 1ULL) buf[static_cast<std::size_t>(sample.n - 1 - q)] = '1';
    }
    out << buf << '\n';
  }
  if (!out) throw RunError("write failed: " + path);
}

namespace {

SampleRecord read_sample_body(std::ifstream& in, int n, const std::string& path,
                              std::size_t first_lineno) {
  SampleRecord sample;
  sample.n = n;
  sample.source = path;
  std::string line;
  std::size_t lineno = first_lineno;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    if (line.size() != static_cast<std::size_t>(n)) {
      throw RunError(path + ": line " + std::to_string(lineno) + ": expected width " +
                     std::to_string(n));
    }
    std::uint64_t x = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (c != '0' && c != '1') {
        throw RunError(path + ": line " + std::to_string(lineno) + ": invalid character");
      }
      if (c == '1') x |= 1ULL << (line.size() - 1 - i);
    }
    sample.draws.push_back(x);
  }
  return sample;
}

}  // namespace

SampleRecord read_sample(const std::string& path) {
  auto in = open_input(path, false);
  std::string header;
  if (!std::getline(in, header)) throw RunError(path + ": empty file");
  strip_cr(header);
  const int n = parse_header_n(header, "sample v1", path);
  return read_sample_body(in, n, path, 1);
}

SampleRecord read_sample_plain(const std::string& path) {
  auto in = open_input(path, false);
  std::string first;
  do {
    if (!std::getline(in, first)) throw RunError(path + ": empty sample");
    strip_cr(first);
  } while (first.empty());
  const int n = static_cast<int>(first.size());
  if (n < 1 || n > 62) throw RunError(path + ": implausible bitstring width");
  in.seekg(0);
  return read_sample_body(in, n, path, 0);
}

}  // namespace rcs
