/*
 * Copyright 2026 The fedanomaly Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Empirical p-values and the nonparametric scan statistics (Berk-Jones,
// Higher Criticism) evaluated on connected subgraphs.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fedanomaly/errors.hpp"
#include "fedanomaly/graph.hpp"
#include "fedanomaly/io.hpp"

namespace fedanomaly {

// Per-node observation series of a common length T >= 1.
struct ObservationHistory {
  std::vector<std::string> nodes;
  std::vector<std::vector<double>> series;  // parallel to nodes

  std::size_t length() const {
    return series.empty() ? 0 : series.front().size();
  }

  void Validate() const {
    if (nodes.size() != series.size()) {
      throw InputError("history: node/series count mismatch");
    }
    if (series.empty()) return;
    const std::size_t t = length();
    if (t == 0) throw InputError("history: series must have T >= 1");
    for (std::size_t i = 0; i < series.size(); ++i) {
      if (series[i].size() != t) {
        throw InputError("history: series of '" + nodes[i] + "' has length " +
                         std::to_string(series[i].size()) + ", expected " +
                         std::to_string(t));
      }
      for (double x : series[i]) {
        if (!std::isfinite(x) || x < 0.0) {
          throw InputError("history: observation of '" + nodes[i] +
                           "' is negative or not finite");
        }
      }
    }
  }
};

// p(v) = (1/T) * #{k : f(v_k) >= f(v_t)}, with snapshot t 1-based and the
// current snapshot included, so p lies in [1/T, 1].
inline std::map<std::string, double> EmpiricalPValues(
    const ObservationHistory& history, std::size_t t) {
  history.Validate();
  const std::size_t len = history.length();
  if (t < 1 || t > len) {
    throw InputError("snapshot index " + std::to_string(t) + " outside [1, " +
                     std::to_string(len) + "]");
  }
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < history.nodes.size(); ++i) {
    const auto& s = history.series[i];
    const double current = s[t - 1];
    std::size_t at_least = 0;
    for (double x : s) at_least += x >= current ? 1 : 0;
    out[history.nodes[i]] =
        static_cast<double>(at_least) / static_cast<double>(len);
  }
  return out;
}

// Header `node,t1,...,tT`, then one row per node.
inline ObservationHistory ReadHistoryCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  auto split = [](const std::string& line) {
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      std::size_t pos = line.find(',', start);
      f.push_back(line.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    return f;
  };
  ObservationHistory h;
  std::string line;
  std::size_t lineno = 0;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split(line);
    auto where = [&] { return path.string() + ":" + std::to_string(lineno); };
    if (columns == 0) {
      if (f.size() < 2 || f[0] != "node") {
        throw InputError(where() + ": expected header 'node,t1,...,tT'");
      }
      columns = f.size();
      continue;
    }
    if (f.size() != columns) {
      throw InputError(where() + ": expected " + std::to_string(columns) +
                       " columns");
    }
    std::vector<double> values;
    for (std::size_t k = 1; k < f.size(); ++k) {
      try {
        values.push_back(ParseDouble(f[k]));
      } catch (const InputError& e) {
        throw InputError(where() + ": " + e.what());
      }
    }
    h.nodes.push_back(f[0]);
    h.series.push_back(std::move(values));
  }
  if (columns == 0) throw InputError(path.string() + ": empty history file");
  h.Validate();
  return h;
}

inline std::string SerializePValueMap(const std::map<std::string, double>& p) {
  std::string out;
  for (const auto& [node, value] : p) {
    out += node;
    out += '\t';
    out += FormatDouble(value);
    out += '\n';
  }
  return out;
}

// Kullback-Leibler divergence of Bernoulli(a) from Bernoulli(b), one-sided:
// zero when a < b. Uses 0 * ln 0 = 0.
inline double KlDivergence(double a, double b) {
  if (!(b > 0.0 && b < 1.0)) {
    throw InputError("KL divergence: b must lie in (0, 1)");
  }
  if (!(a >= 0.0 && a <= 1.0)) {
    throw InputError("KL divergence: a must lie in [0, 1]");
  }
  if (a < b) return 0.0;
  double kl = 0.0;
  if (a > 0.0) kl += a * std::log(a / b);
  if (a < 1.0) kl += (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
  return kl < 0.0 ? 0.0 : kl;
}

namespace internal {
inline void CheckCounts(std::size_t n_alpha, std::size_t n) {
  if (n == 0) throw InputError("scan statistic on an empty node set");
  if (n_alpha > n) throw InputError("scan statistic: n_alpha exceeds n");
}
}  // namespace internal

inline double BjScore(double alpha, std::size_t n_alpha, std::size_t n) {
  internal::CheckCounts(n_alpha, n);
  const double nd = static_cast<double>(n);
  return nd * KlDivergence(static_cast<double>(n_alpha) / nd, alpha);
}

inline double HcScore(double alpha, std::size_t n_alpha, std::size_t n) {
  internal::CheckCounts(n_alpha, n);
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InputError("HC score: alpha must lie in (0, 1)");
  }
  const double nd = static_cast<double>(n);
  return (static_cast<double>(n_alpha) - nd * alpha) /
         std::sqrt(nd * alpha * (1.0 - alpha));
}

enum class Statistic { kBerkJones, kHigherCriticism };

// How raw scores are scaled before they are combined with the alignment
// score.
//  kNone:       raw statistic.
//  kPerSize:    divided by the score of an all-anomalous subgraph of the
//               same size, so every all-anomalous subgraph scores exactly 1.
//  kNetworkMax: divided by the score of an all-anomalous subgraph holding
//               every anomalous node of the network (at least one). This is
//               the largest value the statistic can reach on the network, so
//               scores lie in (-inf, 1] and larger anomalies still win.
enum class Normalization { kNone, kPerSize, kNetworkMax };

struct ScanConfig {
  double alpha = 0.15;
  Statistic statistic = Statistic::kBerkJones;
  Normalization normalization = Normalization::kNetworkMax;

  void Validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw InputError("alpha must lie in (0, 1)");
    }
  }
};

inline double RawScore(const ScanConfig& cfg, std::size_t n_alpha,
                       std::size_t n) {
  return cfg.statistic == Statistic::kBerkJones
             ? BjScore(cfg.alpha, n_alpha, n)
             : HcScore(cfg.alpha, n_alpha, n);
}

// Scan statistic of a network's subgraphs from (N_alpha, N) counts, with the
// normalizer precomputed once per network.
class ScanScorer {
 public:
  ScanScorer(const Network& net, const ScanConfig& cfg) : cfg_(cfg) {
    cfg_.Validate();
    anomalous_.resize(net.size());
    std::size_t total = 0;
    for (std::size_t i = 0; i < net.size(); ++i) {
      anomalous_[i] = net.pvalues()[i] <= cfg_.alpha ? 1 : 0;
      total += anomalous_[i];
    }
    const std::size_t k = total == 0 ? 1 : total;
    network_max_ = RawScore(cfg_, k, k);
  }

  const ScanConfig& config() const { return cfg_; }

  // 1 when p(v) <= alpha.
  int anomalous(NodeIndex v) const { return anomalous_[v]; }

  double Score(std::size_t n_alpha, std::size_t n) const {
    if (n == 0) return 0.0;
    const double raw = RawScore(cfg_, n_alpha, n);
    switch (cfg_.normalization) {
      case Normalization::kNone:
        return raw;
      case Normalization::kPerSize:
        return raw / RawScore(cfg_, n, n);
      case Normalization::kNetworkMax:
        return raw / network_max_;
    }
    return raw;
  }

  double Score(std::span<const NodeIndex> nodes) const {
    std::size_t n_alpha = 0;
    for (NodeIndex v : nodes) n_alpha += anomalous_[v];
    return Score(n_alpha, nodes.size());
  }

 private:
  ScanConfig cfg_;
  std::vector<int> anomalous_;
  double network_max_ = 1.0;
};

// Scores a connected (or empty) subgraph of `net`.
inline double ScanScore(const Subgraph& s, const Network& net,
                        const ScanConfig& cfg) {
  if (s.network_id != net.id()) {
    throw ContractError("subgraph of '" + s.network_id +
                        "' scored against network '" + net.id() + "'");
  }
  if (!IsConnected(s)) {
    throw ContractError("scan statistic requires a connected subgraph");
  }
  return ScanScorer(net, cfg).Score(s.nodes);
}

}  // namespace fedanomaly
