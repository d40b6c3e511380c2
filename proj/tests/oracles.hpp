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

// Independent reference implementations used by the tests. Nothing here
// calls the scoring, alignment or search code under test; each routine is a
// direct transcription of the definition it checks.

#ifndef FEDANOMALY_TESTS_ORACLES_HPP_
#define FEDANOMALY_TESTS_ORACLES_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "fedanomaly/fedanomaly.hpp"

namespace fedanomaly::oracle {

// Bernoulli KL divergence, zero below b, with 0 * ln 0 = 0.
inline double Kl(double a, double b) {
  if (a < b) return 0.0;
  long double x = a, y = b, out = 0.0L;
  if (x > 0) out += x * std::log(x / y);
  if (x < 1) out += (1 - x) * std::log((1 - x) / (1 - y));
  return static_cast<double>(out);
}

inline double Bj(double alpha, long n_alpha, long n) {
  return static_cast<double>(n) *
         Kl(static_cast<double>(n_alpha) / static_cast<double>(n), alpha);
}

inline double Hc(double alpha, long n_alpha, long n) {
  long double na = n_alpha, nn = n, a = alpha;
  return static_cast<double>((na - nn * a) / std::sqrt(nn * a * (1 - a)));
}

// Share of the T observations that are >= the one at 1-based snapshot t.
inline double EmpiricalP(const std::vector<double>& series, std::size_t t) {
  int hits = 0;
  for (double x : series) {
    if (!(x < series[t - 1])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(series.size());
}

struct Pair {
  std::string private_node;
  std::string public_node;
  double probability;
};

// Pairs (a, b) with a in S, b in U and probability >= sigma, then
// count/|S| + count/|U|.
inline double Q(const std::set<std::string>& s, const std::set<std::string>& u,
                const std::vector<Pair>& pairs, double sigma) {
  if (s.empty() || u.empty()) return 0.0;
  int count = 0;
  for (const auto& p : pairs) {
    if (s.count(p.private_node) && u.count(p.public_node) &&
        p.probability >= sigma) {
      ++count;
    }
  }
  return count / static_cast<double>(s.size()) +
         count / static_cast<double>(u.size());
}

// The unsimplified coalition error: sum over coalitions and members of
// |V_i| * ((sum_k |V_k| - |V_i|) / (|V_i| * sum_k |V_k|)) * q_i.
inline double PartitionError(
    const std::vector<std::vector<std::string>>& coalitions,
    const std::map<std::string, std::pair<std::size_t, double>>& size_q) {
  double total = 0.0;
  for (const auto& c : coalitions) {
    double sum = 0.0;
    for (const auto& id : c) sum += static_cast<double>(size_q.at(id).first);
    for (const auto& id : c) {
      const double vi = static_cast<double>(size_q.at(id).first);
      const double numer = sum - vi;
      if (numer == 0.0) continue;  // singleton: no error
      total += vi * (numer / (vi * sum)) * size_q.at(id).second;
    }
  }
  return total;
}

// Adjacency lists by index, rebuilt from the edge list.
inline std::vector<std::vector<int>> Adjacency(const Network& net) {
  std::vector<std::vector<int>> adj(net.size());
  for (const auto& [a, b] : net.edges()) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return adj;
}

inline bool ConnectedByBfs(const std::vector<std::vector<int>>& adj,
                           const std::vector<int>& nodes) {
  if (nodes.size() <= 1) return true;
  std::set<int> members(nodes.begin(), nodes.end());
  std::set<int> seen{nodes.front()};
  std::queue<int> queue;
  queue.push(nodes.front());
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop();
    for (int w : adj[v]) {
      if (members.count(w) && seen.insert(w).second) queue.push(w);
    }
  }
  return seen.size() == members.size();
}

// Every connected node subset, the empty set first.
inline std::vector<std::vector<int>> ConnectedSubsets(const Network& net) {
  const auto adj = Adjacency(net);
  std::vector<std::vector<int>> out{{}};
  const int n = static_cast<int>(net.size());
  for (long mask = 1; mask < (1L << n); ++mask) {
    std::vector<int> nodes;
    for (int v = 0; v < n; ++v) {
      if (mask & (1L << v)) nodes.push_back(v);
    }
    if (ConnectedByBfs(adj, nodes)) out.push_back(std::move(nodes));
  }
  return out;
}

// F normalized by the score of an all-anomalous set holding every
// anomalous node of the network (at least one node).
inline double NormalizedBj(const Network& net, const std::vector<int>& nodes,
                           double alpha) {
  if (nodes.empty()) return 0.0;
  long k = 0;
  for (std::size_t v = 0; v < net.size(); ++v) {
    k += net.pvalue(static_cast<NodeIndex>(v)) <= alpha ? 1 : 0;
  }
  if (k == 0) k = 1;
  long na = 0;
  for (int v : nodes) na += net.pvalue(v) <= alpha ? 1 : 0;
  return Bj(alpha, na, static_cast<long>(nodes.size())) / Bj(alpha, k, k);
}

inline std::set<std::string> Names(const Network& net,
                                   const std::vector<int>& nodes) {
  std::set<std::string> out;
  for (int v : nodes) out.insert(net.name(v));
  return out;
}

inline std::vector<Pair> Pairs(const std::vector<AlignmentEntry>& entries) {
  std::vector<Pair> out;
  for (const auto& e : entries) {
    out.push_back({e.private_node, e.public_node, e.probability});
  }
  return out;
}

struct JointOptimum {
  double value = -1e300;
  std::set<std::string> u;
  std::vector<std::set<std::string>> s;  // per owner
  bool unique = true;  // no other (S, U) reaches the value within 1e-9
};

// max over connected U of sum_i max over connected S_i of
// F(S_i) + lambda * Q(S_i, U) / 2, by full enumeration.
inline JointOptimum JointArgmax(const std::vector<OwnerInput>& owners,
                                const Network& public_net, double alpha,
                                double sigma, double lambda) {
  struct OwnerTables {
    std::vector<std::set<std::string>> names;
    std::vector<double> f;
    std::vector<Pair> pairs;
  };
  std::vector<OwnerTables> tables;
  for (const auto& o : owners) {
    OwnerTables t;
    for (const auto& s : ConnectedSubsets(o.network)) {
      t.names.push_back(Names(o.network, s));
      t.f.push_back(NormalizedBj(o.network, s, alpha));
    }
    t.pairs = Pairs(o.alignment);
    tables.push_back(std::move(t));
  }
  constexpr double kTie = 1e-9;
  JointOptimum best;
  for (const auto& u_nodes : ConnectedSubsets(public_net)) {
    const auto u = Names(public_net, u_nodes);
    double total = 0.0;
    bool unique = true;
    std::vector<std::set<std::string>> chosen;
    for (const auto& t : tables) {
      double top = -1e300;
      std::size_t arg = 0;
      int ties = 0;
      for (std::size_t k = 0; k < t.names.size(); ++k) {
        const double v = t.f[k] + lambda * Q(t.names[k], u, t.pairs, sigma) / 2;
        if (v > top + kTie) {
          top = v;
          arg = k;
          ties = 1;
        } else if (v > top - kTie) {
          ++ties;
        }
      }
      unique = unique && ties == 1;
      total += top;
      chosen.push_back(t.names[arg]);
    }
    if (total > best.value + kTie) {
      best.value = total;
      best.u = u;
      best.s = chosen;
      best.unique = unique;
    } else if (total > best.value - kTie) {
      best.unique = false;
    }
  }
  return best;
}

// Canonical name for index i out of n, zero-padded so string order matches
// numeric order.
inline std::string NodeName(const std::string& prefix, std::size_t i) {
  std::string digits = std::to_string(i);
  return prefix +
         std::string(3 - std::min<std::size_t>(3, digits.size()), '0') + digits;
}

// Connected random network: random tree plus `extra` random edges. Nodes
// are anomalous (p drawn from [0.001, alpha]) with probability
// `anomaly_rate`, otherwise p is drawn from (0.2, 1].
inline Network RandomNetwork(Rng& rng, const std::string& id,
                             const std::string& prefix, std::size_t n,
                             std::size_t extra, double anomaly_rate,
                             double alpha = 0.15) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back(NodeName(prefix, i));
  std::vector<NamedEdge> edges;
  for (std::size_t i = 1; i < n; ++i) {
    edges.push_back({names[rng.Below(i)], names[i]});
  }
  for (std::size_t k = 0; k < extra && n > 1; ++k) {
    std::size_t a = rng.Below(n), b = rng.Below(n);
    if (a != b) edges.push_back({names[a], names[b]});
  }
  std::map<std::string, double> p;
  for (const auto& v : names) {
    p[v] = rng.Bernoulli(anomaly_rate) ? rng.Uniform(0.001, alpha)
                                       : 0.2 + 0.8 * rng.UniformOpenClosed();
  }
  // Duplicate random edges are folded by the loader with a warning.
  auto level = Log().level();
  Log().set_level(spdlog::level::err);
  Network net = Network::Build(id, names, std::move(edges), p);
  Log().set_level(level);
  return net;
}

// Random alignment entries: each private node gets `per_node` candidates
// with probabilities uniform on [0, 1].
inline std::vector<AlignmentEntry> RandomAlignment(Rng& rng,
                                                   const Network& private_net,
                                                   const Network& public_net,
                                                   std::size_t per_node) {
  std::vector<AlignmentEntry> out;
  std::set<std::pair<std::size_t, std::size_t>> used;
  for (std::size_t v = 0; v < private_net.size(); ++v) {
    for (std::size_t k = 0; k < per_node; ++k) {
      const std::size_t w = rng.Below(public_net.size());
      if (!used.insert({v, w}).second) continue;
      out.push_back({private_net.name(static_cast<NodeIndex>(v)),
                     public_net.name(static_cast<NodeIndex>(w)),
                     rng.Uniform()});
    }
  }
  return out;
}

}  // namespace fedanomaly::oracle

#endif  // FEDANOMALY_TESTS_ORACLES_HPP_
