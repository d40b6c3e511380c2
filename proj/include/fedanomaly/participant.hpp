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

// Owner-side optimization. The private step finds a connected private
// subgraph S maximizing F(S) + lambda * Q(S, U) / 2 for the broadcast public
// anomaly U; the public step finds a connected public subgraph maximizing
// Q(S, .). Both use an exhaustive search on small networks and a greedy
// connected search otherwise.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedanomaly/alignment.hpp"
#include "fedanomaly/errors.hpp"
#include "fedanomaly/graph.hpp"
#include "fedanomaly/rng.hpp"
#include "fedanomaly/stats.hpp"

namespace fedanomaly {

inline constexpr std::size_t kMaxExhaustiveNodes = 14;
inline constexpr double kObjectiveTolerance = 1e-12;

struct SearchConfig {
  std::size_t max_restarts = 4;
  std::size_t seed_pool_size = 16;
  std::uint64_t rng_seed = 1;
  // Exhaustive search is used when the searched network has at most this
  // many nodes.
  std::size_t exact_threshold = 10;

  void Validate() const {
    if (max_restarts < 1) throw InputError("max_restarts must be >= 1");
    if (exact_threshold > kMaxExhaustiveNodes) {
      throw InputError("exact_threshold must be <= 14");
    }
  }
};

struct OwnerState {
  std::string owner_id;
  Network network;
  AlignmentMap alignment;
  ScanConfig scan;
  double lambda = 1.0;
  Subgraph current_s;        // on `network`
  Subgraph current_u_local;  // on the public network
};

// Candidate ordering used by every search: higher objective, then fewer
// nodes, then lexicographic node order.
inline bool IsBetterCandidate(double value_a, std::span<const NodeIndex> a,
                              double value_b, std::span<const NodeIndex> b) {
  if (value_a > value_b + kObjectiveTolerance) return true;
  if (value_b > value_a + kObjectiveTolerance) return false;
  if (a.size() != b.size()) return a.size() < b.size();
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Objective that depends on a node set only through (N, sum of weight_a,
// sum of weight_q). Both the private objective (N, N_alpha, N_sigma) and the
// public objective (|U|, -, N_sigma) have this form, which lets the greedy
// search score a move in O(1).
class AdditiveObjective {
 public:
  using Fn = std::function<double(std::size_t n, std::size_t a, std::size_t q)>;

  AdditiveObjective(std::vector<int> weight_a, std::vector<int> weight_q, Fn fn)
      : weight_a_(std::move(weight_a)),
        weight_q_(std::move(weight_q)),
        fn_(std::move(fn)) {}

  int weight_a(NodeIndex v) const { return weight_a_[v]; }
  int weight_q(NodeIndex v) const { return weight_q_[v]; }

  double FromCounts(std::size_t n, std::size_t a, std::size_t q) const {
    return fn_(n, a, q);
  }

  double operator()(std::span<const NodeIndex> nodes) const {
    std::size_t a = 0, q = 0;
    for (NodeIndex v : nodes) {
      a += weight_a_[v];
      q += weight_q_[v];
    }
    return fn_(nodes.size(), a, q);
  }

 private:
  std::vector<int> weight_a_;
  std::vector<int> weight_q_;
  Fn fn_;
};

// Enumerates every connected node subset of `net` (and the empty set) and
// returns the maximizer of `objective`, which is called with sorted node
// indices. Ties: fewer nodes, then lexicographic order.
template <typename Objective>
Subgraph ExhaustiveConnectedArgmax(
    const Network& net, Objective&& objective,
    std::size_t max_nodes = kMaxExhaustiveNodes) {
  const std::size_t n = net.size();
  if (n > std::min(max_nodes, kMaxExhaustiveNodes)) {
    throw InputError("exhaustive search on network '" + net.id() + "' with " +
                     std::to_string(n) + " nodes exceeds the limit of " +
                     std::to_string(std::min(max_nodes, kMaxExhaustiveNodes)));
  }
  std::vector<std::uint32_t> adj(n, 0);
  for (const auto& [a, b] : net.edges()) {
    adj[a] |= 1u << b;
    adj[b] |= 1u << a;
  }
  std::vector<NodeIndex> best;
  double best_value = objective(std::span<const NodeIndex>(best));
  std::vector<NodeIndex> nodes;
  const std::uint32_t limit = 1u << n;
  for (std::uint32_t mask = 1; mask < limit; ++mask) {
    std::uint32_t low = mask & (~mask + 1);
    std::uint32_t reached = low;
    std::uint32_t frontier = low;
    while (frontier != 0) {
      std::uint32_t next = 0;
      for (std::uint32_t f = frontier; f != 0; f &= f - 1) {
        next |= adj[__builtin_ctz(f)];
      }
      next &= mask & ~reached;
      reached |= next;
      frontier = next;
    }
    if (reached != mask) continue;
    nodes.clear();
    for (std::uint32_t m = mask; m != 0; m &= m - 1) {
      nodes.push_back(static_cast<NodeIndex>(__builtin_ctz(m)));
    }
    const double value = objective(std::span<const NodeIndex>(nodes));
    if (IsBetterCandidate(value, nodes, best_value, best)) {
      best = nodes;
      best_value = value;
    }
  }
  return InducedSubgraph(net, best);
}

namespace internal {

// Greedy connected search for an AdditiveObjective: grow from a seed by the
// best single-node or two-node (node plus one of its outside neighbors)
// extension while the objective strictly improves, prune non-cut nodes
// while that strictly improves, and repeat until neither step applies.
class GreedyConnectedSearch {
 public:
  GreedyConnectedSearch(const Network& net, const AdditiveObjective& objective)
      : net_(net), objective_(objective), in_set_(net.size(), 0) {}

  std::vector<NodeIndex> Run(NodeIndex seed) {
    std::fill(in_set_.begin(), in_set_.end(), 0);
    members_.clear();
    n_ = a_ = q_ = 0;
    Add(seed);
    // Each accepted move strictly increases the objective, so this
    // terminates; the cap only guards against floating-point surprises.
    for (std::size_t iter = 0; iter < 4 * net_.size() + 8; ++iter) {
      const bool grew = Expand();
      const bool pruned = Prune();
      if (!grew && !pruned) break;
    }
    std::vector<NodeIndex> out = members_;
    std::sort(out.begin(), out.end());
    return out;
  }

  double Value() const { return objective_.FromCounts(n_, a_, q_); }

 private:
  void Add(NodeIndex v) {
    in_set_[v] = 1;
    members_.push_back(v);
    ++n_;
    a_ += objective_.weight_a(v);
    q_ += objective_.weight_q(v);
  }

  void Remove(NodeIndex v) {
    in_set_[v] = 0;
    members_.erase(std::find(members_.begin(), members_.end(), v));
    --n_;
    a_ -= objective_.weight_a(v);
    q_ -= objective_.weight_q(v);
  }

  bool Expand() {
    bool changed = false;
    while (true) {
      const double current = Value();
      double best_value = current;
      std::vector<NodeIndex> best_move;
      std::vector<NodeIndex> frontier;
      for (NodeIndex v : members_) {
        for (NodeIndex w : net_.neighbors(v)) {
          if (!in_set_[w]) frontier.push_back(w);
        }
      }
      std::sort(frontier.begin(), frontier.end());
      frontier.erase(std::unique(frontier.begin(), frontier.end()),
                     frontier.end());
      auto consider = [&](std::vector<NodeIndex> move) {
        std::size_t a = a_, q = q_;
        for (NodeIndex v : move) {
          a += objective_.weight_a(v);
          q += objective_.weight_q(v);
        }
        const double value = objective_.FromCounts(n_ + move.size(), a, q);
        std::sort(move.begin(), move.end());
        if (best_move.empty()
                ? value > current + kObjectiveTolerance
                : IsBetterCandidate(value, move, best_value, best_move)) {
          best_value = value;
          best_move = std::move(move);
        }
      };
      for (NodeIndex u : frontier) consider({u});
      // Two-node moves only matter when no single node helps.
      if (best_move.empty()) {
        for (NodeIndex u : frontier) {
          for (NodeIndex x : net_.neighbors(u)) {
            if (!in_set_[x]) consider({u, x});
          }
        }
      }
      if (best_move.empty()) return changed;
      for (NodeIndex v : best_move) Add(v);
      changed = true;
    }
  }

  bool KeepsConnected(NodeIndex removed) const {
    if (members_.size() <= 2) return true;
    NodeIndex start = -1;
    for (NodeIndex v : members_) {
      if (v != removed) {
        start = v;
        break;
      }
    }
    std::vector<NodeIndex> stack{start};
    std::vector<char> seen(net_.size(), 0);
    seen[start] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      NodeIndex v = stack.back();
      stack.pop_back();
      for (NodeIndex w : net_.neighbors(v)) {
        if (in_set_[w] && w != removed && !seen[w]) {
          seen[w] = 1;
          ++count;
          stack.push_back(w);
        }
      }
    }
    return count == members_.size() - 1;
  }

  bool Prune() {
    bool changed = false;
    while (members_.size() > 1) {
      const double current = Value();
      double best_value = current;
      NodeIndex best_node = -1;
      std::vector<NodeIndex> sorted = members_;
      std::sort(sorted.begin(), sorted.end());
      for (NodeIndex v : sorted) {
        const double value = objective_.FromCounts(
            n_ - 1, a_ - objective_.weight_a(v), q_ - objective_.weight_q(v));
        if (value > best_value + kObjectiveTolerance && KeepsConnected(v)) {
          best_value = value;
          best_node = v;
        }
      }
      if (best_node < 0) return changed;
      Remove(best_node);
      changed = true;
    }
    return changed;
  }

  const Network& net_;
  const AdditiveObjective& objective_;
  std::vector<char> in_set_;
  std::vector<NodeIndex> members_;
  std::size_t n_ = 0, a_ = 0, q_ = 0;
};

inline std::vector<NodeIndex> ValidIncumbent(const Network& net,
                                             const Subgraph& s) {
  if (s.empty() || s.network_id != net.id()) return {};
  for (NodeIndex v : s.nodes) {
    if (v < 0 || static_cast<std::size_t>(v) >= net.size()) return {};
  }
  if (!IsConnectedInNetwork(net, s.nodes)) return {};
  return s.nodes;
}

}  // namespace internal

// The private-step objective F(S) + lambda * Q(S, U) / 2 as an additive
// objective on the owner's network.
inline AdditiveObjective PrivateObjective(const OwnerState& state,
                                          const Subgraph& public_u,
                                          double lambda) {
  const Network& net = state.network;
  auto scorer = std::make_shared<ScanScorer>(net, state.scan);
  std::vector<int> anomalous(net.size()), qualifying(net.size(), 0);
  for (std::size_t v = 0; v < net.size(); ++v) {
    const auto node = static_cast<NodeIndex>(v);
    anomalous[v] = scorer->anomalous(node);
    for (NodeIndex w : state.alignment.QualifyingPublic(node)) {
      if (public_u.Contains(w)) ++qualifying[v];
    }
  }
  const std::size_t u_size = public_u.size();
  return AdditiveObjective(
      std::move(anomalous), std::move(qualifying),
      [scorer, lambda, u_size](std::size_t n, std::size_t a, std::size_t q) {
        return scorer->Score(a, n) + lambda * QFromCounts(q, n, u_size) / 2.0;
      });
}

// F(S) + lambda * Q(S, U) / 2 for one owner.
inline double LocalObjectiveValue(const OwnerState& state, const Subgraph& s,
                                  const Subgraph& public_u, double lambda) {
  return ScanScorer(state.network, state.scan).Score(s.nodes) +
         lambda * QScore(s, public_u, state.alignment) / 2.0;
}

// Private step. Never returns a subgraph scoring below state.current_s under
// the same (U, lambda): the incumbent is kept unless the search finds something
// strictly better.
inline Subgraph DetectPrivateAnomaly(
    const OwnerState& state, const Subgraph& public_u,
    const SearchConfig& search, std::optional<double> lambda_override = {}) {
  search.Validate();
  state.scan.Validate();
  const Network& net = state.network;
  const double lambda = lambda_override.value_or(state.lambda);
  if (lambda < 0.0) throw InputError("lambda must be non-negative");
  const AdditiveObjective objective = PrivateObjective(state, public_u, lambda);

  std::vector<NodeIndex> found;
  double found_value = objective(found);
  if (net.size() == 0) return EmptySubgraph(net);
  if (net.size() <= search.exact_threshold) {
    found = ExhaustiveConnectedArgmax(net, objective).nodes;
    found_value = objective(found);
  } else {
    std::vector<NodeIndex> by_pvalue(net.size());
    for (std::size_t i = 0; i < net.size(); ++i) {
      by_pvalue[i] = static_cast<NodeIndex>(i);
    }
    std::stable_sort(by_pvalue.begin(), by_pvalue.end(),
                     [&net](NodeIndex x, NodeIndex y) {
                       return net.pvalue(x) < net.pvalue(y);
                     });
    std::vector<NodeIndex> seeds(
        by_pvalue.begin(),
        by_pvalue.begin() + static_cast<std::ptrdiff_t>(std::min(
                                search.seed_pool_size, by_pvalue.size())));
    for (std::size_t v = 0; v < net.size(); ++v) {
      if (objective.weight_q(static_cast<NodeIndex>(v)) > 0) {
        seeds.push_back(static_cast<NodeIndex>(v));
      }
    }
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    Rng rng(MixSeed(search.rng_seed, 0xc1));
    for (std::size_t r = 1; r < search.max_restarts; ++r) {
      seeds.push_back(static_cast<NodeIndex>(rng.Below(net.size())));
    }
    internal::GreedyConnectedSearch greedy(net, objective);
    for (NodeIndex seed : seeds) {
      auto candidate = greedy.Run(seed);
      const double value = greedy.Value();
      if (IsBetterCandidate(value, candidate, found_value, found)) {
        found = std::move(candidate);
        found_value = value;
      }
    }
  }

  const auto incumbent = internal::ValidIncumbent(net, state.current_s);
  if (!incumbent.empty() &&
      !(found_value > objective(incumbent) + kObjectiveTolerance)) {
    return InducedSubgraph(net, incumbent);
  }
  return InducedSubgraph(net, found);
}

// Q(S, .) over the public network as an additive objective: weight_q(w) is
// the number of S nodes aligned to w at or above sigma.
inline AdditiveObjective PublicObjective(const OwnerState& state,
                                         const Network& public_net) {
  const Subgraph& s = state.current_s;
  std::vector<int> pairs(public_net.size(), 0);
  for (NodeIndex a : s.nodes) {
    for (NodeIndex w : state.alignment.QualifyingPublic(a)) ++pairs[w];
  }
  const std::size_t s_size = s.size();
  return AdditiveObjective(std::vector<int>(public_net.size(), 0),
                           std::move(pairs),
                           [s_size](std::size_t n, std::size_t, std::size_t q) {
                             return QFromCounts(q, s_size, n);
                           });
}

namespace internal {

// Grows `current` by attaching other image components through shortest
// connector paths while Q improves.
inline std::vector<NodeIndex> ConnectComponents(
    const Network& net, const AdditiveObjective& objective,
    std::vector<NodeIndex> current,
    const std::vector<std::vector<NodeIndex>>& components) {
  std::vector<char> in_set(net.size(), 0);
  for (NodeIndex v : current) in_set[v] = 1;
  std::vector<char> attached(components.size(), 0);
  auto refresh_attached = [&] {
    for (std::size_t c = 0; c < components.size(); ++c) {
      if (!attached[c] && in_set[components[c].front()]) attached[c] = 1;
    }
  };
  refresh_attached();
  while (true) {
    // Multi-source BFS from the current set.
    std::vector<NodeIndex> parent(net.size(), -1);
    std::vector<int> dist(net.size(), -1);
    std::queue<NodeIndex> queue;
    for (NodeIndex v : current) {
      dist[v] = 0;
      queue.push(v);
    }
    while (!queue.empty()) {
      NodeIndex v = queue.front();
      queue.pop();
      for (NodeIndex w : net.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          parent[w] = v;
          queue.push(w);
        }
      }
    }
    const double value = objective(current);
    double best_value = value;
    std::vector<NodeIndex> best_added;
    for (std::size_t c = 0; c < components.size(); ++c) {
      if (attached[c]) continue;
      NodeIndex target = -1;
      for (NodeIndex v : components[c]) {
        if (dist[v] >= 0 && (target < 0 || dist[v] < dist[target])) target = v;
      }
      if (target < 0) continue;  // unreachable
      std::vector<NodeIndex> added;
      for (NodeIndex v = parent[target]; v >= 0 && !in_set[v]; v = parent[v]) {
        added.push_back(v);
      }
      for (NodeIndex v : components[c]) added.push_back(v);
      std::sort(added.begin(), added.end());
      added.erase(std::unique(added.begin(), added.end()), added.end());
      std::vector<NodeIndex> candidate = current;
      candidate.insert(candidate.end(), added.begin(), added.end());
      std::sort(candidate.begin(), candidate.end());
      const double cand_value = objective(candidate);
      const bool better =
          cand_value > best_value + kObjectiveTolerance ||
          (!best_added.empty() &&
           std::abs(cand_value - best_value) <= kObjectiveTolerance &&
           added.size() < best_added.size());
      if (better && cand_value > value + kObjectiveTolerance) {
        best_value = cand_value;
        best_added = std::move(added);
      }
    }
    if (best_added.empty()) break;
    for (NodeIndex v : best_added) {
      in_set[v] = 1;
      current.push_back(v);
    }
    std::sort(current.begin(), current.end());
    refresh_attached();
  }
  return current;
}

// Removes non-cut nodes while Q strictly improves.
inline std::vector<NodeIndex> PruneConnected(const Network& net,
                                             const AdditiveObjective& objective,
                                             std::vector<NodeIndex> current) {
  while (current.size() > 1) {
    const double value = objective(current);
    double best_value = value;
    std::size_t best_pos = current.size();
    for (std::size_t i = 0; i < current.size(); ++i) {
      std::vector<NodeIndex> candidate = current;
      candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(i));
      const double cand_value = objective(candidate);
      if (cand_value > best_value + kObjectiveTolerance &&
          IsConnectedInNetwork(net, candidate)) {
        best_value = cand_value;
        best_pos = i;
      }
    }
    if (best_pos == current.size()) break;
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(best_pos));
  }
  return current;
}

}  // namespace internal

// Public step: connected U on the public network maximizing Q(state.current_s,
// U). Exhaustive when the public network is small; otherwise every connected
// component of the aligned image of S is used as a start, other components
// are attached through shortest connector paths while Q improves, and the
// result is pruned.
inline Subgraph BestPublicAlignment(const OwnerState& state,
                                    const Network& public_net,
                                    const SearchConfig& search) {
  search.Validate();
  if (state.current_s.empty()) return EmptySubgraph(public_net);
  const AdditiveObjective objective = PublicObjective(state, public_net);
  if (public_net.size() <= search.exact_threshold) {
    return ExhaustiveConnectedArgmax(public_net, objective);
  }
  std::vector<NodeIndex> image;
  for (std::size_t w = 0; w < public_net.size(); ++w) {
    if (objective.weight_q(static_cast<NodeIndex>(w)) > 0) {
      image.push_back(static_cast<NodeIndex>(w));
    }
  }
  if (image.empty()) return EmptySubgraph(public_net);
  const auto components =
      internal::Components(image, InducedSubgraph(public_net, image).edges);

  // The core is the image component carrying the most qualifying pairs
  // (ties: fewer nodes, then the earlier component). Other components are
  // attached only when that pays off, so isolated stray images drop out.
  std::size_t core = 0;
  double core_weight = -1.0;
  for (std::size_t c = 0; c < components.size(); ++c) {
    double weight = 0.0;
    for (NodeIndex w : components[c]) weight += objective.weight_q(w);
    if (weight > core_weight ||
        (weight == core_weight &&
         components[c].size() < components[core].size())) {
      core = c;
      core_weight = weight;
    }
  }
  auto grown = internal::ConnectComponents(public_net, objective,
                                           components[core], components);
  auto best = internal::PruneConnected(public_net, objective, std::move(grown));
  return InducedSubgraph(public_net, best);
}

}  // namespace fedanomaly
