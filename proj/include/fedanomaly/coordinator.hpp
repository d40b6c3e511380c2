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

// Server-side aggregation of the owners' local public anomalies: sort the
// reports, group owners into coalitions, score partitions and pick the new
// public anomaly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fedanomaly/errors.hpp"
#include "fedanomaly/graph.hpp"

namespace fedanomaly {

// The only record an owner sends to the coordinator.
struct ParticipantReport {
  std::string owner_id;
  std::vector<std::string> public_nodes;  // sorted public node ids of U_i*
  std::size_t size = 0;                   // == public_nodes.size()
  double q_value = 0.0;                   // Q(S_i*, U_i*)
  double f_value = 0.0;                   // F(S_i*)
  std::size_t round = 0;

  friend bool operator==(const ParticipantReport&,
                         const ParticipantReport&) = default;
};

using Coalition = std::vector<std::string>;  // owner ids

struct Partition {
  std::vector<Coalition> coalitions;
  std::vector<double> per_coalition_error;
  double total_error = 0.0;
};

inline std::vector<ParticipantReport> SortReports(
    std::vector<ParticipantReport> reports) {
  std::set<std::string> seen;
  for (const auto& r : reports) {
    if (!seen.insert(r.owner_id).second) {
      throw InputError("duplicate report from owner '" + r.owner_id + "'");
    }
  }
  std::sort(reports.begin(), reports.end(),
            [](const ParticipantReport& a, const ParticipantReport& b) {
              if (a.size != b.size) return a.size < b.size;
              return a.owner_id < b.owner_id;
            });
  return reports;
}

namespace internal {

inline std::map<std::string, const ParticipantReport*> IndexReports(
    const std::vector<ParticipantReport>& reports) {
  std::map<std::string, const ParticipantReport*> out;
  for (const auto& r : reports) {
    if (!out.emplace(r.owner_id, &r).second) {
      throw InputError("duplicate report from owner '" + r.owner_id + "'");
    }
  }
  return out;
}

// Relative alignment error of an owner of size `size` inside a coalition of
// total size `total`: the owner's error term divided by size * q.
inline double RelativeJoinError(std::size_t size, std::size_t total) {
  return 1.0 - static_cast<double>(size) / static_cast<double>(total);
}

}  // namespace internal

// Error of one coalition: sum over members of (1 - size_i / size_C) * q_i.
inline double CoalitionError(
    const Coalition& coalition,
    const std::map<std::string, const ParticipantReport*>& by_owner) {
  std::size_t total = 0;
  for (const auto& id : coalition) {
    auto it = by_owner.find(id);
    if (it == by_owner.end()) {
      throw InputError("partition names unknown owner '" + id + "'");
    }
    total += it->second->size;
  }
  if (coalition.size() == 1) return 0.0;
  double error = 0.0;
  for (const auto& id : coalition) {
    const ParticipantReport& r = *by_owner.at(id);
    if (r.size == 0) {
      throw InputError("owner '" + id +
                       "' with an empty public anomaly in a multi-owner "
                       "coalition");
    }
    error += internal::RelativeJoinError(r.size, total) * r.q_value;
  }
  return error;
}

// Scores a grouping of the report owners; the grouping must cover every
// owner exactly once.
inline Partition ScorePartition(std::vector<Coalition> coalitions,
                                const std::vector<ParticipantReport>& reports) {
  const auto by_owner = internal::IndexReports(reports);
  std::set<std::string> covered;
  for (const auto& c : coalitions) {
    if (c.empty()) throw InputError("partition contains an empty coalition");
    for (const auto& id : c) {
      if (!covered.insert(id).second) {
        throw InputError("owner '" + id + "' appears in two coalitions");
      }
    }
  }
  if (covered.size() != by_owner.size()) {
    throw InputError("partition does not cover every reporting owner");
  }
  Partition p;
  p.coalitions = std::move(coalitions);
  for (const auto& c : p.coalitions) {
    p.per_coalition_error.push_back(CoalitionError(c, by_owner));
    p.total_error += p.per_coalition_error.back();
  }
  return p;
}

inline double PartitionError(const std::vector<Coalition>& coalitions,
                             const std::vector<ParticipantReport>& reports) {
  return ScorePartition(coalitions, reports).total_error;
}

// Scans owners in report order. An owner joins the open coalition when every
// member's relative error (1 - size_k / size_C) after the join is <= theta;
// otherwise the open coalition is closed and the owner opens a new one.
// Owners with an empty public anomaly are kept as singletons.
inline Partition FormPartition(const std::vector<ParticipantReport>& sorted,
                               double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw InputError("theta must lie in [0, 1]");
  }
  std::vector<Coalition> closed;
  std::vector<Coalition> empties;
  Coalition open;
  std::vector<std::size_t> open_sizes;
  std::size_t open_total = 0;
  for (const auto& r : sorted) {
    if (r.size == 0) {
      empties.push_back({r.owner_id});
      continue;
    }
    bool joins = !open.empty();
    if (joins) {
      const std::size_t total = open_total + r.size;
      if (internal::RelativeJoinError(r.size, total) > theta) joins = false;
      for (std::size_t s : open_sizes) {
        if (internal::RelativeJoinError(s, total) > theta) joins = false;
      }
    }
    if (!joins && !open.empty()) {
      closed.push_back(std::move(open));
      open.clear();
      open_sizes.clear();
      open_total = 0;
    }
    open.push_back(r.owner_id);
    open_sizes.push_back(r.size);
    open_total += r.size;
  }
  if (!open.empty()) closed.push_back(std::move(open));
  for (auto& e : empties) closed.push_back(std::move(e));
  return ScorePartition(std::move(closed), sorted);
}

// Picks the coalition with the smallest error (ties: larger total q, then
// owner-id order) among coalitions that reported a non-empty public
// anomaly, and returns the union of its members' public anomalies induced
// on the public network. A disconnected union is reduced to the component
// covering the most reported node memberships (ties: fewer nodes, then
// lexicographic).
inline Subgraph SelectPublicAnomaly(
    const Partition& partition, const std::vector<ParticipantReport>& reports,
    const Network& public_net) {
  const auto by_owner = internal::IndexReports(reports);
  std::ptrdiff_t chosen = -1;
  double chosen_q = 0.0;
  Coalition chosen_key;
  for (std::size_t c = 0; c < partition.coalitions.size(); ++c) {
    Coalition key = partition.coalitions[c];
    std::sort(key.begin(), key.end());
    double q_sum = 0.0;
    bool has_nodes = false;
    for (const auto& id : key) {
      auto it = by_owner.find(id);
      if (it == by_owner.end()) {
        throw InputError("partition names unknown owner '" + id + "'");
      }
      q_sum += it->second->q_value;
      has_nodes = has_nodes || it->second->size > 0;
    }
    if (!has_nodes) continue;
    const double err = partition.per_coalition_error[c];
    bool better = chosen < 0;
    if (!better) {
      const double chosen_err = partition.per_coalition_error[chosen];
      if (err < chosen_err - 1e-12) {
        better = true;
      } else if (std::abs(err - chosen_err) <= 1e-12) {
        if (q_sum > chosen_q + 1e-12) {
          better = true;
        } else if (std::abs(q_sum - chosen_q) <= 1e-12 && key < chosen_key) {
          better = true;
        }
      }
    }
    if (better) {
      chosen = static_cast<std::ptrdiff_t>(c);
      chosen_q = q_sum;
      chosen_key = std::move(key);
    }
  }
  if (chosen < 0) return EmptySubgraph(public_net);

  std::map<NodeIndex, std::size_t> membership;
  for (const auto& id : partition.coalitions[chosen]) {
    for (const auto& name : by_owner.at(id)->public_nodes) {
      ++membership[public_net.IndexOf(name)];
    }
  }
  std::vector<NodeIndex> union_nodes;
  for (const auto& [v, count] : membership) union_nodes.push_back(v);
  Subgraph u = InducedSubgraph(public_net, union_nodes);
  auto components = ConnectedComponents(u);
  if (components.size() <= 1) return u;
  const Subgraph* best = nullptr;
  std::size_t best_cover = 0;
  for (const auto& comp : components) {
    std::size_t cover = 0;
    for (NodeIndex v : comp.nodes) cover += membership[v];
    bool better = best == nullptr || cover > best_cover;
    if (!better && cover == best_cover) {
      better = comp.size() < best->size() ||
               (comp.size() == best->size() && comp.nodes < best->nodes);
    }
    if (better) {
      best = &comp;
      best_cover = cover;
    }
  }
  return *best;
}

namespace internal {

inline void EnumerateSetPartitions(
    std::size_t n,
    const std::function<void(const std::vector<std::size_t>&)>& visit) {
  // Restricted growth strings: label[i] <= 1 + max(label[0..i-1]).
  std::vector<std::size_t> label(n, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i,
                                                          std::size_t blocks) {
    if (i == n) {
      visit(label);
      return;
    }
    for (std::size_t b = 0; b <= blocks; ++b) {
      label[i] = b;
      rec(i + 1, std::max(blocks, b + 1));
    }
  };
  if (n == 0) {
    visit(label);
    return;
  }
  label[0] = 0;
  rec(1, 1);
}

}  // namespace internal

inline constexpr std::size_t kMaxBruteForceOwners = 8;

// Minimizes the partition error over every set partition of the owners.
// Partitions that put an empty-anomaly owner into a multi-owner coalition
// are not admissible. Ties: fewer coalitions, then lexicographic order of
// the sorted coalition lists.
inline Partition BruteForceOptimalPartition(
    const std::vector<ParticipantReport>& reports) {
  if (reports.size() > kMaxBruteForceOwners) {
    throw InputError("brute-force partition search supports at most 8 owners");
  }
  std::vector<std::string> owners;
  for (const auto& r : reports) owners.push_back(r.owner_id);
  std::sort(owners.begin(), owners.end());
  const auto by_owner = internal::IndexReports(reports);

  Partition best;
  bool have = false;
  std::vector<Coalition> best_key;
  internal::EnumerateSetPartitions(
      owners.size(), [&](const std::vector<std::size_t>& label) {
        std::size_t blocks = 0;
        for (std::size_t l : label) blocks = std::max(blocks, l + 1);
        std::vector<Coalition> coalitions(blocks);
        for (std::size_t i = 0; i < owners.size(); ++i) {
          coalitions[label[i]].push_back(owners[i]);
        }
        for (const auto& c : coalitions) {
          if (c.size() < 2) continue;
          for (const auto& id : c) {
            if (by_owner.at(id)->size == 0) return;
          }
        }
        Partition p = ScorePartition(coalitions, reports);
        bool better = !have;
        if (!better) {
          if (p.total_error < best.total_error - 1e-12) {
            better = true;
          } else if (std::abs(p.total_error - best.total_error) <= 1e-12) {
            if (coalitions.size() != best.coalitions.size()) {
              better = coalitions.size() < best.coalitions.size();
            } else {
              better = coalitions < best_key;
            }
          }
        }
        if (better) {
          best = std::move(p);
          best_key = coalitions;
          have = true;
        }
      });
  return best;
}

}  // namespace fedanomaly
