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

// Attributed networks, node-set subgraphs and the subgraph set algebra.
//
// Node ids are opaque strings. A Network assigns dense indices in ascending
// string order, so sorting by index is the same as sorting by id and every
// deterministic ordering in the library is index order.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fedanomaly/errors.hpp"
#include "fedanomaly/log.hpp"

namespace fedanomaly {

using NodeIndex = std::int32_t;
using Edge = std::pair<NodeIndex, NodeIndex>;  // first < second
using NamedEdge = std::pair<std::string, std::string>;

class Network {
 public:
  Network() = default;

  // Validates and canonicalizes. Nodes named only in `edges` are added.
  // Every node must have a p-value in (0, 1] unless `pvalues` is empty, in
  // which case all p-values default to 1 (an attributeless network).
  // Reversed duplicates are folded with a warning; self-loops are rejected.
  static Network Build(std::string network_id, std::vector<std::string> nodes,
                       const std::vector<NamedEdge>& edges,
                       const std::map<std::string, double>& pvalues) {
    for (const auto& [u, v] : edges) {
      nodes.push_back(u);
      nodes.push_back(v);
    }
    for (const auto& [name, p] : pvalues) nodes.push_back(name);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

    Network net;
    net.id_ = std::move(network_id);
    net.names_ = std::move(nodes);
    net.index_.reserve(net.names_.size());
    for (std::size_t i = 0; i < net.names_.size(); ++i) {
      net.index_.emplace(net.names_[i], static_cast<NodeIndex>(i));
    }

    std::size_t reversed = 0;
    std::vector<Edge> canon;
    canon.reserve(edges.size());
    std::map<Edge, bool> seen_forward;
    for (const auto& [u, v] : edges) {
      if (u == v) {
        throw InputError("network '" + net.id_ + "': self-loop on node '" + u +
                         "'");
      }
      const NodeIndex a = net.IndexOf(u);
      const NodeIndex b = net.IndexOf(v);
      const Edge e{std::min(a, b), std::max(a, b)};
      const bool forward = a < b;
      auto [it, inserted] = seen_forward.emplace(e, forward);
      if (!inserted && it->second != forward) ++reversed;
      canon.push_back(e);
    }
    if (reversed > 0) {
      Log().warn(
          "network '{}': {} reversed edge(s) folded; treating input as "
          "undirected",
          net.id_, reversed);
    }
    std::sort(canon.begin(), canon.end());
    canon.erase(std::unique(canon.begin(), canon.end()), canon.end());
    net.edges_ = std::move(canon);

    net.adjacency_.assign(net.names_.size(), {});
    for (const auto& [a, b] : net.edges_) {
      net.adjacency_[a].push_back(b);
      net.adjacency_[b].push_back(a);
    }
    for (auto& row : net.adjacency_) std::sort(row.begin(), row.end());

    net.pvalues_.assign(net.names_.size(), 1.0);
    if (!pvalues.empty()) {
      for (std::size_t i = 0; i < net.names_.size(); ++i) {
        auto it = pvalues.find(net.names_[i]);
        if (it == pvalues.end()) {
          throw InputError("network '" + net.id_ + "': node '" + net.names_[i] +
                           "' has no p-value");
        }
        net.pvalues_[i] = it->second;
      }
    }
    for (std::size_t i = 0; i < net.names_.size(); ++i) {
      const double p = net.pvalues_[i];
      if (!(p > 0.0 && p <= 1.0)) {
        throw InputError("network '" + net.id_ + "': p-value of node '" +
                         net.names_[i] + "' is outside (0, 1]");
      }
    }
    return net;
  }

  const std::string& id() const { return id_; }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(NodeIndex v) const { return names_[v]; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const NodeIndex> neighbors(NodeIndex v) const {
    return adjacency_[v];
  }
  double pvalue(NodeIndex v) const { return pvalues_[v]; }
  const std::vector<double>& pvalues() const { return pvalues_; }

  std::optional<NodeIndex> Find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  NodeIndex IndexOf(std::string_view name) const {
    auto idx = Find(name);
    if (!idx) {
      throw InputError("network '" + id_ + "': unknown node '" +
                       std::string(name) + "'");
    }
    return *idx;
  }

  bool HasEdge(NodeIndex a, NodeIndex b) const {
    auto row = neighbors(a);
    return std::binary_search(row.begin(), row.end(), b);
  }

  // Same topology, replaced p-values (index order).
  Network WithPValues(std::vector<double> pvalues) const {
    if (pvalues.size() != size()) {
      throw InputError("network '" + id_ + "': p-value vector size mismatch");
    }
    for (double p : pvalues) {
      if (!(p > 0.0 && p <= 1.0)) {
        throw InputError("network '" + id_ + "': p-value outside (0, 1]");
      }
    }
    Network copy = *this;
    copy.pvalues_ = std::move(pvalues);
    return copy;
  }

  friend bool operator==(const Network& a, const Network& b) {
    return a.id_ == b.id_ && a.names_ == b.names_ && a.edges_ == b.edges_ &&
           a.pvalues_ == b.pvalues_;
  }

 private:
  std::string id_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeIndex> index_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeIndex>> adjacency_;
  std::vector<double> pvalues_;
};

// A node subset of a named network plus an edge set. Produced by
// InducedSubgraph the edge set is exactly the induced edges; the set
// operations combine edge sets literally and may leave dangling edges.
struct Subgraph {
  std::string network_id;
  std::vector<NodeIndex> nodes;  // sorted, unique
  std::vector<Edge> edges;       // sorted, unique, first < second

  bool empty() const { return nodes.empty(); }
  std::size_t size() const { return nodes.size(); }
  bool Contains(NodeIndex v) const {
    return std::binary_search(nodes.begin(), nodes.end(), v);
  }

  friend bool operator==(const Subgraph&, const Subgraph&) = default;
};

inline Subgraph EmptySubgraph(const Network& net) { return {net.id(), {}, {}}; }

inline Subgraph InducedSubgraph(const Network& net,
                                std::span<const NodeIndex> node_set) {
  Subgraph s{net.id(), {node_set.begin(), node_set.end()}, {}};
  std::sort(s.nodes.begin(), s.nodes.end());
  s.nodes.erase(std::unique(s.nodes.begin(), s.nodes.end()), s.nodes.end());
  for (NodeIndex v : s.nodes) {
    if (v < 0 || static_cast<std::size_t>(v) >= net.size()) {
      throw InputError("network '" + net.id() + "': node index " +
                       std::to_string(v) + " out of range");
    }
  }
  for (NodeIndex a : s.nodes) {
    for (NodeIndex b : net.neighbors(a)) {
      if (a < b && s.Contains(b)) s.edges.emplace_back(a, b);
    }
  }
  std::sort(s.edges.begin(), s.edges.end());
  return s;
}

inline Subgraph InducedSubgraph(const Network& net,
                                const std::vector<std::string>& node_names) {
  std::vector<NodeIndex> idx;
  idx.reserve(node_names.size());
  for (const auto& n : node_names) idx.push_back(net.IndexOf(n));
  return InducedSubgraph(net, idx);
}

inline std::vector<std::string> NodeNames(const Network& net,
                                          const Subgraph& s) {
  std::vector<std::string> out;
  out.reserve(s.nodes.size());
  for (NodeIndex v : s.nodes) out.push_back(net.name(v));
  return out;
}

enum class SetMode { kUnion, kIntersection, kDifference };

inline Subgraph SubgraphSetOp(const Subgraph& s1, const Subgraph& s2,
                              SetMode mode) {
  if (s1.network_id != s2.network_id) {
    throw InputError("subgraph set operation across networks '" +
                     s1.network_id + "' and '" + s2.network_id + "'");
  }
  Subgraph out{s1.network_id, {}, {}};
  auto combine = [mode](const auto& a, const auto& b, auto& dst) {
    auto it = std::back_inserter(dst);
    switch (mode) {
      case SetMode::kUnion:
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), it);
        break;
      case SetMode::kIntersection:
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), it);
        break;
      case SetMode::kDifference:
        std::set_difference(a.begin(), a.end(), b.begin(), b.end(), it);
        break;
    }
  };
  combine(s1.nodes, s2.nodes, out.nodes);
  combine(s1.edges, s2.edges, out.edges);
  return out;
}

namespace internal {

// Components of the graph (nodes, edges restricted to nodes), each sorted,
// ordered by smallest member.
inline std::vector<std::vector<NodeIndex>> Components(
    const std::vector<NodeIndex>& nodes, const std::vector<Edge>& edges) {
  std::unordered_map<NodeIndex, std::size_t> pos;
  for (std::size_t i = 0; i < nodes.size(); ++i) pos.emplace(nodes[i], i);
  std::vector<std::size_t> parent(nodes.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  auto find = [&parent](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [a, b] : edges) {
    auto ia = pos.find(a);
    auto ib = pos.find(b);
    if (ia == pos.end() || ib == pos.end()) continue;
    std::size_t ra = find(ia->second), rb = find(ib->second);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::map<std::size_t, std::vector<NodeIndex>> groups;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    groups[find(i)].push_back(nodes[i]);
  }
  std::vector<std::vector<NodeIndex>> out;
  out.reserve(groups.size());
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  std::sort(out.begin(), out.end(),
            [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return out;
}

}  // namespace internal

// Empty and singleton subgraphs are connected. Edges with an endpoint
// outside the node set are ignored.
inline bool IsConnected(const Subgraph& s) {
  if (s.nodes.size() <= 1) return true;
  return internal::Components(s.nodes, s.edges).size() == 1;
}

inline std::vector<Subgraph> ConnectedComponents(const Subgraph& s) {
  std::vector<Subgraph> out;
  for (auto& members : internal::Components(s.nodes, s.edges)) {
    Subgraph c{s.network_id, std::move(members), {}};
    for (const auto& e : s.edges) {
      if (c.Contains(e.first) && c.Contains(e.second)) c.edges.push_back(e);
    }
    out.push_back(std::move(c));
  }
  return out;
}

// Connectivity of a node set under the network's own edges.
inline bool IsConnectedInNetwork(const Network& net,
                                 std::span<const NodeIndex> nodes) {
  if (nodes.size() <= 1) return true;
  std::vector<NodeIndex> sorted(nodes.begin(), nodes.end());
  std::sort(sorted.begin(), sorted.end());
  auto member = [&sorted](NodeIndex v) {
    return std::binary_search(sorted.begin(), sorted.end(), v);
  };
  std::vector<NodeIndex> stack{sorted.front()};
  std::vector<NodeIndex> visited{sorted.front()};
  while (!stack.empty()) {
    NodeIndex v = stack.back();
    stack.pop_back();
    for (NodeIndex w : net.neighbors(v)) {
      if (member(w) &&
          std::find(visited.begin(), visited.end(), w) == visited.end()) {
        visited.push_back(w);
        stack.push_back(w);
      }
    }
  }
  return visited.size() == sorted.size();
}

}  // namespace fedanomaly
