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

// Alignment probabilities between one private network and the public
// network, and the alignment score Q between a private and a public
// subgraph.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fedanomaly/errors.hpp"
#include "fedanomaly/graph.hpp"
#include "fedanomaly/io.hpp"

namespace fedanomaly {

struct AlignmentEntry {
  std::string private_node;
  std::string public_node;
  double probability = 0.0;
};

// Sparse alignment probabilities. A pair qualifies when its probability is
// >= sigma (inclusive).
class AlignmentMap {
 public:
  struct Entry {
    NodeIndex private_node;
    NodeIndex public_node;
    double probability;
  };

  AlignmentMap() = default;

  static AlignmentMap Build(std::string owner_id, const Network& private_net,
                            const Network& public_net,
                            const std::vector<AlignmentEntry>& entries,
                            double sigma) {
    if (!(sigma > 0.0 && sigma <= 1.0)) {
      throw InputError("sigma must lie in (0, 1]");
    }
    AlignmentMap m;
    m.owner_id_ = std::move(owner_id);
    m.private_id_ = private_net.id();
    m.public_id_ = public_net.id();
    m.private_size_ = private_net.size();
    m.public_size_ = public_net.size();
    m.sigma_ = sigma;
    m.entries_.reserve(entries.size());
    for (const auto& e : entries) {
      if (!(e.probability >= 0.0 && e.probability <= 1.0)) {
        throw InputError("alignment probability of (" + e.private_node + ", " +
                         e.public_node + ") outside [0, 1]");
      }
      m.entries_.push_back({private_net.IndexOf(e.private_node),
                            public_net.IndexOf(e.public_node), e.probability});
    }
    m.Finalize();
    return m;
  }

  const std::string& owner_id() const { return owner_id_; }
  const std::string& private_network_id() const { return private_id_; }
  const std::string& public_network_id() const { return public_id_; }
  double sigma() const { return sigma_; }
  const std::vector<Entry>& entries() const { return entries_; }

  // Public nodes w with A(v, w) >= sigma, ascending.
  std::span<const NodeIndex> QualifyingPublic(NodeIndex private_node) const {
    return forward_[private_node];
  }
  // Private nodes v with A(v, w) >= sigma, ascending.
  std::span<const NodeIndex> QualifyingPrivate(NodeIndex public_node) const {
    return backward_[public_node];
  }

  AlignmentMap WithSigma(double sigma) const {
    if (!(sigma > 0.0 && sigma <= 1.0)) {
      throw InputError("sigma must lie in (0, 1]");
    }
    AlignmentMap m = *this;
    m.sigma_ = sigma;
    m.Finalize();
    return m;
  }

  // Roles of the two networks exchanged.
  AlignmentMap Transposed() const {
    AlignmentMap m = *this;
    std::swap(m.private_id_, m.public_id_);
    std::swap(m.private_size_, m.public_size_);
    for (auto& e : m.entries_) std::swap(e.private_node, e.public_node);
    m.Finalize();
    return m;
  }

  // Same network ids and sizes, replaced probabilities.
  AlignmentMap WithEntries(std::vector<Entry> entries) const {
    AlignmentMap m = *this;
    m.entries_ = std::move(entries);
    m.Finalize();
    return m;
  }

 private:
  void Finalize() {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) {
                return std::pair(a.private_node, a.public_node) <
                       std::pair(b.private_node, b.public_node);
              });
    for (std::size_t i = 1; i < entries_.size(); ++i) {
      if (entries_[i].private_node == entries_[i - 1].private_node &&
          entries_[i].public_node == entries_[i - 1].public_node) {
        throw InputError("alignment of owner '" + owner_id_ +
                         "' lists a node pair twice");
      }
    }
    forward_.assign(private_size_, {});
    backward_.assign(public_size_, {});
    for (const auto& e : entries_) {
      if (e.probability >= sigma_) {
        forward_[e.private_node].push_back(e.public_node);
        backward_[e.public_node].push_back(e.private_node);
      }
    }
    for (auto& row : backward_) std::sort(row.begin(), row.end());
  }

  std::string owner_id_;
  std::string private_id_;
  std::string public_id_;
  std::size_t private_size_ = 0;
  std::size_t public_size_ = 0;
  double sigma_ = 0.8;
  std::vector<Entry> entries_;
  std::vector<std::vector<NodeIndex>> forward_;
  std::vector<std::vector<NodeIndex>> backward_;
};

// The binary alignment matrix as the list of (private, public) pairs at or
// above sigma, in (private, public) order.
inline std::vector<Edge> ThresholdMatrix(const AlignmentMap& map) {
  std::vector<Edge> out;
  for (const auto& e : map.entries()) {
    if (e.probability >= map.sigma()) {
      out.emplace_back(e.private_node, e.public_node);
    }
  }
  return out;
}

// Number of qualifying (a, b) pairs with a in s_nodes and b in u_nodes. Both
// node lists must be sorted. A private node aligned to two public nodes of U
// contributes two pairs.
inline std::size_t CountQualifyingPairs(const AlignmentMap& map,
                                        std::span<const NodeIndex> s_nodes,
                                        std::span<const NodeIndex> u_nodes) {
  std::size_t count = 0;
  for (NodeIndex a : s_nodes) {
    for (NodeIndex b : map.QualifyingPublic(a)) {
      if (std::binary_search(u_nodes.begin(), u_nodes.end(), b)) ++count;
    }
  }
  return count;
}

// Q(S, U) = N_sigma / N(S) + N_sigma / N(U), zero if either side is empty.
inline double QFromCounts(std::size_t pairs, std::size_t s_size,
                          std::size_t u_size) {
  if (s_size == 0 || u_size == 0) return 0.0;
  const double p = static_cast<double>(pairs);
  return p / static_cast<double>(s_size) + p / static_cast<double>(u_size);
}

inline double QScore(const Subgraph& s, const Subgraph& u,
                     const AlignmentMap& map) {
  if ((!s.empty() && s.network_id != map.private_network_id()) ||
      (!u.empty() && u.network_id != map.public_network_id())) {
    throw ContractError(
        "alignment score: subgraphs do not match the "
        "alignment's networks");
  }
  return QFromCounts(CountQualifyingPairs(map, s.nodes, u.nodes), s.size(),
                     u.size());
}

inline std::vector<AlignmentEntry> ReadAlignmentFile(
    const std::filesystem::path& path) {
  std::vector<AlignmentEntry> out;
  ForEachTsvRow(path, [&](const std::vector<std::string>& f, std::size_t) {
    if (f.size() != 3 || f[0].empty() || f[1].empty()) {
      throw InputError("expected 'private<TAB>public<TAB>probability'");
    }
    const double p = ParseDouble(f[2]);
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InputError("alignment probability outside [0, 1]");
    }
    out.push_back({f[0], f[1], p});
  });
  return out;
}

inline std::string SerializeAlignment(const AlignmentMap& map,
                                      const Network& private_net,
                                      const Network& public_net) {
  std::string out;
  for (const auto& e : map.entries()) {
    out += private_net.name(e.private_node);
    out += '\t';
    out += public_net.name(e.public_node);
    out += '\t';
    out += FormatDouble(e.probability);
    out += '\n';
  }
  return out;
}

}  // namespace fedanomaly
