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

// Synthetic scenarios with planted correlated anomalies, the detection
// metrics and the anchor-link count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fedanomaly/alignment.hpp"
#include "fedanomaly/errors.hpp"
#include "fedanomaly/federation.hpp"
#include "fedanomaly/graph.hpp"
#include "fedanomaly/io.hpp"
#include "fedanomaly/rng.hpp"

namespace fedanomaly {

struct ScenarioSpec {
  std::uint64_t rng_seed = 1;
  std::size_t n_owners = 3;
  std::size_t nodes_per_owner = 200;
  std::size_t public_nodes = 200;
  // Fraction of all node pairs that are edges; a spanning tree is always
  // laid first, so graphs are connected. `tree` skips the extra edges.
  double edge_density = 0.015;
  bool tree = false;
  std::size_t planted_public_size = 15;
  std::size_t planted_private_size = 20;
  double anomaly_p_low = 0.01;
  // Background p-values are uniform on (background_p_min, 1]. The default
  // keeps background nodes above the usual significance level so false
  // signals come from the noise mechanism.
  double background_p_min = 0.2;
  // A true anchor qualifies (probability drawn from [sigma, 1]) with this
  // probability; otherwise its probability is drawn below sigma.
  double alignment_true_prob = 0.95;
  // Each private node also gets one decoy pair, qualifying with this
  // probability.
  double alignment_false_prob = 0.05;
  double noise_fraction = 0.10;
  double sigma = 0.8;
  // 1-based owner indices whose p-values are all set to 1.
  std::vector<std::size_t> attributeless_owners;

  void Validate() const {
    if (n_owners < 1) throw InputError("scenario: n_owners must be >= 1");
    if (nodes_per_owner < 1 || public_nodes < 1) {
      throw InputError("scenario: networks need at least one node");
    }
    if (planted_private_size > nodes_per_owner) {
      throw InputError(
          "scenario: planted_private_size exceeds nodes_per_owner");
    }
    if (planted_public_size > public_nodes) {
      throw InputError("scenario: planted_public_size exceeds public_nodes");
    }
    if (planted_private_size > 0 && planted_public_size == 0) {
      throw InputError("scenario: a private anomaly needs a public anomaly");
    }
    if (!(edge_density >= 0.0 && edge_density <= 1.0)) {
      throw InputError("scenario: edge_density must lie in [0, 1]");
    }
    for (double p :
         {alignment_true_prob, alignment_false_prob, noise_fraction}) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw InputError("scenario: probabilities must lie in [0, 1]");
      }
    }
    if (!(anomaly_p_low > 0.0 && anomaly_p_low <= 1.0)) {
      throw InputError("scenario: anomaly_p_low must lie in (0, 1]");
    }
    if (!(background_p_min >= 0.0 && background_p_min < 1.0)) {
      throw InputError("scenario: background_p_min must lie in [0, 1)");
    }
    if (!(sigma > 0.0 && sigma < 1.0)) {
      throw InputError("scenario: sigma must lie in (0, 1)");
    }
    for (std::size_t i : attributeless_owners) {
      if (i < 1 || i > n_owners) {
        throw InputError("scenario: attributeless owner index out of range");
      }
    }
  }
};

struct Anchor {
  std::string owner_id;
  std::string private_node;
  std::string public_node;

  friend auto operator<=>(const Anchor&, const Anchor&) = default;
};

struct GroundTruth {
  std::map<std::string, std::vector<std::string>> owner_anomalies;
  std::vector<std::string> public_anomaly;
  std::vector<Anchor> anchors;  // qualifying planted pairs

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Scenario {
  ScenarioSpec spec;
  Network public_network;
  std::vector<OwnerInput> owners;
  GroundTruth truth;
};

inline constexpr const char* kPublicNetworkId = "public";

namespace internal {

inline std::string PaddedName(const std::string& prefix, std::size_t i,
                              std::size_t count) {
  std::string digits = std::to_string(i);
  const std::size_t width = std::to_string(count == 0 ? 0 : count - 1).size();
  return prefix + std::string(width - std::min(width, digits.size()), '0') +
         digits;
}

// Uniform labeled spanning tree (random Pruefer sequence) plus random extra
// edges up to the requested density.
inline std::vector<Edge> RandomConnectedGraph(std::size_t n, double density,
                                              bool tree, Rng& rng) {
  std::vector<Edge> edges;
  if (n < 2) return edges;
  if (n == 2) {
    edges.emplace_back(0, 1);
  } else {
    std::vector<std::size_t> pruefer(n - 2);
    for (auto& x : pruefer) x = rng.Below(n);
    std::vector<std::size_t> degree(n, 1);
    for (auto x : pruefer) ++degree[x];
    std::set<std::size_t> leaves;
    for (std::size_t v = 0; v < n; ++v) {
      if (degree[v] == 1) leaves.insert(v);
    }
    for (auto x : pruefer) {
      const std::size_t leaf = *leaves.begin();
      leaves.erase(leaves.begin());
      edges.emplace_back(static_cast<NodeIndex>(std::min(leaf, x)),
                         static_cast<NodeIndex>(std::max(leaf, x)));
      if (--degree[x] == 1) leaves.insert(x);
    }
    const std::size_t a = *leaves.begin();
    const std::size_t b = *std::next(leaves.begin());
    edges.emplace_back(static_cast<NodeIndex>(a), static_cast<NodeIndex>(b));
  }
  if (!tree) {
    const std::size_t max_edges = n * (n - 1) / 2;
    const auto target = std::min<std::size_t>(
        max_edges, std::max<std::size_t>(
                       n - 1, static_cast<std::size_t>(std::llround(
                                  density * static_cast<double>(max_edges)))));
    std::set<Edge> present(edges.begin(), edges.end());
    while (present.size() < target) {
      const auto u = static_cast<NodeIndex>(rng.Below(n));
      const auto v = static_cast<NodeIndex>(rng.Below(n));
      if (u == v) continue;
      present.insert({std::min(u, v), std::max(u, v)});
    }
    edges.assign(present.begin(), present.end());
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

// Connected node set of the given size grown from a random start by adding
// uniformly chosen frontier nodes.
inline std::vector<NodeIndex> RandomConnectedSet(const Network& net,
                                                 std::size_t size, Rng& rng) {
  std::vector<NodeIndex> chosen;
  if (size == 0) return chosen;
  std::vector<char> in(net.size(), 0);
  std::vector<NodeIndex> frontier;
  auto add = [&](NodeIndex v) {
    in[v] = 1;
    chosen.push_back(v);
    frontier.erase(std::remove(frontier.begin(), frontier.end(), v),
                   frontier.end());
    for (NodeIndex w : net.neighbors(v)) {
      if (!in[w] &&
          std::find(frontier.begin(), frontier.end(), w) == frontier.end()) {
        frontier.push_back(w);
      }
    }
  };
  add(static_cast<NodeIndex>(rng.Below(net.size())));
  while (chosen.size() < size) {
    if (frontier.empty()) {
      throw InputError("scenario: graph component smaller than planted size");
    }
    add(frontier[rng.Below(frontier.size())]);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

inline Network BuildNamedNetwork(const std::string& id,
                                 const std::string& prefix, std::size_t n,
                                 const std::vector<Edge>& edges) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back(PaddedName(prefix, i, n));
  std::vector<NamedEdge> named;
  for (const auto& [a, b] : edges) named.emplace_back(names[a], names[b]);
  return Network::Build(id, names, named, {});
}

}  // namespace internal

// Deterministic in spec.rng_seed. Owner k (1-based) is named "owner<k>" with
// nodes "o<k>_v<i>"; public nodes are "p<i>".
inline Scenario GenerateScenario(const ScenarioSpec& spec) {
  spec.Validate();
  Scenario sc;
  sc.spec = spec;

  Rng pub_rng(MixSeed(spec.rng_seed, 0));
  const auto pub_edges = internal::RandomConnectedGraph(
      spec.public_nodes, spec.edge_density, spec.tree, pub_rng);
  sc.public_network = internal::BuildNamedNetwork(kPublicNetworkId, "p",
                                                  spec.public_nodes, pub_edges);
  const Network& pub = sc.public_network;
  const auto planted_public =
      internal::RandomConnectedSet(pub, spec.planted_public_size, pub_rng);
  std::vector<char> pub_planted(pub.size(), 0);
  for (NodeIndex w : planted_public) pub_planted[w] = 1;
  std::vector<NodeIndex> pub_background;
  for (std::size_t w = 0; w < pub.size(); ++w) {
    if (!pub_planted[w]) pub_background.push_back(static_cast<NodeIndex>(w));
  }
  sc.truth.public_anomaly =
      NodeNames(pub, InducedSubgraph(pub, planted_public));

  for (std::size_t k = 1; k <= spec.n_owners; ++k) {
    Rng rng(MixSeed(spec.rng_seed, k));
    const std::string owner_id = "owner" + std::to_string(k);
    const std::size_t n = spec.nodes_per_owner;
    const auto edges =
        internal::RandomConnectedGraph(n, spec.edge_density, spec.tree, rng);
    Network topo = internal::BuildNamedNetwork(
        owner_id, "o" + std::to_string(k) + "_v", n, edges);
    const auto planted =
        internal::RandomConnectedSet(topo, spec.planted_private_size, rng);
    std::vector<char> is_planted(n, 0);
    for (NodeIndex v : planted) is_planted[v] = 1;

    std::vector<double> p(n);
    for (std::size_t v = 0; v < n; ++v) {
      p[v] = is_planted[v]
                 ? spec.anomaly_p_low
                 : spec.background_p_min +
                       (1.0 - spec.background_p_min) * rng.UniformOpenClosed();
    }
    const auto noisy = static_cast<std::size_t>(
        std::llround(spec.noise_fraction * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    for (std::size_t v = 0; v < n; ++v) order[v] = v;
    rng.Shuffle(std::span<std::size_t>(order));
    for (std::size_t i = 0; i < noisy; ++i)
      p[order[i]] = rng.UniformOpenClosed();
    const bool attributeless = std::find(spec.attributeless_owners.begin(),
                                         spec.attributeless_owners.end(),
                                         k) != spec.attributeless_owners.end();
    if (attributeless) std::fill(p.begin(), p.end(), 1.0);
    Network net = topo.WithPValues(p);

    // Counterparts: planted nodes are dealt round-robin onto a shuffled
    // planted public anomaly, so public multiplicities differ by at most
    // one; background nodes map onto random background public nodes.
    std::vector<NodeIndex> planted_order = planted;
    rng.Shuffle(std::span<NodeIndex>(planted_order));
    std::vector<NodeIndex> pub_order = planted_public;
    rng.Shuffle(std::span<NodeIndex>(pub_order));
    std::vector<NodeIndex> counterpart(n, -1);
    for (std::size_t i = 0; i < planted_order.size(); ++i) {
      counterpart[planted_order[i]] = pub_order[i % pub_order.size()];
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (counterpart[v] >= 0) continue;
      const auto& pool =
          pub_background.empty() ? planted_public : pub_background;
      counterpart[v] = pool[rng.Below(pool.size())];
    }

    OwnerInput owner{owner_id, net, {}};
    for (std::size_t v = 0; v < n; ++v) {
      const auto node = static_cast<NodeIndex>(v);
      const bool qualifies = rng.Bernoulli(spec.alignment_true_prob);
      const double prob = qualifies ? rng.Uniform(spec.sigma, 1.0)
                                    : rng.Uniform(0.0, spec.sigma);
      owner.alignment.push_back(
          {net.name(node), pub.name(counterpart[v]), prob});
      if (is_planted[v] && qualifies) {
        sc.truth.anchors.push_back(
            {owner_id, net.name(node), pub.name(counterpart[v])});
      }
      if (pub.size() > 1) {
        NodeIndex decoy = static_cast<NodeIndex>(rng.Below(pub.size() - 1));
        if (decoy >= counterpart[v]) ++decoy;
        const bool decoy_qualifies = rng.Bernoulli(spec.alignment_false_prob);
        const double decoy_prob = decoy_qualifies
                                      ? rng.Uniform(spec.sigma, 1.0)
                                      : rng.Uniform(0.0, spec.sigma);
        owner.alignment.push_back(
            {net.name(node), pub.name(decoy), decoy_prob});
      }
    }
    sc.truth.owner_anomalies[owner_id] =
        NodeNames(net, InducedSubgraph(net, planted));
    sc.owners.push_back(std::move(owner));
  }
  std::sort(sc.truth.anchors.begin(), sc.truth.anchors.end());
  return sc;
}

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double tpr = 0.0;
  double fnr = 0.0;
  std::size_t anchor_count = 0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  // Set when a ratio had an empty denominator and was reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
};

struct OwnerEvaluation {
  std::string owner_id;
  std::size_t num_nodes = 0;
  std::vector<std::string> detected;
  std::vector<std::string> truth;
};

// Micro-averaged over every owner node; positives are ground-truth anomaly
// nodes.
inline MetricsReport EvaluateMetrics(
    const std::vector<OwnerEvaluation>& owners) {
  MetricsReport m;
  std::size_t total = 0;
  for (const auto& o : owners) {
    std::set<std::string> detected(o.detected.begin(), o.detected.end());
    std::set<std::string> truth(o.truth.begin(), o.truth.end());
    std::set<std::string> all = detected;
    all.insert(truth.begin(), truth.end());
    if (all.size() > o.num_nodes) {
      throw InputError("evaluation of '" + o.owner_id +
                       "': more labeled nodes than the network holds");
    }
    std::size_t tp = 0;
    for (const auto& v : detected) tp += truth.count(v);
    m.tp += tp;
    m.fp += detected.size() - tp;
    m.fn += truth.size() - tp;
    m.tn += o.num_nodes - all.size();
    total += o.num_nodes;
  }
  auto ratio = [](std::size_t num, std::size_t den, bool& undefined) {
    undefined = den == 0;
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  bool unused = false;
  m.precision = ratio(m.tp, m.tp + m.fp, m.precision_undefined);
  m.recall = ratio(m.tp, m.tp + m.fn, m.recall_undefined);
  m.tpr = m.recall;
  m.fnr = m.recall_undefined ? 0.0 : ratio(m.fn, m.tp + m.fn, unused);
  m.accuracy = ratio(m.tp + m.tn, total, unused);
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

// Truth anchors whose private node is in the owner's final S and whose
// public node is in the final U.
inline std::size_t AnchorCount(
    const std::map<std::string, std::vector<std::string>>& final_s,
    const std::vector<std::string>& final_u,
    const std::vector<Anchor>& truth_anchors) {
  const std::set<std::string> u(final_u.begin(), final_u.end());
  std::size_t count = 0;
  for (const auto& a : truth_anchors) {
    auto it = final_s.find(a.owner_id);
    if (it == final_s.end() || u.count(a.public_node) == 0) continue;
    if (std::find(it->second.begin(), it->second.end(), a.private_node) !=
        it->second.end()) {
      ++count;
    }
  }
  return count;
}

// Rows `owner<TAB>node` for owner anomalies, `public<TAB>node` for the
// public anomaly and `owner<TAB>private<TAB>public` for anchors.
inline std::string SerializeTruth(const GroundTruth& t) {
  std::string out;
  for (const auto& [owner, nodes] : t.owner_anomalies) {
    for (const auto& v : nodes) out += owner + "\t" + v + "\n";
  }
  for (const auto& v : t.public_anomaly) {
    out += std::string(kPublicNetworkId) + "\t" + v + "\n";
  }
  for (const auto& a : t.anchors) {
    out += a.owner_id + "\t" + a.private_node + "\t" + a.public_node + "\n";
  }
  return out;
}

inline GroundTruth ReadTruth(const std::filesystem::path& path) {
  GroundTruth t;
  ForEachTsvRow(path, [&](const std::vector<std::string>& f, std::size_t) {
    if (f.size() == 2) {
      if (f[0] == kPublicNetworkId) {
        t.public_anomaly.push_back(f[1]);
      } else {
        t.owner_anomalies[f[0]].push_back(f[1]);
      }
    } else if (f.size() == 3) {
      t.anchors.push_back({f[0], f[1], f[2]});
    } else {
      throw InputError("expected 2 or 3 tab-separated fields");
    }
  });
  for (auto& [owner, nodes] : t.owner_anomalies)
    std::sort(nodes.begin(), nodes.end());
  std::sort(t.public_anomaly.begin(), t.public_anomaly.end());
  std::sort(t.anchors.begin(), t.anchors.end());
  return t;
}

inline Json SpecToJson(const ScenarioSpec& s) {
  Json j;
  j["rng_seed"] = s.rng_seed;
  j["n_owners"] = s.n_owners;
  j["nodes_per_owner"] = s.nodes_per_owner;
  j["public_nodes"] = s.public_nodes;
  j["edge_density"] = s.edge_density;
  j["tree"] = s.tree;
  j["planted_public_size"] = s.planted_public_size;
  j["planted_private_size"] = s.planted_private_size;
  j["anomaly_p_low"] = s.anomaly_p_low;
  j["background_p_min"] = s.background_p_min;
  j["alignment_true_prob"] = s.alignment_true_prob;
  j["alignment_false_prob"] = s.alignment_false_prob;
  j["noise_fraction"] = s.noise_fraction;
  j["sigma"] = s.sigma;
  j["attributeless_owners"] = s.attributeless_owners;
  return j;
}

inline ScenarioSpec SpecFromJson(const Json& j) {
  if (!j.is_object()) throw InputError("scenario spec must be an object");
  ScenarioSpec s;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "rng_seed")
        s.rng_seed = v.get<std::uint64_t>();
      else if (key == "n_owners")
        s.n_owners = v.get<std::size_t>();
      else if (key == "nodes_per_owner")
        s.nodes_per_owner = v.get<std::size_t>();
      else if (key == "public_nodes")
        s.public_nodes = v.get<std::size_t>();
      else if (key == "edge_density")
        s.edge_density = v.get<double>();
      else if (key == "tree")
        s.tree = v.get<bool>();
      else if (key == "planted_public_size")
        s.planted_public_size = v.get<std::size_t>();
      else if (key == "planted_private_size")
        s.planted_private_size = v.get<std::size_t>();
      else if (key == "anomaly_p_low")
        s.anomaly_p_low = v.get<double>();
      else if (key == "background_p_min")
        s.background_p_min = v.get<double>();
      else if (key == "alignment_true_prob")
        s.alignment_true_prob = v.get<double>();
      else if (key == "alignment_false_prob")
        s.alignment_false_prob = v.get<double>();
      else if (key == "noise_fraction")
        s.noise_fraction = v.get<double>();
      else if (key == "sigma")
        s.sigma = v.get<double>();
      else if (key == "attributeless_owners") {
        s.attributeless_owners = v.get<std::vector<std::size_t>>();
      } else {
        throw InputError("unknown scenario field '" + key + "'");
      }
    }
  } catch (const Json::exception& e) {
    throw InputError(std::string("scenario spec: ") + e.what());
  }
  s.Validate();
  return s;
}

}  // namespace fedanomaly
