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

#include "fedanomaly/participant.hpp"

#include <gtest/gtest.h>

#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "test_util.hpp"

namespace fedanomaly {
namespace {

using testing_util::MakeNetwork;

OwnerState MakeState(const Network& net, const Network& pub,
                     const std::vector<AlignmentEntry>& entries,
                     double lambda = 1.0) {
  OwnerState s;
  s.owner_id = "o";
  s.network = net;
  s.alignment = AlignmentMap::Build("o", net, pub, entries, 0.8);
  s.lambda = lambda;
  s.current_s = EmptySubgraph(net);
  s.current_u_local = EmptySubgraph(pub);
  return s;
}

SearchConfig Greedy() {
  SearchConfig c;
  c.exact_threshold = 0;
  return c;
}

SearchConfig Exact() {
  SearchConfig c;
  c.exact_threshold = kMaxExhaustiveNodes;
  return c;
}

// a-b-c-d-e-f path plus chord b-e; planted a, b, c.
Network PlantedSix() {
  return MakeNetwork(
      "own", {},
      {{"a", "b"}, {"b", "c"}, {"c", "d"}, {"d", "e"}, {"e", "f"}, {"b", "e"}},
      {{"a", 0.01},
       {"b", 0.01},
       {"c", 0.01},
       {"d", 0.9},
       {"e", 0.9},
       {"f", 0.9}});
}

Network PublicPath(std::size_t n) {
  std::vector<NamedEdge> edges;
  for (std::size_t i = 1; i < n; ++i) {
    edges.push_back({"w" + std::to_string(i), "w" + std::to_string(i + 1)});
  }
  return MakeNetwork("public", {}, edges);
}

std::vector<std::string> Names(const Network& net, const Subgraph& s) {
  return NodeNames(net, s);
}

TEST(SearchConfigTest, Validates) {
  SearchConfig c;
  c.max_restarts = 0;
  EXPECT_THROW(c.Validate(), InputError);
  c = SearchConfig{};
  c.exact_threshold = 15;
  EXPECT_THROW(c.Validate(), InputError);
}

TEST(ExhaustiveTest, SingleNode) {
  Network net = MakeNetwork("g", {"a"}, {}, {{"a", 0.01}});
  auto obj = [](std::span<const NodeIndex> s) { return double(s.size()); };
  EXPECT_EQ(ExhaustiveConnectedArgmax(net, obj).size(), 1u);
  auto neg = [](std::span<const NodeIndex> s) { return -double(s.size()); };
  EXPECT_TRUE(ExhaustiveConnectedArgmax(net, neg).empty());
}

TEST(ExhaustiveTest, ConstantObjectivePrefersEmpty) {
  Network net = PlantedSix();
  auto obj = [](std::span<const NodeIndex>) { return 0.5; };
  EXPECT_TRUE(ExhaustiveConnectedArgmax(net, obj).empty());
}

TEST(ExhaustiveTest, TooLargeRejected) {
  std::vector<NamedEdge> edges;
  for (int i = 1; i < 15; ++i) {
    edges.push_back({oracle::NodeName("v", i - 1), oracle::NodeName("v", i)});
  }
  Network net = MakeNetwork("g", {}, edges);
  auto obj = [](std::span<const NodeIndex>) { return 0.0; };
  EXPECT_THROW(ExhaustiveConnectedArgmax(net, obj), InputError);
  EXPECT_THROW(ExhaustiveConnectedArgmax(PlantedSix(), obj, 5), InputError);
}

TEST(ExhaustiveTest, VisitsExactlyTheConnectedSubsets) {
  Rng rng(2);
  for (int k = 0; k < 30; ++k) {
    Network net = oracle::RandomNetwork(rng, "g", "v", 3 + rng.Below(8),
                                        rng.Below(4), 0.3);
    std::set<std::vector<NodeIndex>> seen;
    auto record = [&seen](std::span<const NodeIndex> s) {
      seen.insert({s.begin(), s.end()});
      return 0.0;
    };
    ExhaustiveConnectedArgmax(net, record);
    std::set<std::vector<NodeIndex>> expected;
    for (const auto& s : oracle::ConnectedSubsets(net)) {
      expected.insert({s.begin(), s.end()});
    }
    EXPECT_EQ(seen, expected);
  }
}

TEST(DetectPrivateAnomalyTest, PlantedTripleAtLambdaZero) {
  Network net = PlantedSix();
  Network pub = PublicPath(3);
  OwnerState st = MakeState(net, pub, {}, 0.0);
  for (const auto& search : {Exact(), Greedy()}) {
    Subgraph s = DetectPrivateAnomaly(st, EmptySubgraph(pub), search);
    EXPECT_EQ(Names(net, s), (std::vector<std::string>{"a", "b", "c"}));
  }
}

TEST(DetectPrivateAnomalyTest, EmptyPublicAnomalyIgnoresLambda) {
  Rng rng(13);
  for (int k = 0; k < 40; ++k) {
    Network net = oracle::RandomNetwork(rng, "own", "v", 10, 4, 0.3);
    Network pub = oracle::RandomNetwork(rng, "public", "w", 6, 2, 0.0);
    OwnerState st =
        MakeState(net, pub, oracle::RandomAlignment(rng, net, pub, 2), 3.0);
    for (const auto& search : {Exact(), Greedy()}) {
      EXPECT_EQ(DetectPrivateAnomaly(st, EmptySubgraph(pub), search),
                DetectPrivateAnomaly(st, EmptySubgraph(pub), search, 0.0));
    }
  }
}

// With every p-value at 1 only the alignment term matters, and the best S
// is the aligned pre-image of U.
TEST(DetectPrivateAnomalyTest, AttributelessOwnerFollowsAlignment) {
  Network net = MakeNetwork("own", {},
                            {{"a", "b"},
                             {"b", "c"},
                             {"c", "d"},
                             {"d", "e"},
                             {"e", "f"},
                             {"f", "g"},
                             {"c", "h"},
                             {"h", "i"},
                             {"i", "j"},
                             {"j", "k"},
                             {"k", "l"}});
  Network pub = PublicPath(6);
  std::vector<AlignmentEntry> entries{{"c", "w2", 0.9},
                                      {"d", "w3", 0.95},
                                      {"e", "w4", 0.85},
                                      {"a", "w6", 0.2},
                                      {"k", "w1", 0.5}};
  OwnerState st = MakeState(net, pub, entries, 1.0);
  Subgraph u = InducedSubgraph(pub, std::vector<std::string>{"w2", "w3", "w4"});
  const auto objective = PrivateObjective(st, u, 1.0);
  Subgraph oracle_best = ExhaustiveConnectedArgmax(net, objective);
  EXPECT_EQ(Names(net, oracle_best), (std::vector<std::string>{"c", "d", "e"}));
  for (const auto& search : {Exact(), Greedy()}) {
    EXPECT_EQ(DetectPrivateAnomaly(st, u, search), oracle_best);
  }
}

TEST(DetectPrivateAnomalyTest, KeepsIncumbentUnlessStrictlyBetter) {
  Network net = PlantedSix();
  Network pub = PublicPath(3);
  OwnerState st = MakeState(net, pub, {}, 0.0);
  // {a, b, c, d} is worse than the triple but the search beats it.
  st.current_s =
      InducedSubgraph(net, std::vector<std::string>{"a", "b", "c", "d"});
  EXPECT_EQ(Names(net, DetectPrivateAnomaly(st, EmptySubgraph(pub), Greedy())),
            (std::vector<std::string>{"a", "b", "c"}));
  // The optimum itself is kept.
  st.current_s = InducedSubgraph(net, std::vector<std::string>{"a", "b", "c"});
  EXPECT_EQ(DetectPrivateAnomaly(st, EmptySubgraph(pub), Greedy()),
            st.current_s);
}

TEST(DetectPrivateAnomalyTest, NeverBelowIncumbentAndAlwaysConnected) {
  Rng rng(31);
  for (int k = 0; k < 150; ++k) {
    Network net = oracle::RandomNetwork(rng, "own", "v", 14 + rng.Below(20),
                                        rng.Below(10), 0.25);
    Network pub = oracle::RandomNetwork(rng, "public", "w", 10, 3, 0.0);
    OwnerState st =
        MakeState(net, pub, oracle::RandomAlignment(rng, net, pub, 2), 1.0);
    std::vector<NodeIndex> u_nodes;
    for (std::size_t w = 0; w < pub.size(); ++w) {
      if (rng.Bernoulli(0.5)) u_nodes.push_back(static_cast<NodeIndex>(w));
    }
    Subgraph u = InducedSubgraph(pub, u_nodes);
    // Random connected incumbent: a BFS ball.
    std::vector<NodeIndex> ball{static_cast<NodeIndex>(rng.Below(net.size()))};
    for (NodeIndex w : net.neighbors(ball[0])) ball.push_back(w);
    st.current_s = InducedSubgraph(net, ball);
    SearchConfig search = Greedy();
    search.rng_seed = k;
    Subgraph s = DetectPrivateAnomaly(st, u, search);
    EXPECT_TRUE(IsConnected(s));
    EXPECT_GE(LocalObjectiveValue(st, s, u, 1.0) + 1e-12,
              LocalObjectiveValue(st, st.current_s, u, 1.0));
    EXPECT_EQ(DetectPrivateAnomaly(st, u, search), s);  // deterministic
  }
}

TEST(BestPublicAlignmentTest, AdjacentImage) {
  Network net = MakeNetwork("own", {}, {{"a", "b"}});
  Network pub = PublicPath(5);
  OwnerState st = MakeState(net, pub, {{"a", "w2", 0.9}, {"b", "w3", 0.9}});
  st.current_s = InducedSubgraph(net, std::vector<std::string>{"a", "b"});
  for (const auto& search : {Exact(), Greedy()}) {
    EXPECT_EQ(Names(pub, BestPublicAlignment(st, pub, search)),
              (std::vector<std::string>{"w2", "w3"}));
  }
}

TEST(BestPublicAlignmentTest, NoQualifyingPairsOrEmptyS) {
  Network net = MakeNetwork("own", {}, {{"a", "b"}});
  Network pub = PublicPath(5);
  OwnerState st = MakeState(net, pub, {{"a", "w2", 0.5}});
  st.current_s = InducedSubgraph(net, std::vector<std::string>{"a", "b"});
  for (const auto& search : {Exact(), Greedy()}) {
    EXPECT_TRUE(BestPublicAlignment(st, pub, search).empty());
  }
  st.current_s = EmptySubgraph(net);
  EXPECT_TRUE(BestPublicAlignment(st, pub, Greedy()).empty());
}

// Image {w1, w3} on a 5-node path: the connector w2 is worth adding iff
// 2/|S| + 2/3 > 1/|S| + 1, that is iff |S| < 3.
TEST(BestPublicAlignmentTest, ConnectorDecidedBySize) {
  Network pub = PublicPath(5);
  for (std::size_t s_size = 2; s_size <= 4; ++s_size) {
    std::vector<NamedEdge> edges;
    for (std::size_t i = 1; i < s_size; ++i) {
      edges.push_back({oracle::NodeName("v", i - 1), oracle::NodeName("v", i)});
    }
    Network net = MakeNetwork("own", {}, edges);
    OwnerState st =
        MakeState(net, pub, {{"v000", "w1", 0.9}, {"v001", "w3", 0.9}});
    st.current_s = InducedSubgraph(net, net.names());
    const bool connect = 2.0 / s_size + 2.0 / 3.0 > 1.0 / s_size + 1.0;
    const std::vector<std::string> expected =
        connect ? std::vector<std::string>{"w1", "w2", "w3"}
                : std::vector<std::string>{"w1"};
    for (const auto& search : {Exact(), Greedy()}) {
      EXPECT_EQ(Names(pub, BestPublicAlignment(st, pub, search)), expected)
          << "|S| = " << s_size;
    }
  }
}

TEST(BestPublicAlignmentTest, HeuristicIsConnectedAndNoWorseThanImageCore) {
  Rng rng(41);
  for (int k = 0; k < 100; ++k) {
    Network net = oracle::RandomNetwork(rng, "own", "v", 12, 4, 0.3);
    Network pub = oracle::RandomNetwork(rng, "public", "w", 30, 10, 0.0);
    OwnerState st =
        MakeState(net, pub, oracle::RandomAlignment(rng, net, pub, 2));
    st.current_s = InducedSubgraph(net, net.names());
    Subgraph u = BestPublicAlignment(st, pub, Greedy());
    EXPECT_TRUE(IsConnected(u));
    // Any single qualifying node is a valid fallback.
    double single = 0.0;
    for (std::size_t w = 0; w < pub.size(); ++w) {
      single = std::max(
          single,
          QScore(st.current_s,
                 InducedSubgraph(
                     pub, std::vector<NodeIndex>{static_cast<NodeIndex>(w)}),
                 st.alignment));
    }
    if (single > 0) {
      EXPECT_FALSE(u.empty());
    }
  }
}

}  // namespace
}  // namespace fedanomaly
