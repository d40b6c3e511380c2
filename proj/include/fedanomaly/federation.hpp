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

// Round loop of the federated detector. Each round every owner runs its private
// and public searches and reports a public subgraph; the coordinator groups
// the reports into coalitions and proposes a new public anomaly; owners
// confirm it by reporting Q against the proposal, and the proposal replaces
// the current public anomaly only if the summed alignment score improves.
// The run stops when the public anomaly no longer changes.

#include <cstddef>
#include <cstdint>
#include <future>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fedanomaly/alignment.hpp"
#include "fedanomaly/coordinator.hpp"
#include "fedanomaly/errors.hpp"
#include "fedanomaly/graph.hpp"
#include "fedanomaly/io.hpp"
#include "fedanomaly/log.hpp"
#include "fedanomaly/messages.hpp"
#include "fedanomaly/participant.hpp"
#include "fedanomaly/rng.hpp"
#include "fedanomaly/stats.hpp"

namespace fedanomaly {

struct FederationConfig {
  double alpha = 0.15;
  double sigma = 0.8;
  double lambda = 1.0;
  double theta = 0.75;
  Statistic statistic = Statistic::kBerkJones;
  Normalization normalization = Normalization::kNetworkMax;
  std::size_t max_rounds = 20;
  SearchConfig search;
  std::uint64_t rng_seed = 1;
  bool parallel = true;

  void Validate() const {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw InputError("alpha must lie in (0, 1)");
    if (!(sigma > 0.0 && sigma < 1.0))
      throw InputError("sigma must lie in (0, 1)");
    if (!(lambda >= 0.0)) throw InputError("lambda must be non-negative");
    if (!(theta >= 0.0 && theta <= 1.0))
      throw InputError("theta must lie in [0, 1]");
    if (max_rounds < 1) throw InputError("max_rounds must be >= 1");
    search.Validate();
  }

  ScanConfig scan() const { return {alpha, statistic, normalization}; }
};

struct OwnerInput {
  std::string owner_id;
  Network network;  // carries the owner's p-values
  std::vector<AlignmentEntry> alignment;
};

struct OwnerRoundRecord {
  std::vector<std::string> s_nodes;
  double f = 0.0;  // F(S_i)
  double q = 0.0;  // Q(S_i, U) against the round's resulting U
};

struct RoundRecord {
  std::size_t round = 0;
  std::vector<std::string> u_nodes;  // public anomaly after the round
  std::vector<std::string> candidate_nodes;
  bool candidate_accepted = false;
  std::map<std::string, OwnerRoundRecord> owners;
  double objective = 0.0;
};

struct FederationResult {
  std::vector<RoundRecord> rounds;
  bool converged = false;
  std::size_t best_round = 0;
  Subgraph final_u;
  std::map<std::string, Subgraph> final_s;
  std::map<std::string, std::size_t> owner_sizes;
  std::vector<std::string> message_log;
};

// Sum over owners of F(S_i) + lambda * Q(S_i, U) / 2, with S_i taken from
// each state's current_s.
inline double FederationObjective(const std::vector<OwnerState>& owners,
                                  const Subgraph& public_u, double lambda) {
  double total = 0.0;
  for (const auto& o : owners) {
    total += LocalObjectiveValue(o, o.current_s, public_u, lambda);
  }
  return total;
}

namespace internal {

struct ParticipantStep {
  Subgraph s;
  Subgraph upload;
  double f = 0.0;
  double q = 0.0;
};

inline ParticipantStep RunParticipant(OwnerState& state,
                                      const Network& public_net,
                                      const Subgraph& u, double lambda,
                                      const SearchConfig& search) {
  ParticipantStep step;
  step.s = DetectPrivateAnomaly(state, u, search, lambda);
  state.current_s = step.s;
  state.current_u_local = BestPublicAlignment(state, public_net, search);
  const double q_local = QScore(step.s, state.current_u_local, state.alignment);
  const double q_current = QScore(step.s, u, state.alignment);
  step.upload =
      q_local > q_current + kObjectiveTolerance ? state.current_u_local : u;
  step.q = QScore(step.s, step.upload, state.alignment);
  step.f = ScanScorer(state.network, state.scan).Score(step.s.nodes);
  return step;
}

}  // namespace internal

inline std::vector<OwnerState> BuildOwnerStates(
    const FederationConfig& cfg, const std::vector<OwnerInput>& owners,
    const Network& public_net) {
  std::vector<OwnerState> states;
  std::set<std::string> ids;
  for (const auto& o : owners) {
    if (o.owner_id.empty()) throw InputError("owner id must not be empty");
    if (!ids.insert(o.owner_id).second) {
      throw InputError("duplicate owner id '" + o.owner_id + "'");
    }
    OwnerState s;
    s.owner_id = o.owner_id;
    s.network = o.network;
    s.alignment = AlignmentMap::Build(o.owner_id, o.network, public_net,
                                      o.alignment, cfg.sigma);
    s.scan = cfg.scan();
    s.lambda = cfg.lambda;
    s.current_s = EmptySubgraph(o.network);
    s.current_u_local = EmptySubgraph(public_net);
    states.push_back(std::move(s));
  }
  return states;
}

inline FederationResult RunFederation(const FederationConfig& cfg,
                                      const std::vector<OwnerInput>& owners,
                                      const Network& public_net) {
  cfg.Validate();
  if (owners.empty()) throw InputError("federation needs at least one owner");
  std::vector<OwnerState> states = BuildOwnerStates(cfg, owners, public_net);

  PrivateIdSet private_ids;
  for (const auto& o : owners) {
    for (const auto& name : o.network.names()) {
      if (!public_net.Find(name)) private_ids.insert(name);
    }
  }
  MessageBus bus(public_net, std::move(private_ids));

  FederationResult result;
  for (const auto& s : states)
    result.owner_sizes[s.owner_id] = s.network.size();
  Subgraph u = EmptySubgraph(public_net);
  double best_objective = 0.0;

  for (std::size_t round = 0; round < cfg.max_rounds; ++round) {
    // No public anomaly exists before the first aggregation, so round 0 is
    // pure local detection.
    const double lambda = round == 0 ? 0.0 : cfg.lambda;
    SearchConfig search = cfg.search;
    search.rng_seed = MixSeed(cfg.rng_seed, round);

    std::vector<internal::ParticipantStep> steps(states.size());
    if (cfg.parallel && states.size() > 1) {
      std::vector<std::future<internal::ParticipantStep>> futures;
      for (auto& state : states) {
        futures.push_back(std::async(std::launch::async, [&, lambda, search] {
          return internal::RunParticipant(state, public_net, u, lambda, search);
        }));
      }
      for (std::size_t i = 0; i < futures.size(); ++i)
        steps[i] = futures[i].get();
    } else {
      for (std::size_t i = 0; i < states.size(); ++i) {
        steps[i] =
            internal::RunParticipant(states[i], public_net, u, lambda, search);
      }
    }

    std::vector<ParticipantReport> reports;
    for (std::size_t i = 0; i < states.size(); ++i) {
      ParticipantReport r{states[i].owner_id,
                          NodeNames(public_net, steps[i].upload),
                          steps[i].upload.size(),
                          steps[i].q,
                          steps[i].f,
                          round};
      reports.push_back(bus.Submit(r, "proposal"));
    }

    const auto partition = FormPartition(SortReports(reports), cfg.theta);
    const Subgraph candidate =
        SelectPublicAnomaly(partition, reports, public_net);
    const auto candidate_names = NodeNames(public_net, candidate);
    bus.Broadcast(round, "candidate", candidate_names);

    double q_candidate = 0.0, q_current = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
      const double q = QScore(steps[i].s, candidate, states[i].alignment);
      ParticipantReport r{states[i].owner_id, candidate_names,
                          candidate.size(),   q,
                          steps[i].f,         round};
      q_candidate += bus.Submit(r, "confirm").q_value;
      q_current += QScore(steps[i].s, u, states[i].alignment);
    }
    const bool accepted = candidate.nodes != u.nodes &&
                          q_candidate > q_current + kObjectiveTolerance;
    const Subgraph next_u = accepted ? candidate : u;
    bus.Broadcast(round, "update", NodeNames(public_net, next_u));

    RoundRecord record;
    record.round = round;
    record.u_nodes = NodeNames(public_net, next_u);
    record.candidate_nodes = candidate_names;
    record.candidate_accepted = accepted;
    for (std::size_t i = 0; i < states.size(); ++i) {
      OwnerRoundRecord o;
      o.s_nodes = NodeNames(states[i].network, steps[i].s);
      o.f = steps[i].f;
      o.q = QScore(steps[i].s, next_u, states[i].alignment);
      record.objective += o.f + cfg.lambda * o.q / 2.0;
      record.owners[states[i].owner_id] = std::move(o);
    }
    Log().debug("round {}: objective {} |U| {} accepted {}", round,
                record.objective, next_u.size(), accepted);
    if (result.rounds.empty() || record.objective >= best_objective) {
      best_objective = record.objective;
      result.best_round = round;
      result.final_u = next_u;
      result.final_s.clear();
      for (std::size_t i = 0; i < states.size(); ++i) {
        result.final_s[states[i].owner_id] = steps[i].s;
      }
    }
    result.rounds.push_back(std::move(record));
    if (next_u.nodes == u.nodes) {
      result.converged = true;
      break;
    }
    u = next_u;
  }
  result.message_log = bus.log();
  return result;
}

namespace internal {
inline std::string StatisticName(Statistic s) {
  return s == Statistic::kBerkJones ? "bj" : "hc";
}
inline std::string NormalizationName(Normalization n) {
  switch (n) {
    case Normalization::kNone:
      return "none";
    case Normalization::kPerSize:
      return "per_size";
    case Normalization::kNetworkMax:
      return "network_max";
  }
  return "network_max";
}
}  // namespace internal

inline Json ConfigToJson(const FederationConfig& cfg) {
  Json j;
  j["alpha"] = cfg.alpha;
  j["sigma"] = cfg.sigma;
  j["lambda"] = cfg.lambda;
  j["theta"] = cfg.theta;
  j["statistic"] = internal::StatisticName(cfg.statistic);
  j["normalization"] = internal::NormalizationName(cfg.normalization);
  j["max_rounds"] = cfg.max_rounds;
  j["rng_seed"] = cfg.rng_seed;
  j["search"] = {{"max_restarts", cfg.search.max_restarts},
                 {"seed_pool_size", cfg.search.seed_pool_size},
                 {"exact_threshold", cfg.search.exact_threshold}};
  return j;
}

inline FederationConfig ConfigFromJson(const Json& j,
                                       FederationConfig cfg = {}) {
  if (!j.is_object()) throw InputError("config must be an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "alpha")
        cfg.alpha = value.get<double>();
      else if (key == "sigma")
        cfg.sigma = value.get<double>();
      else if (key == "lambda")
        cfg.lambda = value.get<double>();
      else if (key == "theta")
        cfg.theta = value.get<double>();
      else if (key == "max_rounds")
        cfg.max_rounds = value.get<std::size_t>();
      else if (key == "rng_seed")
        cfg.rng_seed = value.get<std::uint64_t>();
      else if (key == "parallel")
        cfg.parallel = value.get<bool>();
      else if (key == "statistic") {
        const auto s = value.get<std::string>();
        if (s == "bj")
          cfg.statistic = Statistic::kBerkJones;
        else if (s == "hc")
          cfg.statistic = Statistic::kHigherCriticism;
        else
          throw InputError("statistic must be 'bj' or 'hc'");
      } else if (key == "normalization") {
        const auto s = value.get<std::string>();
        if (s == "none")
          cfg.normalization = Normalization::kNone;
        else if (s == "per_size")
          cfg.normalization = Normalization::kPerSize;
        else if (s == "network_max")
          cfg.normalization = Normalization::kNetworkMax;
        else
          throw InputError("normalization must be none|per_size|network_max");
      } else if (key == "search") {
        for (const auto& [k, v] : value.items()) {
          if (k == "max_restarts")
            cfg.search.max_restarts = v.get<std::size_t>();
          else if (k == "seed_pool_size")
            cfg.search.seed_pool_size = v.get<std::size_t>();
          else if (k == "exact_threshold")
            cfg.search.exact_threshold = v.get<std::size_t>();
          else
            throw InputError("unknown search field '" + k + "'");
        }
      } else {
        throw InputError("unknown config field '" + key + "'");
      }
    }
  } catch (const Json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  cfg.Validate();
  return cfg;
}

// Canonical JSON form of a run: owners and nodes in id order.
inline Json ResultToJson(const FederationResult& r, const Network& public_net,
                         const FederationConfig& cfg) {
  Json j;
  j["config"] = ConfigToJson(cfg);
  j["converged"] = r.converged;
  j["best_round"] = r.best_round;
  j["final_u"] = NodeNames(public_net, r.final_u);
  Json owners = Json::object();
  for (const auto& [id, size] : r.owner_sizes) {
    owners[id] = {{"num_nodes", size},
                  {"final_s", r.rounds.at(r.best_round).owners.at(id).s_nodes}};
  }
  j["owners"] = owners;
  Json rounds = Json::array();
  for (const auto& rec : r.rounds) {
    Json jr;
    jr["round"] = rec.round;
    jr["objective"] = rec.objective;
    jr["candidate"] = rec.candidate_nodes;
    jr["candidate_accepted"] = rec.candidate_accepted;
    jr["u"] = rec.u_nodes;
    Json per_owner = Json::object();
    for (const auto& [id, o] : rec.owners) {
      per_owner[id] = {{"s", o.s_nodes}, {"f", o.f}, {"q", o.q}};
    }
    jr["owners"] = per_owner;
    rounds.push_back(jr);
  }
  j["rounds"] = rounds;
  return j;
}

}  // namespace fedanomaly
