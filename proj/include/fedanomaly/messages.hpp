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

// Wire form of the owner -> coordinator report and the privacy gate that
// every such record passes, plus the in-process message bus and its audit
// log.

#include <cmath>
#include <cstddef>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fedanomaly/coordinator.hpp"
#include "fedanomaly/errors.hpp"
#include "fedanomaly/graph.hpp"

namespace fedanomaly {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kReportFields[] = {
    "owner_id", "public_nodes", "size", "q_value", "f_value", "round"};

inline Json EncodeReport(const ParticipantReport& r) {
  Json j;
  j["owner_id"] = r.owner_id;
  j["public_nodes"] = r.public_nodes;
  j["size"] = r.size;
  j["q_value"] = r.q_value;
  j["f_value"] = r.f_value;
  j["round"] = r.round;
  return j;
}

// Node ids that belong to some owner's private network and not to the
// public network. Used to tell a leaked private id from a typo.
using PrivateIdSet = std::set<std::string>;

// The privacy gate. Accepts a record iff it has exactly the report fields
// and every listed node is a public-network node. Extra fields and private
// node ids raise PrivacyError; malformed values raise InputError.
inline ParticipantReport ValidateReportRecord(
    const Json& record, const Network& public_net,
    const PrivateIdSet& private_ids = {}) {
  if (!record.is_object()) throw InputError("report is not an object");
  for (const auto& [key, value] : record.items()) {
    bool allowed = false;
    for (auto f : kReportFields) allowed = allowed || key == f;
    if (!allowed) {
      throw PrivacyError("report carries field '" + key +
                         "' outside the report schema");
    }
  }
  for (auto f : kReportFields) {
    if (!record.contains(std::string(f))) {
      throw InputError("report is missing field '" + std::string(f) + "'");
    }
  }
  ParticipantReport r;
  const Json& owner = record["owner_id"];
  if (!owner.is_string() || owner.get<std::string>().empty()) {
    throw InputError("report field 'owner_id' must be a non-empty string");
  }
  r.owner_id = owner.get<std::string>();
  const Json& nodes = record["public_nodes"];
  if (!nodes.is_array()) {
    throw InputError("report field 'public_nodes' must be an array");
  }
  for (const auto& n : nodes) {
    if (!n.is_string()) {
      throw InputError("report field 'public_nodes' must hold strings");
    }
    const auto name = n.get<std::string>();
    if (!public_net.Find(name)) {
      if (private_ids.count(name) > 0) {
        throw PrivacyError("report from '" + r.owner_id +
                           "' lists private node '" + name + "'");
      }
      throw InputError("report from '" + r.owner_id +
                       "' lists unknown public node '" + name + "'");
    }
    r.public_nodes.push_back(name);
  }
  for (std::size_t i = 1; i < r.public_nodes.size(); ++i) {
    if (!(r.public_nodes[i - 1] < r.public_nodes[i])) {
      throw InputError("report field 'public_nodes' must be sorted and unique");
    }
  }
  const Json& size = record["size"];
  if (!size.is_number_unsigned() ||
      size.get<std::size_t>() != r.public_nodes.size()) {
    throw InputError("report field 'size' must equal the node count");
  }
  r.size = size.get<std::size_t>();
  for (const char* f : {"q_value", "f_value"}) {
    const Json& v = record[f];
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      throw InputError(std::string("report field '") + f +
                       "' must be a finite number");
    }
  }
  r.q_value = record["q_value"].get<double>();
  r.f_value = record["f_value"].get<double>();
  const Json& round = record["round"];
  if (!round.is_number_unsigned()) {
    throw InputError("report field 'round' must be a non-negative integer");
  }
  r.round = round.get<std::size_t>();
  return r;
}

inline ParticipantReport ValidateReport(std::string_view raw,
                                        const Network& public_net,
                                        const PrivateIdSet& private_ids = {}) {
  Json record;
  try {
    record = Json::parse(raw);
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("report is not valid JSON: ") + e.what());
  }
  return ValidateReportRecord(record, public_net, private_ids);
}

inline constexpr std::string_view kOwnerToServer = "owner_to_server";
inline constexpr std::string_view kServerToOwners = "server_to_owners";

// In-process transport. Every owner -> coordinator report is serialized,
// logged, parsed back and passed through the privacy gate, so the
// coordinator only ever sees what survived the wire form.
class MessageBus {
 public:
  MessageBus(const Network& public_net, PrivateIdSet private_ids)
      : public_net_(public_net), private_ids_(std::move(private_ids)) {}

  ParticipantReport Submit(const ParticipantReport& report,
                           std::string_view phase) {
    const std::string wire = EncodeReport(report).dump();
    Json envelope;
    envelope["direction"] = kOwnerToServer;
    envelope["phase"] = phase;
    envelope["payload"] = Json::parse(wire);
    log_.push_back(envelope.dump());
    return ValidateReport(wire, public_net_, private_ids_);
  }

  void Broadcast(std::size_t round, std::string_view phase,
                 const std::vector<std::string>& public_nodes) {
    Json envelope;
    envelope["direction"] = kServerToOwners;
    envelope["phase"] = phase;
    envelope["payload"] = {{"round", round}, {"public_nodes", public_nodes}};
    log_.push_back(envelope.dump());
  }

  const std::vector<std::string>& log() const { return log_; }

 private:
  const Network& public_net_;
  PrivateIdSet private_ids_;
  std::vector<std::string> log_;
};

inline std::string JoinLines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

// Re-validates every owner -> coordinator record of a message log. Returns
// the number of records checked; throws on the first violation with the
// line number.
inline std::size_t AuditMessageLog(std::string_view log_text,
                                   const Network& public_net,
                                   const PrivateIdSet& private_ids) {
  std::istringstream in{std::string(log_text)};
  std::string line;
  std::size_t lineno = 0, checked = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto where = "message log line " + std::to_string(lineno) + ": ";
    Json envelope;
    try {
      envelope = Json::parse(line);
    } catch (const Json::parse_error&) {
      throw InputError(where + "not valid JSON");
    }
    if (!envelope.is_object() || !envelope.contains("direction") ||
        !envelope.contains("payload")) {
      throw InputError(where + "missing direction or payload");
    }
    if (envelope["direction"] != kOwnerToServer) continue;
    try {
      ValidateReportRecord(envelope["payload"], public_net, private_ids);
    } catch (const PrivacyError& e) {
      throw PrivacyError(where + e.what());
    } catch (const InputError& e) {
      throw InputError(where + e.what());
    }
    ++checked;
  }
  return checked;
}

}  // namespace fedanomaly
