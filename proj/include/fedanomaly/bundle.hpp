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

// Run manifests and scenario bundles on disk.
//
// A manifest is a JSON object:
//   {
//     "public": {"id": "public", "edges": "public.edges", "pvalues": "..."},
//     "owners": [{"id": "owner1", "edges": "owner1.edges",
//                 "pvalues": "owner1.pvalues",      // or
//                 "history": "owner1.csv", "snapshot": 7,
//                 "alignment": "owner1.align"}],
//     "config": {"alpha": 0.15, "sigma": 0.8, ...},
//     "audit_log": "messages.jsonl"                 // optional
//   }
// Relative paths resolve against the manifest's directory.

#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "fedanomaly/alignment.hpp"
#include "fedanomaly/errors.hpp"
#include "fedanomaly/federation.hpp"
#include "fedanomaly/io.hpp"
#include "fedanomaly/stats.hpp"
#include "fedanomaly/synth.hpp"

namespace fedanomaly {

struct Manifest {
  FederationConfig config;
  Network public_network;
  std::vector<OwnerInput> owners;
  std::optional<std::filesystem::path> audit_log;

  PrivateIdSet PrivateIds() const {
    PrivateIdSet ids;
    for (const auto& o : owners) {
      for (const auto& n : o.network.names()) {
        if (!public_network.Find(n)) ids.insert(n);
      }
    }
    return ids;
  }
};

inline Json ReadJsonFile(const std::filesystem::path& path) {
  const std::string text = ReadTextFile(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

// `overrides` is applied on top of the manifest's "config" object.
inline Manifest LoadManifest(const std::filesystem::path& path,
                             const Json& overrides = Json::object()) {
  const Json j = ReadJsonFile(path);
  const auto base = path.parent_path();
  auto resolve = [&base](const Json& v, const std::string& what) {
    if (!v.is_string())
      throw InputError("manifest: '" + what + "' must be a path");
    std::filesystem::path p = v.get<std::string>();
    return p.is_absolute() ? p : base / p;
  };
  auto require = [&path](const Json& obj, const char* key) -> const Json& {
    if (!obj.is_object() || !obj.contains(key)) {
      throw InputError(path.string() + ": missing '" + key + "'");
    }
    return obj[key];
  };

  Manifest m;
  Json config = j.contains("config") ? j["config"] : Json::object();
  for (const auto& [k, v] : overrides.items()) config[k] = v;
  m.config = ConfigFromJson(config);

  const Json& pub = require(j, "public");
  std::optional<std::filesystem::path> pub_p;
  if (pub.contains("pvalues"))
    pub_p = resolve(pub["pvalues"], "public.pvalues");
  m.public_network =
      LoadNetwork(pub.value("id", std::string(kPublicNetworkId)),
                  resolve(require(pub, "edges"), "public.edges"), pub_p);

  const Json& owners = require(j, "owners");
  if (!owners.is_array() || owners.empty()) {
    throw InputError(path.string() + ": 'owners' must be a non-empty array");
  }
  for (const auto& o : owners) {
    const Json& id = require(o, "id");
    if (!id.is_string())
      throw InputError("manifest: owner id must be a string");
    const std::string owner_id = id.get<std::string>();
    std::optional<std::filesystem::path> pvalues;
    if (o.contains("pvalues")) pvalues = resolve(o["pvalues"], "pvalues");
    Network net =
        LoadNetwork(owner_id, resolve(require(o, "edges"), "edges"), pvalues);
    if (o.contains("pvalues") && o.contains("history")) {
      throw InputError("manifest: owner '" + owner_id +
                       "' names both pvalues and history");
    } else if (o.contains("history")) {
      const auto history = ReadHistoryCsv(resolve(o["history"], "history"));
      std::size_t t = history.length();
      if (o.contains("snapshot")) {
        if (!o["snapshot"].is_number_unsigned()) {
          throw InputError("manifest: snapshot must be a positive integer");
        }
        t = o["snapshot"].get<std::size_t>();
      }
      const auto p = EmpiricalPValues(history, t);
      std::vector<std::string> names = net.names();
      std::vector<NamedEdge> edges;
      for (const auto& [a, b] : net.edges()) {
        edges.emplace_back(net.name(a), net.name(b));
      }
      net = Network::Build(owner_id, names, edges, p);
    }
    auto alignment =
        ReadAlignmentFile(resolve(require(o, "alignment"), "alignment"));
    m.owners.push_back({owner_id, std::move(net), std::move(alignment)});
  }
  if (j.contains("audit_log"))
    m.audit_log = resolve(j["audit_log"], "audit_log");
  return m;
}

// Writes edge lists, p-values, alignments, truth.tsv, scenario.json and a
// run manifest.json into `dir`.
inline void WriteScenarioBundle(const Scenario& sc,
                                const std::filesystem::path& dir,
                                const FederationConfig& cfg) {
  WriteTextFile(dir / "public.edges", SerializeEdgeList(sc.public_network));
  Json owners = Json::array();
  for (const auto& o : sc.owners) {
    WriteTextFile(dir / (o.owner_id + ".edges"), SerializeEdgeList(o.network));
    WriteTextFile(dir / (o.owner_id + ".pvalues"), SerializePValues(o.network));
    const auto map = AlignmentMap::Build(o.owner_id, o.network,
                                         sc.public_network, o.alignment, 0.5);
    WriteTextFile(dir / (o.owner_id + ".align"),
                  SerializeAlignment(map, o.network, sc.public_network));
    owners.push_back({{"id", o.owner_id},
                      {"edges", o.owner_id + ".edges"},
                      {"pvalues", o.owner_id + ".pvalues"},
                      {"alignment", o.owner_id + ".align"}});
  }
  WriteTextFile(dir / "truth.tsv", SerializeTruth(sc.truth));
  WriteTextFile(dir / "scenario.json", SpecToJson(sc.spec).dump(2) + "\n");
  Json manifest;
  manifest["public"] = {{"id", sc.public_network.id()},
                        {"edges", "public.edges"}};
  manifest["owners"] = owners;
  manifest["config"] = ConfigToJson(cfg);
  WriteTextFile(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace fedanomaly
