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

// Tab-separated text formats shared by networks, p-values and alignments.
// `#` starts a comment line; blank lines are skipped. Writers emit the
// canonical form (lexicographic order, shortest round-trip decimals).

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fedanomaly/errors.hpp"
#include "fedanomaly/graph.hpp"

namespace fedanomaly {

inline std::string FormatDouble(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

inline std::vector<std::string> SplitTabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Calls `row(fields, line_number)` for every data line. `row` may throw
// InputError; it is rethrown with file:line context.
inline void ForEachTsvRow(
    const std::filesystem::path& path,
    const std::function<void(const std::vector<std::string>&, std::size_t)>&
        row) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    try {
      row(SplitTabs(line), lineno);
    } catch (const InputError& e) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": " +
                       e.what());
    }
  }
}

inline double ParseDouble(const std::string& text) {
  double value = 0.0;
  auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() ||
      !std::isfinite(value)) {
    throw InputError("not a finite number: '" + text + "'");
  }
  return value;
}

inline std::vector<NamedEdge> ReadEdgeList(const std::filesystem::path& path) {
  std::vector<NamedEdge> edges;
  ForEachTsvRow(path, [&](const std::vector<std::string>& f, std::size_t) {
    if (f.size() != 2 || f[0].empty() || f[1].empty()) {
      throw InputError("expected 'u<TAB>v'");
    }
    edges.emplace_back(f[0], f[1]);
  });
  return edges;
}

inline std::map<std::string, double> ReadPValues(
    const std::filesystem::path& path) {
  std::map<std::string, double> out;
  ForEachTsvRow(path, [&](const std::vector<std::string>& f, std::size_t) {
    if (f.size() != 2 || f[0].empty()) {
      throw InputError("expected 'node<TAB>pvalue'");
    }
    const double p = ParseDouble(f[1]);
    if (!(p > 0.0 && p <= 1.0)) {
      throw InputError("p-value of '" + f[0] + "' outside (0, 1]");
    }
    if (!out.emplace(f[0], p).second) {
      throw InputError("duplicate p-value for '" + f[0] + "'");
    }
  });
  return out;
}

// Loads a network from an edge list and an optional p-value file. Without a
// p-value file every node gets p = 1.
inline Network LoadNetwork(
    std::string network_id, const std::filesystem::path& edges_path,
    const std::optional<std::filesystem::path>& pvalues_path) {
  auto edges = ReadEdgeList(edges_path);
  std::map<std::string, double> pvalues;
  if (pvalues_path) pvalues = ReadPValues(*pvalues_path);
  try {
    return Network::Build(std::move(network_id), {}, edges, pvalues);
  } catch (const InputError& e) {
    throw InputError(edges_path.string() + ": " + e.what());
  }
}

inline std::string SerializeEdgeList(const Network& net) {
  std::string out;
  for (const auto& [a, b] : net.edges()) {
    out += net.name(a);
    out += '\t';
    out += net.name(b);
    out += '\n';
  }
  return out;
}

inline std::string SerializePValues(const Network& net) {
  std::string out;
  for (std::size_t i = 0; i < net.size(); ++i) {
    out += net.names()[i];
    out += '\t';
    out += FormatDouble(net.pvalues()[i]);
    out += '\n';
  }
  return out;
}

inline void WriteTextFile(const std::filesystem::path& path,
                          std::string_view content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << content;
}

inline std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fedanomaly
