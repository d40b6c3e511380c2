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

// Batch command line: gen, run, eval, pvalues, report.
// Exit status: 0 success, 1 input error, 2 privacy-gate violation.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fedanomaly/bundle.hpp"
#include "fedanomaly/errors.hpp"
#include "fedanomaly/federation.hpp"
#include "fedanomaly/io.hpp"
#include "fedanomaly/messages.hpp"
#include "fedanomaly/stats.hpp"
#include "fedanomaly/synth.hpp"

namespace fedanomaly::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitPrivacy = 2;

namespace internal {

struct ConfigFlags {
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha, sigma, lambda, theta;
  std::optional<std::string> statistic, profile;
  std::optional<std::size_t> max_rounds;

  void Register(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "RNG seed");
    cmd->add_option("--alpha", alpha, "Significance level (default 0.15)");
    cmd->add_option("--sigma", sigma, "Alignment threshold (default 0.8)");
    cmd->add_option("--lambda", lambda,
                    "Weight of the alignment score (default 1)");
    cmd->add_option("--theta", theta,
                    "Coalition join tolerance (default 0.75)");
    cmd->add_option("--statistic", statistic, "Scan statistic")
        ->check(CLI::IsMember({"bj", "hc"}));
    cmd->add_option("--max-rounds", max_rounds, "Round limit (default 20)");
    cmd->add_option("--profile", profile,
                    "Parameter preset: computer (alpha 0.15) or traffic "
                    "(alpha 0.05); --alpha wins over the preset")
        ->check(CLI::IsMember({"computer", "traffic"}));
  }

  Json Overrides() const {
    Json j = Json::object();
    if (seed) j["rng_seed"] = *seed;
    if (alpha) {
      j["alpha"] = *alpha;
    } else if (profile) {
      j["alpha"] = *profile == "traffic" ? 0.05 : 0.15;
    }
    if (sigma) j["sigma"] = *sigma;
    if (lambda) j["lambda"] = *lambda;
    if (theta) j["theta"] = *theta;
    if (statistic) j["statistic"] = *statistic;
    if (max_rounds) j["max_rounds"] = *max_rounds;
    return j;
  }
};

inline int Gen(const std::filesystem::path& config, const ConfigFlags& flags,
               const std::filesystem::path& out_dir, std::ostream& out) {
  Json spec_json = ReadJsonFile(config);
  if (flags.seed && spec_json.is_object()) spec_json["rng_seed"] = *flags.seed;
  const ScenarioSpec spec = SpecFromJson(spec_json);
  Json overrides = flags.Overrides();
  overrides.erase("rng_seed");
  if (!overrides.contains("sigma")) overrides["sigma"] = spec.sigma;
  const FederationConfig cfg = ConfigFromJson(overrides);
  WriteScenarioBundle(GenerateScenario(spec), out_dir, cfg);
  out << "wrote scenario bundle to " << out_dir.string() << "\n";
  return kExitOk;
}

inline int Run(const std::filesystem::path& config, const ConfigFlags& flags,
               const std::filesystem::path& out_dir, std::ostream& out) {
  const Manifest m = LoadManifest(config, flags.Overrides());
  if (m.audit_log) {
    const auto n = AuditMessageLog(ReadTextFile(*m.audit_log), m.public_network,
                                   m.PrivateIds());
    out << "audited " << n << " report(s) in " << m.audit_log->string() << "\n";
  }
  const FederationResult r =
      RunFederation(m.config, m.owners, m.public_network);
  // The bus validated every record already; re-auditing the written log
  // keeps the file and the gate in agreement.
  const std::string log = JoinLines(r.message_log);
  AuditMessageLog(log, m.public_network, m.PrivateIds());
  WriteTextFile(out_dir / "result.json",
                ResultToJson(r, m.public_network, m.config).dump(2) + "\n");
  WriteTextFile(out_dir / "messages.jsonl", log);
  out << "rounds=" << r.rounds.size() << " converged=" << (r.converged ? 1 : 0)
      << " |U|=" << r.final_u.size() << "\n";
  return kExitOk;
}

inline std::string MetricsCsv(const MetricsReport& m) {
  std::string s =
      "precision,recall,f1,accuracy,tpr,fnr,anchor_count,tp,fp,fn,tn\n";
  s += FormatDouble(m.precision) + "," + FormatDouble(m.recall) + "," +
       FormatDouble(m.f1) + "," + FormatDouble(m.accuracy) + "," +
       FormatDouble(m.tpr) + "," + FormatDouble(m.fnr) + "," +
       std::to_string(m.anchor_count) + "," + std::to_string(m.tp) + "," +
       std::to_string(m.fp) + "," + std::to_string(m.fn) + "," +
       std::to_string(m.tn) + "\n";
  return s;
}

inline Json MetricsJson(const MetricsReport& m) {
  return {{"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"accuracy", m.accuracy},
          {"tpr", m.tpr},
          {"fnr", m.fnr},
          {"anchor_count", m.anchor_count},
          {"tp", m.tp},
          {"fp", m.fp},
          {"fn", m.fn},
          {"tn", m.tn},
          {"precision_undefined", m.precision_undefined},
          {"recall_undefined", m.recall_undefined}};
}

// Metrics of a result file against a truth file.
inline MetricsReport EvaluateResultFile(const Json& result,
                                        const GroundTruth& truth) {
  try {
    std::vector<OwnerEvaluation> owners;
    std::map<std::string, std::vector<std::string>> final_s;
    for (const auto& [id, o] : result.at("owners").items()) {
      OwnerEvaluation e;
      e.owner_id = id;
      e.num_nodes = o.at("num_nodes").get<std::size_t>();
      e.detected = o.at("final_s").get<std::vector<std::string>>();
      auto it = truth.owner_anomalies.find(id);
      if (it != truth.owner_anomalies.end()) e.truth = it->second;
      final_s[id] = e.detected;
      owners.push_back(std::move(e));
    }
    MetricsReport m = EvaluateMetrics(owners);
    m.anchor_count = AnchorCount(
        final_s, result.at("final_u").get<std::vector<std::string>>(),
        truth.anchors);
    return m;
  } catch (const Json::exception& e) {
    throw InputError(std::string("result file: ") + e.what());
  }
}

inline int Eval(const std::filesystem::path& result_path,
                const std::filesystem::path& truth_path,
                const std::optional<std::filesystem::path>& out_dir,
                std::ostream& out) {
  const MetricsReport m =
      EvaluateResultFile(ReadJsonFile(result_path), ReadTruth(truth_path));
  const std::string csv = MetricsCsv(m);
  if (out_dir) {
    WriteTextFile(*out_dir / "metrics.csv", csv);
    WriteTextFile(*out_dir / "metrics.json", MetricsJson(m).dump(2) + "\n");
  }
  out << csv;
  return kExitOk;
}

inline int PValues(const std::filesystem::path& history_path,
                   std::optional<std::size_t> snapshot,
                   const std::filesystem::path& out_path, std::ostream& out) {
  const auto history = ReadHistoryCsv(history_path);
  const auto p = EmpiricalPValues(history, snapshot.value_or(history.length()));
  WriteTextFile(out_path, SerializePValueMap(p));
  out << "wrote " << p.size() << " p-values to " << out_path.string() << "\n";
  return kExitOk;
}

inline int Report(const std::filesystem::path& result_path,
                  const std::filesystem::path& out_dir, std::ostream& out) {
  const Json r = ReadJsonFile(result_path);
  try {
    std::vector<std::string> owner_ids;
    for (const auto& [id, o] : r.at("owners").items()) owner_ids.push_back(id);
    std::string table = "round,objective,u_size,candidate_accepted";
    for (const auto& id : owner_ids) {
      table += "," + id + "_f," + id + "_q," + id + "_s_size";
    }
    table += "\n";
    std::string nodes = "round,network,node\n";
    for (const auto& round : r.at("rounds")) {
      const auto t = std::to_string(round.at("round").get<std::size_t>());
      const auto u = round.at("u").get<std::vector<std::string>>();
      table += t + "," + FormatDouble(round.at("objective").get<double>()) +
               "," + std::to_string(u.size()) + "," +
               (round.at("candidate_accepted").get<bool>() ? "1" : "0");
      for (const auto& id : owner_ids) {
        const auto& o = round.at("owners").at(id);
        const auto s = o.at("s").get<std::vector<std::string>>();
        table += "," + FormatDouble(o.at("f").get<double>()) + "," +
                 FormatDouble(o.at("q").get<double>()) + "," +
                 std::to_string(s.size());
        for (const auto& v : s) nodes += t + "," + id + "," + v + "\n";
      }
      table += "\n";
      for (const auto& v : u) nodes += t + ",public," + v + "\n";
    }
    WriteTextFile(out_dir / "objective.csv", table);
    WriteTextFile(out_dir / "anomaly_nodes.csv", nodes);
  } catch (const Json::exception& e) {
    throw InputError(std::string("result file: ") + e.what());
  }
  out << "wrote objective.csv and anomaly_nodes.csv to " << out_dir.string()
      << "\n";
  return kExitOk;
}

}  // namespace internal

// Runs one command line (args[0] is the program name).
inline int Execute(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"Federated detection of correlated anomaly subgraphs"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  internal::ConfigFlags gen_flags, run_flags;
  std::filesystem::path gen_config, gen_out;
  auto* gen = app.add_subcommand("gen", "Scenario spec -> scenario bundle");
  gen->add_option("--config", gen_config, "Scenario spec JSON")->required();
  gen->add_option("--out", gen_out, "Bundle directory")->required();
  gen_flags.Register(gen);

  std::filesystem::path run_config, run_out;
  auto* run =
      app.add_subcommand("run", "Manifest -> result.json + messages.jsonl");
  run->add_option("--config", run_config, "Run manifest JSON")->required();
  run->add_option("--out", run_out, "Output directory")->required();
  run_flags.Register(run);

  std::filesystem::path eval_result, eval_truth;
  std::optional<std::filesystem::path> eval_out;
  auto* eval = app.add_subcommand("eval", "Result + ground truth -> metrics");
  eval->add_option("--result", eval_result, "result.json from run")->required();
  eval->add_option("--truth", eval_truth, "truth.tsv from gen")->required();
  eval->add_option("--out", eval_out, "Directory for metrics.csv/json");

  std::filesystem::path pv_history, pv_out;
  std::optional<std::size_t> pv_snapshot;
  auto* pv = app.add_subcommand("pvalues", "History CSV -> p-value file");
  pv->add_option("--config,--history", pv_history, "Observation history CSV")
      ->required();
  pv->add_option("--snapshot", pv_snapshot, "1-based snapshot (default: last)");
  pv->add_option("--out", pv_out, "Output p-value file")->required();

  std::filesystem::path rep_result, rep_out;
  auto* rep = app.add_subcommand("report", "Result -> per-round tables");
  rep->add_option("--result", rep_result, "result.json from run")->required();
  rep->add_option("--out", rep_out, "Output directory")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*gen) return internal::Gen(gen_config, gen_flags, gen_out, out);
    if (*run) return internal::Run(run_config, run_flags, run_out, out);
    if (*eval) return internal::Eval(eval_result, eval_truth, eval_out, out);
    if (*pv) return internal::PValues(pv_history, pv_snapshot, pv_out, out);
    if (*rep) return internal::Report(rep_result, rep_out, out);
  } catch (const PrivacyError& e) {
    err << "privacy violation: " << e.what() << "\n";
    return kExitPrivacy;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace fedanomaly::cli
