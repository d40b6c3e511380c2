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

#include "fedanomaly/cli.hpp"

#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "test_util.hpp"

namespace fedanomaly {
namespace {

using testing_util::TempDir;

struct Outcome {
  int code;
  std::string out, err;
};

Outcome Exec(std::vector<std::string> args) {
  args.insert(args.begin(), "fedanomaly");
  std::ostringstream out, err;
  const int code = cli::Execute(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    Json spec = {{"n_owners", 2},
                 {"nodes_per_owner", 40},
                 {"public_nodes", 30},
                 {"edge_density", 0.08},
                 {"planted_public_size", 5},
                 {"planted_private_size", 6},
                 {"rng_seed", 3}};
    WriteTextFile(dir_ / "spec.json", spec.dump());
  }

  Outcome Gen(const std::string& name) {
    return Exec({"gen", "--config", (dir_ / "spec.json").string(), "--out",
                 (dir_ / name).string()});
  }

  TempDir dir_{"cli"};
};

TEST_F(CliTest, PipelineIsDeterministic) {
  ASSERT_EQ(Gen("b").code, 0);
  std::string metrics[2];
  for (int k = 0; k < 2; ++k) {
    const auto out = dir_ / ("out" + std::to_string(k));
    const auto run =
        Exec({"run", "--config", (dir_ / "b" / "manifest.json").string(),
              "--out", out.string()});
    ASSERT_EQ(run.code, 0) << run.err;
    EXPECT_NE(run.out.find("converged="), std::string::npos);
    const auto eval =
        Exec({"eval", "--result", (out / "result.json").string(), "--truth",
              (dir_ / "b" / "truth.tsv").string(), "--out", out.string()});
    ASSERT_EQ(eval.code, 0) << eval.err;
    metrics[k] = ReadTextFile(out / "metrics.csv");
    EXPECT_EQ(eval.out, metrics[k]);
    EXPECT_TRUE(std::filesystem::exists(out / "metrics.json"));
    EXPECT_GT(ReadTextFile(out / "messages.jsonl").size(), 0u);
  }
  EXPECT_EQ(metrics[0], metrics[1]);
  EXPECT_EQ(ReadTextFile(dir_ / "out0" / "result.json"),
            ReadTextFile(dir_ / "out1" / "result.json"));

  const auto rep =
      Exec({"report", "--result", (dir_ / "out0" / "result.json").string(),
            "--out", (dir_ / "rep").string()});
  ASSERT_EQ(rep.code, 0) << rep.err;
  EXPECT_EQ(
      ReadTextFile(dir_ / "rep" / "objective.csv").rfind("round,objective", 0),
      0u);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "rep" / "anomaly_nodes.csv"));
}

TEST_F(CliTest, PerfectDetectionGivesAllOnes) {
  ASSERT_EQ(Gen("b").code, 0);
  const GroundTruth t = ReadTruth(dir_ / "b" / "truth.tsv");
  Json owners = Json::object();
  for (const auto& [id, nodes] : t.owner_anomalies) {
    owners[id] = {{"num_nodes", 40}, {"final_s", nodes}};
  }
  Json result = {{"owners", owners}, {"final_u", t.public_anomaly}};
  WriteTextFile(dir_ / "perfect.json", result.dump());
  const auto eval = Exec({"eval", "--result", (dir_ / "perfect.json").string(),
                          "--truth", (dir_ / "b" / "truth.tsv").string()});
  ASSERT_EQ(eval.code, 0) << eval.err;
  const auto row = eval.out.substr(eval.out.find('\n') + 1);
  EXPECT_EQ(row.rfind("1,1,1,1,1,0,", 0), 0u) << row;
}

TEST_F(CliTest, TamperedAuditLogExitsTwo) {
  ASSERT_EQ(Gen("b").code, 0);
  const auto manifest_path = dir_ / "b" / "manifest.json";
  ASSERT_EQ(Exec({"run", "--config", manifest_path.string(), "--out",
                  (dir_ / "clean").string()})
                .code,
            0);
  std::string log = ReadTextFile(dir_ / "clean" / "messages.jsonl");
  Json first = Json::parse(log.substr(0, log.find('\n')));
  ASSERT_EQ(first["direction"], "owner_to_server");
  first["payload"]["public_nodes"] = {"o1_v00"};
  first["payload"]["size"] = 1;
  WriteTextFile(dir_ / "b" / "tampered.jsonl", log + first.dump() + "\n");
  Json manifest = ReadJsonFile(manifest_path);
  manifest["audit_log"] = "tampered.jsonl";
  WriteTextFile(manifest_path, manifest.dump());
  const auto run = Exec({"run", "--config", manifest_path.string(), "--out",
                         (dir_ / "t").string()});
  EXPECT_EQ(run.code, 2);
  EXPECT_NE(run.err.find("privacy"), std::string::npos);

  // An extra field is caught the same way.
  first = Json::parse(log.substr(0, log.find('\n')));
  first["payload"]["pvalues"] = {0.1};
  WriteTextFile(dir_ / "b" / "tampered.jsonl", first.dump() + "\n");
  EXPECT_EQ(Exec({"run", "--config", manifest_path.string(), "--out",
                  (dir_ / "t").string()})
                .code,
            2);
}

TEST_F(CliTest, PValuesFromHistory) {
  WriteTextFile(dir_ / "h.csv", "node,t1,t2,t3,t4\na,1,2,3,9\nb,5,5,5,1\n");
  const auto r = Exec({"pvalues", "--history", (dir_ / "h.csv").string(),
                       "--out", (dir_ / "p.tsv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(ReadTextFile(dir_ / "p.tsv"), "a\t0.25\nb\t1\n");
}

TEST_F(CliTest, InputErrorsExitOne) {
  EXPECT_EQ(Exec({"run", "--config", (dir_ / "missing.json").string(), "--out",
                  (dir_ / "x").string()})
                .code,
            1);
  EXPECT_EQ(Exec({"gen", "--config", (dir_ / "spec.json").string(), "--out",
                  (dir_ / "x").string(), "--bogus"})
                .code,
            1);
  EXPECT_EQ(Exec({"gen", "--config", (dir_ / "spec.json").string(), "--out",
                  (dir_ / "x").string(), "--statistic", "zz"})
                .code,
            1);
  EXPECT_EQ(Exec({}).code, 1);
  WriteTextFile(dir_ / "bad.json", "{\"n_owners\": 0}");
  const auto r = Exec({"gen", "--config", (dir_ / "bad.json").string(), "--out",
                       (dir_ / "x").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("n_owners"), std::string::npos);
}

TEST_F(CliTest, HelpListsEveryFlag) {
  const auto r = Exec({"run", "--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* flag :
       {"--config", "--seed", "--alpha", "--sigma", "--lambda", "--theta",
        "--statistic", "--max-rounds", "--out", "--profile"}) {
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
  }
}

TEST_F(CliTest, ProfileSetsAlphaUnlessGiven) {
  ASSERT_EQ(Gen("b").code, 0);
  const auto manifest = (dir_ / "b" / "manifest.json").string();
  ASSERT_EQ(Exec({"run", "--config", manifest, "--out", (dir_ / "p1").string(),
                  "--profile", "traffic"})
                .code,
            0);
  EXPECT_EQ(ReadJsonFile(dir_ / "p1" / "result.json")["config"]["alpha"], 0.05);
  ASSERT_EQ(Exec({"run", "--config", manifest, "--out", (dir_ / "p2").string(),
                  "--profile", "traffic", "--alpha", "0.1"})
                .code,
            0);
  EXPECT_EQ(ReadJsonFile(dir_ / "p2" / "result.json")["config"]["alpha"], 0.1);
}

}  // namespace
}  // namespace fedanomaly
