//
// Copyright 2026 The vdm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Drives the built vdm binary end to end.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "json.hpp"
#include "test_util.h"

namespace vdm {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;
using nlohmann::json;

struct Result {
  int code = -1;
  std::string output;
};

// Runs the CLI with stdout and stderr captured together.
Result Vdm(const std::string& args) {
  const std::string cmd = std::string(VDM_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string Read(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path FreshDir(const std::string& name) {
  const fs::path dir = ::vdm::testing::TempPath(name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

TEST(CliTest, HelpListsEverySubcommand) {
  const Result r = Vdm("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* cmd : {"synth", "split", "pat", "baseline", "neural", "attack", "sweep",
                          "pareto", "report", "apply", "run"}) {
    EXPECT_THAT(r.output, HasSubstr(std::string("  ") + cmd)) << cmd;
  }
}

TEST(CliTest, BadArgumentsAreConfigErrors) {
  EXPECT_EQ(Vdm("").code, 2);
  EXPECT_EQ(Vdm("frobnicate").code, 2);
  EXPECT_EQ(Vdm("pat --data x.csv").code, 2);
  const fs::path dir = FreshDir("cli_bad");
  const Result r = Vdm("pat --data x.csv --schema " + (dir / "missing.json").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_THAT(r.output, HasSubstr("missing.json"));
}

TEST(CliTest, MinimizeAttackApplyReport) {
  const fs::path dir = FreshDir("cli_pipeline");
  const std::string data = (dir / "d.csv").string(), schema = (dir / "s.json").string();
  ASSERT_EQ(Vdm("synth --rows 300 --seed 2 --out " + data + " --schema-out " + schema).code, 0);
  const std::string io = " --data " + data + " --schema " + schema;
  const std::string g = (dir / "g.json").string();
  ASSERT_EQ(Vdm("pat --max-leaves 4 --min-leaf 20 --alpha 0.5" + io + " --out " + g +
                " --tree " + (dir / "t.json").string()).code, 0);
  EXPECT_TRUE(json::parse(Read(dir / "t.json")).contains("nodes"));
  ASSERT_EQ(Vdm("baseline uniform --k 3" + io + " --out " + (dir / "u.json").string()).code, 0);
  ASSERT_EQ(Vdm("neural mutualinf --lambda 0.5 --epochs 2" + io + " --out " +
                (dir / "n.json").string()).code, 0);
  const Result a1 = Vdm("attack a1 --epochs 3 --generalization " + g + io);
  ASSERT_EQ(a1.code, 0) << a1.output;
  EXPECT_EQ(json::parse(a1.output)["attributes"].size(), 4u);
  const Result a8 = Vdm("attack a8 --generalization " + g + io);
  ASSERT_EQ(a8.code, 0) << a8.output;
  EXPECT_GE(json::parse(a8.output)["min_utilization"].get<int>(), 1);
  ASSERT_EQ(Vdm("apply --generalization " + g + io + " --out " + (dir / "z.csv").string()).code, 0);
  EXPECT_THAT(Read(dir / "z.csv"), ::testing::StartsWith("x0,d1,"));
  const Result report = Vdm("report --generalization " + g + io);
  ASSERT_EQ(report.code, 0) << report.output;
  EXPECT_THAT(report.output, HasSubstr("need not be collected"));
  EXPECT_EQ(Vdm("attack a6 --generalization " + g + io).code, 2);
}

TEST(CliTest, SweepThenPareto) {
  const fs::path dir = FreshDir("cli_sweep");
  const std::string data = (dir / "d.csv").string(), schema = (dir / "s.json").string();
  ASSERT_EQ(Vdm("synth --rows 400 --out " + data + " --schema-out " + schema).code, 0);
  const fs::path out = dir / "sw";
  const Result r = Vdm("sweep --minimizer uniform --adversaries a1 --data " + data +
                       " --schema " + schema + " --out-dir " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const json points = json::parse(Read(out / "points.json"));
  EXPECT_EQ(points["points"].size(), 7u);  // two limits and five k values
  const Result front = Vdm("pareto " + (out / "points.json").string());
  ASSERT_EQ(front.code, 0);
  EXPECT_EQ(json::parse(front.output), json::parse(Read(out / "front.json")));
}

TEST(CliTest, RunIsReproducibleAndReportsLimits) {
  const fs::path dir = FreshDir("cli_run");
  WriteFile(dir / "run.json", R"({
    "synth": {"rows": 200, "seed": 1},
    "minimizers": [{"name": "uniform", "grid": [{"k": 2}]}],
    "adversaries": ["a1"],
    "output_dir": "out",
    "seed": 4
  })");
  const Result first = Vdm("run " + (dir / "run.json").string());
  ASSERT_EQ(first.code, 0) << first.output;
  const json front = json::parse(Read(dir / "out" / "front.json"));
  ASSERT_GE(front["points"].size(), 3u);
  int limits = 0;
  for (const json& p : front["points"]) limits += p["limit"].get<bool>();
  EXPECT_EQ(limits, 2);
  const std::string csv = Read(dir / "out" / "points.csv");
  const Result second = Vdm("run " + (dir / "run.json").string());
  ASSERT_EQ(second.code, 0);
  EXPECT_EQ(second.output, first.output);  // manifest hash line
  EXPECT_EQ(Read(dir / "out" / "points.csv"), csv);
  EXPECT_FALSE(fs::exists(dir / "out" / "FAILED"));
  EXPECT_TRUE(json::parse(Read(dir / "out" / "manifest.json"))["artifacts"].contains("points.csv"));
}

TEST(CliTest, RunWithMissingSchemaNamesThePath) {
  const fs::path dir = FreshDir("cli_run_missing");
  WriteFile(dir / "run.json", R"({"data": "d.csv", "schema": "absent_schema.json",
    "minimizers": [{"name": "uniform"}], "output_dir": "out"})");
  const Result r = Vdm("run " + (dir / "run.json").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_THAT(r.output, HasSubstr("absent_schema.json"));
}

TEST(CliTest, RuntimeFailureLeavesMarkerAndArtifacts) {
  // Linkage on identity continuous attributes is unsupported, so the attack
  // stage fails after the sweep has been written.
  const fs::path dir = FreshDir("cli_run_fail");
  WriteFile(dir / "run.json", R"({
    "synth": {"rows": 200},
    "minimizers": [{"name": "featsel", "grid": [{"k": "all"}]}],
    "adversaries": ["a1", "a7"],
    "output_dir": "out"
  })");
  const Result r = Vdm("run " + (dir / "run.json").string());
  EXPECT_EQ(r.code, 1) << r.output;
  EXPECT_THAT(Read(dir / "out" / "FAILED"), HasSubstr("stage: attacks"));
  EXPECT_TRUE(fs::exists(dir / "out" / "points.csv"));
  EXPECT_FALSE(fs::exists(dir / "out" / "manifest.json"));
}

}  // namespace
}  // namespace vdm
