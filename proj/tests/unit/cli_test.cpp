// Copyright 2026 The Geosynth Authors
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

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cli_commands.hpp"
#include "cli_config.hpp"
#include "geosynth/errors.hpp"
#include "geosynth/inference.hpp"
#include "geosynth/synthesizer.hpp"

namespace geosynth::cli {
namespace {

namespace fs = std::filesystem;

const std::string kFixture = std::string(GEOSYNTH_TEST_DATA) + "/fixture200.csv";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = fs::temp_directory_path() /
            ("geosynth_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GEOSYNTH_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(RunConfigTest, DefaultsMatchDocumentedValues) {
  RunConfig c;
  EXPECT_EQ(c.size("synth.m"), 5u);
  EXPECT_EQ(c.size("synth.min_node_size"), 5u);
  EXPECT_DOUBLE_EQ(c.real("synth.min_dev_fraction"), 1e-4);
  EXPECT_DOUBLE_EQ(c.real("synth.h_age"), 2.0);
  EXPECT_EQ(c.entries().at("synth.m").origin, "default");
}

TEST(RunConfigTest, FileValuesCarryLineOrigins) {
  TempDir dir("cfg");
  std::ofstream(dir / "run.ini") << "; comment\n[synth]\nm = 7\nh = 2.5\n\n[risk]\nmc_draws = x\n";
  RunConfig c;
  c.load_file(dir / "run.ini");
  EXPECT_EQ(c.size("synth.m"), 7u);
  EXPECT_DOUBLE_EQ(c.real("synth.h"), 2.5);
  EXPECT_EQ(c.entries().at("synth.m").origin, (dir / "run.ini") + ":3");
  try {
    c.size("risk.mc_draws");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("run.ini:7"), std::string::npos) << e.what();
  }
}

TEST(RunConfigTest, UnknownKeyIsRejectedWithLine) {
  TempDir dir("unknown");
  std::ofstream(dir / "run.ini") << "[synth]\nm = 3\n[risk]\nwindw = 4\n";
  RunConfig c;
  try {
    c.load_file(dir / "run.ini");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("run.ini:4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("risk.windw"), std::string::npos) << msg;
  }
  EXPECT_THROW(c.set("synth.nope", "1", "--set"), ConfigError);
}

TEST(RunConfigTest, SyntaxErrorNamesLine) {
  TempDir dir("syntax");
  std::ofstream(dir / "run.ini") << "[synth]\nm 3\n";
  RunConfig c;
  try {
    c.load_file(dir / "run.ini");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
}

TEST(RunConfigTest, FlagsOverrideFileAndChangeHash) {
  RunConfig a;
  RunConfig b;
  EXPECT_EQ(a.hash(), b.hash());
  b.set("synth.m", "9", "--m");
  EXPECT_EQ(b.size("synth.m"), 9u);
  EXPECT_NE(a.hash(), b.hash());
  b.set("synth.m", "5", "--m");
  EXPECT_EQ(a.hash(), b.hash());
}

TEST(RunConfigTest, TypedGettersRejectBadValues) {
  RunConfig c;
  c.set("synth.h", "wide", "--h");
  c.set("utility.plot", "maybe", "--set");
  c.set("noise.seeds", "1, 2,x", "--set");
  EXPECT_THROW(c.real("synth.h"), ConfigError);
  EXPECT_THROW(c.flag("utility.plot"), ConfigError);
  EXPECT_THROW(c.u64_list("noise.seeds"), ConfigError);
  c.set("noise.seeds", " 4, 5 ,,6", "--set");
  EXPECT_EQ(c.u64_list("noise.seeds"), (std::vector<std::uint64_t>{4, 5, 6}));
}

TEST(Fnv1aTest, ReferenceVectors) {
  EXPECT_EQ(hex64(fnv1a("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(fnv1a("a")), "af63dc4c8601ec8c");
  EXPECT_EQ(hex64(fnv1a("foobar")), "85944171f73967e8");
}

TEST(EstimandParseTest, Kinds) {
  const Estimand m = parse_estimand("mean:age");
  EXPECT_EQ(m.kind, Estimand::Kind::kMean);
  EXPECT_EQ(m.variable, "age");
  const Estimand p = parse_estimand("pct:race=black");
  EXPECT_EQ(p.kind, Estimand::Kind::kPercentAt);
  EXPECT_EQ(p.level, "black");
  const Estimand a = parse_estimand("above:educ>14.5");
  EXPECT_EQ(a.kind, Estimand::Kind::kPercentAbove);
  EXPECT_DOUBLE_EQ(a.threshold, 14.5);
  EXPECT_THROW(parse_estimand("age"), ConfigError);
  EXPECT_THROW(parse_estimand("median:age"), ConfigError);
  EXPECT_THROW(parse_estimand("above:educ>high"), ConfigError);
  EXPECT_THROW(parse_estimand("pct:race"), ConfigError);
}

TEST(TableTest, RoundTripsThroughCsv) {
  const Dataset t = Table()
                        .text("name", {"a", "b", "a"})
                        .num("x", {1.5, -2, 1e-300})
                        .build();
  const Dataset back = parse_csv(format_csv(t), t.schema(), {.require_coordinates = false});
  ASSERT_EQ(back.n_rows(), 3u);
  EXPECT_EQ(back.label(2, 0), "a");
  EXPECT_EQ(back.value(2, 1), 1e-300);
}

TEST(CliTest, UnknownSubcommandExitsTwo) {
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("risk"), 2);
  EXPECT_EQ(run_cli("--help"), 0);
}

TEST(CliTest, SynthOnFixtureIsDeterministicAndParseable) {
  TempDir dir("synth");
  const std::string args = "synth --input " + kFixture + " --seed 11 --m 5 --h 1 --out ";
  ASSERT_EQ(run_cli(args + (dir / "r1")), 0);
  ASSERT_EQ(run_cli(args + (dir / "r2")), 0);
  std::size_t csvs = 0;
  for (const auto& e : fs::directory_iterator(dir / "r1")) {
    const fs::path p = e.path();
    if (p.extension() != ".csv") continue;
    ++csvs;
    EXPECT_EQ(slurp(p), slurp(fs::path(dir / "r2") / p.filename())) << p;
    const fs::path sidecar = p.parent_path() / (p.stem().string() + ".schema.json");
    ASSERT_TRUE(fs::exists(sidecar)) << sidecar;
    EXPECT_EQ(load_csv(p.string(), load_schema(sidecar.string())).n_rows(), 200u);
  }
  EXPECT_EQ(csvs, 5u);
  EXPECT_TRUE(fs::exists(fs::path(dir / "r1") / "metadata.json"));
  EXPECT_EQ(slurp(fs::path(dir / "r1") / "metadata.json"),
            slurp(fs::path(dir / "r2") / "metadata.json"));

  const auto manifest =
      nlohmann::json::parse(slurp(fs::path(dir / "r1") / "manifest.json"));
  EXPECT_EQ(manifest.at("seed").get<int>(), 11);
  EXPECT_EQ(manifest.at("subcommand"), "synth");
  EXPECT_EQ(manifest.at("config_hash").get<std::string>().size(), 16u);
  EXPECT_EQ(manifest.at("config").at("synth.m"), "5");

  ASSERT_EQ(run_cli("synth --input " + kFixture + " --seed 12 --out " + (dir / "r3")), 0);
  EXPECT_NE(slurp(fs::path(dir / "r1") / "synth_1.csv"),
            slurp(fs::path(dir / "r3") / "synth_1.csv"));
}

TEST(CliTest, InferMatchesLibraryCombination) {
  TempDir dir("infer");
  ASSERT_EQ(run_cli("synth --input " + kFixture + " --seed 5 --plan geography_age_race --out " +
                    (dir / "rel")),
            0);
  ASSERT_EQ(run_cli("infer --estimand mean:age --release " + (dir / "rel") + " --out " +
                    (dir / "inf")),
            0);
  const fs::path csv = fs::path(dir / "inf") / "infer.csv";
  const Dataset out = load_csv(csv.string(),
                               load_schema((fs::path(dir / "inf") / "infer.schema.json").string(), false),
                               {.require_coordinates = false});
  ASSERT_EQ(out.n_rows(), 1u);

  const LoadedRelease rel = read_release(dir / "rel");
  std::vector<ReplicateEstimate> reps;
  for (const auto& d : rel.datasets) reps.push_back(estimate_mean(d, "age"));
  const MiEstimate mi = combine(reps);
  const auto col = [&](const char* name) { return out.column(name)[0]; };
  EXPECT_EQ(col("m"), 5);
  EXPECT_NEAR(col("q_bar"), mi.q_bar, 1e-12);
  EXPECT_NEAR(col("sqrt_T"), std::sqrt(mi.T_m), 1e-12);
  EXPECT_NEAR(col("nu"), mi.nu_m, 1e-9 * mi.nu_m);
  EXPECT_NEAR(col("ci_lo"), mi.ci().lo, 1e-12);
  EXPECT_NEAR(col("ci_hi"), mi.ci().hi, 1e-12);
}

TEST(CliTest, RiskAndUtilityOutputsParse) {
  TempDir dir("risk");
  ASSERT_EQ(run_cli("synth --input " + kFixture + " --seed 2 --out " + (dir / "rel")), 0);
  const std::string common = " --input " + kFixture + " --release " + (dir / "rel");
  ASSERT_EQ(run_cli("risk geo" + common + " --out " + (dir / "geo")), 0);
  ASSERT_EQ(run_cli("risk id" + common + " --mc 5 --out " + (dir / "id")), 0);
  ASSERT_EQ(run_cli("utility" + common + " --out " + (dir / "ut")), 0);

  auto load = [&](const std::string& sub, const std::string& stem) {
    const fs::path base = fs::path(dir / sub);
    return load_csv((base / (stem + ".csv")).string(),
                    load_schema((base / (stem + ".schema.json")).string(), false),
                    {.require_coordinates = false});
  };
  const Dataset recs = load("geo", "risk_geo_records");
  ASSERT_EQ(recs.n_rows(), 200u);
  const Dataset summary = load("geo", "risk_geo_summary");
  double min_r1 = INFINITY;
  for (double v : recs.column("R1")) {
    EXPECT_GE(v, 0);
    min_r1 = std::min(min_r1, v);
  }
  EXPECT_EQ(summary.label(0, 0), "R1");
  EXPECT_EQ(summary.column("alpha0")[0], min_r1);

  const Dataset id = load("id", "risk_id_summary");
  ASSERT_EQ(id.n_rows(), 1u);
  EXPECT_GE(id.column("expected")[0], id.column("true")[0]);

  const Dataset desc = load("ut", "utility_descriptive");
  EXPECT_EQ(desc.n_rows(), 21u);
  const Dataset plot = load("ut", "utility_plot");
  EXPECT_EQ(plot.n_rows(), 400u);
}

TEST(CliTest, FailedRunRemovesPartialOutputs) {
  TempDir dir("fail");
  ASSERT_EQ(run_cli("synth --input " + kFixture + " --seed 2 --out " + (dir / "rel")), 0);
  // The descriptive table is written before the regression fit fails.
  EXPECT_EQ(run_cli("utility --input " + kFixture + " --release " + (dir / "rel") +
                    " --outcome educ --predictors sex --out " + (dir / "ut")),
            1);
  EXPECT_FALSE(fs::exists(dir / "ut"));

  fs::create_directories(dir / "keep");
  std::ofstream(dir / "keep/mine.txt") << "x";
  EXPECT_EQ(run_cli("utility --input " + kFixture + " --release " + (dir / "rel") +
                    " --outcome educ --predictors sex --out " + (dir / "keep")),
            1);
  EXPECT_TRUE(fs::exists(dir / "keep/mine.txt"));
  EXPECT_FALSE(fs::exists(dir / "keep/utility_descriptive.csv"));
}

TEST(CliTest, ConfigErrorsExitOne) {
  TempDir dir("cfgerr");
  std::ofstream(dir / "bad.ini") << "[synth]\nm = 0\n";
  EXPECT_EQ(run_cli("synth --config " + (dir / "bad.ini") + " --input " + kFixture +
                    " --out " + (dir / "o")),
            1);
  EXPECT_FALSE(fs::exists(dir / "o"));
  EXPECT_EQ(run_cli("synth --input " + (dir / "missing.csv") + " --out " + (dir / "o")), 1);
}

}  // namespace
}  // namespace geosynth::cli
