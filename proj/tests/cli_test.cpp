/*
 * Copyright 2026 The nextround authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "nextround/csv.hpp"

#ifndef NEXTROUND_CLI_PATH
#define NEXTROUND_CLI_PATH "nextround"
#endif

namespace nextround {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int exit_code = 0;
  std::string dir;

  int run(const std::string& args) const {
    const std::string cmd = std::string(NEXTROUND_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  }
};

class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = (fs::path(::testing::TempDir()) / "nextround_cli_pipeline").string();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write_text_file(dir_ + "/synth.json",
                    R"({"n_companies": 500, "n_investors": 40, "n_founders": 400, "seed": 77,
                        "missing": {"area": 0.15, "amounts": 0.25, "investors": 0.15,
                                    "founders": 0.2}})");
  }

  static std::string dir_;

  int run(const std::string& args) { return CliRun{}.run(args); }
  std::string path(const std::string& name) { return dir_ + "/" + name; }
};

std::string CliPipeline::dir_;

// The documented pipeline: synth -> ingest -> windows -> features -> train ->
// eval -> explain -> portfolio. Every artifact must exist afterwards.
TEST_F(CliPipeline, FullPipelineProducesAllArtifacts) {
  ASSERT_EQ(run("synth --config " + path("synth.json") + " --out " + path("data")), 0);
  ASSERT_EQ(run("ingest --data " + path("data") + " --report " + path("report.json") +
                " --intervals " + path("intervals.csv")),
            0);
  ASSERT_EQ(run("windows --data " + path("data") + " --out " + path("samples.csv") + " --dist " +
                path("dist.csv")),
            0);
  ASSERT_EQ(run("--threads 2 features --data " + path("data") + " --samples " +
                path("samples.csv") + " --out " + path("features.csv") + " --dict " +
                path("dict.json")),
            0);
  ASSERT_EQ(run("--seed 7 train --features " + path("features.csv") +
                " --model gbdt-lgbm --strategy weight --param n_estimators=20 "
                "--param max_depth=3 --out " +
                path("model.json") + " --test-out " + path("test.csv") + " --log " +
                path("train_log.json")),
            0);
  ASSERT_EQ(run("--seed 7 train --features " + path("features.csv") +
                " --model logreg --strategy smote --param epochs=150 --out " +
                path("logreg.json")),
            0);
  ASSERT_EQ(run("eval --model " + path("model.json") + " --model " + path("logreg.json") +
                " --test " + path("test.csv") + " --out " + path("evaldir")),
            0);

  // find a company that appears in the samples for explain
  auto samples = read_csv_file(path("samples.csv"));
  ASSERT_FALSE(samples.rows.empty());
  const std::string company = samples.rows.back()[0];
  ASSERT_EQ(run("explain --model " + path("model.json") + " --data " + path("data") +
                " --company " + company + " --asof 2018-01-01 --out " + path("explaindir")),
            0);
  ASSERT_EQ(run("portfolio --model " + path("model.json") + " --data " + path("data") +
                " --asof 2018-01-01 --k 10 --out " + path("pfdir")),
            0);
  ASSERT_EQ(run("--seed 3 windows-study --data " + path("data") +
                " --mode out-of-sample --param n_estimators=8 --param max_depth=3 --out " +
                path("study.csv")),
            0);
  ASSERT_EQ(run("--seed 3 tune --features " + path("features.csv") +
                " --model cart --budget 2 --out " + path("best.json") + " --log " +
                path("trials.csv")),
            0);

  for (const char* artifact :
       {"data/organizations.csv", "data/ground_truth.csv", "report.json", "intervals.csv",
        "samples.csv", "dist.csv", "features.csv", "dict.json", "model.json", "test.csv",
        "train_log.json", "evaldir/comparison.csv", "explaindir/attribution.csv",
        "explaindir/attribution.json", "explaindir/importance.csv", "pfdir/portfolio.csv",
        "pfdir/success_curve.csv", "study.csv", "best.json", "trials.csv"}) {
    EXPECT_TRUE(fs::exists(path(artifact))) << artifact;
  }

  // comparison table layout: one row per (model, strategy)
  auto comparison = read_csv_file(path("evaldir/comparison.csv"));
  ASSERT_EQ(comparison.rows.size(), 2u);
  EXPECT_EQ(comparison.header[0], "model");
  EXPECT_EQ(comparison.header[1], "strategy");

  // every run wrote a resolved-config snapshot
  EXPECT_TRUE(fs::exists(path("data/run_config.json")));
  EXPECT_TRUE(fs::exists(path("model.json.run.json")));
  EXPECT_TRUE(fs::exists(path("evaldir/run_config.json")));
}

TEST_F(CliPipeline, RerunWithSameSeedIsByteIdentical) {
  ASSERT_EQ(run("synth --config " + path("synth.json") + " --out " + path("data_a")), 0);
  ASSERT_EQ(run("synth --config " + path("synth.json") + " --out " + path("data_b")), 0);
  for (const char* f : {"organizations.csv", "funding_rounds.csv", "news.csv",
                        "ground_truth.csv"}) {
    EXPECT_EQ(read_text_file(path("data_a/") + f), read_text_file(path("data_b/") + f)) << f;
  }

  ASSERT_EQ(run("windows --data " + path("data_a") + " --out " + path("s_a.csv")), 0);
  ASSERT_EQ(run("windows --data " + path("data_b") + " --out " + path("s_b.csv")), 0);
  EXPECT_EQ(read_text_file(path("s_a.csv")), read_text_file(path("s_b.csv")));

  // feature output is independent of the thread count
  ASSERT_EQ(run("--threads 1 features --data " + path("data_a") + " --samples " + path("s_a.csv") +
                " --out " + path("f_a.csv")),
            0);
  ASSERT_EQ(run("--threads 4 features --data " + path("data_a") + " --samples " + path("s_a.csv") +
                " --out " + path("f_b.csv")),
            0);
  EXPECT_EQ(read_text_file(path("f_a.csv")), read_text_file(path("f_b.csv")));

  // training twice with one seed gives one model file
  const std::string train_args = " --features " + path("f_a.csv") +
                                 " --model gbdt-xgb --strategy weight --param n_estimators=10 "
                                 "--param max_depth=3 --out ";
  ASSERT_EQ(run("--seed 5 --threads 1 train" + train_args + path("m_a.json")), 0);
  ASSERT_EQ(run("--seed 5 --threads 4 train" + train_args + path("m_b.json")), 0);
  EXPECT_EQ(read_text_file(path("m_a.json")), read_text_file(path("m_b.json")));
}

TEST_F(CliPipeline, InvalidInputsExitNonzeroWithOneLineError) {
  EXPECT_EQ(run("train --features /nonexistent.csv --model gbdt-lgbm --out /tmp/x.json"), 2);
  EXPECT_EQ(run("ingest --data /nonexistent_dir --report /tmp/r.json"), 2);
  EXPECT_NE(run("train --features x.csv"), 0);          // missing required flags
  EXPECT_NE(run("windows-study --data x --mode bogus --out y"), 0);
  EXPECT_NE(run("not-a-subcommand"), 0);
}

}  // namespace
}  // namespace nextround
