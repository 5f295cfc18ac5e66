// tests/unit/cli_test.cc

// Copyright 2026 The xvalign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifdef XVALIGN_HAVE_CLI

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.h"
#include "test_util.h"
#include "xvalign/config.h"
#include "xvalign/eval.h"

namespace xvalign {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

std::string Slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
}

class CliPipeline : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::make_unique<TempDir>("cli");
    config_ = dir_->file("tiny.ini");
    std::ofstream os(config_);
    os << "seed = 5\nout = " << dir_->file("exp") << R"(
[corpus]
n_speakers = 3
utts_per_speaker = 2
min_duration = 1.0
max_duration = 1.2
probe_utts = 2
[augment]
factor = 2
rir_count = 3
[model]
frame_dims = 8,8,8,8,12
embedding_dim = 4
heads = 3
[train]
long_duration = 0.8
epochs = 1
batch_size = 2
probe_duration = 1
[eval]
n_speakers = 3
utts_per_speaker = 2
buckets = 0.5, 0
)";
  }

  int Run(std::vector<std::string> args, std::string* out_text = nullptr,
          std::string* err_text = nullptr) {
    args.insert(args.end(), {"--config", config_});
    std::ostringstream out, err;
    const int code = cli::Run(args, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
  }

  std::unique_ptr<TempDir> dir_;
  std::string config_;
};

TEST_F(CliPipeline, MissingStageNamesTheCommandToRun) {
  std::string err;
  EXPECT_EQ(Run({"train"}, nullptr, &err), 2);
  EXPECT_NE(err.find("xvalign gen-corpus"), std::string::npos) << err;
  EXPECT_EQ(Run({"score"}, nullptr, &err), 2);
  EXPECT_NE(err.find("xvalign extract"), std::string::npos) << err;
}

TEST_F(CliPipeline, EndToEndIsDeterministicAndReportMatchesEvaluate) {
  ASSERT_EQ(Run({"gen-corpus"}), 0);
  ASSERT_EQ(Run({"augment"}), 0);
  std::string err;
  EXPECT_EQ(Run({"train", "--regime", "IRL"}, nullptr, &err), 2);
  EXPECT_NE(err.find("init"), std::string::npos);
  ASSERT_EQ(Run({"train"}), 0);
  ASSERT_EQ(Run({"extract"}), 0);
  ASSERT_EQ(Run({"score"}), 0);
  std::string report;
  ASSERT_EQ(Run({"report"}, &report), 0);

  const ExperimentConfig cfg = ExperimentConfig::Load(config_);
  const fs::path eval_dir = cfg.StageDir("eval");
  EXPECT_EQ(Slurp(eval_dir / "report.txt"), report);
  const TrialList trials = ReadTrials((eval_dir / "trials.txt").string());
  EXPECT_EQ(trials.trials.size(), 15u);
  for (const char* cond : {"full-clean", "0.5s-noisy"}) {
    const MetricsReport m = Evaluate(ReadScores(
        (eval_dir / "scores" / (std::string(cond) + ".txt")).string(), trials));
    EXPECT_NE(report.find(FormatReport(m, cond)), std::string::npos) << cond;
  }

  // A second run from scratch reproduces every artifact byte for byte.
  const std::string ckpt =
      Slurp(fs::path(cfg.StageDir("train")) / "final.ckpt");
  const std::string scores = Slurp(eval_dir / "scores" / "full-noisy.txt");
  fs::remove_all(cfg.out_dir);
  for (const char* cmd : {"gen-corpus", "augment", "train", "extract", "score",
                          "report"}) {
    ASSERT_EQ(Run({cmd}), 0) << cmd;
  }
  EXPECT_EQ(Slurp(fs::path(cfg.StageDir("train")) / "final.ckpt"), ckpt);
  EXPECT_EQ(Slurp(eval_dir / "scores" / "full-noisy.txt"), scores);
  EXPECT_EQ(Slurp(eval_dir / "report.txt"), report);

  // Existing checkpoints are reused unless forced.
  std::string out;
  ASSERT_EQ(Run({"train"}, &out), 0);
  EXPECT_NE(out.find("up to date"), std::string::npos);

  // Attention export of an evaluation utterance.
  const std::string csv = dir_->file("a.csv");
  ASSERT_EQ(Run({"attn-dump", "--utt", "eval-spk000-u000", "--csv", csv}), 0);
  EXPECT_EQ(Slurp(csv).substr(0, 25), "head_1,head_2,head_3,mean");
}

TEST_F(CliPipeline, GradcheckPasses) {
  std::string out;
  EXPECT_EQ(Run({"gradcheck"}, &out), 0);
  EXPECT_NE(out.find(" passed"), std::string::npos);
  EXPECT_EQ(out.find("FAIL"), std::string::npos);
}

TEST_F(CliPipeline, UsageErrorsExitTwo) {
  EXPECT_EQ(Run({"frobnicate"}), 2);
  EXPECT_EQ(Run({"extract", "--regime", "SVM"}), 2);
}

TEST_F(CliPipeline, RegimeSwitchGivesADifferentCheckpoint) {
  ASSERT_EQ(Run({"gen-corpus"}), 0);
  ASSERT_EQ(Run({"augment"}), 0);
  ASSERT_EQ(Run({"train"}), 0);
  ASSERT_EQ(Run({"train", "--regime", "CA"}), 0);
  ExperimentConfig amsm = ExperimentConfig::Load(config_);
  ExperimentConfig ca = amsm;
  ca.SetRegime(Regime::kCa);
  ASSERT_NE(amsm.StageDir("train"), ca.StageDir("train"));
  EXPECT_NE(Slurp(fs::path(amsm.StageDir("train")) / "final.ckpt"),
            Slurp(fs::path(ca.StageDir("train")) / "final.ckpt"));
}

}  // namespace
}  // namespace xvalign

#endif  // XVALIGN_HAVE_CLI
