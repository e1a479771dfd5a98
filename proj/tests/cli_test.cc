// Copyright 2026 The MPSL Authors
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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace {

namespace fs = std::filesystem;

constexpr char kBlobs[] = R"({
  "layers": [16, 12, 4], "epochs": 2, "batch_size": 10, "seed": 5, "T": 4, "lr": 0.01,
  "dataset": {"kind": "synthetic", "classes": 4, "width": 4, "height": 4,
              "n_per_class": 20, "test_per_class": 10, "sigma": 0.1}
})";

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mpsl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "blobs.json") << kBlobs;
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Exit code of the CLI; combined output lands in output_.
  int Run(const std::string& args) {
    const fs::path log = dir_ / "log.txt";
    const std::string cmd = std::string("\"") + MPSL_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int raw = std::system(cmd.c_str());
    output_ = ReadFile(log);
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  }

  std::string Out() const { return " --out-dir \"" + dir_.string() + "\""; }
  std::string Ckpt() const { return " --checkpoint \"" + (dir_ / "model.ckpt").string() + "\""; }
  std::string Config() const { return " --config \"" + (dir_ / "blobs.json").string() + "\""; }

  fs::path dir_;
  std::string output_;
};

TEST_F(CliTest, MissingConfigIsUsageError) {
  EXPECT_EQ(Run("train --config /nonexistent/cfg.json" + Out()), 2);
  EXPECT_NE(output_.find("/nonexistent/cfg.json"), std::string::npos);
}

TEST_F(CliTest, UnknownVerbAndMissingFlagAreUsageErrors) {
  EXPECT_EQ(Run("frobnicate"), 2);
  EXPECT_EQ(Run("eval"), 2);
  EXPECT_EQ(Run(""), 2);
}

TEST_F(CliTest, InvalidConfigNamesField) {
  std::ofstream(dir_ / "bad.json") << R"({"layers":[16,4],"bach_size":3})";
  EXPECT_EQ(Run("train --config \"" + (dir_ / "bad.json").string() + "\"" + Out()), 2);
  EXPECT_NE(output_.find("bach_size"), std::string::npos);
}

TEST_F(CliTest, TrainWritesOneTrainAndTestRowPerEpoch) {
  ASSERT_EQ(Run("train" + Config() + Out()), 0) << output_;
  const std::vector<std::string> lines = Lines(ReadFile(dir_ / "train.csv"));
  ASSERT_EQ(lines.size(), 2u + 4u);
  EXPECT_EQ(lines[0].rfind("# ", 0), 0u);
  EXPECT_NE(lines[2].find(",1,none,0,train,"), std::string::npos);
  EXPECT_NE(lines[3].find(",1,none,0,test,"), std::string::npos);
  EXPECT_NE(lines[5].find(",2,none,0,test,"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "model.ckpt"));
}

TEST_F(CliTest, EvalMergedAndUnmergedAgree) {
  ASSERT_EQ(Run("train" + Config() + Out()), 0) << output_;
  ASSERT_EQ(Run("eval --merged" + Ckpt() + Out()), 0) << output_;
  const std::string merged = Lines(ReadFile(dir_ / "eval.csv")).at(2);
  ASSERT_EQ(Run("eval --unmerged" + Ckpt() + Out()), 0) << output_;
  const std::string unmerged = Lines(ReadFile(dir_ / "eval.csv")).at(2);
  // Same accuracy column; the mode column differs.
  auto field = [](const std::string& line, int k) {
    std::stringstream in(line);
    std::string f;
    for (int i = 0; i <= k; ++i) std::getline(in, f, ',');
    return f;
  };
  EXPECT_EQ(field(merged, 2), "merged");
  EXPECT_EQ(field(unmerged, 2), "unmerged");
  EXPECT_EQ(field(merged, 9), field(unmerged, 9));
  EXPECT_EQ(Run("eval --merged --unmerged" + Ckpt()), 2);
}

TEST_F(CliTest, RobustnessZeroLevelEqualsClean) {
  ASSERT_EQ(Run("train" + Config() + Out()), 0) << output_;
  ASSERT_EQ(Run("eval" + Ckpt() + Out()), 0);
  const std::string clean = Lines(ReadFile(dir_ / "eval.csv")).at(2);
  ASSERT_EQ(Run("robustness --kinds gaussian --levels 0.2,0" + Ckpt() + Out()), 0) << output_;
  const std::vector<std::string> lines = Lines(ReadFile(dir_ / "robustness.csv"));
  ASSERT_EQ(lines.size(), 4u);
  // Levels are written in ascending order.
  EXPECT_NE(lines[2].find(",gaussian,0,test,"), std::string::npos);
  EXPECT_NE(lines[3].find(",gaussian,0.2,test,"), std::string::npos);
  const auto accuracy = [](const std::string& line) {
    std::stringstream in(line);
    std::string f;
    for (int i = 0; i <= 9; ++i) std::getline(in, f, ',');
    return f;
  };
  EXPECT_EQ(accuracy(lines[2]), accuracy(clean));
}

TEST_F(CliTest, RobustnessRejectsBadLevels) {
  ASSERT_EQ(Run("train" + Config() + Out()), 0) << output_;
  EXPECT_EQ(Run("robustness --kinds gaussian --levels -1" + Ckpt() + Out()), 2);
  EXPECT_EQ(Run("robustness --kinds crop --levels 9" + Ckpt() + Out()), 2);
  EXPECT_EQ(Run("robustness --kinds blur" + Ckpt() + Out()), 2);
  EXPECT_EQ(Run("robustness --levels abc" + Ckpt() + Out()), 2);
}

TEST_F(CliTest, GradcheckExitCodes) {
  EXPECT_EQ(Run("gradcheck --trials 3"), 0) << output_;
  EXPECT_EQ(Run("gradcheck --trials 3 --corrupt-surrogate-width 0.5"), 1) << output_;
  EXPECT_EQ(Run("gradcheck --trials 0"), 2);
}

TEST_F(CliTest, ExportFeaturesClampsAndIsDeterministic) {
  ASSERT_EQ(Run("train" + Config() + Out()), 0) << output_;
  ASSERT_EQ(Run("export-features --samples 1000" + Ckpt() + Out()), 0) << output_;
  EXPECT_NE(output_.find("warning"), std::string::npos);
  const std::string first = ReadFile(dir_ / "features.csv");
  const std::vector<std::string> lines = Lines(first);
  ASSERT_EQ(lines.size(), 1u + 40u);
  EXPECT_EQ(lines[0].rfind("label,u0,u1,", 0), 0u);
  ASSERT_EQ(Run("export-features --samples 1000" + Ckpt() + Out()), 0);
  EXPECT_EQ(ReadFile(dir_ / "features.csv"), first);
}

TEST_F(CliTest, NonFiniteTrainingAbortsWithCode3) {
  std::ofstream(dir_ / "hot.json") << R"({
    "layers": [16, 12, 4], "epochs": 1, "batch_size": 10, "T": 4, "lr": 1e300,
    "dataset": {"kind": "synthetic", "classes": 4, "width": 4, "height": 4,
                "n_per_class": 20, "test_per_class": 10}
  })";
  const int code = Run("train --config \"" + (dir_ / "hot.json").string() + "\"" + Out());
  EXPECT_EQ(code, 3) << output_;
  EXPECT_NE(output_.find("batch"), std::string::npos);
}

}  // namespace
