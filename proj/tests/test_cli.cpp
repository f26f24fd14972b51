// Copyright 2026 The timebin Authors
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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(TIMEBIN_SIMULATE) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path write(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << text;
    return path;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    return std::string((std::istreambuf_iterator<char>(in)), {});
}

TEST(Simulate, SuccessWritesBundle) {
    const auto out = std::filesystem::temp_directory_path() / "timebin_cli_ok";
    std::filesystem::remove_all(out);
    EXPECT_EQ(run("chsh --seed 3 --shots 2000 --out " + out.string()), 0);
    EXPECT_TRUE(std::filesystem::exists(out / "result.json"));
    EXPECT_TRUE(std::filesystem::exists(out / "counts.csv"));
}

TEST(Simulate, ConfigErrorsExitOne) {
    const auto bad = write("timebin_cli_bad.json", R"({"scenario": "chsh", "losses": {"retrieval": 1.3}})");
    EXPECT_EQ(run("chsh --config " + bad.string() + " --out /tmp/timebin_cli_x"), 1);
    EXPECT_EQ(run("bell --out /tmp/timebin_cli_x"), 1);
    EXPECT_EQ(run("chsh --config /nonexistent.json"), 1);
    EXPECT_EQ(run("chsh --shots zero"), 1);
    EXPECT_EQ(run("chsh --shots 0 --out /tmp/timebin_cli_x"), 1);
    const auto other = write("timebin_cli_other.json", R"({"scenario": "prep-verify"})");
    EXPECT_EQ(run("chsh --config " + other.string() + " --out /tmp/timebin_cli_x"), 1);
}

TEST(Simulate, RuntimeErrorsExitTwo) {
    // Eight Rabi points all at zero duration: the fit has nothing to fit.
    const auto cfg = write("timebin_cli_flat.json",
                           R"({"scenario": "rabi-scan", "shots": 100, "grid": [0, 0, 0, 0, 0, 0, 0, 0]})");
    EXPECT_EQ(run("rabi-scan --config " + cfg.string() + " --out /tmp/timebin_cli_y"), 2);
}

TEST(Simulate, EnvironmentSetsDefaultOutputDir) {
    const auto out = std::filesystem::temp_directory_path() / "timebin_cli_env";
    std::filesystem::remove_all(out);
    const std::string cmd = "TIMEBIN_OUT_DIR=" + out.string() + " " + TIMEBIN_SIMULATE + " prep-verify --shots 500 > /dev/null 2>&1";
    EXPECT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_TRUE(std::filesystem::exists(out / "counts.csv"));
}

TEST(Simulate, SameSeedSameCountsAcrossThreads) {
    const auto a = std::filesystem::temp_directory_path() / "timebin_cli_t1";
    const auto b = std::filesystem::temp_directory_path() / "timebin_cli_t4";
    ASSERT_EQ(run("entangle-scan --seed 9 --shots 3000 --threads 1 --out " + a.string()), 0);
    ASSERT_EQ(run("entangle-scan --seed 9 --shots 3000 --threads 4 --out " + b.string()), 0);
    EXPECT_EQ(slurp(a / "counts.csv"), slurp(b / "counts.csv"));
}

}  // namespace
