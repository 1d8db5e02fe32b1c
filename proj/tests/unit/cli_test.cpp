// Copyright 2026-present the kate project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Drives the built `kate` binary end to end.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "local_server.hpp"
#include "synthetic.hpp"

namespace kate {
namespace {

using json = nlohmann::json;

const std::filesystem::path kFixtures = KATE_FIXTURE_DIR;

struct CliResult {
    int exit_code = -1;
    std::string out;
};

CliResult
kate_cli(const std::string& args) {
    const std::string cmd = std::string("'") + KATE_CLI_PATH + "' " + args + " 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    CliResult r;
    if (pipe == nullptr) {
        return r;
    }
    std::array<char, 4096> buf{};
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) {
        r.out.append(buf.data(), n);
    }
    const int status = ::pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string
quoted(const std::filesystem::path& p) {
    return "'" + p.string() + "'";
}

std::filesystem::path
write_config(const testing::TempDir& dir, const json& extra) {
    json j = {{"train_records", (kFixtures / "qa_train.jsonl").string()},
              {"eval_records", (kFixtures / "qa_eval.jsonl").string()},
              {"train_embeddings", (kFixtures / "qa_train.bin").string()},
              {"eval_embeddings", (kFixtures / "qa_eval.bin").string()},
              {"task", "qa"},
              {"k", 3}};
    j.merge_patch(extra);
    const auto path = dir.path() / "config.json";
    std::ofstream(path) << j.dump(2);
    return path;
}

TEST(Cli, IngestValidatesFiles) {
    const auto ok = kate_cli("ingest --records " + quoted(kFixtures / "qa_train.jsonl") + " --embeddings " +
                             quoted(kFixtures / "qa_train.bin"));
    EXPECT_EQ(ok.exit_code, 0);
    EXPECT_NE(ok.out.find("30 x 8"), std::string::npos) << ok.out;
    // Mismatched records and embeddings.
    EXPECT_EQ(kate_cli("ingest --records " + quoted(kFixtures / "qa_eval.jsonl") + " --embeddings " +
                       quoted(kFixtures / "qa_train.bin"))
                  .exit_code,
              1);
    EXPECT_EQ(kate_cli("ingest --records /nonexistent.jsonl").exit_code, 1);
    EXPECT_EQ(kate_cli("frobnicate").exit_code, 1);
}

TEST(Cli, RetrieveByIdListsSelfFirst) {
    const auto r = kate_cli("retrieve --store " + quoted(kFixtures / "qa_train.bin") + " --records " +
                            quoted(kFixtures / "qa_train.jsonl") + " --query-id qa005 --k 3");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "5\tqa005\t0");
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 3);
    const auto rev = kate_cli("retrieve --store " + quoted(kFixtures / "qa_train.bin") + " --records " +
                              quoted(kFixtures / "qa_train.jsonl") + " --query-id qa005 --k 3 --order reverse");
    const std::string last = rev.out.substr(rev.out.rfind('\n', rev.out.size() - 2) + 1);
    EXPECT_EQ(last, "5\tqa005\t0\n");
    EXPECT_EQ(kate_cli("retrieve --store " + quoted(kFixtures / "qa_train.bin") + " --records " +
                       quoted(kFixtures / "qa_train.jsonl") + " --query-id nope")
                  .exit_code,
              1);
    EXPECT_EQ(kate_cli("retrieve --store " + quoted(kFixtures / "qa_train.bin") + " --records " +
                       quoted(kFixtures / "qa_train.jsonl"))
                  .exit_code,
              1);
}

TEST(Cli, RetrieveByTextUsesEmbeddingEndpoint) {
    testing::LocalServer server("/embed", [](const httplib::Request& req, httplib::Response& res) {
        const auto body = json::parse(req.body);
        const int dim = body["texts"][0] == "wrong dim" ? 3 : 8;
        res.set_content(json{{"dim", dim}, {"vectors", {std::vector<float>(dim, 0.0f)}}}.dump(), "application/json");
    });
    const std::string base = "retrieve --store " + quoted(kFixtures / "qa_train.bin") + " --records " +
                             quoted(kFixtures / "qa_train.jsonl") + " --k 2 --endpoint " + server.url("/embed");
    const auto ok = kate_cli(base + " --query-text 'who wrote it'");
    EXPECT_EQ(ok.exit_code, 0);
    EXPECT_EQ(std::count(ok.out.begin(), ok.out.end(), '\n'), 2);
    EXPECT_EQ(kate_cli(base + " --query-text 'wrong dim'").exit_code, 1);
}

TEST(Cli, RetrieveBackendFailureExitsTwo) {
    testing::LocalServer server("/embed", [](const httplib::Request&, httplib::Response& res) { res.status = 401; });
    EXPECT_EQ(kate_cli("retrieve --store " + quoted(kFixtures / "qa_train.bin") + " --records " +
                       quoted(kFixtures / "qa_train.jsonl") + " --query-text x --endpoint " + server.url("/embed"))
                  .exit_code,
              2);
}

TEST(Cli, RunWritesReportAndReportRecomputes) {
    testing::TempDir dir;
    const auto config = write_config(dir, json::object());
    const auto out = dir.path() / "run";
    const auto r = kate_cli("run --config " + quoted(config) + " --out " + quoted(out) + " --method random --trials 2");
    ASSERT_EQ(r.exit_code, 0);
    const auto summary = json::parse(testing::read_file(out / "summary.json"));
    EXPECT_EQ(summary["method"], "random");
    EXPECT_EQ(summary["trials"], 5);
    EXPECT_EQ(kate_cli("report --dir " + quoted(out)).exit_code, 0);
}

TEST(Cli, ExitCodes) {
    testing::TempDir dir;
    const auto out = quoted(dir.path() / "out");
    EXPECT_EQ(kate_cli("run --config " + quoted(write_config(dir, json{{"k", 0}})) + " --out " + out).exit_code, 1);
    EXPECT_EQ(kate_cli("run --config " + quoted(write_config(dir, json::object())) + " --out " + out +
                       " --set 'backend=\"mock_table:/nonexistent.json\"'")
                  .exit_code,
              1);
    // An endpoint with nothing listening is a backend failure.
    EXPECT_EQ(kate_cli("run --config " +
                       quoted(write_config(dir, json{{"backend", "http"},
                                                     {"http",
                                                      {{"endpoint", "http://127.0.0.1:9/v1/completions"},
                                                       {"max_retries", 0},
                                                       {"timeout_seconds", 1}}}})) +
                       " --out " + out)
                  .exit_code,
              2);
    EXPECT_EQ(kate_cli("run --out " + out).exit_code, 1);
}

TEST(Cli, SweepAndStudy) {
    testing::TempDir dir;
    const auto config = write_config(dir, json{{"sweep", {{"k_values", {1, 2}}}}, {"study", {{"eval_size", 5}}}});
    const auto sweep = kate_cli("sweep --config " + quoted(config) + " --out " + quoted(dir.path() / "sweep"));
    ASSERT_EQ(sweep.exit_code, 0);
    EXPECT_EQ(sweep.out.substr(0, 6), "method");
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "sweep" / "curves.csv"));
    const auto study =
        kate_cli("study-distance --config " + quoted(config) + " --out " + quoted(dir.path() / "study"));
    ASSERT_EQ(study.exit_code, 0);
    EXPECT_NE(study.out.find("closest="), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "study" / "study.json"));
}

}  // namespace
}  // namespace kate
