#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "support.hpp"
#include "voxagent/cli.hpp"

using namespace voxagent;
using namespace voxagent::testing;

namespace {

int run_cli(std::vector<std::string> args) {
    std::vector<const char*> argv = {"voxagent"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("identical commands produce byte-identical records") {
    const std::string a = temp_file("vox_cli_a.jsonl");
    const std::string b = temp_file("vox_cli_b.jsonl");
    CHECK(run_cli({"episode", "--task", "wooden_tool", "--seed", "9", "--out", a}) == 0);
    CHECK(run_cli({"episode", "--task", "wooden_tool", "--seed", "9", "--out", b}) == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK_FALSE(slurp(a).empty());
}

TEST_CASE("unknown flags are usage errors") {
    CHECK(run_cli({"episode", "--frobnicate"}) == 2);
    CHECK(run_cli({"no-such-command"}) == 2);
    CHECK(run_cli({}) == 2);
}

TEST_CASE("unregistered tasks fail the run") {
    CHECK(run_cli({"episode", "--task", "moon_base", "--out",
                   temp_file("vox_cli_unused.jsonl")}) == 1);
}

TEST_CASE("dataset commands round-trip and validate") {
    const std::string record = temp_file("vox_cli_ep.jsonl");
    REQUIRE(run_cli({"episode", "--task", "wooden_tool", "--seed", "5", "--out", record}) == 0);
    CHECK(run_cli({"dataset", "validate", record, "--kind", "episode"}) == 0);
    CHECK(run_cli({"dataset", "roundtrip", record, "--kind", "episode", "--out",
                   temp_file("vox_cli_ep.rt")}) == 0);
    CHECK(run_cli({"dataset", "replay", record}) == 0);

    const std::string bad = temp_file("vox_cli_bad.jsonl");
    {
        std::ofstream out(bad);
        out << R"({"kind":"qa","version":1})" << "\n";
        out << R"({"category":"Nope","input":"","instruction":"q","output":"a"})" << "\n";
    }
    CHECK(run_cli({"dataset", "validate", bad, "--kind", "qa"}) == 1);
    CHECK(run_cli({"dataset", "validate", "/nonexistent.jsonl", "--kind", "qa"}) == 2);
}

TEST_CASE("skills subcommands") {
    CHECK(run_cli({"skills", "list"}) == 0);
    CHECK(run_cli({"skills", "query", "collect 3 log", "-k", "3"}) == 0);
    CHECK(run_cli({"skills", "validate", config_path("skills.jsonl")}) == 0);
}

TEST_CASE("tech-tree sweep writes a report and exits cleanly") {
    const std::string out = temp_file("vox_cli_tt.csv");
    CHECK(run_cli({"tech-tree", "--trials", "3", "--seed", "1", "--out", out}) == 0);
    const std::string report = slurp(out);
    CHECK(report.rfind("tier,successes,trials,mean_iterations,sd_iterations\n", 0) == 0);
    CHECK(report.find("wooden_tool,3,3") != std::string::npos);
    CHECK(report.find("diamond_tool,3,3") != std::string::npos);
}

TEST_CASE("qa scoring against the shipped sample") {
    const std::string out = temp_file("vox_cli_qa.csv");
    CHECK(run_cli({"qa", "--pairs", config_path("qa_sample.jsonl"), "--answers",
                   config_path("answers_sample.jsonl"), "--out", out}) == 0);
    const std::string report = slurp(out);
    CHECK(report.rfind("category,mean\n", 0) == 0);
    CHECK(report.find("overall,") != std::string::npos);
}

}  // TEST_SUITE
