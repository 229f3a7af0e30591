#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "test_util.hpp"

using tabench::testutil::run_command;
using tabench::testutil::temp_dir;
namespace fs = std::filesystem;

namespace {

const std::string kCli = TABENCH_CLI_PATH;
const std::string kRoot = TABENCH_REPO_ROOT;

} // namespace

TEST_CASE("solve piped into verify exits zero") {
    auto result = run_command(kCli + " solve --kind hanoi --n 3 | " + kCli +
                              " verify --kind hanoi --n 3");
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("\"verdict\": \"valid\"") != std::string::npos);
}

TEST_CASE("verify on an empty move list reports NotAtGoal with exit 1") {
    auto result = run_command("echo '' | " + kCli + " verify --kind hanoi --n 3");
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("not_at_goal") != std::string::npos);
}

TEST_CASE("verify distinguishes parse errors as usage errors") {
    auto result = run_command("echo 'garbage' | " + kCli + " verify --kind hanoi --n 3");
    CHECK(result.exit_code == 2);
}

TEST_CASE("usage errors exit 2") {
    CHECK(run_command(kCli + " solve --kind warp --n 3").exit_code == 2);
    CHECK(run_command(kCli + " frobnicate").exit_code == 2);
    CHECK(run_command(kCli + " generate --kind hanoi --n 3 --seed 4").exit_code == 2);
}

TEST_CASE("generate emits schema-v1 instance JSON") {
    auto result = run_command(kCli + " generate --kind river --n 4");
    CHECK(result.exit_code == 0);
    auto j = nlohmann::json::parse(result.output);
    CHECK(j.at("schema") == "v1");
    CHECK(j.at("boat_capacity") == 3);

    auto blocks = run_command(kCli + " generate --kind blocks --n 3 --seed 7");
    CHECK(nlohmann::json::parse(blocks.output).at("seed") == 7);
}

TEST_CASE("generated instance files feed verify") {
    std::string dir = temp_dir("cli");
    CHECK(run_command(kCli + " generate --kind checker --n 2 > " + dir + "/inst.json")
              .exit_code == 0);
    CHECK(run_command(kCli + " solve --kind checker --n 2 > " + dir + "/moves.txt").exit_code == 0);
    auto result = run_command(kCli + " verify --instance " + dir + "/inst.json --moves " + dir +
                              "/moves.txt");
    CHECK(result.exit_code == 0);
    fs::remove_all(dir);
}

TEST_CASE("run executes a plan and report renders it") {
    std::string dir = temp_dir("cli-run");
    {
        nlohmann::json plan;
        plan["schema"] = "v1";
        plan["models"] = {"fixture-lrm"};
        plan["tools"] = {"direct", "pot"};
        plan["kinds"] = {"hanoi"};
        plan["n_values"] = {3};
        plan["trials"] = 2;
        std::ofstream out(dir + "/plan.json");
        out << plan.dump();
    }
    auto run = run_command(kCli + " --config " + kRoot + "/fixtures/config.json run --plan " +
                           dir + "/plan.json --store " + dir + "/store");
    INFO(run.output);
    CHECK(run.exit_code == 0);
    CHECK(run.output.find("executed 4 (4 succeeded, 0 failed)") != std::string::npos);

    auto rerun = run_command(kCli + " --config " + kRoot + "/fixtures/config.json run --plan " +
                             dir + "/plan.json --store " + dir + "/store");
    CHECK(rerun.output.find("skipped 4") != std::string::npos);

    auto table = run_command(kCli + " --config " + kRoot +
                             "/fixtures/config.json report --store " + dir + "/store");
    CHECK(table.exit_code == 0);
    CHECK(table.output.find("2/2") != std::string::npos);

    auto tokens = run_command(kCli + " --config " + kRoot + "/fixtures/config.json report --store " +
                              dir + "/store --view tokens --format csv");
    CHECK(tokens.output.find("model,tool,kind,n,") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("report warns on an empty store") {
    std::string dir = temp_dir("cli-empty");
    fs::create_directories(dir + "/store/transcripts");
    { std::ofstream out(dir + "/store/records.jsonl"); }
    auto result = run_command(kCli + " report --store " + dir + "/store");
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("warning: store contains no records") != std::string::npos);
    CHECK(result.output.find("0/0") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("missing files exit with the environment code") {
    CHECK(run_command(kCli + " verify --instance /nonexistent.json").exit_code == 3);
    CHECK(run_command(kCli + " report --store /nonexistent-store").exit_code == 3);
}

TEST_CASE("replaying the shipped cassette reproduces the golden table via the CLI") {
    std::string dir = temp_dir("cli-replay");
    auto run = run_command(kCli + " --config " + kRoot + "/fixtures/config.json run --plan " +
                           kRoot + "/fixtures/plan.json --store " + dir + "/store" +
                           " --backend replay --cassette " + kRoot + "/fixtures/cassette.jsonl");
    INFO(run.output);
    CHECK(run.exit_code == 1); // the weak fixture model fails some cells
    CHECK(run.output.find("executed 320") != std::string::npos);

    auto table = run_command(kCli + " --config " + kRoot +
                             "/fixtures/config.json report --store " + dir +
                             "/store --view accuracy --format table");
    std::ifstream golden(kRoot + "/fixtures/golden_table.txt", std::ios::binary);
    std::string expected((std::istreambuf_iterator<char>(golden)),
                         std::istreambuf_iterator<char>());
    CHECK(table.output == expected);
    fs::remove_all(dir);
}

TEST_CASE("run --help names the credential environment variables") {
    auto help = run_command(kCli + " run --help");
    CHECK(help.exit_code == 0);
    CHECK(help.output.find("api_key_env") != std::string::npos);
    CHECK(help.output.find("DEEPSEEK_API_KEY") != std::string::npos);
}

TEST_CASE("solve reports unsolvable instances with a domain exit code") {
    auto result = run_command(kCli + " solve --kind river --n 4 --river-capacity 2");
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("unsolvable") != std::string::npos);
}
