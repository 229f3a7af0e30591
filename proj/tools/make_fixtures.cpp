// Regenerates the shipped fixtures: the scripted-trial cassette, the golden
// accuracy table, the fixture plan/config, and the prompt-hash golden file.
//
//   make_fixtures all <repo_root>     rewrite fixtures/ and tests/golden/
//   make_fixtures blocks-demos       print oracle solutions for the blocks
//                                    demo instances (template authoring aid)

#include <filesystem>
#include <fstream>
#include <iostream>

#include "json.hpp"

#include "tabench/config.hpp"
#include "tabench/fixture_backend.hpp"
#include "tabench/oracle.hpp"
#include "tabench/prompt.hpp"
#include "tabench/report.hpp"
#include "tabench/store.hpp"

using namespace tabench;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

HarnessConfig fixture_config() {
    HarnessConfig cfg = default_config();
    cfg.endpoint_profiles.clear();
    cfg.endpoint_profiles["scripted"] = EndpointProfile{};
    cfg.models = {
        ModelSpec{"fixture-llm", false, 8 * 1024, "scripted"},
        ModelSpec{"fixture-lrm", true, 64 * 1024, "scripted"},
    };
    cfg.pairs = {ModelPair{"fixture-llm", "fixture-lrm"}};
    return cfg;
}

ExperimentPlan fixture_plan() {
    ExperimentPlan plan;
    plan.models = {"fixture-llm", "fixture-lrm"};
    plan.tools = {ToolKind::Direct, ToolKind::PoT, ToolKind::ThinkExecute, ToolKind::Scratchpad};
    plan.kinds = {PuzzleKind::Hanoi, PuzzleKind::Checker, PuzzleKind::River, PuzzleKind::Blocks};
    plan.n_values = {3, 5};
    plan.trials = 5;
    return plan;
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    std::cout << "wrote " << path.string() << "\n";
}

int make_all(const fs::path& root) {
    HarnessConfig cfg = fixture_config();
    ExperimentPlan plan = fixture_plan();

    write_file(root / "fixtures/config.json", config_to_json(cfg).dump(2) + "\n");
    write_file(root / "fixtures/plan.json", plan_to_json(plan).dump(2) + "\n");

    fs::path cassette = root / "fixtures/cassette.jsonl";
    fs::remove(cassette);
    fs::path store_dir = fs::temp_directory_path() / "tabench-make-fixtures-store";
    fs::remove_all(store_dir);

    ExecuteOptions options;
    options.config = cfg;
    options.backend = record_wrap(make_fixture_backend(cfg), cassette.string());
    options.concurrency = 1;
    ExecuteSummary summary = execute(plan, store_dir.string(), options);
    std::cout << "recorded cassette: executed " << summary.executed << " trials ("
              << summary.succeeded << " succeeded)\n";

    RunStore store(store_dir.string(), false);
    auto records = store.load_records();
    ReportOptions ropt;
    ropt.pairs = cfg.pairs;
    write_file(root / "fixtures/golden_table.txt",
               accuracy_report(records, ropt, ReportFormat::Table));
    write_file(root / "fixtures/golden_scratchpad.csv", scratchpad_usage_csv(records));
    write_file(root / "fixtures/golden_tokens.csv", token_breakdown_csv(records));
    fs::remove_all(store_dir);

    // Prompt bundle hashes for the template stability test.
    PromptKit kit;
    std::ostringstream hashes;
    for (PuzzleKind kind : {PuzzleKind::Hanoi, PuzzleKind::Checker, PuzzleKind::River,
                            PuzzleKind::Blocks}) {
        std::optional<uint64_t> seed;
        if (kind == PuzzleKind::Blocks) seed = 7;
        PuzzleInstance inst = make_instance(kind, 3, seed);
        hashes << "direct." << to_string(kind) << " " << kit.render_direct(inst).hash() << "\n";
        hashes << "pot." << to_string(kind) << " " << kit.render_pot(inst).hash() << "\n";
        hashes << "tae.meta." << to_string(kind) << " "
               << kit.render_think_execute_meta(kind).hash() << "\n";
        hashes << "tae.run." << to_string(kind) << " "
               << kit.render_think_execute_run(kind, "pseudocode-sample", inst).hash() << "\n";
        hashes << "scratchpad." << to_string(kind) << " "
               << kit.render_scratchpad_step(inst, "", kit.scratchpad_description(),
                                             kit.scratchpad_examples(kind))
                      .hash()
               << "\n";
    }
    write_file(root / "tests/golden/prompt_hashes.txt", hashes.str());
    return 0;
}

int blocks_demos() {
    for (auto [n, seed] : std::vector<std::pair<int, uint64_t>>{{2, 3}, {3, 7}, {3, 11}}) {
        PuzzleInstance inst = make_instance(PuzzleKind::Blocks, n, seed);
        OracleResult result = bfs_solve(inst);
        std::cout << "=== blocks n=" << n << " seed=" << seed << "\n";
        std::cout << "initial: " << state_to_text(inst.initial_state, inst) << "\n";
        std::cout << "goal:    " << state_to_text(inst.goal_state, inst) << "\n";
        if (result.status == OracleResult::Status::Solved) {
            std::cout << "moves (" << result.moves->moves.size() << "):\n"
                      << moves_to_text(*result.moves);
        } else {
            std::cout << "status: " << to_string(result.status) << "\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        if (argc >= 3 && std::string(argv[1]) == "all") return make_all(argv[2]);
        if (argc >= 2 && std::string(argv[1]) == "blocks-demos") return blocks_demos();
        std::cerr << "usage: make_fixtures all <repo_root> | make_fixtures blocks-demos\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
