#include "doctest.h"

#include <sstream>

#include "tabench/report.hpp"

using namespace tabench;

namespace {

RunRecord record(const std::string& model, ToolKind tool, PuzzleKind kind, int n, int trial,
                 bool success) {
    RunRecord r;
    r.model = model;
    r.tool = tool;
    r.kind = kind;
    r.n = n;
    r.trial = trial;
    r.success = success;
    r.verify_verdict = success ? "valid" : "not_at_goal";
    r.tokens.prompt = 100;
    r.tokens.output = 50 + 10 * trial;
    return r;
}

ReportOptions pairs() {
    ReportOptions o;
    o.pairs = {{"llm-a", "lrm-a"}};
    return o;
}

std::vector<RunRecord> paired_cell(int llm_successes, int lrm_successes) {
    std::vector<RunRecord> records;
    for (int t = 0; t < 5; ++t) {
        records.push_back(record("llm-a", ToolKind::PoT, PuzzleKind::Blocks, 3, t,
                                 t < llm_successes));
        records.push_back(record("lrm-a", ToolKind::PoT, PuzzleKind::Blocks, 3, t,
                                 t < lrm_successes));
    }
    return records;
}

} // namespace

TEST_CASE("accuracy table marks cells where the LRM strictly outperforms") {
    // The reasoning model goes 5/5 where its base model manages 2/5.
    auto records = paired_cell(2, 5);
    std::string table =
        accuracy_table_text(records, pairs(), {PuzzleKind::River, PuzzleKind::Blocks});
    CHECK(table.find("2/5") != std::string::npos);
    CHECK(table.find("_5/5_") != std::string::npos);

    // Equal scores carry no marker.
    auto equal = paired_cell(5, 5);
    std::string table_eq =
        accuracy_table_text(equal, pairs(), {PuzzleKind::River, PuzzleKind::Blocks});
    CHECK(table_eq.find("_5/5_") == std::string::npos);

    // An unpaired model never gets a marker.
    auto solo = paired_cell(0, 5);
    for (auto& r : solo)
        if (r.model == "lrm-a") r.model = "standalone";
    std::string table_solo =
        accuracy_table_text(solo, pairs(), {PuzzleKind::River, PuzzleKind::Blocks});
    CHECK(table_solo.find("_5/5_") == std::string::npos);
}

TEST_CASE("empty stores render 0/0 cells for the configured pair") {
    std::string table = accuracy_table_text({}, pairs(), {PuzzleKind::Hanoi, PuzzleKind::Checker});
    CHECK(table.find("llm-a") != std::string::npos);
    CHECK(table.find("lrm-a") != std::string::npos);
    CHECK(table.find("0/0") != std::string::npos);
    CHECK(table.find("N=13") != std::string::npos);
}

TEST_CASE("accuracy report output is deterministic and consistent") {
    auto records = paired_cell(1, 4);
    CHECK(accuracy_report(records, pairs(), ReportFormat::Table) ==
          accuracy_report(records, pairs(), ReportFormat::Table));

    std::string csv = accuracy_report(records, pairs(), ReportFormat::Csv);
    CHECK(csv.find("llm-a,pot,blocks,3,1,5,false") != std::string::npos);
    CHECK(csv.find("lrm-a,pot,blocks,3,4,5,true") != std::string::npos);

    auto parsed = nlohmann::json::parse(accuracy_report(records, pairs(), ReportFormat::Json));
    int total_trials = 0;
    for (const auto& cell : parsed.at("cells")) {
        CHECK(cell.at("successes").get<int>() <= cell.at("trials").get<int>());
        total_trials += cell.at("trials").get<int>();
    }
    CHECK(total_trials == static_cast<int>(records.size()));
}

TEST_CASE("scratchpad usage CSV reports mean steps and accuracy") {
    std::vector<RunRecord> records;
    for (int t = 0; t < 4; ++t) {
        RunRecord r = record("m", ToolKind::Scratchpad, PuzzleKind::Hanoi, 5, t, t < 2);
        r.scratchpad_steps_used = t + 1; // 1,2,3,4 -> mean 2.50
        records.push_back(r);
    }
    records.push_back(record("m", ToolKind::Direct, PuzzleKind::Hanoi, 5, 0, true)); // ignored
    std::string csv = scratchpad_usage_csv(records);
    CHECK(csv == "model,kind,n,mean_steps,accuracy\nm,hanoi,5,2.50,0.50\n");
}

TEST_CASE("token breakdown leaves missing thinking empty, never zero") {
    std::vector<RunRecord> records;
    RunRecord plain = record("llm-a", ToolKind::Direct, PuzzleKind::Hanoi, 3, 0, true);
    records.push_back(plain);
    RunRecord thinking = record("lrm-a", ToolKind::Direct, PuzzleKind::Hanoi, 3, 0, true);
    thinking.tokens.thinking = 400;
    records.push_back(thinking);

    std::string csv = token_breakdown_csv(records);
    std::istringstream is(csv);
    std::string header, llm_line, lrm_line;
    std::getline(is, header);
    std::getline(is, llm_line);
    std::getline(is, lrm_line);
    CHECK(header == "model,tool,kind,n,prompt_mean,output_mean,thinking_mean");
    CHECK(llm_line == "llm-a,direct,hanoi,3,100.0,50.0,");
    CHECK(lrm_line == "lrm-a,direct,hanoi,3,100.0,50.0,400.0");
}
