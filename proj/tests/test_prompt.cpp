#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "tabench/decode.hpp"
#include "tabench/prompt.hpp"
#include "test_util.hpp"

using namespace tabench;

namespace {

const PromptKit& kit() {
    static PromptKit k;
    return k;
}

/// Pulls the JSON string literal out of a rendered scratchpad user prompt.
std::string scratchpad_segment(const std::string& user_text) {
    const std::string marker = "Current scratchpad state (JSON string): ";
    size_t pos = user_text.find(marker);
    REQUIRE(pos != std::string::npos);
    size_t start = pos + marker.size();
    size_t end = user_text.find('\n', start);
    std::string literal = user_text.substr(start, end - start);
    return nlohmann::json::parse(literal).get<std::string>();
}

} // namespace

TEST_CASE("render_direct embeds the instance") {
    PuzzleInstance inst = make_instance(PuzzleKind::Hanoi, 3);
    PromptBundle bundle = kit().render_direct(inst);
    CHECK(bundle.template_id == "direct");
    CHECK(bundle.template_version == "v1");
    CHECK(bundle.user_text.find("3 disks") != std::string::npos);
    CHECK(bundle.user_text.find("peg 0 (bottom to top): [3, 2, 1]") != std::string::npos);
    CHECK(bundle.system_text.find("Tower of Hanoi") != std::string::npos);
    CHECK(bundle.system_text.find("(disk,from,to)") != std::string::npos);

    PuzzleInstance river = make_instance(PuzzleKind::River, 5);
    CHECK(kit().render_direct(river).user_text.find("boat capacity 3") != std::string::npos);
}

TEST_CASE("rendering is deterministic") {
    PuzzleInstance inst = make_instance(PuzzleKind::Blocks, 4, 77);
    CHECK(kit().render_direct(inst).system_text == kit().render_direct(inst).system_text);
    CHECK(kit().render_direct(inst).user_text == kit().render_direct(inst).user_text);
    CHECK(kit().render_pot(inst).hash() == kit().render_pot(inst).hash());
    auto d = kit().scratchpad_description();
    auto e = kit().scratchpad_examples(inst.kind);
    CHECK(kit().render_scratchpad_step(inst, "s", d, e).hash() ==
          kit().render_scratchpad_step(inst, "s", d, e).hash());
}

TEST_CASE("scratchpad step bundles differ only in the scratchpad segment") {
    PuzzleInstance inst = make_instance(PuzzleKind::Checker, 3);
    auto d = kit().scratchpad_description();
    auto e = kit().scratchpad_examples(inst.kind);
    PromptBundle a = kit().render_scratchpad_step(inst, "first state", d, e);
    PromptBundle b = kit().render_scratchpad_step(inst, "second state", d, e);
    CHECK(a.system_text == b.system_text); // P, D, E_m fixed across steps
    CHECK(a.user_text != b.user_text);
    CHECK(scratchpad_segment(a.user_text) == "first state");
    CHECK(scratchpad_segment(b.user_text) == "second state");

    // Step 1 uses the empty scratchpad and still carries D and the examples.
    PromptBundle first = kit().render_scratchpad_step(inst, "", d, e);
    CHECK(scratchpad_segment(first.user_text).empty());
    CHECK(first.system_text.find(d.text) != std::string::npos);
    CHECK(first.system_text.find("Example 3") != std::string::npos);
}

TEST_CASE("scratchpad content with delimiters round-trips through the prompt") {
    PuzzleInstance inst = make_instance(PuzzleKind::Hanoi, 3);
    auto d = kit().scratchpad_description();
    auto e = kit().scratchpad_examples(inst.kind);
    std::mt19937_64 rng(12);
    const char alphabet[] = "\"{}\\\n\tCurrent scratchpad state (JSON string): abc123";
    for (int iter = 0; iter < 50; ++iter) {
        std::string payload;
        size_t len = rng() % 80;
        for (size_t i = 0; i < len; ++i)
            payload.push_back(alphabet[rng() % (sizeof(alphabet) - 1)]);
        PromptBundle bundle = kit().render_scratchpad_step(inst, payload, d, e);
        CHECK(scratchpad_segment(bundle.user_text) == payload);
    }
}

TEST_CASE("in-context example move lists verify on their miniature instances") {
    for (auto kind : {PuzzleKind::Hanoi, PuzzleKind::Checker, PuzzleKind::River,
                      PuzzleKind::Blocks}) {
        InContextExampleSet set = kit().scratchpad_examples(kind);
        CHECK(set.examples.size() == 3); // m = 3 by default
        for (const auto& ex : set.examples) {
            PuzzleInstance inst = make_instance(kind, ex.n, ex.seed);
            MoveList concat{kind, {}};
            for (const auto& step : ex.steps) {
                if (step.answer.empty()) continue;
                auto frag = extract_moves(step.answer, kind);
                REQUIRE(frag.has_value());
                for (const auto& mv : frag.value().moves) concat.moves.push_back(mv);
            }
            CHECK(verify(inst, concat).verdict == Verdict::Valid);
            CHECK(ex.steps.back().finish);
        }
    }
    CHECK(kit().scratchpad_examples(PuzzleKind::Hanoi, 1).examples.size() == 1);
    CHECK(kit().scratchpad_examples(PuzzleKind::Hanoi, 0).examples.empty());
}

TEST_CASE("think-and-execute demo answers verify on their instances") {
    struct Demo {
        PuzzleKind kind;
        int n;
        std::optional<uint64_t> seed;
    };
    // Mirrors the instances shown in the tae.examples.* template files.
    std::vector<std::vector<Demo>> demos = {
        {{PuzzleKind::Hanoi, 1, {}}, {PuzzleKind::Hanoi, 2, {}}, {PuzzleKind::Hanoi, 3, {}}},
        {{PuzzleKind::Checker, 1, {}}, {PuzzleKind::Checker, 2, {}}, {PuzzleKind::Checker, 1, {}}},
        {{PuzzleKind::River, 1, {}}, {PuzzleKind::River, 2, {}}, {PuzzleKind::River, 2, {}}},
        {{PuzzleKind::Blocks, 2, 3}, {PuzzleKind::Blocks, 3, 7}, {PuzzleKind::Blocks, 3, 11}},
    };
    for (const auto& group : demos) {
        std::string text = kit().template_text("tae.examples." + to_string(group[0].kind));
        // Split on example headers and verify each answer block.
        std::vector<std::string> segments;
        size_t pos = 0;
        while (true) {
            size_t next = text.find("Example ", pos + 1);
            segments.push_back(text.substr(pos, next - pos));
            if (next == std::string::npos) break;
            pos = next;
        }
        REQUIRE(segments.size() == group.size());
        for (size_t i = 0; i < group.size(); ++i) {
            PuzzleInstance inst = make_instance(group[i].kind, group[i].n, group[i].seed);
            auto moves = extract_moves(segments[i], group[i].kind);
            REQUIRE(moves.has_value());
            CHECK(verify(inst, moves.value()).verdict == Verdict::Valid);
        }
    }
}

TEST_CASE("placeholder substitution is strict") {
    CHECK(substitute_placeholders("a {{x}} b", {{"x", "1"}}) == "a 1 b");
    CHECK_THROWS(substitute_placeholders("a {{unknown}} b", {{"x", "1"}}));
    CHECK_THROWS(substitute_placeholders("a {{open", {{"open", "1"}}));
    // Substituted values are not rescanned.
    CHECK(substitute_placeholders("{{x}}", {{"x", "{{y}}"}}) == "{{y}}");
}

TEST_CASE("template overrides load from a directory") {
    std::string dir = testutil::temp_dir("tpl");
    {
        std::ofstream out(dir + "/direct.system@v2.txt");
        out << "OVERRIDE {{rules}}";
    }
    PromptKit overridden{dir};
    PuzzleInstance inst = make_instance(PuzzleKind::Hanoi, 3);
    CHECK(overridden.render_direct(inst).system_text.rfind("OVERRIDE", 0) == 0);
    CHECK_THROWS(PromptKit{std::string("/nonexistent/tabench-tpl")});
    std::filesystem::remove_all(dir);
}

TEST_CASE("rendered bundle hashes match the golden file") {
    std::ifstream golden(std::string(TABENCH_REPO_ROOT) + "/tests/golden/prompt_hashes.txt");
    REQUIRE_MESSAGE(golden.good(), "run make_fixtures to generate tests/golden/prompt_hashes.txt");
    std::map<std::string, std::string> expected;
    std::string name, hash;
    while (golden >> name >> hash) expected[name] = hash;
    REQUIRE(!expected.empty());

    for (PuzzleKind kind : {PuzzleKind::Hanoi, PuzzleKind::Checker, PuzzleKind::River,
                            PuzzleKind::Blocks}) {
        std::optional<uint64_t> seed;
        if (kind == PuzzleKind::Blocks) seed = 7;
        PuzzleInstance inst = make_instance(kind, 3, seed);
        std::string k = to_string(kind);
        CHECK(kit().render_direct(inst).hash() == expected.at("direct." + k));
        CHECK(kit().render_pot(inst).hash() == expected.at("pot." + k));
        CHECK(kit().render_think_execute_meta(kind).hash() == expected.at("tae.meta." + k));
        CHECK(kit().render_think_execute_run(kind, "pseudocode-sample", inst).hash() ==
              expected.at("tae.run." + k));
        CHECK(kit().render_scratchpad_step(inst, "", kit().scratchpad_description(),
                                           kit().scratchpad_examples(kind))
                  .hash() == expected.at("scratchpad." + k));
    }
}

TEST_CASE("the scratchpad description declares exactly the decode contract keys") {
    ScratchpadDescription d = kit().scratchpad_description();
    // Shared verbatim with the decode module's expectations.
    CHECK(d.text.find("\"partial_answer\"") != std::string::npos);
    CHECK(d.text.find("\"scratchpad\"") != std::string::npos);
    CHECK(d.text.find("\"finish\"") != std::string::npos);
    // Identical across all four tasks: the system prompt embeds it unchanged.
    for (auto kind : {PuzzleKind::Hanoi, PuzzleKind::Checker, PuzzleKind::River,
                      PuzzleKind::Blocks}) {
        std::optional<uint64_t> seed;
        if (kind == PuzzleKind::Blocks) seed = 7;
        PuzzleInstance inst = make_instance(kind, 3, seed);
        PromptBundle b = kit().render_scratchpad_step(inst, "", d,
                                                      kit().scratchpad_examples(kind));
        CHECK(b.system_text.find(d.text) != std::string::npos);
    }
}
