#include "doctest.h"

#include "tabench/oracle.hpp"
#include "test_util.hpp"

using namespace tabench;

TEST_CASE("hanoi closed form base cases and lengths") {
    MoveList one = hanoi_closed_form(1);
    REQUIRE(one.moves.size() == 1);
    CHECK(std::get<HanoiMove>(one.moves[0]) == HanoiMove{1, 0, 2});

    CHECK(hanoi_closed_form(3).moves.size() == 7);
    CHECK(hanoi_closed_form(10).moves.size() == 1023);
}

TEST_CASE("hanoi closed form streams without materializing") {
    size_t count = 0;
    hanoi_closed_form_each(13, [&](const HanoiMove&) { ++count; });
    CHECK(count == 8191);

    MoveList ml = hanoi_closed_form(13);
    CHECK(ml.moves.size() == 8191);
    PuzzleInstance inst = make_instance(PuzzleKind::Hanoi, 13);
    CHECK(verify(inst, ml).verdict == Verdict::Valid);
}

TEST_CASE("bfs matches the hanoi closed form exactly") {
    for (int n = 1; n <= 5; ++n) {
        PuzzleInstance inst = make_instance(PuzzleKind::Hanoi, n);
        OracleResult result = bfs_solve(inst);
        REQUIRE(result.status == OracleResult::Status::Solved);
        MoveList closed = hanoi_closed_form(n);
        CHECK(result.moves->moves.size() == closed.moves.size());
        // The optimal hanoi solution is unique, so the sequences agree too.
        CHECK(*result.moves == closed);
    }
}

TEST_CASE("bfs finds the canonical 3-move checker n=1 solution") {
    PuzzleInstance inst = make_instance(PuzzleKind::Checker, 1);
    OracleResult result = bfs_solve(inst);
    REQUIRE(result.status == OracleResult::Status::Solved);
    MoveList expected{PuzzleKind::Checker,
                      {CheckerMove{0, 1}, CheckerMove{2, 0}, CheckerMove{1, 2}}};
    CHECK(*result.moves == expected);
}

TEST_CASE("checker constructive solutions verify for the full grid") {
    for (int n = 1; n <= 13; ++n) {
        MoveList sol = checker_constructive(n);
        CHECK(sol.moves.size() == static_cast<size_t>(n * n + 2 * n));
        PuzzleInstance inst = make_instance(PuzzleKind::Checker, n);
        CHECK(verify(inst, sol).verdict == Verdict::Valid);
    }
    // Pinned regression value for the hardest grid point.
    CHECK(checker_constructive(13).moves.size() == 195);
}

TEST_CASE("constructive equals BFS shortest length for small checker boards") {
    for (int n = 1; n <= 2; ++n) {
        PuzzleInstance inst = make_instance(PuzzleKind::Checker, n);
        OracleResult bfs = bfs_solve(inst);
        REQUIRE(bfs.status == OracleResult::Status::Solved);
        CHECK(bfs.moves->moves.size() == checker_constructive(n).moves.size());
    }
}

TEST_CASE("river n=2 ground truth: solvable in 5 crossings") {
    PuzzleInstance inst = make_instance(PuzzleKind::River, 2);
    OracleResult result = bfs_solve(inst);
    REQUIRE(result.status == OracleResult::Status::Solved);
    CHECK(result.moves->moves.size() == 5);
    CHECK(verify(inst, *result.moves).verdict == Verdict::Valid);
}

TEST_CASE("river n=3 ground truth: solvable in 11 crossings") {
    PuzzleInstance inst = make_instance(PuzzleKind::River, 3);
    OracleResult result = bfs_solve(inst);
    REQUIRE(result.status == OracleResult::Status::Solved);
    CHECK(result.moves->moves.size() == 11);
}

TEST_CASE("river n=4 with capacity 2 is unsolvable") {
    PuzzleInstance inst = make_instance(PuzzleKind::River, 4, std::nullopt, 2);
    OracleResult result = bfs_solve(inst);
    CHECK(result.status == OracleResult::Status::Unsolvable);
    CHECK(!result.moves.has_value());
}

TEST_CASE("bfs is deterministic") {
    PuzzleInstance inst = make_instance(PuzzleKind::River, 3);
    OracleResult a = bfs_solve(inst);
    OracleResult b = bfs_solve(inst);
    REQUIRE(a.status == OracleResult::Status::Solved);
    CHECK(*a.moves == *b.moves);
    CHECK(a.explored_states == b.explored_states);
}

TEST_CASE("bfs reports Exhausted when the state cap is hit") {
    PuzzleInstance inst = make_instance(PuzzleKind::Hanoi, 6);
    OracleResult result = bfs_solve(inst, 10);
    CHECK(result.status == OracleResult::Status::Exhausted);
    CHECK(result.explored_states <= 10);
}

TEST_CASE("bfs honors a cooperative deadline") {
    PuzzleInstance inst = make_instance(PuzzleKind::Hanoi, 10);
    auto past = std::chrono::steady_clock::now() - std::chrono::seconds(1);
    OracleResult result = bfs_solve(inst, kDefaultBfsStateCap, past);
    CHECK(result.status == OracleResult::Status::Exhausted);
}

TEST_CASE("oracle and verifier agree across the small grid") {
    for (auto kind : {PuzzleKind::Hanoi, PuzzleKind::Checker, PuzzleKind::River,
                      PuzzleKind::Blocks}) {
        for (int n = 1; n <= 5; ++n) {
            std::optional<uint64_t> seed;
            if (kind == PuzzleKind::Blocks) seed = 1000 + static_cast<uint64_t>(n);
            PuzzleInstance inst = make_instance(kind, n, seed);
            OracleResult result = solve_instance(inst, 2'000'000);
            if (result.status != OracleResult::Status::Solved) continue; // unsolvable river cells
            CHECK(verify(inst, *result.moves).verdict == Verdict::Valid);
        }
    }
}

TEST_CASE("solved blocks instances produce shortest solutions that verify") {
    for (uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL}) {
        PuzzleInstance inst = make_instance(PuzzleKind::Blocks, 4, seed);
        OracleResult result = bfs_solve(inst);
        REQUIRE(result.status == OracleResult::Status::Solved);
        CHECK(verify(inst, *result.moves).verdict == Verdict::Valid);
    }
}
