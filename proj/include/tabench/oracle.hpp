#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>

#include "tabench/puzzle.hpp"

namespace tabench {

struct OracleResult {
    enum class Status { Solved, Unsolvable, Exhausted };
    Status status = Status::Exhausted;
    std::optional<MoveList> moves;
    uint64_t explored_states = 0; // states inserted into the visited set
};

std::string to_string(OracleResult::Status s);

/// Standard recursive Tower of Hanoi solution, streamed move by move.
void hanoi_closed_form_each(int n, const std::function<void(const HanoiMove&)>& emit);

/// Materialized closed-form solution; length is exactly 2^n - 1.
MoveList hanoi_closed_form(int n);

/// Deterministic constructive Checker Jumping solution for arbitrary n
/// (length n^2 + 2n). Works where breadth-first search is infeasible.
MoveList checker_constructive(int n);

inline constexpr uint64_t kDefaultBfsStateCap = 5'000'000;

/// Breadth-first search over apply_move transitions with duplicate-state
/// elimination and the canonical move enumeration order, so the returned
/// shortest solution is reproducible across platforms. Unsolvable is claimed
/// only when the full reachable set was explored under the cap; hitting the
/// cap or the optional deadline yields Exhausted.
OracleResult bfs_solve(
    const PuzzleInstance& instance, uint64_t state_cap = kDefaultBfsStateCap,
    std::optional<std::chrono::steady_clock::time_point> deadline = std::nullopt);

/// Dispatch used by the CLI `solve` subcommand: closed form for Hanoi,
/// constructive for Checker, BFS otherwise.
OracleResult solve_instance(const PuzzleInstance& instance,
                            uint64_t state_cap = kDefaultBfsStateCap);

} // namespace tabench
