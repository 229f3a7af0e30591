#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "tabench/result.hpp"

namespace tabench {

enum class PuzzleKind { Hanoi, Checker, River, Blocks };

std::string to_string(PuzzleKind k);
std::optional<PuzzleKind> puzzle_kind_from_string(std::string_view s);

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

/// Disks are numbered 1 (smallest) .. n (largest); pegs store bottom-to-top.
struct HanoiState {
    std::array<std::vector<int>, 3> pegs;
    bool operator==(const HanoiState&) const = default;
};

enum class Cell : uint8_t { Empty = 0, Red = 1, Blue = 2 };

struct CheckerState {
    std::vector<Cell> cells; // length 2n+1, exactly one Empty
    bool operator==(const CheckerState&) const = default;
};

/// Actor i / Agent i, i in 1..n. Token form "A<i>" / "G<i>".
struct Person {
    int index = 0;
    bool agent = false;

    auto operator<=>(const Person&) const = default;
    std::string token() const { return (agent ? "G" : "A") + std::to_string(index); }
    /// Bit position in a bank mask; actors on even bits, agents on odd.
    int bit() const { return (index - 1) * 2 + (agent ? 1 : 0); }
};

std::optional<Person> person_from_token(std::string_view tok);

enum class BoatSide : uint8_t { Left, Right };

/// Right bank is the complement of left_mask within the 2n-person universe.
struct RiverState {
    uint64_t left_mask = 0;
    BoatSide boat = BoatSide::Left;
    bool operator==(const RiverState&) const = default;
};

/// Blocks are numbered 1..n; display names come from the instance palette.
struct BlocksState {
    std::array<std::vector<int>, 3> stacks;
    bool operator==(const BlocksState&) const = default;
};

using State = std::variant<HanoiState, CheckerState, RiverState, BlocksState>;

// ---------------------------------------------------------------------------
// Moves
// ---------------------------------------------------------------------------

struct HanoiMove {
    int disk = 0, from_peg = 0, to_peg = 0;
    auto operator<=>(const HanoiMove&) const = default;
};

struct CheckerMove {
    int from_cell = 0, to_cell = 0;
    auto operator<=>(const CheckerMove&) const = default;
};

/// Passengers kept sorted (index ascending, actor before agent).
struct RiverMove {
    std::vector<Person> passengers;
    auto operator<=>(const RiverMove&) const = default;
};

struct BlocksMove {
    int from_stack = 0, to_stack = 0;
    auto operator<=>(const BlocksMove&) const = default;
};

using Move = std::variant<HanoiMove, CheckerMove, RiverMove, BlocksMove>;

PuzzleKind kind_of(const Move& mv);

struct MoveList {
    PuzzleKind kind = PuzzleKind::Hanoi;
    std::vector<Move> moves;
    bool operator==(const MoveList&) const = default;
};

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

struct PuzzleInstance {
    PuzzleKind kind = PuzzleKind::Hanoi;
    int n = 0;
    int boat_capacity = 0;           // River only
    std::optional<uint64_t> seed;    // Blocks only
    bool checker_allow_backward = false;
    State initial_state;
    State goal_state;
    std::vector<std::string> block_names; // Blocks only; name of block i at [i-1]
};

/// Capacity schedule for River: 2 for n <= 3, 3 for n >= 4.
int river_capacity_for(int n);

/// Builds the canonical instance. Deterministic for fixed inputs.
/// Throws std::invalid_argument on n < 1, on a seed supplied for a
/// non-Blocks kind, or on a missing seed for Blocks.
PuzzleInstance make_instance(PuzzleKind kind, int n,
                             std::optional<uint64_t> seed = std::nullopt,
                             std::optional<int> river_capacity_override = std::nullopt,
                             bool checker_allow_backward = false);

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

/// Rule identifiers appear verbatim in VerifyReport.reason.
struct MoveError {
    std::string rule;   // e.g. "larger-on-smaller", "jealousy-violation"
    std::string detail; // human-readable elaboration
    std::string message() const { return detail.empty() ? rule : rule + ": " + detail; }
};

/// Pure successor function; the input state is never modified.
Result<State, MoveError> apply_move(const State& state, const Move& mv,
                                    const PuzzleInstance& instance);

/// All legal moves from `state` in the pinned canonical order
/// (pegs/cells/persons/stacks ascending; River passenger sets by size then
/// lexicographic person order).
std::vector<Move> enumerate_moves(const State& state, const PuzzleInstance& instance);

bool state_well_formed(const State& state, const PuzzleInstance& instance);

/// Compact canonical encoding for visited-set deduplication.
std::string state_key(const State& state);

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

enum class Verdict { Valid, IllegalMove, NotAtGoal };

std::string to_string(Verdict v);

struct VerifyReport {
    Verdict verdict = Verdict::NotAtGoal;
    std::optional<size_t> failing_index;
    std::string reason;
    State final_state;
};

/// Folds apply_move from the initial state, stopping at the first illegal
/// move. Valid iff every move is legal and the final state equals the goal.
/// Throws std::invalid_argument when the move list kind mismatches.
VerifyReport verify(const PuzzleInstance& instance, const MoveList& moves);

// ---------------------------------------------------------------------------
// Canonical move-list text grammar (one move per line)
//   hanoi   (disk,from,to)     checker (from,to)
//   river   (A1,G1,...)        blocks  (from,to)
// ---------------------------------------------------------------------------

std::string move_to_text(const Move& mv);
std::string moves_to_text(const MoveList& ml); // newline-terminated lines

/// Strict single-move parse (whitespace-tolerant, () or [] brackets).
Result<Move, std::string> parse_move_text(std::string_view line, PuzzleKind kind);

/// Strict multi-line parse; blank lines ignored, anything else is an error.
Result<MoveList, std::string> parse_moves_text(std::string_view text, PuzzleKind kind);

// ---------------------------------------------------------------------------
// JSON serialization (schema v1)
// ---------------------------------------------------------------------------

nlohmann::json state_to_json(const State& state, const PuzzleInstance& instance);
State state_from_json(const nlohmann::json& j, const PuzzleInstance& instance);

nlohmann::json instance_to_json(const PuzzleInstance& instance);
PuzzleInstance instance_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const VerifyReport& report, const PuzzleInstance& instance);

/// Render a state as prompt-friendly text (used by prompt templates).
std::string state_to_text(const State& state, const PuzzleInstance& instance);

} // namespace tabench
