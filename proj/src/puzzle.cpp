#include "tabench/puzzle.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tabench {

namespace {

const char* kBlockPalette[] = {"red",  "blue",   "green",   "yellow", "orange",
                               "purple", "cyan", "magenta", "white",  "black",
                               "brown", "pink",  "gray"};

std::string block_display_name(int id) {
    constexpr int palette_size = static_cast<int>(sizeof(kBlockPalette) / sizeof(kBlockPalette[0]));
    if (id <= palette_size) return kBlockPalette[id - 1];
    return "block" + std::to_string(id);
}

uint64_t full_river_mask(int n) {
    return (n >= 32) ? ~0ULL : ((1ULL << (2 * n)) - 1);
}

/// A group of persons is safe iff no actor shares it with a foreign agent
/// while the actor's own agent is absent.
bool jealousy_safe(uint64_t mask, int n) {
    for (int i = 1; i <= n; ++i) {
        bool actor_here = mask & (1ULL << Person{i, false}.bit());
        if (!actor_here) continue;
        bool own_agent = mask & (1ULL << Person{i, true}.bit());
        if (own_agent) continue;
        for (int j = 1; j <= n; ++j) {
            if (j == i) continue;
            if (mask & (1ULL << Person{j, true}.bit())) return false;
        }
    }
    return true;
}

std::vector<Person> persons_in_mask(uint64_t mask, int n) {
    std::vector<Person> out;
    for (int i = 1; i <= n; ++i) {
        if (mask & (1ULL << Person{i, false}.bit())) out.push_back({i, false});
        if (mask & (1ULL << Person{i, true}.bit())) out.push_back({i, true});
    }
    return out;
}

} // namespace

std::string to_string(PuzzleKind k) {
    switch (k) {
        case PuzzleKind::Hanoi: return "hanoi";
        case PuzzleKind::Checker: return "checker";
        case PuzzleKind::River: return "river";
        case PuzzleKind::Blocks: return "blocks";
    }
    return "?";
}

std::optional<PuzzleKind> puzzle_kind_from_string(std::string_view s) {
    std::string lower;
    lower.reserve(s.size());
    for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "hanoi") return PuzzleKind::Hanoi;
    if (lower == "checker") return PuzzleKind::Checker;
    if (lower == "river") return PuzzleKind::River;
    if (lower == "blocks") return PuzzleKind::Blocks;
    return std::nullopt;
}

std::optional<Person> person_from_token(std::string_view tok) {
    if (tok.size() < 2) return std::nullopt;
    char c = static_cast<char>(std::toupper(static_cast<unsigned char>(tok[0])));
    if (c != 'A' && c != 'G') return std::nullopt;
    int idx = 0;
    for (size_t i = 1; i < tok.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(tok[i]))) return std::nullopt;
        idx = idx * 10 + (tok[i] - '0');
        if (idx > 1000000) return std::nullopt;
    }
    if (idx < 1) return std::nullopt;
    return Person{idx, c == 'G'};
}

PuzzleKind kind_of(const Move& mv) {
    switch (mv.index()) {
        case 0: return PuzzleKind::Hanoi;
        case 1: return PuzzleKind::Checker;
        case 2: return PuzzleKind::River;
        default: return PuzzleKind::Blocks;
    }
}

int river_capacity_for(int n) { return n <= 3 ? 2 : 3; }

// ---------------------------------------------------------------------------
// make_instance
// ---------------------------------------------------------------------------

PuzzleInstance make_instance(PuzzleKind kind, int n, std::optional<uint64_t> seed,
                             std::optional<int> river_capacity_override,
                             bool checker_allow_backward) {
    if (n < 1) throw std::invalid_argument("make_instance: n must be >= 1");
    if (seed.has_value() && kind != PuzzleKind::Blocks)
        throw std::invalid_argument("make_instance: seed is only valid for blocks");
    if (kind == PuzzleKind::Blocks && !seed.has_value())
        throw std::invalid_argument("make_instance: blocks requires a seed");
    if (river_capacity_override.has_value() && kind != PuzzleKind::River)
        throw std::invalid_argument("make_instance: capacity override is only valid for river");

    PuzzleInstance inst;
    inst.kind = kind;
    inst.n = n;
    inst.checker_allow_backward = checker_allow_backward;

    switch (kind) {
        case PuzzleKind::Hanoi: {
            HanoiState init, goal;
            for (int d = n; d >= 1; --d) init.pegs[0].push_back(d);
            for (int d = n; d >= 1; --d) goal.pegs[2].push_back(d);
            inst.initial_state = init;
            inst.goal_state = goal;
            break;
        }
        case PuzzleKind::Checker: {
            CheckerState init, goal;
            init.cells.assign(static_cast<size_t>(2 * n + 1), Cell::Empty);
            goal.cells.assign(static_cast<size_t>(2 * n + 1), Cell::Empty);
            for (int i = 0; i < n; ++i) {
                init.cells[static_cast<size_t>(i)] = Cell::Red;
                init.cells[static_cast<size_t>(n + 1 + i)] = Cell::Blue;
                goal.cells[static_cast<size_t>(i)] = Cell::Blue;
                goal.cells[static_cast<size_t>(n + 1 + i)] = Cell::Red;
            }
            inst.initial_state = init;
            inst.goal_state = goal;
            break;
        }
        case PuzzleKind::River: {
            if (n > 31) throw std::invalid_argument("make_instance: river supports n <= 31");
            inst.boat_capacity = river_capacity_override.value_or(river_capacity_for(n));
            if (inst.boat_capacity < 1) throw std::invalid_argument("make_instance: capacity must be >= 1");
            RiverState init, goal;
            init.left_mask = full_river_mask(n);
            init.boat = BoatSide::Left;
            goal.left_mask = 0;
            goal.boat = BoatSide::Right;
            inst.initial_state = init;
            inst.goal_state = goal;
            break;
        }
        case PuzzleKind::Blocks: {
            inst.seed = seed;
            for (int i = 1; i <= n; ++i) inst.block_names.push_back(block_display_name(i));
            BlocksState goal;
            for (int i = 1; i <= n; ++i) goal.stacks[0].push_back(i);
            inst.goal_state = goal;

            // Initial state: seeded random walk of legal moves backwards from
            // the goal. Reachability is guaranteed by construction since
            // blocks moves are symmetric. Modulo reduction instead of
            // uniform_int_distribution keeps the walk identical across
            // standard library implementations.
            std::mt19937_64 rng(*seed);
            State cur = goal;
            int steps = 4 * n;
            for (int s = 0; s < steps || cur == State(goal); ++s) {
                if (s > steps + 64) break; // n == 1 has only two states; give up gracefully
                auto moves = enumerate_moves(cur, inst);
                if (moves.empty()) break;
                const Move& pick = moves[static_cast<size_t>(rng() % moves.size())];
                auto next = apply_move(cur, pick, inst);
                cur = next.value();
            }
            inst.initial_state = cur;
            break;
        }
    }
    return inst;
}

// ---------------------------------------------------------------------------
// apply_move
// ---------------------------------------------------------------------------

namespace {

Result<State, MoveError> apply_hanoi(const HanoiState& st, const HanoiMove& mv, int n) {
    if (mv.from_peg < 0 || mv.from_peg > 2 || mv.to_peg < 0 || mv.to_peg > 2)
        return MoveError{"bad-peg", "pegs are numbered 0..2"};
    if (mv.from_peg == mv.to_peg)
        return MoveError{"bad-peg", "source and destination pegs are equal"};
    if (mv.disk < 1 || mv.disk > n)
        return MoveError{"no-such-disk", "disk " + std::to_string(mv.disk)};
    const auto& from = st.pegs[static_cast<size_t>(mv.from_peg)];
    if (from.empty())
        return MoveError{"empty-peg", "peg " + std::to_string(mv.from_peg) + " has no disks"};
    if (from.back() != mv.disk)
        return MoveError{"not-top-disk", "disk " + std::to_string(mv.disk) + " is not on top of peg " +
                                             std::to_string(mv.from_peg)};
    const auto& to = st.pegs[static_cast<size_t>(mv.to_peg)];
    if (!to.empty() && to.back() < mv.disk)
        return MoveError{"larger-on-smaller", "disk " + std::to_string(mv.disk) + " onto disk " +
                                                  std::to_string(to.back())};
    HanoiState next = st;
    next.pegs[static_cast<size_t>(mv.from_peg)].pop_back();
    next.pegs[static_cast<size_t>(mv.to_peg)].push_back(mv.disk);
    return State(next);
}

Result<State, MoveError> apply_checker(const CheckerState& st, const CheckerMove& mv,
                                       bool allow_backward) {
    const int len = static_cast<int>(st.cells.size());
    if (mv.from_cell < 0 || mv.from_cell >= len || mv.to_cell < 0 || mv.to_cell >= len)
        return MoveError{"out-of-bounds", "cells are numbered 0.." + std::to_string(len - 1)};
    if (mv.from_cell == mv.to_cell)
        return MoveError{"bad-move", "source equals destination"};
    Cell mover = st.cells[static_cast<size_t>(mv.from_cell)];
    if (mover == Cell::Empty)
        return MoveError{"no-checker", "cell " + std::to_string(mv.from_cell) + " is empty"};
    if (st.cells[static_cast<size_t>(mv.to_cell)] != Cell::Empty)
        return MoveError{"dest-not-empty", "cell " + std::to_string(mv.to_cell) + " is occupied"};
    int delta = mv.to_cell - mv.from_cell;
    if (!allow_backward) {
        if (mover == Cell::Red && delta < 0)
            return MoveError{"wrong-direction", "red checkers move only rightward"};
        if (mover == Cell::Blue && delta > 0)
            return MoveError{"wrong-direction", "blue checkers move only leftward"};
    }
    int dist = delta < 0 ? -delta : delta;
    if (dist > 2) return MoveError{"too-far", "moves cover one or two cells"};
    if (dist == 2) {
        Cell middle = st.cells[static_cast<size_t>((mv.from_cell + mv.to_cell) / 2)];
        Cell opposite = mover == Cell::Red ? Cell::Blue : Cell::Red;
        if (middle != opposite)
            return MoveError{"bad-jump", "jumps cross exactly one checker of the opposite color"};
    }
    CheckerState next = st;
    next.cells[static_cast<size_t>(mv.to_cell)] = mover;
    next.cells[static_cast<size_t>(mv.from_cell)] = Cell::Empty;
    return State(next);
}

Result<State, MoveError> apply_river(const RiverState& st, const RiverMove& mv,
                                     const PuzzleInstance& inst) {
    if (mv.passengers.empty()) return MoveError{"empty-boat", "the boat cannot travel empty"};
    if (static_cast<int>(mv.passengers.size()) > inst.boat_capacity)
        return MoveError{"over-capacity",
                         "boat capacity is " + std::to_string(inst.boat_capacity)};
    uint64_t all = full_river_mask(inst.n);
    uint64_t boat = 0;
    for (const Person& p : mv.passengers) {
        if (p.index < 1 || p.index > inst.n)
            return MoveError{"unknown-person", p.token()};
        uint64_t bit = 1ULL << p.bit();
        if (boat & bit) return MoveError{"duplicate-passenger", p.token()};
        boat |= bit;
    }
    uint64_t here = st.boat == BoatSide::Left ? st.left_mask : (all & ~st.left_mask);
    if ((boat & here) != boat) {
        for (const Person& p : mv.passengers)
            if (!(here & (1ULL << p.bit())))
                return MoveError{"not-on-boat-bank", p.token() + " is not on the boat's bank"};
    }
    uint64_t departed = here & ~boat;
    uint64_t there = all & ~here;
    uint64_t arrived = there | boat;
    if (!jealousy_safe(boat, inst.n))
        return MoveError{"jealousy-violation", "on the boat"};
    if (!jealousy_safe(departed, inst.n))
        return MoveError{"jealousy-violation",
                         std::string("on the ") + (st.boat == BoatSide::Left ? "left" : "right") +
                             " bank after departure"};
    if (!jealousy_safe(arrived, inst.n))
        return MoveError{"jealousy-violation",
                         std::string("on the ") + (st.boat == BoatSide::Left ? "right" : "left") +
                             " bank after arrival"};
    RiverState next;
    next.boat = st.boat == BoatSide::Left ? BoatSide::Right : BoatSide::Left;
    next.left_mask = st.boat == BoatSide::Left ? departed : (st.left_mask | boat);
    return State(next);
}

Result<State, MoveError> apply_blocks(const BlocksState& st, const BlocksMove& mv) {
    if (mv.from_stack < 0 || mv.from_stack > 2 || mv.to_stack < 0 || mv.to_stack > 2)
        return MoveError{"bad-stack", "stacks are numbered 0..2"};
    if (mv.from_stack == mv.to_stack)
        return MoveError{"bad-stack", "source and destination stacks are equal"};
    const auto& from = st.stacks[static_cast<size_t>(mv.from_stack)];
    if (from.empty())
        return MoveError{"empty-stack", "stack " + std::to_string(mv.from_stack) + " has no blocks"};
    BlocksState next = st;
    int block = next.stacks[static_cast<size_t>(mv.from_stack)].back();
    next.stacks[static_cast<size_t>(mv.from_stack)].pop_back();
    next.stacks[static_cast<size_t>(mv.to_stack)].push_back(block);
    return State(next);
}

} // namespace

Result<State, MoveError> apply_move(const State& state, const Move& mv,
                                    const PuzzleInstance& instance) {
    if (kind_of(mv) != instance.kind)
        return MoveError{"kind-mismatch", "move does not belong to this puzzle"};
    switch (instance.kind) {
        case PuzzleKind::Hanoi:
            return apply_hanoi(std::get<HanoiState>(state), std::get<HanoiMove>(mv), instance.n);
        case PuzzleKind::Checker:
            return apply_checker(std::get<CheckerState>(state), std::get<CheckerMove>(mv),
                                 instance.checker_allow_backward);
        case PuzzleKind::River:
            return apply_river(std::get<RiverState>(state), std::get<RiverMove>(mv), instance);
        case PuzzleKind::Blocks:
            return apply_blocks(std::get<BlocksState>(state), std::get<BlocksMove>(mv));
    }
    return MoveError{"kind-mismatch", ""};
}

// ---------------------------------------------------------------------------
// enumerate_moves (canonical order)
// ---------------------------------------------------------------------------

std::vector<Move> enumerate_moves(const State& state, const PuzzleInstance& instance) {
    std::vector<Move> out;
    switch (instance.kind) {
        case PuzzleKind::Hanoi: {
            const auto& st = std::get<HanoiState>(state);
            for (int from = 0; from < 3; ++from) {
                if (st.pegs[static_cast<size_t>(from)].empty()) continue;
                int disk = st.pegs[static_cast<size_t>(from)].back();
                for (int to = 0; to < 3; ++to) {
                    if (to == from) continue;
                    const auto& dest = st.pegs[static_cast<size_t>(to)];
                    if (dest.empty() || dest.back() > disk)
                        out.push_back(HanoiMove{disk, from, to});
                }
            }
            break;
        }
        case PuzzleKind::Checker: {
            const auto& st = std::get<CheckerState>(state);
            int len = static_cast<int>(st.cells.size());
            int empty = 0;
            for (int i = 0; i < len; ++i)
                if (st.cells[static_cast<size_t>(i)] == Cell::Empty) empty = i;
            for (int from = 0; from < len; ++from) {
                CheckerMove mv{from, empty};
                if (apply_checker(st, mv, instance.checker_allow_backward))
                    out.push_back(mv);
            }
            break;
        }
        case PuzzleKind::River: {
            const auto& st = std::get<RiverState>(state);
            uint64_t all = full_river_mask(instance.n);
            uint64_t here = st.boat == BoatSide::Left ? st.left_mask : (all & ~st.left_mask);
            std::vector<Person> bank = persons_in_mask(here, instance.n);
            int cap = std::min<int>(instance.boat_capacity, static_cast<int>(bank.size()));
            // Subsets by size, lexicographic within each size.
            std::vector<size_t> idx;
            for (int size = 1; size <= cap; ++size) {
                idx.assign(static_cast<size_t>(size), 0);
                for (int i = 0; i < size; ++i) idx[static_cast<size_t>(i)] = static_cast<size_t>(i);
                while (true) {
                    RiverMove mv;
                    for (size_t i : idx) mv.passengers.push_back(bank[i]);
                    if (apply_river(st, mv, instance)) out.push_back(mv);
                    // next combination
                    int pos = size - 1;
                    while (pos >= 0 &&
                           idx[static_cast<size_t>(pos)] == bank.size() - static_cast<size_t>(size - pos))
                        --pos;
                    if (pos < 0) break;
                    ++idx[static_cast<size_t>(pos)];
                    for (int j = pos + 1; j < size; ++j)
                        idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
                }
            }
            break;
        }
        case PuzzleKind::Blocks: {
            const auto& st = std::get<BlocksState>(state);
            for (int from = 0; from < 3; ++from) {
                if (st.stacks[static_cast<size_t>(from)].empty()) continue;
                for (int to = 0; to < 3; ++to) {
                    if (to != from) out.push_back(BlocksMove{from, to});
                }
            }
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Well-formedness and keys
// ---------------------------------------------------------------------------

bool state_well_formed(const State& state, const PuzzleInstance& instance) {
    switch (instance.kind) {
        case PuzzleKind::Hanoi: {
            if (!std::holds_alternative<HanoiState>(state)) return false;
            const auto& st = std::get<HanoiState>(state);
            std::vector<bool> seen(static_cast<size_t>(instance.n) + 1, false);
            int count = 0;
            for (const auto& peg : st.pegs) {
                for (size_t i = 0; i < peg.size(); ++i) {
                    int d = peg[i];
                    if (d < 1 || d > instance.n || seen[static_cast<size_t>(d)]) return false;
                    if (i > 0 && peg[i - 1] <= d) return false; // strictly decreasing bottom-to-top
                    seen[static_cast<size_t>(d)] = true;
                    ++count;
                }
            }
            return count == instance.n;
        }
        case PuzzleKind::Checker: {
            if (!std::holds_alternative<CheckerState>(state)) return false;
            const auto& st = std::get<CheckerState>(state);
            if (static_cast<int>(st.cells.size()) != 2 * instance.n + 1) return false;
            int red = 0, blue = 0, empty = 0;
            for (Cell c : st.cells) {
                if (c == Cell::Red) ++red;
                else if (c == Cell::Blue) ++blue;
                else ++empty;
            }
            return red == instance.n && blue == instance.n && empty == 1;
        }
        case PuzzleKind::River: {
            if (!std::holds_alternative<RiverState>(state)) return false;
            const auto& st = std::get<RiverState>(state);
            return (st.left_mask & ~full_river_mask(instance.n)) == 0;
        }
        case PuzzleKind::Blocks: {
            if (!std::holds_alternative<BlocksState>(state)) return false;
            const auto& st = std::get<BlocksState>(state);
            std::vector<bool> seen(static_cast<size_t>(instance.n) + 1, false);
            int count = 0;
            for (const auto& stack : st.stacks) {
                for (int b : stack) {
                    if (b < 1 || b > instance.n || seen[static_cast<size_t>(b)]) return false;
                    seen[static_cast<size_t>(b)] = true;
                    ++count;
                }
            }
            return count == instance.n;
        }
    }
    return false;
}

std::string state_key(const State& state) {
    std::string key;
    if (const auto* h = std::get_if<HanoiState>(&state)) {
        for (const auto& peg : h->pegs) {
            for (int d : peg) key.push_back(static_cast<char>('0' + d));
            key.push_back('|');
        }
    } else if (const auto* c = std::get_if<CheckerState>(&state)) {
        for (Cell cell : c->cells)
            key.push_back(cell == Cell::Red ? 'R' : cell == Cell::Blue ? 'B' : '_');
    } else if (const auto* r = std::get_if<RiverState>(&state)) {
        key = std::to_string(r->left_mask);
        key.push_back(r->boat == BoatSide::Left ? 'L' : 'R');
    } else if (const auto* b = std::get_if<BlocksState>(&state)) {
        for (const auto& stack : b->stacks) {
            for (int id : stack) key.push_back(static_cast<char>('0' + id));
            key.push_back('|');
        }
    }
    return key;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Valid: return "valid";
        case Verdict::IllegalMove: return "illegal_move";
        case Verdict::NotAtGoal: return "not_at_goal";
    }
    return "?";
}

VerifyReport verify(const PuzzleInstance& instance, const MoveList& moves) {
    if (moves.kind != instance.kind)
        throw std::invalid_argument("verify: move list kind does not match instance");
    VerifyReport report;
    State cur = instance.initial_state;
    for (size_t i = 0; i < moves.moves.size(); ++i) {
        auto next = apply_move(cur, moves.moves[i], instance);
        if (!next) {
            report.verdict = Verdict::IllegalMove;
            report.failing_index = i;
            report.reason = "illegal move at index " + std::to_string(i) + ": " +
                            next.error().message();
            report.final_state = cur;
            return report;
        }
        cur = std::move(next.value());
    }
    report.final_state = cur;
    if (cur == instance.goal_state) {
        report.verdict = Verdict::Valid;
    } else {
        report.verdict = Verdict::NotAtGoal;
        report.reason = "all moves legal but the final state is not the goal";
    }
    return report;
}

// ---------------------------------------------------------------------------
// Canonical move text
// ---------------------------------------------------------------------------

std::string move_to_text(const Move& mv) {
    std::ostringstream os;
    if (const auto* h = std::get_if<HanoiMove>(&mv)) {
        os << '(' << h->disk << ',' << h->from_peg << ',' << h->to_peg << ')';
    } else if (const auto* c = std::get_if<CheckerMove>(&mv)) {
        os << '(' << c->from_cell << ',' << c->to_cell << ')';
    } else if (const auto* r = std::get_if<RiverMove>(&mv)) {
        os << '(';
        for (size_t i = 0; i < r->passengers.size(); ++i) {
            if (i) os << ',';
            os << r->passengers[i].token();
        }
        os << ')';
    } else if (const auto* b = std::get_if<BlocksMove>(&mv)) {
        os << '(' << b->from_stack << ',' << b->to_stack << ')';
    }
    return os.str();
}

std::string moves_to_text(const MoveList& ml) {
    std::string out;
    for (const Move& mv : ml.moves) {
        out += move_to_text(mv);
        out.push_back('\n');
    }
    return out;
}

namespace {

std::string_view trim_sv(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool parse_int_item(std::string_view item, int& out) {
    item = trim_sv(item);
    if (item.empty() || item.size() > 9) return false;
    int v = 0;
    for (char ch : item) {
        if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
        v = v * 10 + (ch - '0');
    }
    out = v;
    return true;
}

std::vector<std::string_view> split_items(std::string_view body) {
    std::vector<std::string_view> items;
    size_t pos = 0;
    while (pos <= body.size()) {
        size_t comma = body.find(',', pos);
        if (comma == std::string_view::npos) {
            items.push_back(body.substr(pos));
            break;
        }
        items.push_back(body.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return items;
}

} // namespace

Result<Move, std::string> parse_move_text(std::string_view line, PuzzleKind kind) {
    std::string_view s = trim_sv(line);
    if (s.size() < 3) return std::string("not a move: too short");
    char open = s.front();
    char close = s.back();
    if (!((open == '(' && close == ')') || (open == '[' && close == ']')))
        return std::string("not a move: missing brackets");
    std::string_view body = s.substr(1, s.size() - 2);
    auto items = split_items(body);
    switch (kind) {
        case PuzzleKind::Hanoi: {
            if (items.size() != 3) return std::string("hanoi moves are (disk,from,to)");
            int d, f, t;
            if (!parse_int_item(items[0], d) || !parse_int_item(items[1], f) ||
                !parse_int_item(items[2], t))
                return std::string("hanoi moves use integers");
            if (f > 2 || t > 2 || f == t || d < 1) return std::string("invalid hanoi move");
            return Move(HanoiMove{d, f, t});
        }
        case PuzzleKind::Checker: {
            if (items.size() != 2) return std::string("checker moves are (from,to)");
            int f, t;
            if (!parse_int_item(items[0], f) || !parse_int_item(items[1], t))
                return std::string("checker moves use integers");
            if (f == t) return std::string("invalid checker move");
            return Move(CheckerMove{f, t});
        }
        case PuzzleKind::River: {
            if (items.empty()) return std::string("river moves list passengers");
            RiverMove mv;
            for (auto item : items) {
                auto p = person_from_token(trim_sv(item));
                if (!p) return std::string("river passengers are A<i> or G<i> tokens");
                mv.passengers.push_back(*p);
            }
            std::sort(mv.passengers.begin(), mv.passengers.end());
            if (std::adjacent_find(mv.passengers.begin(), mv.passengers.end()) !=
                mv.passengers.end())
                return std::string("duplicate passenger");
            return Move(mv);
        }
        case PuzzleKind::Blocks: {
            if (items.size() != 2) return std::string("blocks moves are (from,to)");
            int f, t;
            if (!parse_int_item(items[0], f) || !parse_int_item(items[1], t))
                return std::string("blocks moves use integers");
            if (f > 2 || t > 2 || f == t) return std::string("invalid blocks move");
            return Move(BlocksMove{f, t});
        }
    }
    return std::string("unknown kind");
}

Result<MoveList, std::string> parse_moves_text(std::string_view text, PuzzleKind kind) {
    MoveList ml;
    ml.kind = kind;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view line =
            nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
        ++line_no;
        std::string_view t = trim_sv(line);
        if (!t.empty()) {
            auto mv = parse_move_text(t, kind);
            if (!mv)
                return std::string("line " + std::to_string(line_no) + ": " + mv.error());
            ml.moves.push_back(mv.value());
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return ml;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

using nlohmann::json;

nlohmann::json state_to_json(const State& state, const PuzzleInstance& instance) {
    json j;
    switch (instance.kind) {
        case PuzzleKind::Hanoi: {
            const auto& st = std::get<HanoiState>(state);
            j["pegs"] = st.pegs;
            break;
        }
        case PuzzleKind::Checker: {
            const auto& st = std::get<CheckerState>(state);
            std::string cells;
            for (Cell c : st.cells)
                cells.push_back(c == Cell::Red ? 'R' : c == Cell::Blue ? 'B' : '_');
            j["cells"] = cells;
            break;
        }
        case PuzzleKind::River: {
            const auto& st = std::get<RiverState>(state);
            uint64_t all = full_river_mask(instance.n);
            std::vector<std::string> left, right;
            for (const Person& p : persons_in_mask(st.left_mask, instance.n)) left.push_back(p.token());
            for (const Person& p : persons_in_mask(all & ~st.left_mask, instance.n))
                right.push_back(p.token());
            j["left"] = left;
            j["right"] = right;
            j["boat"] = st.boat == BoatSide::Left ? "left" : "right";
            break;
        }
        case PuzzleKind::Blocks: {
            const auto& st = std::get<BlocksState>(state);
            std::vector<std::vector<std::string>> stacks(3);
            for (size_t s = 0; s < 3; ++s)
                for (int id : st.stacks[s])
                    stacks[s].push_back(instance.block_names[static_cast<size_t>(id - 1)]);
            j["stacks"] = stacks;
            break;
        }
    }
    return j;
}

State state_from_json(const nlohmann::json& j, const PuzzleInstance& instance) {
    switch (instance.kind) {
        case PuzzleKind::Hanoi: {
            HanoiState st;
            auto pegs = j.at("pegs");
            if (!pegs.is_array() || pegs.size() != 3) throw std::invalid_argument("bad pegs");
            for (size_t i = 0; i < 3; ++i) st.pegs[i] = pegs[i].get<std::vector<int>>();
            State out = st;
            if (!state_well_formed(out, instance)) throw std::invalid_argument("malformed hanoi state");
            return out;
        }
        case PuzzleKind::Checker: {
            CheckerState st;
            std::string cells = j.at("cells").get<std::string>();
            for (char c : cells) {
                if (c == 'R') st.cells.push_back(Cell::Red);
                else if (c == 'B') st.cells.push_back(Cell::Blue);
                else if (c == '_') st.cells.push_back(Cell::Empty);
                else throw std::invalid_argument("bad cell char");
            }
            State out = st;
            if (!state_well_formed(out, instance)) throw std::invalid_argument("malformed checker state");
            return out;
        }
        case PuzzleKind::River: {
            RiverState st;
            st.left_mask = 0;
            for (const auto& tok : j.at("left")) {
                auto p = person_from_token(tok.get<std::string>());
                if (!p || p->index > instance.n) throw std::invalid_argument("bad person token");
                st.left_mask |= 1ULL << p->bit();
            }
            uint64_t right_mask = 0;
            for (const auto& tok : j.at("right")) {
                auto p = person_from_token(tok.get<std::string>());
                if (!p || p->index > instance.n) throw std::invalid_argument("bad person token");
                right_mask |= 1ULL << p->bit();
            }
            if ((st.left_mask & right_mask) != 0 ||
                (st.left_mask | right_mask) != full_river_mask(instance.n))
                throw std::invalid_argument("banks must partition all persons");
            std::string boat = j.at("boat").get<std::string>();
            if (boat == "left") st.boat = BoatSide::Left;
            else if (boat == "right") st.boat = BoatSide::Right;
            else throw std::invalid_argument("bad boat side");
            return st;
        }
        case PuzzleKind::Blocks: {
            BlocksState st;
            auto stacks = j.at("stacks");
            if (!stacks.is_array() || stacks.size() != 3) throw std::invalid_argument("bad stacks");
            for (size_t s = 0; s < 3; ++s) {
                for (const auto& name : stacks[s]) {
                    std::string nm = name.get<std::string>();
                    auto it = std::find(instance.block_names.begin(), instance.block_names.end(), nm);
                    if (it == instance.block_names.end())
                        throw std::invalid_argument("unknown block name: " + nm);
                    st.stacks[s].push_back(
                        static_cast<int>(it - instance.block_names.begin()) + 1);
                }
            }
            State out = st;
            if (!state_well_formed(out, instance)) throw std::invalid_argument("malformed blocks state");
            return out;
        }
    }
    throw std::invalid_argument("unknown kind");
}

nlohmann::json instance_to_json(const PuzzleInstance& instance) {
    json j;
    j["schema"] = "v1";
    j["kind"] = to_string(instance.kind);
    j["n"] = instance.n;
    if (instance.kind == PuzzleKind::River) j["boat_capacity"] = instance.boat_capacity;
    if (instance.kind == PuzzleKind::Blocks) {
        j["seed"] = *instance.seed;
        j["blocks"] = instance.block_names;
    }
    if (instance.checker_allow_backward) j["checker_allow_backward"] = true;
    j["initial_state"] = state_to_json(instance.initial_state, instance);
    j["goal_state"] = state_to_json(instance.goal_state, instance);
    return j;
}

PuzzleInstance instance_from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != "v1") throw std::invalid_argument("unsupported instance schema");
    auto kind = puzzle_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown puzzle kind");
    int n = j.at("n").get<int>();
    std::optional<uint64_t> seed;
    if (*kind == PuzzleKind::Blocks) seed = j.at("seed").get<uint64_t>();
    std::optional<int> cap;
    if (*kind == PuzzleKind::River && j.contains("boat_capacity"))
        cap = j.at("boat_capacity").get<int>();
    bool allow_backward = j.value("checker_allow_backward", false);
    PuzzleInstance inst = make_instance(*kind, n, seed, cap, allow_backward);
    // States in the file win over the canonical construction; they must parse
    // as well-formed for this kind and n.
    if (j.contains("initial_state")) inst.initial_state = state_from_json(j.at("initial_state"), inst);
    if (j.contains("goal_state")) inst.goal_state = state_from_json(j.at("goal_state"), inst);
    return inst;
}

nlohmann::json report_to_json(const VerifyReport& report, const PuzzleInstance& instance) {
    json j;
    j["schema"] = "v1";
    j["verdict"] = to_string(report.verdict);
    if (report.failing_index)
        j["failing_index"] = *report.failing_index;
    else
        j["failing_index"] = nullptr;
    j["reason"] = report.reason;
    j["final_state"] = state_to_json(report.final_state, instance);
    return j;
}

// ---------------------------------------------------------------------------
// Prompt-facing text rendering
// ---------------------------------------------------------------------------

std::string state_to_text(const State& state, const PuzzleInstance& instance) {
    std::ostringstream os;
    switch (instance.kind) {
        case PuzzleKind::Hanoi: {
            const auto& st = std::get<HanoiState>(state);
            for (int p = 0; p < 3; ++p) {
                if (p) os << "; ";
                os << "peg " << p << " (bottom to top): [";
                const auto& peg = st.pegs[static_cast<size_t>(p)];
                for (size_t i = 0; i < peg.size(); ++i) {
                    if (i) os << ", ";
                    os << peg[i];
                }
                os << "]";
            }
            break;
        }
        case PuzzleKind::Checker: {
            const auto& st = std::get<CheckerState>(state);
            os << "cells 0.." << st.cells.size() - 1 << ": ";
            for (Cell c : st.cells)
                os << (c == Cell::Red ? 'R' : c == Cell::Blue ? 'B' : '_');
            break;
        }
        case PuzzleKind::River: {
            const auto& st = std::get<RiverState>(state);
            uint64_t all = full_river_mask(instance.n);
            os << "left bank: [";
            auto left = persons_in_mask(st.left_mask, instance.n);
            for (size_t i = 0; i < left.size(); ++i) {
                if (i) os << ", ";
                os << left[i].token();
            }
            os << "]; right bank: [";
            auto right = persons_in_mask(all & ~st.left_mask, instance.n);
            for (size_t i = 0; i < right.size(); ++i) {
                if (i) os << ", ";
                os << right[i].token();
            }
            os << "]; boat on the " << (st.boat == BoatSide::Left ? "left" : "right");
            break;
        }
        case PuzzleKind::Blocks: {
            const auto& st = std::get<BlocksState>(state);
            for (int s = 0; s < 3; ++s) {
                if (s) os << "; ";
                os << "stack " << s << " (bottom to top): [";
                const auto& stack = st.stacks[static_cast<size_t>(s)];
                for (size_t i = 0; i < stack.size(); ++i) {
                    if (i) os << ", ";
                    os << instance.block_names[static_cast<size_t>(stack[i] - 1)];
                }
                os << "]";
            }
            break;
        }
    }
    return os.str();
}

} // namespace tabench
