#include "tabench/oracle.hpp"

#include <deque>
#include <stdexcept>
#include <unordered_map>

namespace tabench {

std::string to_string(OracleResult::Status s) {
    switch (s) {
        case OracleResult::Status::Solved: return "solved";
        case OracleResult::Status::Unsolvable: return "unsolvable";
        case OracleResult::Status::Exhausted: return "exhausted";
    }
    return "?";
}

namespace {

void hanoi_rec(int n, int from, int to, int via,
               const std::function<void(const HanoiMove&)>& emit) {
    if (n == 0) return;
    hanoi_rec(n - 1, from, via, to, emit);
    emit(HanoiMove{n, from, to});
    hanoi_rec(n - 1, via, to, from, emit);
}

} // namespace

void hanoi_closed_form_each(int n, const std::function<void(const HanoiMove&)>& emit) {
    if (n < 1) throw std::invalid_argument("hanoi_closed_form: n must be >= 1");
    hanoi_rec(n, 0, 2, 1, emit);
}

MoveList hanoi_closed_form(int n) {
    MoveList ml;
    ml.kind = PuzzleKind::Hanoi;
    ml.moves.reserve((1ULL << n) - 1);
    hanoi_closed_form_each(n, [&](const HanoiMove& mv) { ml.moves.push_back(mv); });
    return ml;
}

MoveList checker_constructive(int n) {
    if (n < 1) throw std::invalid_argument("checker_constructive: n must be >= 1");
    PuzzleInstance inst = make_instance(PuzzleKind::Checker, n);
    CheckerState st = std::get<CheckerState>(inst.initial_state);
    MoveList ml;
    ml.kind = PuzzleKind::Checker;

    // Alternating-color runs of lengths 1,2,..,n-1,n,n,n,n-1,..,2,1 starting
    // with Red. Within a run there is at most one jump and one slide
    // available for the scheduled color; jumps are preferred. This yields the
    // minimal n^2 + 2n move schedule.
    std::vector<int> runs;
    for (int k = 1; k < n; ++k) runs.push_back(k);
    runs.push_back(n);
    runs.push_back(n);
    runs.push_back(n);
    for (int k = n - 1; k >= 1; --k) runs.push_back(k);

    int len = 2 * n + 1;
    auto empty_cell = [&]() {
        for (int i = 0; i < len; ++i)
            if (st.cells[static_cast<size_t>(i)] == Cell::Empty) return i;
        throw std::logic_error("checker state lost its empty cell");
    };

    for (size_t run = 0; run < runs.size(); ++run) {
        Cell color = (run % 2 == 0) ? Cell::Red : Cell::Blue;
        Cell other = color == Cell::Red ? Cell::Blue : Cell::Red;
        int dir = color == Cell::Red ? 1 : -1; // red moves rightward
        for (int step = 0; step < runs[run]; ++step) {
            int e = empty_cell();
            int jump_from = e - 2 * dir;
            int slide_from = e - dir;
            int from = -1;
            if (jump_from >= 0 && jump_from < len &&
                st.cells[static_cast<size_t>(jump_from)] == color &&
                st.cells[static_cast<size_t>(e - dir)] == other) {
                from = jump_from;
            } else if (slide_from >= 0 && slide_from < len &&
                       st.cells[static_cast<size_t>(slide_from)] == color) {
                from = slide_from;
            } else {
                throw std::logic_error("checker constructive schedule got stuck");
            }
            st.cells[static_cast<size_t>(e)] = color;
            st.cells[static_cast<size_t>(from)] = Cell::Empty;
            ml.moves.push_back(CheckerMove{from, e});
        }
    }
    return ml;
}

OracleResult bfs_solve(const PuzzleInstance& instance, uint64_t state_cap,
                       std::optional<std::chrono::steady_clock::time_point> deadline) {
    if (state_cap == 0) throw std::invalid_argument("bfs_solve: state_cap must be > 0");

    OracleResult result;
    result.moves = std::nullopt;

    struct Node {
        State state;
        int64_t parent;
        Move move;
    };

    std::vector<Node> nodes;
    std::unordered_map<std::string, size_t> visited;
    std::deque<size_t> frontier;

    auto reconstruct = [&](size_t goal_idx) {
        MoveList ml;
        ml.kind = instance.kind;
        int64_t idx = static_cast<int64_t>(goal_idx);
        while (idx > 0) {
            ml.moves.push_back(nodes[static_cast<size_t>(idx)].move);
            idx = nodes[static_cast<size_t>(idx)].parent;
        }
        std::reverse(ml.moves.begin(), ml.moves.end());
        return ml;
    };

    nodes.push_back(Node{instance.initial_state, -1, Move{}});
    visited.emplace(state_key(instance.initial_state), 0);
    frontier.push_back(0);
    result.explored_states = 1;

    if (instance.initial_state == instance.goal_state) {
        result.status = OracleResult::Status::Solved;
        result.moves = MoveList{instance.kind, {}};
        return result;
    }

    uint64_t expansions = 0;
    while (!frontier.empty()) {
        if (deadline && (++expansions & 0x3ff) == 0 &&
            std::chrono::steady_clock::now() > *deadline) {
            result.status = OracleResult::Status::Exhausted;
            return result;
        }
        size_t cur = frontier.front();
        frontier.pop_front();
        // Copy: nodes may reallocate while expanding.
        State cur_state = nodes[cur].state;
        for (const Move& mv : enumerate_moves(cur_state, instance)) {
            auto next = apply_move(cur_state, mv, instance);
            State next_state = std::move(next.value());
            std::string key = state_key(next_state);
            if (visited.contains(key)) continue;
            if (result.explored_states >= state_cap) {
                result.status = OracleResult::Status::Exhausted;
                return result;
            }
            nodes.push_back(Node{next_state, static_cast<int64_t>(cur), mv});
            size_t idx = nodes.size() - 1;
            visited.emplace(std::move(key), idx);
            ++result.explored_states;
            if (next_state == instance.goal_state) {
                result.status = OracleResult::Status::Solved;
                result.moves = reconstruct(idx);
                return result;
            }
            frontier.push_back(idx);
        }
    }
    result.status = OracleResult::Status::Unsolvable;
    return result;
}

OracleResult solve_instance(const PuzzleInstance& instance, uint64_t state_cap) {
    OracleResult result;
    switch (instance.kind) {
        case PuzzleKind::Hanoi:
            result.status = OracleResult::Status::Solved;
            result.moves = hanoi_closed_form(instance.n);
            return result;
        case PuzzleKind::Checker:
            result.status = OracleResult::Status::Solved;
            result.moves = checker_constructive(instance.n);
            return result;
        case PuzzleKind::River:
        case PuzzleKind::Blocks:
            return bfs_solve(instance, state_cap);
    }
    return result;
}

} // namespace tabench
