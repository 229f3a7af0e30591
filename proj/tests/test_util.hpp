#pragma once

#include <array>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "tabench/oracle.hpp"
#include "tabench/puzzle.hpp"

namespace tabench::testutil {

/// Random syntactically-plausible move (not necessarily legal).
inline Move random_move(PuzzleKind kind, int n, std::mt19937_64& rng) {
    auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % (hi - lo + 1)); };
    switch (kind) {
        case PuzzleKind::Hanoi: {
            int from = pick(0, 2);
            int to = (from + pick(1, 2)) % 3;
            return HanoiMove{pick(1, n), from, to};
        }
        case PuzzleKind::Checker: {
            int from = pick(0, 2 * n);
            int to = pick(0, 2 * n);
            if (to == from) to = (to + 1) % (2 * n + 1);
            return CheckerMove{from, to};
        }
        case PuzzleKind::River: {
            RiverMove mv;
            int size = pick(1, 3);
            for (int i = 0; i < size; ++i) mv.passengers.push_back({pick(1, n), rng() % 2 == 0});
            std::sort(mv.passengers.begin(), mv.passengers.end());
            mv.passengers.erase(std::unique(mv.passengers.begin(), mv.passengers.end()),
                                mv.passengers.end());
            return mv;
        }
        case PuzzleKind::Blocks: {
            int from = pick(0, 2);
            int to = (from + pick(1, 2)) % 3;
            return BlocksMove{from, to};
        }
    }
    return HanoiMove{1, 0, 2};
}

inline MoveList random_move_list(PuzzleKind kind, int n, size_t len, std::mt19937_64& rng) {
    MoveList ml;
    ml.kind = kind;
    for (size_t i = 0; i < len; ++i) ml.moves.push_back(random_move(kind, n, rng));
    return ml;
}

/// A random legal playout of up to `len` moves from the initial state.
inline MoveList random_legal_walk(const PuzzleInstance& inst, size_t len, std::mt19937_64& rng) {
    MoveList ml;
    ml.kind = inst.kind;
    State cur = inst.initial_state;
    for (size_t i = 0; i < len; ++i) {
        auto moves = enumerate_moves(cur, inst);
        if (moves.empty()) break;
        const Move& mv = moves[rng() % moves.size()];
        cur = apply_move(cur, mv, inst).value();
        ml.moves.push_back(mv);
    }
    return ml;
}

struct CommandResult {
    int exit_code = -1;
    std::string output; // stdout+stderr interleaved
};

/// Runs a shell command capturing combined output (tests only).
inline CommandResult run_command(const std::string& command) {
    CommandResult result;
    FILE* pipe = popen((command + " 2>&1").c_str(), "r");
    if (!pipe) return result;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) result.output.append(buf, n);
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

inline std::string temp_dir(const std::string& tag) {
    std::string tmpl = "/tmp/tabench-test-" + tag + "-XXXXXX";
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
    return std::string(buf.data());
}

} // namespace tabench::testutil
