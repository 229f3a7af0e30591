#include "tabench/fixture_backend.hpp"

#include <sstream>

#include "tabench/hash.hpp"
#include "tabench/oracle.hpp"
#include "tabench/store.hpp"
#include "tabench/strings.hpp"

namespace tabench {

namespace {

std::map<std::string, std::string> parse_tag(const std::string& tag) {
    std::map<std::string, std::string> out;
    size_t pos = 0;
    while (pos <= tag.size()) {
        size_t comma = tag.find(',', pos);
        std::string item =
            comma == std::string::npos ? tag.substr(pos) : tag.substr(pos, comma - pos);
        size_t eq = item.find('=');
        if (eq != std::string::npos) out[item.substr(0, eq)] = item.substr(eq + 1);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string python_int_list(const std::vector<int>& v) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < v.size(); ++i) os << v[i] << ",";
    os << ")";
    return os.str();
}

std::string hanoi_solver_program(int n) {
    std::ostringstream os;
    os << "import sys\n"
          "sys.setrecursionlimit(100000)\n"
          "N = "
       << n
       << "\n"
          "out = []\n"
          "def solve(n, frm, to, via):\n"
          "    if n == 0:\n"
          "        return\n"
          "    solve(n - 1, frm, via, to)\n"
          "    out.append(\"(%d,%d,%d)\" % (n, frm, to))\n"
          "    solve(n - 1, via, to, frm)\n"
          "solve(N, 0, 2, 1)\n"
          "print(\"\\n\".join(out))\n";
    return os.str();
}

std::string checker_solver_program(int n) {
    std::ostringstream os;
    os << "N = " << n
       << "\n"
          "cells = ['R'] * N + ['_'] + ['B'] * N\n"
          "runs = list(range(1, N)) + [N, N, N] + list(range(N - 1, 0, -1))\n"
          "moves = []\n"
          "for ri, run in enumerate(runs):\n"
          "    color = 'R' if ri % 2 == 0 else 'B'\n"
          "    other = 'B' if color == 'R' else 'R'\n"
          "    d = 1 if color == 'R' else -1\n"
          "    for _ in range(run):\n"
          "        e = cells.index('_')\n"
          "        jf = e - 2 * d\n"
          "        if 0 <= jf < len(cells) and cells[jf] == color and cells[e - d] == other:\n"
          "            f = jf\n"
          "        else:\n"
          "            f = e - d\n"
          "        cells[e] = color\n"
          "        cells[f] = '_'\n"
          "        moves.append(\"(%d,%d)\" % (f, e))\n"
          "print(\"\\n\".join(moves))\n";
    return os.str();
}

std::string river_solver_program(int n, int k) {
    std::ostringstream os;
    os << "from collections import deque\n"
          "from itertools import combinations\n"
          "N = "
       << n << "\nK = " << k
       << "\n"
          "people = []\n"
          "for i in range(1, N + 1):\n"
          "    people.append('A%d' % i)\n"
          "    people.append('G%d' % i)\n"
          "def safe(group):\n"
          "    for p in group:\n"
          "        if p[0] != 'A':\n"
          "            continue\n"
          "        i = p[1:]\n"
          "        if ('G' + i) in group:\n"
          "            continue\n"
          "        if any(q[0] == 'G' and q[1:] != i for q in group):\n"
          "            return False\n"
          "    return True\n"
          "def order(p):\n"
          "    return (int(p[1:]), 0 if p[0] == 'A' else 1)\n"
          "start = (frozenset(people), 'L')\n"
          "goal = (frozenset(), 'R')\n"
          "seen = {start: None}\n"
          "queue = deque([start])\n"
          "found = False\n"
          "while queue and len(seen) < 400000:\n"
          "    state = queue.popleft()\n"
          "    left, boat = state\n"
          "    bank = sorted(left if boat == 'L' else set(people) - left, key=order)\n"
          "    for size in range(1, K + 1):\n"
          "        for group in combinations(bank, size):\n"
          "            g = set(group)\n"
          "            nl = left - g if boat == 'L' else left | g\n"
          "            nb = 'R' if boat == 'L' else 'L'\n"
          "            here_after = (left - g) if boat == 'L' else (set(people) - left) - g\n"
          "            there_after = (set(people) - nl) if nb == 'R' else nl\n"
          "            if not (safe(g) and safe(here_after) and safe(there_after)):\n"
          "                continue\n"
          "            nxt = (frozenset(nl), nb)\n"
          "            if nxt in seen:\n"
          "                continue\n"
          "            seen[nxt] = (state, tuple(sorted(g, key=order)))\n"
          "            queue.append(nxt)\n"
          "    if goal in seen:\n"
          "        found = True\n"
          "        break\n"
          "if not found:\n"
          "    print('NO SOLUTION FOUND')\n"
          "else:\n"
          "    path = []\n"
          "    cur = goal\n"
          "    while seen[cur] is not None:\n"
          "        prev, group = seen[cur]\n"
          "        path.append('(' + ','.join(group) + ')')\n"
          "        cur = prev\n"
          "    print('\\n'.join(reversed(path)))\n";
    return os.str();
}

std::string blocks_solver_program(const PuzzleInstance& inst) {
    const auto& init = std::get<BlocksState>(inst.initial_state);
    const auto& goal = std::get<BlocksState>(inst.goal_state);
    std::ostringstream os;
    os << "from collections import deque\n"
          "start = ("
       << python_int_list(init.stacks[0]) << ", " << python_int_list(init.stacks[1]) << ", "
       << python_int_list(init.stacks[2])
       << ")\n"
          "goal = ("
       << python_int_list(goal.stacks[0]) << ", " << python_int_list(goal.stacks[1]) << ", "
       << python_int_list(goal.stacks[2])
       << ")\n"
          "seen = {start: None}\n"
          "queue = deque([start])\n"
          "while queue and goal not in seen and len(seen) < 400000:\n"
          "    state = queue.popleft()\n"
          "    for f in range(3):\n"
          "        if not state[f]:\n"
          "            continue\n"
          "        for t in range(3):\n"
          "            if f == t:\n"
          "                continue\n"
          "            stacks = [list(s) for s in state]\n"
          "            stacks[t].append(stacks[f].pop())\n"
          "            nxt = tuple(tuple(s) for s in stacks)\n"
          "            if nxt not in seen:\n"
          "                seen[nxt] = (state, (f, t))\n"
          "                queue.append(nxt)\n"
          "if goal not in seen:\n"
          "    print('NO SOLUTION FOUND')\n"
          "else:\n"
          "    path = []\n"
          "    cur = goal\n"
          "    while seen[cur] is not None:\n"
          "        prev, mv = seen[cur]\n"
          "        path.append('(%d,%d)' % mv)\n"
          "        cur = prev\n"
          "    print('\\n'.join(reversed(path)))\n";
    return os.str();
}

std::string kind_pseudocode(PuzzleKind kind) {
    switch (kind) {
        case PuzzleKind::Hanoi:
            return "def solve(n, frm, to, via):\n"
                   "    if n == 0: return\n"
                   "    solve(n - 1, frm, via, to)\n"
                   "    emit(n, frm, to)\n"
                   "    solve(n - 1, via, to, frm)\n"
                   "solve(N, 0, 2, 1)\n";
        case PuzzleKind::Checker:
            return "runs = [1..N-1] + [N, N, N] + [N-1..1]\n"
                   "for each run r with alternating color starting red:\n"
                   "    repeat r times: jump if possible else slide toward the empty cell\n";
        case PuzzleKind::River:
            return "breadth-first search over (left_bank, boat_side) states\n"
                   "expanding safe boat trips of size 1..k; emit the shortest path\n";
        case PuzzleKind::Blocks:
            return "breadth-first search over stack tuples expanding (from,to)\n"
                   "pop/push moves; emit the shortest path to the goal tuple\n";
    }
    return "";
}

std::string bad_move_token(PuzzleKind kind) {
    switch (kind) {
        case PuzzleKind::Hanoi: return "(9,9,9)";
        case PuzzleKind::Checker: return "(7,7)";
        case PuzzleKind::River: return "(X1)";
        case PuzzleKind::Blocks: return "(7,8)";
    }
    return "(?)";
}

std::string illegal_moves_text(PuzzleKind kind) {
    // First move illegal on every canonical instance with n >= 2 except
    // Blocks, where the cycle is merely aimless (NotAtGoal) or illegal.
    switch (kind) {
        case PuzzleKind::Hanoi: return "(2,0,1)\n(1,0,2)\n";
        case PuzzleKind::Checker: return "(0,2)\n(1,0)\n";
        case PuzzleKind::River: return "(G1)\n(G2)\n";
        case PuzzleKind::Blocks: return "(0,1)\n(1,0)\n(0,1)\n(1,0)\n";
    }
    return "";
}

std::vector<std::string> split_into_chunks(const std::vector<std::string>& lines, int k) {
    std::vector<std::string> chunks;
    size_t total = lines.size();
    size_t per = (total + static_cast<size_t>(k) - 1) / static_cast<size_t>(k);
    if (per == 0) per = 1;
    for (size_t start = 0; start < total; start += per) {
        std::string chunk;
        for (size_t i = start; i < std::min(total, start + per); ++i) {
            chunk += lines[i];
            chunk.push_back('\n');
        }
        chunks.push_back(std::move(chunk));
    }
    if (chunks.empty()) chunks.push_back("");
    return chunks;
}

} // namespace

FixtureBackend::FixtureBackend(std::map<std::string, std::string> model_profiles,
                               HarnessConfig config)
    : profiles_(std::move(model_profiles)), config_(std::move(config)) {}

BackendPtr make_fixture_backend(const HarnessConfig& config) {
    std::map<std::string, std::string> profiles;
    for (const auto& pair : config.pairs) {
        profiles[pair.llm] = "weak";
        profiles[pair.lrm] = "strong";
    }
    return std::make_shared<FixtureBackend>(std::move(profiles), config);
}

Result<ModelReply, BackendError> FixtureBackend::complete(const ModelSpec& spec,
                                                          const PromptBundle&,
                                                          std::chrono::seconds,
                                                          const CallContext& ctx) {
    auto tag = parse_tag(ctx.tag);
    auto kind = puzzle_kind_from_string(tag.count("kind") ? tag.at("kind") : "");
    if (!kind)
        return BackendError{BackendError::Kind::Transport, 0,
                            "fixture backend needs a kind in the call context tag"};

    ModelReply reply;
    reply.tokens_estimated = true;
    if (spec.thinking_enabled) {
        reply.thinking_text =
            "Working through the structure of the puzzle before answering; the plan is to apply "
            "the standard schedule for this task and double-check legality of each step.";
        reply.tokens.thinking = estimate_tokens(*reply.thinking_text);
    }

    auto finish = [&](std::string text) {
        reply.output_text = std::move(text);
        reply.tokens.prompt = 64;
        reply.tokens.output = estimate_tokens(reply.output_text);
        return Result<ModelReply, BackendError>(reply);
    };

    // Meta calls are task-level: pseudocode only, no instance work.
    if (tag.count("call") && tag.at("call") == "meta")
        return finish("Here is general pseudocode for the task.\n\n```\n" +
                      kind_pseudocode(*kind) + "```\n");

    if (!tag.count("tool") || !tag.count("n") || !tag.count("trial"))
        return BackendError{BackendError::Kind::Transport, 0,
                            "fixture backend needs tool/n/trial in the call context tag"};
    auto tool = tool_kind_from_string(tag.at("tool"));
    if (!tool)
        return BackendError{BackendError::Kind::Transport, 0, "fixture backend: unknown tool"};
    int n = std::stoi(tag.at("n"));
    int trial = std::stoi(tag.at("trial"));
    int step = tag.count("step") && tag.at("step") != "run" ? std::stoi(tag.at("step")) : 1;
    std::string model = tag.count("model") ? tag.at("model") : spec.name;

    std::optional<uint64_t> seed;
    if (*kind == PuzzleKind::Blocks) seed = trial_seed(model, *tool, *kind, n, trial);
    PuzzleInstance inst = make_instance(
        *kind, n, seed, *kind == PuzzleKind::River ? config_.river_capacity_override : std::nullopt,
        config_.checker_allow_backward);

    std::string cell = model + "|" + to_string(*tool) + "|" + to_string(*kind) + "|" +
                       std::to_string(n);
    bool weak = profiles_.count(model) && profiles_.at(model) == "weak";
    int quota = static_cast<int>(fnv1a64(cell + "#quota") % 6); // successful trials out of 5
    bool succeed = !weak || trial < quota;
    int mode = static_cast<int>(fnv1a64(cell + "#mode|" + std::to_string(trial)) % 2);

    // Oracle answer for solvable instances; bounded search for river/blocks.
    OracleResult oracle;
    bool need_solution = succeed && *tool != ToolKind::PoT;
    if (need_solution) oracle = solve_instance(inst, config_.solvability_probe_cap);
    bool have_solution = need_solution && oracle.status == OracleResult::Status::Solved;

    switch (*tool) {
        case ToolKind::Direct:
        case ToolKind::ThinkExecute: {
            std::string role = *tool == ToolKind::Direct ? "solution" : "trace result";
            if (!succeed) {
                if (mode == 0)
                    return finish("I cannot find a complete " + role + " for this instance.");
                return finish("My best candidate " + role + " was " + bad_move_token(*kind) +
                              " but the bookkeeping fell apart, so treat this attempt as "
                              "inconclusive.\n\n" +
                              illegal_moves_text(*kind));
            }
            if (!have_solution)
                return finish("I searched the state space carefully and believe this instance "
                              "admits no valid " +
                              role + ".");
            return finish("Here is the complete " + role + ":\n\n" +
                          moves_to_text(*oracle.moves) + "\nThat completes the answer.");
        }
        case ToolKind::PoT: {
            if (!succeed) {
                if (mode == 0)
                    return finish("I would rather describe the approach in prose than commit to "
                                  "code for this one.");
                return finish("```python\nimport sys\nsys.exit(3)\n```\n");
            }
            std::string program;
            switch (*kind) {
                case PuzzleKind::Hanoi: program = hanoi_solver_program(n); break;
                case PuzzleKind::Checker: program = checker_solver_program(n); break;
                case PuzzleKind::River:
                    program = river_solver_program(n, inst.boat_capacity);
                    break;
                case PuzzleKind::Blocks: program = blocks_solver_program(inst); break;
            }
            return finish("The program below computes and prints the move list.\n\n```python\n" +
                          program + "```\n");
        }
        case ToolKind::Scratchpad: {
            if (!succeed) {
                if (mode == 0) {
                    if (step == 1) {
                        nlohmann::json j;
                        j["partial_answer"] = "";
                        j["scratchpad"] = "initial analysis done; enumerating candidate moves";
                        j["finish"] = false;
                        return finish(j.dump());
                    }
                    return finish("The scratchpad bookkeeping broke down at this point.");
                }
                nlohmann::json j;
                j["partial_answer"] = "";
                j["scratchpad"] = "still reasoning about the move ordering, nothing safe to emit";
                j["finish"] = false;
                return finish(j.dump());
            }
            if (!have_solution) {
                nlohmann::json j;
                j["partial_answer"] = "";
                j["scratchpad"] = "";
                j["finish"] = true;
                return finish("I believe this instance has no valid solution.\n" + j.dump());
            }
            std::vector<std::string> lines;
            for (const Move& mv : oracle.moves->moves) lines.push_back(move_to_text(mv));
            int k = 1 + static_cast<int>(fnv1a64(cell + "#chunks|" + std::to_string(trial)) % 3);
            auto chunks = split_into_chunks(lines, k);
            int t_final = static_cast<int>(chunks.size());
            nlohmann::json j;
            if (step <= t_final) {
                j["partial_answer"] = chunks[static_cast<size_t>(step - 1)];
                bool done = step == t_final;
                j["finish"] = done;
                j["scratchpad"] =
                    done ? ""
                         : "emitted " + std::to_string(step) + "/" + std::to_string(t_final) +
                               " chunks; continue from move " +
                               std::to_string((lines.size() + chunks.size() - 1) / chunks.size() *
                                              static_cast<size_t>(step));
            } else {
                j["partial_answer"] = "";
                j["scratchpad"] = "";
                j["finish"] = true;
            }
            return finish("Continuing per the protocol.\n" + j.dump());
        }
    }
    return BackendError{BackendError::Kind::Transport, 0, "fixture backend: unhandled tool"};
}

} // namespace tabench
