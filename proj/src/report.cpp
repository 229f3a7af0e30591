#include "tabench/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace tabench {

using nlohmann::json;

namespace {

constexpr ToolKind kToolOrder[] = {ToolKind::Direct, ToolKind::ThinkExecute, ToolKind::PoT,
                                   ToolKind::Scratchpad};

struct CellStats {
    int successes = 0;
    int trials = 0;
};

// (model, tool, kind, n) with numeric n so iteration order is sensible.
using CellKey = std::tuple<std::string, std::string, std::string, int>;
using CellMap = std::map<CellKey, CellStats>;

CellKey make_key(const std::string& model, ToolKind tool, PuzzleKind kind, int n) {
    return {model, to_string(tool), to_string(kind), n};
}

CellMap aggregate(const std::vector<RunRecord>& records) {
    CellMap cells;
    for (const auto& r : records) {
        auto& cell = cells[make_key(r.model, r.tool, r.kind, r.n)];
        ++cell.trials;
        if (r.success) ++cell.successes;
    }
    return cells;
}

/// Row order: paired models first (LLM then LRM, pair order preserved),
/// then any remaining models alphabetically.
std::vector<std::string> model_order(const std::vector<RunRecord>& records,
                                     const ReportOptions& options) {
    std::set<std::string> present;
    for (const auto& r : records) present.insert(r.model);
    std::vector<std::string> order;
    auto push = [&](const std::string& m) {
        if (std::find(order.begin(), order.end(), m) == order.end()) order.push_back(m);
    };
    if (records.empty()) {
        for (const auto& p : options.pairs) {
            push(p.llm);
            push(p.lrm);
        }
        return order;
    }
    for (const auto& p : options.pairs) {
        if (present.contains(p.llm)) push(p.llm);
        if (present.contains(p.lrm)) push(p.lrm);
    }
    for (const auto& m : present) push(m);
    return order;
}

std::vector<ToolKind> tool_order(const std::vector<RunRecord>& records) {
    std::set<ToolKind> present;
    for (const auto& r : records) present.insert(r.tool);
    std::vector<ToolKind> order;
    for (ToolKind t : kToolOrder)
        if (records.empty() || present.contains(t)) order.push_back(t);
    return order;
}

std::vector<int> n_order(const std::vector<RunRecord>& records,
                         const std::pair<PuzzleKind, PuzzleKind>& kinds) {
    std::set<int> ns;
    for (const auto& r : records)
        if (r.kind == kinds.first || r.kind == kinds.second) ns.insert(r.n);
    if (ns.empty()) ns = {3, 5, 7, 9, 11, 13};
    return {ns.begin(), ns.end()};
}

std::map<std::string, std::string> lrm_of_llm(const ReportOptions& options) {
    std::map<std::string, std::string> map;
    for (const auto& p : options.pairs) map[p.lrm] = p.llm;
    return map;
}

bool lrm_advantage(const CellMap& cells, const std::map<std::string, std::string>& paired_llm,
                   const std::string& model, ToolKind tool, PuzzleKind kind, int n) {
    auto it = paired_llm.find(model);
    if (it == paired_llm.end()) return false;
    auto lrm_cell = cells.find(make_key(model, tool, kind, n));
    if (lrm_cell == cells.end() || lrm_cell->second.trials == 0) return false;
    auto llm_cell = cells.find(make_key(it->second, tool, kind, n));
    int llm_successes = llm_cell == cells.end() ? 0 : llm_cell->second.successes;
    return lrm_cell->second.successes > llm_successes;
}

std::string pad(const std::string& s, size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string kind_title(PuzzleKind k) {
    switch (k) {
        case PuzzleKind::Hanoi: return "Hanoi";
        case PuzzleKind::Checker: return "Checker";
        case PuzzleKind::River: return "River";
        case PuzzleKind::Blocks: return "Blocks";
    }
    return "?";
}

} // namespace

std::string accuracy_table_text(const std::vector<RunRecord>& records,
                                const ReportOptions& options,
                                const std::pair<PuzzleKind, PuzzleKind>& kinds) {
    constexpr size_t kToolW = 19;
    constexpr size_t kModelW = 22;
    constexpr size_t kCellW = 8;

    CellMap cells = aggregate(records);
    auto models = model_order(records, options);
    auto tools = tool_order(records);
    auto ns = n_order(records, kinds);
    auto paired_llm = lrm_of_llm(options);

    std::ostringstream os;
    os << "== Accuracy: " << kind_title(kinds.first) << " & " << kind_title(kinds.second)
       << " ==\n";

    size_t kind_width = ns.size() * kCellW;
    os << pad("Tool Usage", kToolW) << pad("Model", kModelW);
    os << "| " << pad(kind_title(kinds.first), kind_width) << "| "
       << pad(kind_title(kinds.second), kind_width) << "\n";
    os << pad("", kToolW) << pad("", kModelW);
    for (int rep = 0; rep < 2; ++rep) {
        os << "| ";
        for (int n : ns) os << pad("N=" + std::to_string(n), kCellW);
    }
    os << "\n";
    size_t total = kToolW + kModelW + 2 * (2 + kind_width);
    os << std::string(total, '-') << "\n";

    for (size_t ti = 0; ti < tools.size(); ++ti) {
        ToolKind tool = tools[ti];
        for (size_t mi = 0; mi < models.size(); ++mi) {
            const std::string& model = models[mi];
            os << pad(mi == 0 ? tool_display_name(tool) : "", kToolW) << pad(model, kModelW);
            for (PuzzleKind kind : {kinds.first, kinds.second}) {
                os << "| ";
                for (int n : ns) {
                    auto it = cells.find(make_key(model, tool, kind, n));
                    int s = it == cells.end() ? 0 : it->second.successes;
                    int t = it == cells.end() ? 0 : it->second.trials;
                    std::string cell = std::to_string(s) + "/" + std::to_string(t);
                    if (lrm_advantage(cells, paired_llm, model, tool, kind, n))
                        cell = "_" + cell + "_";
                    os << pad(cell, kCellW);
                }
            }
            os << "\n";
        }
        if (ti + 1 < tools.size()) os << std::string(total, '-') << "\n";
    }
    return os.str();
}

namespace {

json accuracy_cells_json(const std::vector<RunRecord>& records, const ReportOptions& options) {
    CellMap cells = aggregate(records);
    auto paired_llm = lrm_of_llm(options);
    json out = json::array();
    for (const auto& [key, stats] : cells) {
        const auto& [model, tool_s, kind_s, n] = key;
        ToolKind tool = *tool_kind_from_string(tool_s);
        PuzzleKind kind = *puzzle_kind_from_string(kind_s);
        json cell;
        cell["model"] = model;
        cell["tool"] = tool_s;
        cell["kind"] = kind_s;
        cell["n"] = n;
        cell["successes"] = stats.successes;
        cell["trials"] = stats.trials;
        cell["lrm_advantage"] = lrm_advantage(cells, paired_llm, model, tool, kind, n);
        out.push_back(std::move(cell));
    }
    return out;
}

} // namespace

std::string accuracy_report(const std::vector<RunRecord>& records, const ReportOptions& options,
                            ReportFormat format) {
    switch (format) {
        case ReportFormat::Table: {
            std::string out =
                accuracy_table_text(records, options, {PuzzleKind::Hanoi, PuzzleKind::Checker});
            out += "\n";
            out += accuracy_table_text(records, options, {PuzzleKind::River, PuzzleKind::Blocks});
            return out;
        }
        case ReportFormat::Csv: {
            std::ostringstream os;
            os << "model,tool,kind,n,successes,trials,lrm_advantage\n";
            for (const auto& cell : accuracy_cells_json(records, options)) {
                os << cell.at("model").get<std::string>() << ','
                   << cell.at("tool").get<std::string>() << ','
                   << cell.at("kind").get<std::string>() << ',' << cell.at("n").get<int>() << ','
                   << cell.at("successes").get<int>() << ',' << cell.at("trials").get<int>() << ','
                   << (cell.at("lrm_advantage").get<bool>() ? "true" : "false") << "\n";
            }
            return os.str();
        }
        case ReportFormat::Json: {
            json j;
            j["schema"] = "v1";
            j["cells"] = accuracy_cells_json(records, options);
            return j.dump(2) + "\n";
        }
    }
    return "";
}

std::string scratchpad_usage_csv(const std::vector<RunRecord>& records) {
    struct Agg {
        int trials = 0;
        int successes = 0;
        int64_t steps = 0;
    };
    std::map<std::tuple<std::string, std::string, int>, Agg> cells; // model, kind, n
    for (const auto& r : records) {
        if (r.tool != ToolKind::Scratchpad) continue;
        auto& agg = cells[{r.model, to_string(r.kind), r.n}];
        ++agg.trials;
        if (r.success) ++agg.successes;
        agg.steps += r.scratchpad_steps_used;
    }
    std::ostringstream os;
    os << "model,kind,n,mean_steps,accuracy\n";
    for (const auto& [key, agg] : cells) {
        const auto& [model, kind_s, n] = key;
        char mean_buf[64], acc_buf[64];
        std::snprintf(mean_buf, sizeof(mean_buf), "%.2f",
                      static_cast<double>(agg.steps) / static_cast<double>(agg.trials));
        std::snprintf(acc_buf, sizeof(acc_buf), "%.2f",
                      static_cast<double>(agg.successes) / static_cast<double>(agg.trials));
        os << model << ',' << kind_s << ',' << n << ',' << mean_buf << ',' << acc_buf << "\n";
    }
    return os.str();
}

std::string token_breakdown_csv(const std::vector<RunRecord>& records) {
    struct Agg {
        int trials = 0;
        int64_t prompt = 0;
        int64_t output = 0;
        int64_t thinking = 0;
        int thinking_trials = 0;
    };
    std::map<CellKey, Agg> cells;
    for (const auto& r : records) {
        auto& agg = cells[make_key(r.model, r.tool, r.kind, r.n)];
        ++agg.trials;
        agg.prompt += r.tokens.prompt;
        agg.output += r.tokens.output;
        if (r.tokens.thinking) {
            agg.thinking += *r.tokens.thinking;
            ++agg.thinking_trials;
        }
    }
    std::ostringstream os;
    os << "model,tool,kind,n,prompt_mean,output_mean,thinking_mean\n";
    for (const auto& [key, agg] : cells) {
        const auto& [model, tool_s, kind_s, n] = key;
        char buf[64];
        os << model << ',' << tool_s << ',' << kind_s << ',' << n << ',';
        std::snprintf(buf, sizeof(buf), "%.1f",
                      static_cast<double>(agg.prompt) / static_cast<double>(agg.trials));
        os << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.1f",
                      static_cast<double>(agg.output) / static_cast<double>(agg.trials));
        os << buf << ',';
        if (agg.thinking_trials > 0) {
            std::snprintf(buf, sizeof(buf), "%.1f",
                          static_cast<double>(agg.thinking) /
                              static_cast<double>(agg.thinking_trials));
            os << buf;
        }
        os << "\n";
    }
    return os.str();
}

} // namespace tabench
