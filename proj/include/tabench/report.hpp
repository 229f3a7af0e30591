#pragma once

#include <string>
#include <vector>

#include "tabench/config.hpp"
#include "tabench/store.hpp"

namespace tabench {

enum class ReportFormat { Table, Csv, Json };

struct ReportOptions {
    std::vector<ModelPair> pairs; // LRM-advantage marker pairing, in row order
};

/// Accuracy tables: rows grouped by (tool, model), columns by n, cells
/// "s/t", with the LRM cell marked _s/t_ when it strictly outperforms its
/// paired LLM. Two kind-pair tables (Hanoi & Checker, River & Blocks) are
/// emitted for the table format.
std::string accuracy_report(const std::vector<RunRecord>& records, const ReportOptions& options,
                            ReportFormat format);

/// One table for an explicit pair of kinds (building block of the above).
std::string accuracy_table_text(const std::vector<RunRecord>& records,
                                const ReportOptions& options,
                                const std::pair<PuzzleKind, PuzzleKind>& kinds);

/// CSV (model, kind, n, mean_steps, accuracy) over scratchpad-tool records.
std::string scratchpad_usage_csv(const std::vector<RunRecord>& records);

/// CSV (model, tool, kind, n, prompt/output/thinking token means); cells
/// with no reported thinking emit an empty field, never zero.
std::string token_breakdown_csv(const std::vector<RunRecord>& records);

} // namespace tabench
