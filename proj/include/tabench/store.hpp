#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabench/config.hpp"
#include "tabench/frameworks.hpp"

namespace tabench {

struct ExperimentPlan {
    std::vector<std::string> models; // names resolved against the config
    std::vector<ToolKind> tools;
    std::vector<PuzzleKind> kinds;
    std::vector<int> n_values = {3, 5, 7, 9, 11, 13};
    int trials = 5;
    /// Optional explicit per-cell seeds keyed "model|tool|kind|n|trial";
    /// cells not listed derive their seed from the cell-key hash.
    std::map<std::string, uint64_t> seed_overrides;
};

ExperimentPlan plan_from_json(const nlohmann::json& j);
nlohmann::json plan_to_json(const ExperimentPlan& plan);
ExperimentPlan load_plan(const std::string& path);

std::string cell_key(const std::string& model, ToolKind tool, PuzzleKind kind, int n, int trial);

/// Deterministic per-trial seed (Blocks instance sampling), derived from the
/// cell-key hash so instances are reproducible across resumes.
uint64_t trial_seed(const std::string& model, ToolKind tool, PuzzleKind kind, int n, int trial);

struct RunRecord {
    std::string model;
    ToolKind tool = ToolKind::Direct;
    PuzzleKind kind = PuzzleKind::Hanoi;
    int n = 0;
    int trial = 0;
    bool success = false;
    std::string verify_verdict; // "valid" | "illegal_move" | "not_at_goal" | "none"
    std::string failure;        // categorized reason, "" when an answer was produced
    std::string transcript_hash;
    TokenCounts tokens;
    bool tokens_estimated = false;
    int scratchpad_steps_used = 0;
    bool oracle_solvable = true; // false only when search proved unsolvable
    std::string started_at;
    std::string finished_at;

    std::string key() const { return cell_key(model, tool, kind, n, trial); }
    nlohmann::json to_json() const;
    static RunRecord from_json(const nlohmann::json& j);
};

/// Append-only experiment store: a directory holding records.jsonl (one
/// checksummed record per line), transcripts/<hash>.json sidecars, and
/// meta/ pseudocode artifacts. A torn trailing line (no newline) from a
/// killed run is truncated on the next open; any other malformed or
/// checksum-failing line refuses to resume.
class RunStore {
public:
    explicit RunStore(std::string dir, bool create = true);
    ~RunStore();

    const std::string& dir() const { return dir_; }

    std::vector<RunRecord> load_records() const;
    void append(const RunRecord& record, const nlohmann::json& transcript);
    nlohmann::json load_transcript(const std::string& hash) const;
    bool has_transcript(const std::string& hash) const;

    void put_pseudocode(PuzzleKind kind, const std::string& model,
                        const PseudocodeCache::Entry& entry);
    std::optional<PseudocodeCache::Entry> get_pseudocode(PuzzleKind kind,
                                                         const std::string& model) const;

private:
    std::string dir_;
    int fd_ = -1;
    std::mutex mu_;
};

struct ExecuteOptions {
    BackendPtr backend;
    HarnessConfig config;
    int concurrency = 1;
    /// Cooperative interruption point for crash-equivalence testing: stop
    /// appending (mid-run) once this many new records were written.
    std::optional<uint64_t> stop_after_records;
};

struct ExecuteSummary {
    uint64_t planned = 0;
    uint64_t skipped = 0;
    uint64_t executed = 0;
    uint64_t succeeded = 0;
    uint64_t failed = 0;
    bool interrupted = false;
};

/// Runs every (model, tool, kind, n, trial) cell of the plan, skipping cells
/// already present in the store (resume). One RunRecord is appended per
/// trial; interruption at any point leaves a valid store.
ExecuteSummary execute(const ExperimentPlan& plan, const std::string& store_path,
                       const ExecuteOptions& options);

/// Records sorted by cell key with volatile fields (timestamps) stripped;
/// the canonical form for store equivalence checks.
nlohmann::json store_canonical_records(const std::string& store_path);

} // namespace tabench
