#pragma once

#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tabench/backend.hpp"
#include "tabench/decode.hpp"
#include "tabench/prompt.hpp"
#include "tabench/puzzle.hpp"
#include "tabench/sandbox.hpp"

namespace tabench {

enum class ToolKind { Direct, PoT, ThinkExecute, Scratchpad };

std::string to_string(ToolKind t);
std::optional<ToolKind> tool_kind_from_string(std::string_view s);
std::string tool_display_name(ToolKind t); // table row label

struct ScratchpadConfig {
    int t_max = 5;      // T, the scratchpad step budget
    int m_examples = 3; // in-context examples per step prompt
    /// When set, a step whose reply fails to parse gets one LLM reformat
    /// attempt (recorded as its own transcript step). Off by default so
    /// standard runs stay deterministic and issue exactly min(T, T_cut)
    /// calls.
    bool llm_decode_fallback = false;
};

/// One backend call (or cache-shaped pseudocode reference) in a trial.
struct StepRecord {
    std::string role; // "main", "meta", "run", "step-1", ...
    std::string template_id;
    std::string template_version;
    std::string prompt_hash;
    std::string raw_reply;
    std::optional<std::string> thinking_text;
    TokenCounts tokens;
    bool tokens_estimated = false;
    int64_t latency_ms = 0;
    bool truncated = false;
    bool cache_hit = false;
    std::optional<std::string> decoded_code;
    std::optional<std::string> answer_fragment; // canonical move lines
    std::optional<std::string> next_scratchpad;
    std::optional<bool> finish_flag;
    std::optional<ExecOutcome> sandbox;
};

struct ToolTranscript {
    ToolKind tool = ToolKind::Direct;
    std::string model;
    PuzzleKind kind = PuzzleKind::Hanoi;
    int n = 0;
    int trial = 0;
    std::vector<StepRecord> steps;
    std::vector<std::string> scratchpad_states; // S_1..S_{T_final} (inputs per step)
    std::optional<int> t_cut;                   // first step with finish = true
    std::optional<MoveList> final_moves;
    std::optional<std::string> failure; // categorized reason, empty when answered
    TokenCounts totals;                 // sums over steps

    nlohmann::json to_json() const;
    std::string content_hash() const;
};

/// Identifies the trial for transcripts and the backend call context.
struct TrialContext {
    std::string model_tag; // spec name by default
    int trial = 0;
};

struct FrameworkDeps {
    const PromptKit& kit;
    BackendPtr backend;
    ModelSpec spec;
    std::chrono::seconds deadline{1200};
};

ToolTranscript run_direct(const PuzzleInstance& instance, const FrameworkDeps& deps,
                          const TrialContext& ctx = {});

ToolTranscript run_pot(const PuzzleInstance& instance, const FrameworkDeps& deps,
                       const SandboxPolicy& policy, const TrialContext& ctx = {});

/// Task-level pseudocode shared by every trial of a (kind, model) pair. The
/// first caller computes it with one meta call; the full meta record is kept
/// on the entry so callers can persist it independently of any trial.
class PseudocodeCache {
public:
    struct Entry {
        std::string pseudocode;
        StepRecord meta_step; // the real call that produced it
    };

    /// Returns the cached entry or computes it via `compute`.
    Result<Entry, BackendError> get_or_compute(
        PuzzleKind kind, const std::string& model,
        const std::function<Result<Entry, BackendError>()>& compute);

    /// Pre-seeds an entry (used when resuming from a persisted artifact).
    void put(PuzzleKind kind, const std::string& model, Entry entry);
    std::optional<Entry> peek(PuzzleKind kind, const std::string& model) const;

private:
    mutable std::mutex mu_;
    std::map<std::string, Entry> entries_;
};

ToolTranscript run_think_execute(PuzzleKind kind, const PuzzleInstance& instance,
                                 const FrameworkDeps& deps, PseudocodeCache& cache,
                                 const TrialContext& ctx = {});

ToolTranscript run_scratchpad(const PuzzleInstance& instance, const FrameworkDeps& deps,
                              const ScratchpadConfig& cfg, const TrialContext& ctx = {});

/// Dispatch helper used by the experiment runner and the bindings.
ToolTranscript run_tool(ToolKind tool, const PuzzleInstance& instance, const FrameworkDeps& deps,
                        const SandboxPolicy& policy, const ScratchpadConfig& cfg,
                        PseudocodeCache& cache, const TrialContext& ctx = {});

} // namespace tabench
