#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabench/puzzle.hpp"

namespace tabench {

struct PromptBundle {
    std::string system_text;
    std::string user_text;
    std::string template_id;
    std::string template_version;

    /// Content hash over system + user text; recorded in transcripts and
    /// used as the cassette request key component.
    std::string hash() const;
};

/// The scratchpad interface description D, shared verbatim across all four
/// puzzle kinds. Its key names are the contract decode_scratchpad consumes.
struct ScratchpadDescription {
    std::string text;
};

struct ScratchpadExampleStep {
    std::string answer;     // partial answer move lines (may be empty)
    std::string scratchpad; // S_{t+1} the demo writes
    bool finish = false;
};

/// One worked demonstration on a miniature instance.
struct ScratchpadExample {
    int n = 1;
    std::optional<uint64_t> seed; // blocks only
    std::vector<ScratchpadExampleStep> steps;
};

struct InContextExampleSet {
    PuzzleKind kind = PuzzleKind::Hanoi;
    std::vector<ScratchpadExample> examples;
};

/// Loads the versioned template set (embedded at build time; a directory can
/// override individual files) and renders the per-framework prompts.
/// Rendering is deterministic; an unresolved placeholder throws.
class PromptKit {
public:
    static constexpr const char* kVersion = "v1";

    explicit PromptKit(std::optional<std::string> override_dir = std::nullopt);

    /// Raw template text by id (e.g. "rules.hanoi"); throws on unknown id.
    const std::string& template_text(const std::string& id) const;

    ScratchpadDescription scratchpad_description() const;
    InContextExampleSet scratchpad_examples(PuzzleKind kind, int m = 3) const;

    PromptBundle render_direct(const PuzzleInstance& instance) const;
    PromptBundle render_pot(const PuzzleInstance& instance) const;
    PromptBundle render_think_execute_meta(PuzzleKind kind) const;
    PromptBundle render_think_execute_run(PuzzleKind kind, const std::string& pseudocode,
                                          const PuzzleInstance& instance) const;
    PromptBundle render_scratchpad_step(const PuzzleInstance& instance,
                                        const std::string& scratchpad,
                                        const ScratchpadDescription& d,
                                        const InContextExampleSet& e) const;

    /// Reformat prompt for the optional LLM-assisted decode fallback.
    PromptBundle render_scratchpad_rescue(const std::string& raw_output) const;

    /// Instance description text used in user prompts (exposed for tests).
    std::string instance_text(const PuzzleInstance& instance) const;

private:
    std::map<std::string, std::string> templates_;
};

/// Single-pass placeholder substitution for {{name}} tokens. Unknown names
/// and unterminated tokens throw; substituted values are never rescanned.
std::string substitute_placeholders(const std::string& tmpl,
                                    const std::map<std::string, std::string>& values);

} // namespace tabench
