#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "tabench/puzzle.hpp"
#include "tabench/result.hpp"

namespace tabench {

enum class DecodeErrorKind { NoMovesFound, MalformedScratchpad, NoCodeBlock, GrammarViolation };

std::string to_string(DecodeErrorKind k);

struct DecodeError {
    DecodeErrorKind category = DecodeErrorKind::NoMovesFound;
    std::string context; // offending text span, clipped
};

/// One parsed scratchpad step: the partial answer fragment A_t, the next
/// scratchpad state S_{t+1}, and the early-stop flag.
struct ScratchpadStepOutput {
    MoveList partial_answer;
    std::string partial_answer_text;
    std::string next_scratchpad;
    bool finish = false;
};

/// Scans free text for the canonical move grammar of `kind`. Tolerates
/// surrounding prose, bullets and "Move 3:"-style numbering between moves;
/// when several separate move blocks appear, the last one wins.
Result<MoveList, DecodeError> extract_moves(std::string_view text, PuzzleKind kind);

/// Returns the contents of the last non-empty fenced code block; the fence
/// language tag is ignored.
Result<std::string, DecodeError> extract_code(std::string_view text);

/// Optional rescue hook for outputs the primary parser rejects: given the
/// raw reply, return a reformatted string to parse instead (one attempt, no
/// recursion). The LLM-assisted variant lives in the frameworks module and
/// is disabled by default, keeping standard runs deterministic.
using ScratchpadRescue = std::function<std::optional<std::string>(std::string_view)>;

/// Locates the last JSON object carrying the scratchpad keys
/// ("partial_answer", "scratchpad", "finish") and splits it into the step
/// output. A missing finish key defaults to false; an empty next scratchpad
/// is only accepted together with finish = true.
Result<ScratchpadStepOutput, DecodeError> decode_scratchpad(
    std::string_view text, PuzzleKind kind, const ScratchpadRescue& rescue = nullptr);

} // namespace tabench
