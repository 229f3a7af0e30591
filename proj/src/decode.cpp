#include "tabench/decode.hpp"

#include <algorithm>
#include <cctype>

#include "json.hpp"

namespace tabench {

std::string to_string(DecodeErrorKind k) {
    switch (k) {
        case DecodeErrorKind::NoMovesFound: return "no-moves-found";
        case DecodeErrorKind::MalformedScratchpad: return "malformed-scratchpad";
        case DecodeErrorKind::NoCodeBlock: return "no-code-block";
        case DecodeErrorKind::GrammarViolation: return "grammar-violation";
    }
    return "?";
}

namespace {

std::string clip(std::string_view s, size_t limit = 120) {
    if (s.size() <= limit) return std::string(s);
    return std::string(s.substr(0, limit)) + "...";
}

struct MoveMatch {
    size_t begin = 0, end = 0;
    Move move;
};

/// Candidate spans look like moves (bracketed tuples) but fail the kind's
/// grammar; the first one is reported on GrammarViolation.
struct ScanResult {
    std::vector<MoveMatch> matches;
    std::optional<std::pair<size_t, size_t>> first_bad;
};

ScanResult scan_moves(std::string_view text, PuzzleKind kind) {
    ScanResult out;
    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c != '(' && c != '[') {
            ++i;
            continue;
        }
        char close = c == '(' ? ')' : ']';
        size_t end = text.find(close, i + 1);
        if (end == std::string_view::npos) {
            ++i;
            continue;
        }
        std::string_view span = text.substr(i, end - i + 1);
        // Nested opener inside the span: restart after the inner opener.
        size_t inner = span.find_first_of("([", 1);
        if (inner != std::string_view::npos) {
            i += inner;
            continue;
        }
        auto mv = parse_move_text(span, kind);
        if (mv) {
            out.matches.push_back(MoveMatch{i, end + 1, mv.value()});
        } else if (!out.first_bad) {
            out.first_bad = {i, end + 1};
        }
        i = end + 1;
    }
    return out;
}

/// Text allowed between two moves of the same block: whitespace, list
/// punctuation, bare ordinals ("3.", "4)"), bullets, and the words
/// "move"/"step" that models commonly prefix to numbered answers.
bool is_gap_text(std::string_view gap) {
    size_t i = 0;
    auto lower = [](char ch) {
        return static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    };
    while (i < gap.size()) {
        char c = gap[i];
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == ';' || c == ':' ||
            c == '.' || c == '-' || c == '*' || c == '>' || c == '#') {
            ++i;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < gap.size() && std::isdigit(static_cast<unsigned char>(gap[i]))) ++i;
            continue;
        }
        if (lower(c) == 'm' || lower(c) == 's') {
            std::string word;
            size_t j = i;
            while (j < gap.size() && std::isalpha(static_cast<unsigned char>(gap[j]))) {
                word.push_back(lower(gap[j]));
                ++j;
            }
            if (word == "move" || word == "moves" || word == "step" || word == "steps") {
                i = j;
                continue;
            }
        }
        return false;
    }
    return true;
}

} // namespace

Result<MoveList, DecodeError> extract_moves(std::string_view text, PuzzleKind kind) {
    ScanResult scan = scan_moves(text, kind);
    if (scan.matches.empty()) {
        if (scan.first_bad)
            return DecodeError{DecodeErrorKind::GrammarViolation,
                               clip(text.substr(scan.first_bad->first,
                                                scan.first_bad->second - scan.first_bad->first))};
        return DecodeError{DecodeErrorKind::NoMovesFound, clip(text)};
    }
    // Group adjacent matches into blocks; the last block wins.
    size_t block_start = 0;
    for (size_t m = 1; m < scan.matches.size(); ++m) {
        std::string_view gap =
            text.substr(scan.matches[m - 1].end, scan.matches[m].begin - scan.matches[m - 1].end);
        if (!is_gap_text(gap)) block_start = m;
    }
    MoveList ml;
    ml.kind = kind;
    for (size_t m = block_start; m < scan.matches.size(); ++m) ml.moves.push_back(scan.matches[m].move);
    return ml;
}

Result<std::string, DecodeError> extract_code(std::string_view text) {
    std::string last;
    size_t pos = 0;
    while (true) {
        size_t open = text.find("```", pos);
        if (open == std::string_view::npos) break;
        size_t lang_end = text.find('\n', open + 3);
        if (lang_end == std::string_view::npos) break; // fence with no body
        size_t close = text.find("```", lang_end + 1);
        if (close == std::string_view::npos) break; // unterminated fence
        std::string_view body = text.substr(lang_end + 1, close - lang_end - 1);
        bool blank = true;
        for (char c : body)
            if (!std::isspace(static_cast<unsigned char>(c))) {
                blank = false;
                break;
            }
        if (!blank) last = std::string(body);
        pos = close + 3;
    }
    if (last.empty())
        return DecodeError{DecodeErrorKind::NoCodeBlock, clip(text)};
    return last;
}

namespace {

/// Spans of top-level balanced JSON-ish objects, brace matching aware of
/// string literals and escapes.
std::vector<std::pair<size_t, size_t>> balanced_object_spans(std::string_view text) {
    std::vector<std::pair<size_t, size_t>> spans;
    bool in_string = false, escape = false;
    int depth = 0;
    size_t start = 0;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (escape) escape = false;
            else if (c == '\\') escape = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') {
            if (depth > 0) in_string = true;
            continue;
        }
        if (c == '{') {
            if (depth == 0) start = i;
            ++depth;
        } else if (c == '}') {
            if (depth > 0) {
                --depth;
                if (depth == 0) spans.emplace_back(start, i + 1);
            }
        }
    }
    return spans;
}

bool truthy_finish(const nlohmann::json& v) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_string()) {
        std::string s = v.get<std::string>();
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return s == "true";
    }
    return false;
}

std::string string_field(const nlohmann::json& obj, const char* key) {
    if (!obj.contains(key)) return "";
    const auto& v = obj.at(key);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "";
    if (v.is_array()) {
        // Models sometimes emit the answer as an array of move strings.
        std::string joined;
        for (const auto& item : v) {
            if (item.is_string()) joined += item.get<std::string>();
            else joined += item.dump();
            joined.push_back('\n');
        }
        return joined;
    }
    return v.dump();
}

} // namespace

namespace {

Result<nlohmann::json, DecodeError> find_scratchpad_object(std::string_view text) {
    nlohmann::json found;
    bool have = false;
    for (const auto& [b, e] : balanced_object_spans(text)) {
        nlohmann::json j = nlohmann::json::parse(text.substr(b, e - b), nullptr, false);
        if (j.is_discarded() || !j.is_object()) continue;
        if (j.contains("partial_answer") || j.contains("scratchpad") || j.contains("finish")) {
            found = std::move(j);
            have = true;
        }
    }
    if (!have)
        return DecodeError{DecodeErrorKind::MalformedScratchpad,
                           "no JSON object with scratchpad keys: " + clip(text)};
    return found;
}

} // namespace

Result<ScratchpadStepOutput, DecodeError> decode_scratchpad(std::string_view text,
                                                            PuzzleKind kind,
                                                            const ScratchpadRescue& rescue) {
    auto object = find_scratchpad_object(text);
    if (!object && rescue) {
        if (auto reformatted = rescue(text)) object = find_scratchpad_object(*reformatted);
    }
    if (!object) return object.error();
    nlohmann::json found = std::move(object.value());

    ScratchpadStepOutput out;
    out.partial_answer_text = string_field(found, "partial_answer");
    out.next_scratchpad = string_field(found, "scratchpad");
    out.finish = found.contains("finish") ? truthy_finish(found.at("finish")) : false;
    if (!out.finish && out.next_scratchpad.empty())
        return DecodeError{DecodeErrorKind::MalformedScratchpad,
                           "empty next scratchpad without finish=true"};

    out.partial_answer.kind = kind;
    if (!out.partial_answer_text.empty()) {
        auto moves = extract_moves(out.partial_answer_text, kind);
        if (moves) out.partial_answer = std::move(moves.value());
    }
    return out;
}

} // namespace tabench
