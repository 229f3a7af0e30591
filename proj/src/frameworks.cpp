#include "tabench/frameworks.hpp"

#include <sstream>

#include "tabench/hash.hpp"

namespace tabench {

using nlohmann::json;

std::string to_string(ToolKind t) {
    switch (t) {
        case ToolKind::Direct: return "direct";
        case ToolKind::PoT: return "pot";
        case ToolKind::ThinkExecute: return "think_execute";
        case ToolKind::Scratchpad: return "scratchpad";
    }
    return "?";
}

std::optional<ToolKind> tool_kind_from_string(std::string_view s) {
    if (s == "direct") return ToolKind::Direct;
    if (s == "pot") return ToolKind::PoT;
    if (s == "think_execute") return ToolKind::ThinkExecute;
    if (s == "scratchpad") return ToolKind::Scratchpad;
    return std::nullopt;
}

std::string tool_display_name(ToolKind t) {
    switch (t) {
        case ToolKind::Direct: return "Direct Prompting";
        case ToolKind::PoT: return "PoT";
        case ToolKind::ThinkExecute: return "Think-and-Execute";
        case ToolKind::Scratchpad: return "Scratchpad";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Transcript serialization
// ---------------------------------------------------------------------------

namespace {

json token_counts_to_json(const TokenCounts& t) {
    json j;
    j["prompt"] = t.prompt;
    j["output"] = t.output;
    if (t.thinking) j["thinking"] = *t.thinking;
    else j["thinking"] = nullptr;
    return j;
}

json exec_outcome_to_json(const ExecOutcome& e) {
    json j;
    j["status"] = to_string(e.status);
    j["exit_code"] = e.exit_code;
    j["stdout"] = e.stdout_text;
    j["stderr"] = e.stderr_text;
    j["stdout_truncated"] = e.stdout_truncated;
    j["stderr_truncated"] = e.stderr_truncated;
    j["duration_ms"] = e.duration_ms;
    return j;
}

json step_to_json(const StepRecord& s) {
    json j;
    j["role"] = s.role;
    j["template_id"] = s.template_id;
    j["template_version"] = s.template_version;
    j["prompt_hash"] = s.prompt_hash;
    j["raw_reply"] = s.raw_reply;
    if (s.thinking_text) j["thinking_text"] = *s.thinking_text;
    else j["thinking_text"] = nullptr;
    j["tokens"] = token_counts_to_json(s.tokens);
    j["tokens_estimated"] = s.tokens_estimated;
    j["latency_ms"] = s.latency_ms;
    j["truncated"] = s.truncated;
    j["cache_hit"] = s.cache_hit;
    if (s.decoded_code) j["decoded_code"] = *s.decoded_code;
    if (s.answer_fragment) j["answer_fragment"] = *s.answer_fragment;
    if (s.next_scratchpad) j["next_scratchpad"] = *s.next_scratchpad;
    if (s.finish_flag) j["finish"] = *s.finish_flag;
    if (s.sandbox) j["sandbox"] = exec_outcome_to_json(*s.sandbox);
    return j;
}

} // namespace

json ToolTranscript::to_json() const {
    json j;
    j["schema"] = "v1";
    j["tool"] = to_string(tool);
    j["model"] = model;
    j["kind"] = to_string(kind);
    j["n"] = n;
    j["trial"] = trial;
    j["steps"] = json::array();
    for (const auto& s : steps) j["steps"].push_back(step_to_json(s));
    j["scratchpad_states"] = scratchpad_states;
    if (t_cut) j["t_cut"] = *t_cut;
    else j["t_cut"] = nullptr;
    if (final_moves) j["final_moves"] = moves_to_text(*final_moves);
    else j["final_moves"] = nullptr;
    if (failure) j["failure"] = *failure;
    else j["failure"] = nullptr;
    j["totals"] = token_counts_to_json(totals);
    return j;
}

std::string ToolTranscript::content_hash() const {
    // Wall-clock sandbox durations are volatile across re-executions; the
    // content hash masks them so records replay byte-identically.
    json j = to_json();
    for (auto& step : j.at("steps"))
        if (step.contains("sandbox")) step["sandbox"]["duration_ms"] = 0;
    return fnv1a64_hex(j.dump());
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

namespace {

std::string context_tag(const TrialContext& ctx, ToolKind tool, const PuzzleInstance& inst,
                        const std::string& step) {
    std::ostringstream os;
    os << "model=" << ctx.model_tag << ",tool=" << to_string(tool)
       << ",kind=" << to_string(inst.kind) << ",n=" << inst.n << ",trial=" << ctx.trial
       << ",step=" << step;
    return os.str();
}

StepRecord step_from_reply(const std::string& role, const PromptBundle& bundle,
                           const ModelReply& reply) {
    StepRecord step;
    step.role = role;
    step.template_id = bundle.template_id;
    step.template_version = bundle.template_version;
    step.prompt_hash = bundle.hash();
    step.raw_reply = reply.output_text;
    step.thinking_text = reply.thinking_text;
    step.tokens = reply.tokens;
    step.tokens_estimated = reply.tokens_estimated;
    step.latency_ms = reply.latency_ms;
    step.truncated = reply.truncated;
    return step;
}

StepRecord step_from_error(const std::string& role, const PromptBundle& bundle) {
    StepRecord step;
    step.role = role;
    step.template_id = bundle.template_id;
    step.template_version = bundle.template_version;
    step.prompt_hash = bundle.hash();
    return step;
}

void add_totals(ToolTranscript& t, const TokenCounts& c) { t.totals += c; }

std::string backend_failure(const BackendError& e) { return "backend-" + to_string(e.kind); }

ToolTranscript make_transcript(ToolKind tool, const PuzzleInstance& inst,
                               const TrialContext& ctx) {
    ToolTranscript t;
    t.tool = tool;
    t.model = ctx.model_tag;
    t.kind = inst.kind;
    t.n = inst.n;
    t.trial = ctx.trial;
    return t;
}

} // namespace

// ---------------------------------------------------------------------------
// Direct
// ---------------------------------------------------------------------------

ToolTranscript run_direct(const PuzzleInstance& instance, const FrameworkDeps& deps,
                          const TrialContext& ctx) {
    ToolTranscript t = make_transcript(ToolKind::Direct, instance, ctx);
    PromptBundle bundle = deps.kit.render_direct(instance);
    auto reply = deps.backend->complete(deps.spec, bundle, deps.deadline,
                                        {context_tag(ctx, t.tool, instance, "1")});
    if (!reply) {
        t.steps.push_back(step_from_error("main", bundle));
        t.failure = backend_failure(reply.error());
        return t;
    }
    StepRecord step = step_from_reply("main", bundle, reply.value());
    auto moves = extract_moves(reply.value().output_text, instance.kind);
    if (moves) {
        step.answer_fragment = moves_to_text(moves.value());
        t.final_moves = std::move(moves.value());
    } else {
        t.failure = to_string(moves.error().category);
    }
    add_totals(t, step.tokens);
    t.steps.push_back(std::move(step));
    return t;
}

// ---------------------------------------------------------------------------
// PoT
// ---------------------------------------------------------------------------

ToolTranscript run_pot(const PuzzleInstance& instance, const FrameworkDeps& deps,
                       const SandboxPolicy& policy, const TrialContext& ctx) {
    ToolTranscript t = make_transcript(ToolKind::PoT, instance, ctx);
    PromptBundle bundle = deps.kit.render_pot(instance);
    auto reply = deps.backend->complete(deps.spec, bundle, deps.deadline,
                                        {context_tag(ctx, t.tool, instance, "1")});
    if (!reply) {
        t.steps.push_back(step_from_error("main", bundle));
        t.failure = backend_failure(reply.error());
        return t;
    }
    StepRecord step = step_from_reply("main", bundle, reply.value());
    add_totals(t, step.tokens);

    auto code = extract_code(reply.value().output_text);
    if (!code) {
        t.failure = to_string(code.error().category); // sandbox never invoked
        t.steps.push_back(std::move(step));
        return t;
    }
    step.decoded_code = code.value();
    ExecOutcome exec = run_code(code.value(), policy);
    step.sandbox = exec;

    if (exec.status == ExecOutcome::Status::TimedOut) {
        t.failure = "exec-timeout";
        t.steps.push_back(std::move(step));
        return t;
    }
    if (exec.status == ExecOutcome::Status::NonzeroExit) {
        t.failure = "exec-failed";
        t.steps.push_back(std::move(step));
        return t;
    }
    // OutputTruncated still attempts extraction; the verifier judges it.
    auto moves = extract_moves(exec.stdout_text, instance.kind);
    if (moves) {
        step.answer_fragment = moves_to_text(moves.value());
        t.final_moves = std::move(moves.value());
    } else {
        t.failure = to_string(moves.error().category);
    }
    t.steps.push_back(std::move(step));
    return t;
}

// ---------------------------------------------------------------------------
// Think-and-Execute
// ---------------------------------------------------------------------------

Result<PseudocodeCache::Entry, BackendError> PseudocodeCache::get_or_compute(
    PuzzleKind kind, const std::string& model,
    const std::function<Result<Entry, BackendError>()>& compute) {
    std::string key = to_string(kind) + "|" + model;
    {
        std::lock_guard lock(mu_);
        auto it = entries_.find(key);
        if (it != entries_.end()) return it->second;
    }
    // Computed outside the lock; concurrent first callers may race, the
    // first stored entry wins so every trial sees one pseudocode.
    auto computed = compute();
    if (!computed) return computed;
    std::lock_guard lock(mu_);
    auto [it, inserted] = entries_.emplace(key, computed.value());
    return it->second;
}

void PseudocodeCache::put(PuzzleKind kind, const std::string& model, Entry entry) {
    std::lock_guard lock(mu_);
    entries_.insert_or_assign(to_string(kind) + "|" + model, std::move(entry));
}

std::optional<PseudocodeCache::Entry> PseudocodeCache::peek(PuzzleKind kind,
                                                            const std::string& model) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(to_string(kind) + "|" + model);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

ToolTranscript run_think_execute(PuzzleKind kind, const PuzzleInstance& instance,
                                 const FrameworkDeps& deps, PseudocodeCache& cache,
                                 const TrialContext& ctx) {
    ToolTranscript t = make_transcript(ToolKind::ThinkExecute, instance, ctx);

    // The meta call is shared across trials, so its context tag carries no
    // trial number and its full record lives on the cache entry. Trials
    // carry a cache-shaped reference step, which keeps transcripts identical
    // whether this trial computed the pseudocode or inherited it.
    auto entry = cache.get_or_compute(kind, ctx.model_tag, [&]() {
        PromptBundle meta_bundle = deps.kit.render_think_execute_meta(kind);
        std::ostringstream tag;
        tag << "model=" << ctx.model_tag << ",tool=think_execute,kind=" << to_string(kind)
            << ",call=meta";
        auto reply = deps.backend->complete(deps.spec, meta_bundle, deps.deadline, {tag.str()});
        if (!reply) return Result<PseudocodeCache::Entry, BackendError>(reply.error());
        PseudocodeCache::Entry e;
        e.meta_step = step_from_reply("meta", meta_bundle, reply.value());
        auto code = extract_code(reply.value().output_text);
        e.pseudocode = code ? code.value() : std::string(reply.value().output_text);
        e.meta_step.decoded_code = e.pseudocode;
        return Result<PseudocodeCache::Entry, BackendError>(std::move(e));
    });
    if (!entry) {
        t.failure = backend_failure(entry.error());
        return t;
    }

    StepRecord meta_ref;
    meta_ref.role = "meta";
    meta_ref.template_id = "tae.meta";
    meta_ref.template_version = PromptKit::kVersion;
    meta_ref.prompt_hash = entry.value().meta_step.prompt_hash;
    meta_ref.cache_hit = true;
    meta_ref.decoded_code = entry.value().pseudocode;
    t.steps.push_back(std::move(meta_ref));

    PromptBundle run_bundle =
        deps.kit.render_think_execute_run(kind, entry.value().pseudocode, instance);
    auto reply = deps.backend->complete(deps.spec, run_bundle, deps.deadline,
                                        {context_tag(ctx, t.tool, instance, "run")});
    if (!reply) {
        t.steps.push_back(step_from_error("run", run_bundle));
        t.failure = backend_failure(reply.error());
        return t;
    }
    StepRecord step = step_from_reply("run", run_bundle, reply.value());
    add_totals(t, step.tokens);
    auto moves = extract_moves(reply.value().output_text, instance.kind);
    if (moves) {
        step.answer_fragment = moves_to_text(moves.value());
        t.final_moves = std::move(moves.value());
    } else {
        t.failure = to_string(moves.error().category);
    }
    t.steps.push_back(std::move(step));
    return t;
}

// ---------------------------------------------------------------------------
// Scratchpad
// ---------------------------------------------------------------------------

ToolTranscript run_scratchpad(const PuzzleInstance& instance, const FrameworkDeps& deps,
                              const ScratchpadConfig& cfg, const TrialContext& ctx) {
    if (cfg.t_max < 1) throw std::invalid_argument("run_scratchpad: t_max must be >= 1");
    if (cfg.m_examples < 0) throw std::invalid_argument("run_scratchpad: m_examples must be >= 0");

    ToolTranscript t = make_transcript(ToolKind::Scratchpad, instance, ctx);
    ScratchpadDescription d = deps.kit.scratchpad_description();
    InContextExampleSet examples = deps.kit.scratchpad_examples(instance.kind, cfg.m_examples);

    MoveList concat;
    concat.kind = instance.kind;
    std::string scratchpad; // S_1 is empty

    for (int step_no = 1; step_no <= cfg.t_max; ++step_no) {
        t.scratchpad_states.push_back(scratchpad);
        PromptBundle bundle = deps.kit.render_scratchpad_step(instance, scratchpad, d, examples);
        auto reply = deps.backend->complete(
            deps.spec, bundle, deps.deadline,
            {context_tag(ctx, t.tool, instance, std::to_string(step_no))});
        if (!reply) {
            t.steps.push_back(step_from_error("step-" + std::to_string(step_no), bundle));
            t.failure = backend_failure(reply.error());
            return t;
        }
        StepRecord step = step_from_reply("step-" + std::to_string(step_no), bundle, reply.value());
        add_totals(t, step.tokens);

        auto decoded = decode_scratchpad(reply.value().output_text, instance.kind);
        if (!decoded && cfg.llm_decode_fallback) {
            PromptBundle rescue_bundle =
                deps.kit.render_scratchpad_rescue(reply.value().output_text);
            auto rescue_reply = deps.backend->complete(
                deps.spec, rescue_bundle, deps.deadline,
                {context_tag(ctx, t.tool, instance, std::to_string(step_no) + "-rescue")});
            if (rescue_reply) {
                StepRecord rescue_step = step_from_reply(
                    "rescue-" + std::to_string(step_no), rescue_bundle, rescue_reply.value());
                add_totals(t, rescue_step.tokens);
                t.steps.push_back(std::move(step));
                step = std::move(rescue_step);
                decoded = decode_scratchpad(rescue_reply.value().output_text, instance.kind);
            }
        }
        if (!decoded) {
            // Abort rather than retry: retries would silently change the
            // call-count invariant. The partial transcript is retained.
            t.steps.push_back(std::move(step));
            t.failure = "decode-failed:step=" + std::to_string(step_no);
            return t;
        }
        const auto& out = decoded.value();
        step.answer_fragment = moves_to_text(out.partial_answer);
        step.next_scratchpad = out.next_scratchpad;
        step.finish_flag = out.finish;
        t.steps.push_back(std::move(step));

        // Only the decoded partial-answer field ever reaches the final
        // answer; scratchpad content is memory, not output.
        for (const Move& mv : out.partial_answer.moves) concat.moves.push_back(mv);

        if (out.finish) {
            t.t_cut = step_no;
            break;
        }
        scratchpad = out.next_scratchpad;
    }
    t.final_moves = std::move(concat);
    return t;
}

ToolTranscript run_tool(ToolKind tool, const PuzzleInstance& instance, const FrameworkDeps& deps,
                        const SandboxPolicy& policy, const ScratchpadConfig& cfg,
                        PseudocodeCache& cache, const TrialContext& ctx) {
    switch (tool) {
        case ToolKind::Direct: return run_direct(instance, deps, ctx);
        case ToolKind::PoT: return run_pot(instance, deps, policy, ctx);
        case ToolKind::ThinkExecute:
            return run_think_execute(instance.kind, instance, deps, cache, ctx);
        case ToolKind::Scratchpad: return run_scratchpad(instance, deps, cfg, ctx);
    }
    throw std::logic_error("unknown tool kind");
}

} // namespace tabench
