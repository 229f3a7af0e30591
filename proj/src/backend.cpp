#include "tabench/backend.hpp"

#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "tabench/hash.hpp"
#include "tabench/strings.hpp"

namespace tabench {

using nlohmann::json;

std::string to_string(BackendError::Kind k) {
    switch (k) {
        case BackendError::Kind::Timeout: return "timeout";
        case BackendError::Kind::Transport: return "transport";
        case BackendError::Kind::Provider: return "provider";
        case BackendError::Kind::AuthMissing: return "auth-missing";
        case BackendError::Kind::ScriptExhausted: return "script-exhausted";
        case BackendError::Kind::CassetteMiss: return "cassette-miss";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// ScriptedBackend
// ---------------------------------------------------------------------------

ScriptedBackend::ScriptedBackend(std::vector<std::string> replies) {
    for (auto& r : replies) replies_.push_back(Reply{std::move(r), std::nullopt});
}

ScriptedBackend::ScriptedBackend(std::vector<Reply> replies)
    : replies_(replies.begin(), replies.end()) {}

size_t ScriptedBackend::remaining() const {
    std::lock_guard lock(mu_);
    return replies_.size();
}

Result<ModelReply, BackendError> ScriptedBackend::complete(const ModelSpec&,
                                                           const PromptBundle& bundle,
                                                           std::chrono::seconds,
                                                           const CallContext&) {
    Reply next;
    {
        std::lock_guard lock(mu_);
        if (replies_.empty())
            return BackendError{BackendError::Kind::ScriptExhausted, 0,
                                "scripted backend ran out of replies"};
        next = std::move(replies_.front());
        replies_.pop_front();
    }
    ModelReply reply;
    reply.output_text = std::move(next.output_text);
    reply.thinking_text = std::move(next.thinking_text);
    reply.tokens.prompt = estimate_tokens(bundle.system_text) + estimate_tokens(bundle.user_text);
    reply.tokens.output = estimate_tokens(reply.output_text);
    if (reply.thinking_text) reply.tokens.thinking = estimate_tokens(*reply.thinking_text);
    reply.tokens_estimated = true;
    reply.latency_ms = 0;
    return reply;
}

BackendPtr script(std::vector<std::string> replies) {
    return std::make_shared<ScriptedBackend>(std::move(replies));
}

// ---------------------------------------------------------------------------
// Cassettes
// ---------------------------------------------------------------------------

std::string cassette_key(const ModelSpec& spec, const PromptBundle& bundle,
                         const CallContext& ctx) {
    std::string material = spec.name;
    material.push_back('\x1f');
    material += bundle.system_text;
    material.push_back('\x1f');
    material += bundle.user_text;
    material.push_back('\x1f');
    material += ctx.tag;
    return fnv1a64_hex(material);
}

namespace {

json reply_to_json(const ModelReply& r) {
    json j;
    j["output_text"] = r.output_text;
    if (r.thinking_text) j["thinking_text"] = *r.thinking_text;
    else j["thinking_text"] = nullptr;
    j["prompt_tokens"] = r.tokens.prompt;
    j["output_tokens"] = r.tokens.output;
    if (r.tokens.thinking) j["thinking_tokens"] = *r.tokens.thinking;
    else j["thinking_tokens"] = nullptr;
    j["tokens_estimated"] = r.tokens_estimated;
    j["latency_ms"] = r.latency_ms;
    j["truncated"] = r.truncated;
    return j;
}

ModelReply reply_from_json(const json& j) {
    ModelReply r;
    r.output_text = j.at("output_text").get<std::string>();
    if (!j.at("thinking_text").is_null()) r.thinking_text = j.at("thinking_text").get<std::string>();
    r.tokens.prompt = j.at("prompt_tokens").get<int64_t>();
    r.tokens.output = j.at("output_tokens").get<int64_t>();
    if (!j.at("thinking_tokens").is_null())
        r.tokens.thinking = j.at("thinking_tokens").get<int64_t>();
    r.tokens_estimated = j.at("tokens_estimated").get<bool>();
    r.latency_ms = j.at("latency_ms").get<int64_t>();
    r.truncated = j.at("truncated").get<bool>();
    return r;
}

} // namespace

RecordingBackend::RecordingBackend(BackendPtr inner, std::string cassette_path)
    : inner_(std::move(inner)), path_(std::move(cassette_path)) {}

Result<ModelReply, BackendError> RecordingBackend::complete(const ModelSpec& spec,
                                                            const PromptBundle& bundle,
                                                            std::chrono::seconds deadline,
                                                            const CallContext& ctx) {
    auto reply = inner_->complete(spec, bundle, deadline, ctx);
    if (!reply) return reply;
    json line;
    line["schema"] = "v1";
    line["key"] = cassette_key(spec, bundle, ctx);
    line["request"] = {{"model", spec.name},
                       {"prompt_hash", bundle.hash()},
                       {"tag", ctx.tag}};
    line["reply"] = reply_to_json(reply.value());
    {
        std::lock_guard lock(mu_);
        std::ofstream out(path_, std::ios::app | std::ios::binary);
        if (!out) return BackendError{BackendError::Kind::Transport, 0,
                                      "cannot open cassette for append: " + path_};
        out << line.dump() << '\n';
    }
    return reply;
}

ReplayBackend::ReplayBackend(const std::string& cassette_path) {
    std::ifstream in(cassette_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open cassette: " + cassette_path);
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line);
        entries_[j.at("key").get<std::string>()] = reply_from_json(j.at("reply"));
    }
}

Result<ModelReply, BackendError> ReplayBackend::complete(const ModelSpec& spec,
                                                         const PromptBundle& bundle,
                                                         std::chrono::seconds,
                                                         const CallContext& ctx) {
    auto it = entries_.find(cassette_key(spec, bundle, ctx));
    if (it == entries_.end())
        return BackendError{BackendError::Kind::CassetteMiss, 0,
                            "no recorded reply for request (model=" + spec.name +
                                ", tag=" + ctx.tag + ")"};
    return it->second;
}

BackendPtr record_wrap(BackendPtr inner, const std::string& cassette_path) {
    return std::make_shared<RecordingBackend>(std::move(inner), cassette_path);
}

// ---------------------------------------------------------------------------
// Chat-completions parsing (adapter-mapped usage channels)
// ---------------------------------------------------------------------------

ModelReply parse_chat_completion(const nlohmann::json& body, const std::string& adapter) {
    ModelReply reply;
    const auto& choice = body.at("choices").at(0);
    const auto& message = choice.at("message");
    reply.output_text = message.value("content", "");
    if (message.contains("reasoning_content") && message.at("reasoning_content").is_string())
        reply.thinking_text = message.at("reasoning_content").get<std::string>();
    reply.truncated = choice.value("finish_reason", "") == "length";

    if (body.contains("usage") && body.at("usage").is_object()) {
        const auto& usage = body.at("usage");
        reply.tokens.prompt = usage.value("prompt_tokens", int64_t{0});
        int64_t completion = usage.value("completion_tokens", int64_t{0});
        std::optional<int64_t> reasoning;
        if (usage.contains("completion_tokens_details") &&
            usage.at("completion_tokens_details").is_object()) {
            const auto& details = usage.at("completion_tokens_details");
            if (details.contains("reasoning_tokens") && details.at("reasoning_tokens").is_number())
                reasoning = details.at("reasoning_tokens").get<int64_t>();
        }
        // "qwen" responses surface reasoning under output_tokens_details.
        if (!reasoning && usage.contains("output_tokens_details") &&
            usage.at("output_tokens_details").is_object()) {
            const auto& details = usage.at("output_tokens_details");
            if (details.contains("reasoning_tokens") && details.at("reasoning_tokens").is_number())
                reasoning = details.at("reasoning_tokens").get<int64_t>();
        }
        if (reasoning) {
            reply.tokens.thinking = *reasoning;
            reply.tokens.output = completion >= *reasoning ? completion - *reasoning : completion;
        } else {
            reply.tokens.output = completion;
            // Thinking stays absent unless a reasoning channel was reported;
            // adapters never conflate the two.
            if (reply.thinking_text && (adapter == "deepseek" || adapter == "qwen")) {
                reply.tokens.thinking = estimate_tokens(*reply.thinking_text);
                reply.tokens_estimated = true;
            }
        }
    } else {
        reply.tokens.output = estimate_tokens(reply.output_text);
        if (reply.thinking_text) reply.tokens.thinking = estimate_tokens(*reply.thinking_text);
        reply.tokens_estimated = true;
    }
    return reply;
}

} // namespace tabench
