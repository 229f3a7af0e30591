#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tabench/prompt.hpp"
#include "tabench/result.hpp"

namespace tabench {

struct ModelSpec {
    std::string name;
    bool thinking_enabled = false;
    int64_t max_output_tokens = 0;
    std::string endpoint_profile;
};

struct TokenCounts {
    int64_t prompt = 0;
    int64_t output = 0;
    std::optional<int64_t> thinking; // absent when the provider reports none

    TokenCounts& operator+=(const TokenCounts& o) {
        prompt += o.prompt;
        output += o.output;
        if (o.thinking) thinking = thinking.value_or(0) + *o.thinking;
        return *this;
    }
    bool operator==(const TokenCounts&) const = default;
};

struct ModelReply {
    std::string output_text;
    std::optional<std::string> thinking_text;
    TokenCounts tokens;
    bool tokens_estimated = false;
    int64_t latency_ms = 0;
    bool truncated = false;
};

struct BackendError {
    enum class Kind { Timeout, Transport, Provider, AuthMissing, ScriptExhausted, CassetteMiss };
    Kind kind = Kind::Transport;
    int status = 0;
    std::string message;
};

std::string to_string(BackendError::Kind k);

/// Extra request identity carried alongside the prompt so record/replay can
/// distinguish repeated identical prompts (e.g. trial 3 vs trial 4 of the
/// same cell, which a live model may answer differently).
struct CallContext {
    std::string tag; // e.g. "model=x,tool=pot,kind=hanoi,n=3,trial=2,step=1"
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual Result<ModelReply, BackendError> complete(const ModelSpec& spec,
                                                      const PromptBundle& bundle,
                                                      std::chrono::seconds deadline,
                                                      const CallContext& ctx = {}) = 0;
};

using BackendPtr = std::shared_ptr<Backend>;

/// Deterministic test backend: pops one queued reply per call, in order.
/// Exhaustion is an error (it signals a broken test fixture).
class ScriptedBackend : public Backend {
public:
    struct Reply {
        std::string output_text;
        std::optional<std::string> thinking_text;
    };

    explicit ScriptedBackend(std::vector<std::string> replies);
    explicit ScriptedBackend(std::vector<Reply> replies);

    Result<ModelReply, BackendError> complete(const ModelSpec& spec, const PromptBundle& bundle,
                                              std::chrono::seconds deadline,
                                              const CallContext& ctx) override;

    size_t remaining() const;

private:
    mutable std::mutex mu_;
    std::deque<Reply> replies_;
};

/// Convenience factory mirroring the scripted backend's role as `script()`.
BackendPtr script(std::vector<std::string> replies);

/// Key for one cassette entry: request content hash + call context tag.
std::string cassette_key(const ModelSpec& spec, const PromptBundle& bundle,
                         const CallContext& ctx);

/// Wraps an inner backend and appends every (request, reply) pair to a JSONL
/// cassette file.
class RecordingBackend : public Backend {
public:
    RecordingBackend(BackendPtr inner, std::string cassette_path);
    Result<ModelReply, BackendError> complete(const ModelSpec& spec, const PromptBundle& bundle,
                                              std::chrono::seconds deadline,
                                              const CallContext& ctx) override;

private:
    BackendPtr inner_;
    std::string path_;
    std::mutex mu_;
};

/// Serves recorded replies by cassette key; a miss is an error.
class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(const std::string& cassette_path);
    Result<ModelReply, BackendError> complete(const ModelSpec& spec, const PromptBundle& bundle,
                                              std::chrono::seconds deadline,
                                              const CallContext& ctx) override;

private:
    std::map<std::string, ModelReply> entries_;
};

BackendPtr record_wrap(BackendPtr inner, const std::string& cassette_path);

struct EndpointProfile {
    std::string base_url;                  // e.g. "https://api.example.com"
    std::string path = "/v1/chat/completions";
    std::string api_key_env = "TABENCH_API_KEY";
    std::string usage_adapter = "openai"; // "openai" | "deepseek" | "qwen"
    nlohmann::json extra_body = nlohmann::json::object();
    int max_inflight = 4;
    int max_retries = 3;
};

/// Chat-completions HTTP client. One self-contained request per call (the
/// harness never relies on provider-side dialogue state); transient
/// transport failures and 429/5xx retry with exponential backoff.
class LiveBackend : public Backend {
public:
    explicit LiveBackend(EndpointProfile profile);
    ~LiveBackend() override;
    Result<ModelReply, BackendError> complete(const ModelSpec& spec, const PromptBundle& bundle,
                                              std::chrono::seconds deadline,
                                              const CallContext& ctx) override;

private:
    EndpointProfile profile_;
    std::unique_ptr<class InflightGate> gate_;
};

/// Maps a provider usage/message payload onto (output, thinking) channels.
/// Missing thinking stays absent, never zero.
ModelReply parse_chat_completion(const nlohmann::json& body, const std::string& adapter);

} // namespace tabench
