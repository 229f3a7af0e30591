#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "tabench/backend.hpp"
#include "tabench/strings.hpp"

namespace tabench {

using nlohmann::json;

/// Bounds the number of in-flight requests per endpoint profile.
class InflightGate {
public:
    explicit InflightGate(int limit) : limit_(limit < 1 ? 1 : limit) {}

    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return active_ < limit_; });
        ++active_;
    }
    void release() {
        {
            std::lock_guard lock(mu_);
            --active_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int limit_;
    int active_ = 0;
};

LiveBackend::LiveBackend(EndpointProfile profile)
    : profile_(std::move(profile)), gate_(std::make_unique<InflightGate>(profile_.max_inflight)) {}

LiveBackend::~LiveBackend() = default;

Result<ModelReply, BackendError> LiveBackend::complete(const ModelSpec& spec,
                                                       const PromptBundle& bundle,
                                                       std::chrono::seconds deadline,
                                                       const CallContext&) {
    if (deadline.count() <= 0)
        throw std::invalid_argument("LiveBackend::complete: deadline must be positive");

    const char* key = std::getenv(profile_.api_key_env.c_str());
    if (!key || !*key)
        return BackendError{BackendError::Kind::AuthMissing, 0,
                            "credential environment variable " + profile_.api_key_env +
                                " is not set"};

    json body;
    body["model"] = spec.name;
    body["messages"] = json::array({json{{"role", "system"}, {"content", bundle.system_text}},
                                    json{{"role", "user"}, {"content", bundle.user_text}}});
    if (spec.max_output_tokens > 0) body["max_tokens"] = spec.max_output_tokens;
    for (auto it = profile_.extra_body.begin(); it != profile_.extra_body.end(); ++it)
        body[it.key()] = it.value();

    httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

    auto started = std::chrono::steady_clock::now();
    auto overall_deadline = started + deadline;

    gate_->acquire();
    struct GateRelease {
        InflightGate* g;
        ~GateRelease() { g->release(); }
    } release{gate_.get()};

    std::string payload = body.dump();
    BackendError last{BackendError::Kind::Transport, 0, "no attempt made"};
    for (int attempt = 0; attempt <= profile_.max_retries; ++attempt) {
        auto now = std::chrono::steady_clock::now();
        if (now >= overall_deadline)
            return BackendError{BackendError::Kind::Timeout, 0, "deadline exceeded"};
        auto remaining =
            std::chrono::duration_cast<std::chrono::seconds>(overall_deadline - now);
        if (remaining.count() < 1) remaining = std::chrono::seconds(1);

        httplib::Client client(profile_.base_url);
        client.set_connection_timeout(std::min<time_t>(remaining.count(), 30), 0);
        client.set_read_timeout(remaining.count(), 0);
        client.set_write_timeout(std::min<time_t>(remaining.count(), 60), 0);

        auto res = client.Post(profile_.path, headers, payload, "application/json");
        if (!res) {
            last = BackendError{BackendError::Kind::Transport, 0,
                                "transport failure: " + httplib::to_string(res.error())};
        } else if (res->status == 429 || res->status >= 500) {
            last = BackendError{BackendError::Kind::Provider, res->status,
                                "provider returned status " + std::to_string(res->status)};
        } else if (res->status != 200) {
            return BackendError{BackendError::Kind::Provider, res->status,
                                "provider returned status " + std::to_string(res->status) + ": " +
                                    res->body.substr(0, 300)};
        } else {
            json parsed = json::parse(res->body, nullptr, false);
            if (parsed.is_discarded())
                return BackendError{BackendError::Kind::Provider, res->status,
                                    "provider returned unparsable JSON"};
            ModelReply reply;
            try {
                reply = parse_chat_completion(parsed, profile_.usage_adapter);
            } catch (const std::exception& e) {
                return BackendError{BackendError::Kind::Provider, res->status,
                                    std::string("unexpected response shape: ") + e.what()};
            }
            reply.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::steady_clock::now() - started)
                                   .count();
            return reply;
        }
        if (attempt < profile_.max_retries) {
            auto backoff = std::chrono::milliseconds(500LL << attempt);
            if (std::chrono::steady_clock::now() + backoff >= overall_deadline)
                return BackendError{BackendError::Kind::Timeout, 0,
                                    "deadline exceeded during backoff: " + last.message};
            std::this_thread::sleep_for(backoff);
        }
    }
    return last;
}

} // namespace tabench
