#pragma once

#include <map>
#include <string>

#include "tabench/backend.hpp"
#include "tabench/config.hpp"

namespace tabench {

/// Deterministic oracle-driven model stand-in for demos, cassette fixtures
/// and tests. It reconstructs the puzzle instance from the call-context tag,
/// solves it with the reference oracles, and formats a reply appropriate to
/// the tool framework that asked. Models mapped to the "weak" profile fail a
/// per-cell deterministic subset of trials with varied failure modes (no
/// answer, broken programs, malformed scratchpad JSON, illegal moves), which
/// exercises every report path including the LRM-advantage markers.
class FixtureBackend : public Backend {
public:
    /// profile per model name: "strong" (always correct) or "weak".
    FixtureBackend(std::map<std::string, std::string> model_profiles, HarnessConfig config);

    Result<ModelReply, BackendError> complete(const ModelSpec& spec, const PromptBundle& bundle,
                                              std::chrono::seconds deadline,
                                              const CallContext& ctx) override;

private:
    std::map<std::string, std::string> profiles_;
    HarnessConfig config_;
};

/// Fixture backend with profiles derived from the config pairing map: each
/// pair's LLM is weak and its LRM strong; unpaired models are strong.
BackendPtr make_fixture_backend(const HarnessConfig& config);

} // namespace tabench
