#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabench/backend.hpp"
#include "tabench/frameworks.hpp"
#include "tabench/sandbox.hpp"

namespace tabench {

/// LLM/LRM pairing used by the report's advantage marker. Explicit data,
/// never inferred from model names.
struct ModelPair {
    std::string llm;
    std::string lrm;
};

/// One declarative configuration file drives a run: endpoint profiles,
/// model specs, pairing map, sandbox policy, scratchpad parameters, and the
/// capacity schedule override. CLI flags override file values.
struct HarnessConfig {
    std::map<std::string, EndpointProfile> endpoint_profiles;
    std::vector<ModelSpec> models;
    std::vector<ModelPair> pairs;
    SandboxPolicy sandbox;
    ScratchpadConfig scratchpad;
    std::optional<int> river_capacity_override;
    bool checker_allow_backward = false;
    int64_t deadline_s = 1200;
    std::optional<std::string> template_dir;
    uint64_t bfs_state_cap = 5'000'000;
    uint64_t solvability_probe_cap = 200'000;

    const ModelSpec* find_model(const std::string& name) const;
    const EndpointProfile* find_profile(const std::string& name) const;
};

/// Built-in defaults: the four reference model specs with their pairing and
/// an "openai-compatible" endpoint profile placeholder.
HarnessConfig default_config();

/// Loads a config file and merges it over the defaults. Unknown keys are an
/// error (they are silent misconfiguration otherwise).
HarnessConfig load_config(const std::string& path);

HarnessConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const HarnessConfig& cfg);

} // namespace tabench
