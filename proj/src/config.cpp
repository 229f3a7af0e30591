#include "tabench/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace tabench {

using nlohmann::json;

const ModelSpec* HarnessConfig::find_model(const std::string& name) const {
    for (const auto& m : models)
        if (m.name == name) return &m;
    return nullptr;
}

const EndpointProfile* HarnessConfig::find_profile(const std::string& name) const {
    auto it = endpoint_profiles.find(name);
    return it == endpoint_profiles.end() ? nullptr : &it->second;
}

HarnessConfig default_config() {
    HarnessConfig cfg;

    EndpointProfile deepseek;
    deepseek.base_url = "https://api.deepseek.com";
    deepseek.api_key_env = "DEEPSEEK_API_KEY";
    deepseek.usage_adapter = "deepseek";
    cfg.endpoint_profiles["deepseek"] = deepseek;

    EndpointProfile qwen;
    qwen.base_url = "https://dashscope-intl.aliyuncs.com/compatible-mode";
    qwen.api_key_env = "DASHSCOPE_API_KEY";
    qwen.usage_adapter = "qwen";
    cfg.endpoint_profiles["qwen"] = qwen;

    EndpointProfile qwen_thinking = qwen;
    qwen_thinking.extra_body = json{{"enable_thinking", true}};
    cfg.endpoint_profiles["qwen-thinking"] = qwen_thinking;

    cfg.models = {
        ModelSpec{"deepseek-chat", false, 8 * 1024, "deepseek"},
        ModelSpec{"deepseek-reasoner", true, 64 * 1024, "deepseek"},
        ModelSpec{"qwen3-32b", false, 32 * 1024, "qwen"},
        ModelSpec{"qwen3-32b-thinking", true, 32 * 1024, "qwen-thinking"},
    };
    cfg.pairs = {
        ModelPair{"deepseek-chat", "deepseek-reasoner"},
        ModelPair{"qwen3-32b", "qwen3-32b-thinking"},
    };
    return cfg;
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.contains(it.key()))
            throw std::runtime_error("config: unknown key \"" + it.key() + "\" in " + where);
}

EndpointProfile profile_from_json(const json& j, const EndpointProfile& base) {
    check_keys(j,
               {"base_url", "path", "api_key_env", "usage_adapter", "extra_body", "max_inflight",
                "max_retries"},
               "endpoint profile");
    EndpointProfile p = base;
    if (j.contains("base_url")) p.base_url = j.at("base_url").get<std::string>();
    if (j.contains("path")) p.path = j.at("path").get<std::string>();
    if (j.contains("api_key_env")) p.api_key_env = j.at("api_key_env").get<std::string>();
    if (j.contains("usage_adapter")) p.usage_adapter = j.at("usage_adapter").get<std::string>();
    if (j.contains("extra_body")) p.extra_body = j.at("extra_body");
    if (j.contains("max_inflight")) p.max_inflight = j.at("max_inflight").get<int>();
    if (j.contains("max_retries")) p.max_retries = j.at("max_retries").get<int>();
    return p;
}

json profile_to_json(const EndpointProfile& p) {
    json j;
    j["base_url"] = p.base_url;
    j["path"] = p.path;
    j["api_key_env"] = p.api_key_env;
    j["usage_adapter"] = p.usage_adapter;
    j["extra_body"] = p.extra_body;
    j["max_inflight"] = p.max_inflight;
    j["max_retries"] = p.max_retries;
    return j;
}

} // namespace

HarnessConfig config_from_json(const json& j) {
    check_keys(j,
               {"schema", "endpoint_profiles", "models", "pairs", "sandbox", "scratchpad",
                "river_capacity_override", "checker_allow_backward", "deadline_s", "template_dir",
                "bfs_state_cap", "solvability_probe_cap"},
               "config root");
    if (j.contains("schema") && j.at("schema").get<std::string>() != "v1")
        throw std::runtime_error("config: unsupported schema");

    HarnessConfig cfg = default_config();
    if (j.contains("endpoint_profiles")) {
        cfg.endpoint_profiles.clear();
        for (auto it = j.at("endpoint_profiles").begin(); it != j.at("endpoint_profiles").end();
             ++it)
            cfg.endpoint_profiles[it.key()] = profile_from_json(it.value(), EndpointProfile{});
    }
    if (j.contains("models")) {
        cfg.models.clear();
        for (const auto& m : j.at("models")) {
            check_keys(m, {"name", "thinking_enabled", "max_output_tokens", "endpoint_profile"},
                       "model spec");
            ModelSpec spec;
            spec.name = m.at("name").get<std::string>();
            spec.thinking_enabled = m.value("thinking_enabled", false);
            spec.max_output_tokens = m.value("max_output_tokens", int64_t{0});
            spec.endpoint_profile = m.value("endpoint_profile", std::string{});
            cfg.models.push_back(std::move(spec));
        }
    }
    if (j.contains("pairs")) {
        cfg.pairs.clear();
        for (const auto& p : j.at("pairs")) {
            check_keys(p, {"llm", "lrm"}, "pair");
            cfg.pairs.push_back(ModelPair{p.at("llm").get<std::string>(),
                                          p.at("lrm").get<std::string>()});
        }
    }
    if (j.contains("sandbox")) {
        const auto& s = j.at("sandbox");
        check_keys(s,
                   {"interpreter_command", "wall_time_limit_s", "output_byte_limit",
                    "script_filename", "temp_root"},
                   "sandbox");
        if (s.contains("interpreter_command"))
            cfg.sandbox.interpreter_command =
                s.at("interpreter_command").get<std::vector<std::string>>();
        if (s.contains("wall_time_limit_s"))
            cfg.sandbox.wall_time_limit_s = s.at("wall_time_limit_s").get<double>();
        if (s.contains("output_byte_limit"))
            cfg.sandbox.output_byte_limit = s.at("output_byte_limit").get<int64_t>();
        if (s.contains("script_filename"))
            cfg.sandbox.script_filename = s.at("script_filename").get<std::string>();
        if (s.contains("temp_root")) cfg.sandbox.temp_root = s.at("temp_root").get<std::string>();
    }
    if (j.contains("scratchpad")) {
        const auto& s = j.at("scratchpad");
        check_keys(s, {"t_max", "m_examples", "llm_decode_fallback"}, "scratchpad");
        if (s.contains("t_max")) cfg.scratchpad.t_max = s.at("t_max").get<int>();
        if (s.contains("m_examples")) cfg.scratchpad.m_examples = s.at("m_examples").get<int>();
        if (s.contains("llm_decode_fallback"))
            cfg.scratchpad.llm_decode_fallback = s.at("llm_decode_fallback").get<bool>();
    }
    if (j.contains("river_capacity_override") && !j.at("river_capacity_override").is_null())
        cfg.river_capacity_override = j.at("river_capacity_override").get<int>();
    if (j.contains("checker_allow_backward"))
        cfg.checker_allow_backward = j.at("checker_allow_backward").get<bool>();
    if (j.contains("deadline_s")) cfg.deadline_s = j.at("deadline_s").get<int64_t>();
    if (j.contains("template_dir") && !j.at("template_dir").is_null())
        cfg.template_dir = j.at("template_dir").get<std::string>();
    if (j.contains("bfs_state_cap")) cfg.bfs_state_cap = j.at("bfs_state_cap").get<uint64_t>();
    if (j.contains("solvability_probe_cap"))
        cfg.solvability_probe_cap = j.at("solvability_probe_cap").get<uint64_t>();
    return cfg;
}

nlohmann::json config_to_json(const HarnessConfig& cfg) {
    json j;
    j["schema"] = "v1";
    json profiles = json::object();
    for (const auto& [name, p] : cfg.endpoint_profiles) profiles[name] = profile_to_json(p);
    j["endpoint_profiles"] = profiles;
    j["models"] = json::array();
    for (const auto& m : cfg.models)
        j["models"].push_back(json{{"name", m.name},
                                   {"thinking_enabled", m.thinking_enabled},
                                   {"max_output_tokens", m.max_output_tokens},
                                   {"endpoint_profile", m.endpoint_profile}});
    j["pairs"] = json::array();
    for (const auto& p : cfg.pairs) j["pairs"].push_back(json{{"llm", p.llm}, {"lrm", p.lrm}});
    j["sandbox"] = json{{"interpreter_command", cfg.sandbox.interpreter_command},
                        {"wall_time_limit_s", cfg.sandbox.wall_time_limit_s},
                        {"output_byte_limit", cfg.sandbox.output_byte_limit},
                        {"script_filename", cfg.sandbox.script_filename},
                        {"temp_root", cfg.sandbox.temp_root}};
    j["scratchpad"] = json{{"t_max", cfg.scratchpad.t_max},
                           {"m_examples", cfg.scratchpad.m_examples},
                           {"llm_decode_fallback", cfg.scratchpad.llm_decode_fallback}};
    if (cfg.river_capacity_override) j["river_capacity_override"] = *cfg.river_capacity_override;
    else j["river_capacity_override"] = nullptr;
    j["checker_allow_backward"] = cfg.checker_allow_backward;
    j["deadline_s"] = cfg.deadline_s;
    if (cfg.template_dir) j["template_dir"] = *cfg.template_dir;
    else j["template_dir"] = nullptr;
    j["bfs_state_cap"] = cfg.bfs_state_cap;
    j["solvability_probe_cap"] = cfg.solvability_probe_cap;
    return j;
}

HarnessConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j = json::parse(in);
    return config_from_json(j);
}

} // namespace tabench
