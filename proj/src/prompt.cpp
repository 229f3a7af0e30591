#include "tabench/prompt.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "tabench/hash.hpp"
#include "tabench/prompt_templates.hpp"

namespace tabench {

std::string PromptBundle::hash() const {
    return fnv1a64_hex(system_text + '\x1f' + user_text);
}

std::string substitute_placeholders(const std::string& tmpl,
                                    const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    size_t pos = 0;
    while (pos < tmpl.size()) {
        size_t open = tmpl.find("{{", pos);
        if (open == std::string::npos) {
            out.append(tmpl, pos, std::string::npos);
            break;
        }
        out.append(tmpl, pos, open - pos);
        size_t close = tmpl.find("}}", open + 2);
        if (close == std::string::npos)
            throw std::runtime_error("unterminated placeholder in template");
        std::string name = tmpl.substr(open + 2, close - open - 2);
        auto it = values.find(name);
        if (it == values.end())
            throw std::runtime_error("unresolved placeholder: {{" + name + "}}");
        out += it->second;
        pos = close + 2;
    }
    return out;
}

PromptKit::PromptKit(std::optional<std::string> override_dir) {
    for (size_t i = 0; i < detail::kEmbeddedTemplateCount; ++i)
        templates_[detail::kEmbeddedTemplates[i].id] = detail::kEmbeddedTemplates[i].text;
    if (override_dir) {
        namespace fs = std::filesystem;
        if (!fs::is_directory(*override_dir))
            throw std::runtime_error("template override dir not found: " + *override_dir);
        for (const auto& entry : fs::directory_iterator(*override_dir)) {
            if (!entry.is_regular_file()) continue;
            std::string stem = entry.path().filename().string();
            size_t at = stem.find('@');
            if (at == std::string::npos) continue;
            std::ifstream in(entry.path(), std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            templates_[stem.substr(0, at)] = ss.str();
        }
    }
}

const std::string& PromptKit::template_text(const std::string& id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw std::runtime_error("unknown template id: " + id);
    return it->second;
}

std::string PromptKit::instance_text(const PuzzleInstance& instance) const {
    std::map<std::string, std::string> values;
    values["n"] = std::to_string(instance.n);
    values["initial"] = state_to_text(instance.initial_state, instance);
    values["goal"] = state_to_text(instance.goal_state, instance);
    if (instance.kind == PuzzleKind::River)
        values["capacity"] = std::to_string(instance.boat_capacity);
    if (instance.kind == PuzzleKind::Blocks) {
        std::string names;
        for (size_t i = 0; i < instance.block_names.size(); ++i) {
            if (i) names += ", ";
            names += instance.block_names[i];
        }
        values["blocks"] = names;
    }
    return substitute_placeholders(template_text("instance." + to_string(instance.kind)), values);
}

ScratchpadDescription PromptKit::scratchpad_description() const {
    return ScratchpadDescription{template_text("scratchpad.description")};
}

namespace {

ScratchpadExample example_from_json(const nlohmann::json& j) {
    ScratchpadExample ex;
    ex.n = j.at("n").get<int>();
    if (j.contains("seed") && !j.at("seed").is_null()) ex.seed = j.at("seed").get<uint64_t>();
    for (const auto& step : j.at("steps")) {
        ScratchpadExampleStep s;
        s.answer = step.at("answer").get<std::string>();
        s.scratchpad = step.at("scratchpad").get<std::string>();
        s.finish = step.at("finish").get<bool>();
        ex.steps.push_back(std::move(s));
    }
    return ex;
}

std::string render_example_block(const PromptKit& kit, PuzzleKind kind,
                                 const ScratchpadExample& ex, int ordinal) {
    PuzzleInstance inst = make_instance(kind, ex.n, ex.seed);
    std::ostringstream os;
    os << "Example " << ordinal << ":\n";
    os << kit.instance_text(inst) << "\n";
    std::string scratchpad; // S_1 is empty
    for (size_t t = 0; t < ex.steps.size(); ++t) {
        const auto& step = ex.steps[t];
        os << "Step " << (t + 1) << " scratchpad input: " << nlohmann::json(scratchpad).dump()
           << "\n";
        nlohmann::json reply;
        reply["partial_answer"] = step.answer;
        reply["scratchpad"] = step.scratchpad;
        reply["finish"] = step.finish;
        os << "Step " << (t + 1) << " output: " << reply.dump() << "\n";
        scratchpad = step.scratchpad;
    }
    return os.str();
}

} // namespace

InContextExampleSet PromptKit::scratchpad_examples(PuzzleKind kind, int m) const {
    InContextExampleSet set;
    set.kind = kind;
    if (m <= 0) return set;
    auto parsed = nlohmann::json::parse(template_text("scratchpad_examples." + to_string(kind)));
    for (const auto& j : parsed) {
        if (static_cast<int>(set.examples.size()) >= m) break;
        set.examples.push_back(example_from_json(j));
    }
    return set;
}

PromptBundle PromptKit::render_direct(const PuzzleInstance& instance) const {
    PromptBundle b;
    b.template_id = "direct";
    b.template_version = kVersion;
    b.system_text = substitute_placeholders(
        template_text("direct.system"),
        {{"rules", template_text("rules." + to_string(instance.kind))}});
    b.user_text = substitute_placeholders(template_text("direct.user"),
                                          {{"instance", instance_text(instance)}});
    return b;
}

PromptBundle PromptKit::render_pot(const PuzzleInstance& instance) const {
    PromptBundle b;
    b.template_id = "pot";
    b.template_version = kVersion;
    b.system_text = substitute_placeholders(
        template_text("pot.system"),
        {{"rules", template_text("rules." + to_string(instance.kind))}});
    b.user_text = substitute_placeholders(template_text("pot.user"),
                                          {{"instance", instance_text(instance)}});
    return b;
}

PromptBundle PromptKit::render_think_execute_meta(PuzzleKind kind) const {
    PromptBundle b;
    b.template_id = "tae.meta";
    b.template_version = kVersion;
    b.system_text = template_text("tae.meta.system");
    b.user_text = substitute_placeholders(
        template_text("tae.meta.user"),
        {{"rules", template_text("rules." + to_string(kind))},
         {"examples", template_text("tae.examples." + to_string(kind))}});
    return b;
}

PromptBundle PromptKit::render_think_execute_run(PuzzleKind kind, const std::string& pseudocode,
                                                 const PuzzleInstance& instance) const {
    if (kind != instance.kind)
        throw std::invalid_argument("render_think_execute_run: kind mismatch");
    PromptBundle b;
    b.template_id = "tae.run";
    b.template_version = kVersion;
    b.system_text = substitute_placeholders(
        template_text("tae.run.system"),
        {{"rules", template_text("rules." + to_string(kind))}});
    b.user_text = substitute_placeholders(
        template_text("tae.run.user"),
        {{"pseudocode", pseudocode}, {"instance", instance_text(instance)}});
    return b;
}

PromptBundle PromptKit::render_scratchpad_rescue(const std::string& raw_output) const {
    PromptBundle b;
    b.template_id = "scratchpad.rescue";
    b.template_version = kVersion;
    b.system_text = template_text("scratchpad.rescue.system");
    b.user_text = substitute_placeholders(template_text("scratchpad.rescue.user"),
                                          {{"raw_output", raw_output}});
    return b;
}

PromptBundle PromptKit::render_scratchpad_step(const PuzzleInstance& instance,
                                               const std::string& scratchpad,
                                               const ScratchpadDescription& d,
                                               const InContextExampleSet& e) const {
    if (e.kind != instance.kind)
        throw std::invalid_argument("render_scratchpad_step: example set kind mismatch");
    PromptBundle b;
    b.template_id = "scratchpad.step";
    b.template_version = kVersion;

    std::string examples;
    for (size_t i = 0; i < e.examples.size(); ++i)
        examples += render_example_block(*this, e.kind, e.examples[i], static_cast<int>(i) + 1);
    if (examples.empty()) examples = "(no examples)\n";

    b.system_text = substitute_placeholders(
        template_text("scratchpad.system"),
        {{"description", d.text},
         {"examples", examples},
         {"rules", template_text("rules." + to_string(instance.kind))}});
    // The scratchpad state is embedded as a JSON string literal, so any
    // delimiter-looking content round-trips unambiguously.
    b.user_text = substitute_placeholders(
        template_text("scratchpad.user"),
        {{"instance", instance_text(instance)},
         {"scratchpad_json", nlohmann::json(scratchpad).dump()}});
    return b;
}

} // namespace tabench
