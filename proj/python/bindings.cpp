// Python bindings for the harness core: instance construction, oracle
// solvers, verification, output decoding, and scripted tool-framework
// trials. Structured values cross the boundary as JSON-shaped dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"

#include "tabench/decode.hpp"
#include "tabench/frameworks.hpp"
#include "tabench/oracle.hpp"
#include "tabench/prompt.hpp"
#include "tabench/puzzle.hpp"
#include "tabench/sandbox.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

py::object json_to_py(const json& j) {
    py::module_ pyjson = py::module_::import("json");
    return pyjson.attr("loads")(j.dump());
}

tabench::PuzzleKind parse_kind(const std::string& kind) {
    auto k = tabench::puzzle_kind_from_string(kind);
    if (!k) throw py::value_error("unknown puzzle kind: " + kind);
    return *k;
}

tabench::PuzzleInstance build_instance(const std::string& kind, int n,
                                       std::optional<uint64_t> seed,
                                       std::optional<int> river_capacity) {
    return tabench::make_instance(parse_kind(kind), n, seed, river_capacity);
}

} // namespace

PYBIND11_MODULE(tabench, m) {
    m.doc() = "Tool-augmented puzzle reasoning harness: puzzle environments, verifiers, "
              "oracle solvers, output decoding, and tool-framework trial runners.";

    m.def(
        "make_instance",
        [](const std::string& kind, int n, std::optional<uint64_t> seed,
           std::optional<int> river_capacity) {
            return json_to_py(
                tabench::instance_to_json(build_instance(kind, n, seed, river_capacity)));
        },
        py::arg("kind"), py::arg("n"), py::arg("seed") = std::nullopt,
        py::arg("river_capacity") = std::nullopt,
        "Build the canonical puzzle instance as a dict (schema v1).");

    m.def(
        "solve",
        [](const std::string& kind, int n, std::optional<uint64_t> seed,
           std::optional<int> river_capacity, uint64_t state_cap) {
            auto inst = build_instance(kind, n, seed, river_capacity);
            auto result = tabench::solve_instance(inst, state_cap);
            py::dict out;
            out["status"] = tabench::to_string(result.status);
            out["explored_states"] = result.explored_states;
            out["moves"] = result.moves ? py::object(py::str(tabench::moves_to_text(*result.moves)))
                                        : py::object(py::none());
            return out;
        },
        py::arg("kind"), py::arg("n"), py::arg("seed") = std::nullopt,
        py::arg("river_capacity") = std::nullopt,
        py::arg("state_cap") = tabench::kDefaultBfsStateCap,
        "Oracle solution (closed form / constructive / BFS) in the move grammar.");

    m.def(
        "verify",
        [](py::object instance, const std::string& moves_text) {
            py::module_ pyjson = py::module_::import("json");
            std::string dumped =
                py::isinstance<py::str>(instance)
                    ? instance.cast<std::string>()
                    : pyjson.attr("dumps")(instance).cast<std::string>();
            auto inst = tabench::instance_from_json(json::parse(dumped));
            auto parsed = tabench::parse_moves_text(moves_text, inst.kind);
            if (!parsed) throw py::value_error("move list parse error: " + parsed.error());
            return json_to_py(tabench::report_to_json(tabench::verify(inst, parsed.value()), inst));
        },
        py::arg("instance"), py::arg("moves"),
        "Verify a move list against an instance dict (or JSON string).");

    m.def(
        "extract_moves",
        [](const std::string& text, const std::string& kind) {
            auto result = tabench::extract_moves(text, parse_kind(kind));
            py::dict out;
            if (result) {
                out["ok"] = true;
                out["moves"] = tabench::moves_to_text(result.value());
            } else {
                out["ok"] = false;
                out["error"] = tabench::to_string(result.error().category);
                out["context"] = result.error().context;
            }
            return out;
        },
        py::arg("text"), py::arg("kind"),
        "Scan free text for the canonical move grammar (last block wins).");

    m.def(
        "extract_code",
        [](const std::string& text) {
            auto result = tabench::extract_code(text);
            py::dict out;
            out["ok"] = static_cast<bool>(result);
            if (result) out["code"] = result.value();
            else out["error"] = tabench::to_string(result.error().category);
            return out;
        },
        py::arg("text"), "Contents of the last non-empty fenced code block.");

    m.def(
        "decode_scratchpad",
        [](const std::string& text, const std::string& kind) {
            auto result = tabench::decode_scratchpad(text, parse_kind(kind));
            py::dict out;
            out["ok"] = static_cast<bool>(result);
            if (result) {
                out["partial_answer"] = tabench::moves_to_text(result.value().partial_answer);
                out["scratchpad"] = result.value().next_scratchpad;
                out["finish"] = result.value().finish;
            } else {
                out["error"] = tabench::to_string(result.error().category);
            }
            return out;
        },
        py::arg("text"), py::arg("kind"),
        "Split one scratchpad-step reply into (partial answer, next scratchpad, finish).");

    m.def(
        "hanoi_solution",
        [](int n) { return tabench::moves_to_text(tabench::hanoi_closed_form(n)); }, py::arg("n"),
        "Closed-form Tower of Hanoi solution (length 2^n - 1).");

    m.def(
        "run_scripted_trial",
        [](const std::string& tool, const std::string& kind, int n,
           const std::vector<std::string>& replies, std::optional<uint64_t> seed, int t_max,
           int m_examples) {
            auto tk = tabench::tool_kind_from_string(tool);
            if (!tk) throw py::value_error("unknown tool: " + tool);
            auto inst = build_instance(kind, n, seed, std::nullopt);
            tabench::PromptKit kit;
            tabench::FrameworkDeps deps{kit, tabench::script(replies),
                                        tabench::ModelSpec{"scripted", false, 0, ""},
                                        std::chrono::seconds(60)};
            tabench::SandboxPolicy policy;
            tabench::ScratchpadConfig cfg{t_max, m_examples};
            tabench::PseudocodeCache cache;
            auto transcript = tabench::run_tool(*tk, inst, deps, policy, cfg, cache,
                                                tabench::TrialContext{"scripted", 0});
            py::dict out;
            out["transcript"] = json_to_py(transcript.to_json());
            if (transcript.final_moves) {
                auto report = tabench::verify(inst, *transcript.final_moves);
                out["verdict"] = tabench::to_string(report.verdict);
            } else {
                out["verdict"] = "none";
            }
            return out;
        },
        py::arg("tool"), py::arg("kind"), py::arg("n"), py::arg("replies"),
        py::arg("seed") = std::nullopt, py::arg("t_max") = 5, py::arg("m_examples") = 3,
        "Run one tool-framework trial against a scripted backend; returns the transcript "
        "and the verifier verdict.");

    m.def(
        "render_prompt",
        [](const std::string& framework, const std::string& kind, int n,
           std::optional<uint64_t> seed, const std::string& scratchpad) {
            tabench::PromptKit kit;
            auto inst = build_instance(kind, n, seed, std::nullopt);
            tabench::PromptBundle bundle;
            if (framework == "direct") bundle = kit.render_direct(inst);
            else if (framework == "pot") bundle = kit.render_pot(inst);
            else if (framework == "scratchpad")
                bundle = kit.render_scratchpad_step(inst, scratchpad, kit.scratchpad_description(),
                                                    kit.scratchpad_examples(inst.kind));
            else throw py::value_error("unknown framework: " + framework);
            py::dict out;
            out["system"] = bundle.system_text;
            out["user"] = bundle.user_text;
            out["template_id"] = bundle.template_id;
            out["template_version"] = bundle.template_version;
            out["hash"] = bundle.hash();
            return out;
        },
        py::arg("framework"), py::arg("kind"), py::arg("n"), py::arg("seed") = std::nullopt,
        py::arg("scratchpad") = std::string{},
        "Render a framework prompt bundle for an instance.");

    m.def(
        "run_code",
        [](const std::string& code, double wall_time_limit_s, int64_t output_byte_limit) {
            tabench::SandboxPolicy policy;
            policy.wall_time_limit_s = wall_time_limit_s;
            policy.output_byte_limit = output_byte_limit;
            auto outcome = tabench::run_code(code, policy);
            py::dict out;
            out["status"] = tabench::to_string(outcome.status);
            out["exit_code"] = outcome.exit_code;
            out["stdout"] = outcome.stdout_text;
            out["stderr"] = outcome.stderr_text;
            out["duration_ms"] = outcome.duration_ms;
            return out;
        },
        py::arg("code"), py::arg("wall_time_limit_s") = 30.0,
        py::arg("output_byte_limit") = int64_t{16 * 1024 * 1024},
        "Execute a program in the interpreter sandbox and capture the outcome.");
}
