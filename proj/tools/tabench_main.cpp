// tabench: tool-augmented puzzle reasoning harness CLI.
//
// Exit codes: 0 success/valid, 1 domain failure (invalid solution, failed
// cells, unsolvable), 2 usage error, 3 environment error (missing
// credential, interpreter, or input files).

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "tabench/config.hpp"
#include "tabench/decode.hpp"
#include "tabench/fixture_backend.hpp"
#include "tabench/oracle.hpp"
#include "tabench/puzzle.hpp"
#include "tabench/report.hpp"
#include "tabench/store.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;
constexpr int kExitEnv = 3;

std::string read_stream(std::istream& in) {
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string read_input(const std::string& path) {
    if (path == "-") return read_stream(std::cin);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return read_stream(in);
}

struct InstanceArgs {
    std::string kind_s;
    int n = 0;
    std::optional<uint64_t> seed;
    std::optional<int> river_capacity;
    std::string instance_file;
};

tabench::PuzzleInstance resolve_instance(const InstanceArgs& args,
                                         const tabench::HarnessConfig& cfg) {
    if (!args.instance_file.empty())
        return tabench::instance_from_json(nlohmann::json::parse(read_input(args.instance_file)));
    auto kind = tabench::puzzle_kind_from_string(args.kind_s);
    if (!kind) throw CLI::ValidationError("--kind", "unknown puzzle kind: " + args.kind_s);
    std::optional<int> cap = args.river_capacity;
    if (!cap && kind == tabench::PuzzleKind::River) cap = cfg.river_capacity_override;
    return tabench::make_instance(*kind, args.n, args.seed, cap, cfg.checker_allow_backward);
}

} // namespace

int main(int argc, char** argv) {
    using namespace tabench;

    CLI::App app{"tabench: puzzle environments, verifiers, oracle solvers, tool-framework "
                 "trials, and reports"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "Declarative config file (JSON); flags override it")
        ->envname("TABENCH_CONFIG");

    // generate
    auto* gen = app.add_subcommand("generate", "Emit a puzzle instance as JSON");
    InstanceArgs gen_args;
    gen->add_option("--kind", gen_args.kind_s, "hanoi|checker|river|blocks")->required();
    gen->add_option("--n", gen_args.n, "complexity parameter")->required();
    gen->add_option("--seed", gen_args.seed, "instance seed (blocks only)");
    gen->add_option("--river-capacity", gen_args.river_capacity,
                    "override the boat capacity schedule");

    // solve
    auto* solve = app.add_subcommand("solve", "Emit an oracle solution in the move grammar");
    InstanceArgs solve_args;
    solve->add_option("--kind", solve_args.kind_s, "hanoi|checker|river|blocks")->required();
    solve->add_option("--n", solve_args.n, "complexity parameter")->required();
    solve->add_option("--seed", solve_args.seed, "instance seed (blocks only)");
    solve->add_option("--river-capacity", solve_args.river_capacity,
                      "override the boat capacity schedule");
    uint64_t solve_cap = kDefaultBfsStateCap;
    solve->add_option("--state-cap", solve_cap, "search state cap");

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "Verify a move list; exit 0 iff valid");
    InstanceArgs verify_args;
    verify_cmd->add_option("--instance", verify_args.instance_file, "instance JSON file or -");
    verify_cmd->add_option("--kind", verify_args.kind_s, "hanoi|checker|river|blocks");
    verify_cmd->add_option("--n", verify_args.n, "complexity parameter");
    verify_cmd->add_option("--seed", verify_args.seed, "instance seed (blocks only)");
    verify_cmd->add_option("--river-capacity", verify_args.river_capacity,
                           "override the boat capacity schedule");
    std::string moves_path = "-";
    verify_cmd->add_option("--moves", moves_path, "move list file, or - for stdin (default)");

    // run
    auto* run = app.add_subcommand("run", "Execute an experiment plan against a store");
    std::string plan_path, store_path, backend_name = "scripted-fixture", cassette_path;
    int concurrency = 1;
    std::optional<uint64_t> limit;
    run->add_option("--plan", plan_path, "experiment plan JSON")->required();
    run->add_option("--store", store_path, "store directory (created if missing)")->required();
    run->add_option("--backend", backend_name, "live|replay|scripted-fixture")
        ->check(CLI::IsMember({"live", "replay", "scripted-fixture"}));
    run->add_option("--cassette", cassette_path,
                    "cassette file (required for replay; optional recording target otherwise)");
    run->add_option("--concurrency", concurrency, "parallel trial workers")->check(CLI::Range(1, 64));
    run->add_option("--limit", limit, "stop after appending this many new records");
    std::vector<std::string> interpreter;
    run->add_option("--interpreter", interpreter,
                    "sandbox interpreter argv (repeat the flag for extra args)");
    std::optional<int> run_river_capacity;
    run->add_option("--river-capacity", run_river_capacity,
                    "override the boat capacity schedule for river cells");
    run->footer("Live runs read the API key from the environment variable named by the model's\n"
                "endpoint profile (api_key_env; default config uses DEEPSEEK_API_KEY /\n"
                "DASHSCOPE_API_KEY).");

    // report
    auto* report = app.add_subcommand("report", "Render tables or CSV/JSON metrics from a store");
    std::string report_store, format_s = "table", view_s = "accuracy";
    report->add_option("--store", report_store, "store directory")->required();
    report->add_option("--format", format_s, "table|csv|json")
        ->check(CLI::IsMember({"table", "csv", "json"}));
    report->add_option("--view", view_s, "accuracy|scratchpad|tokens")
        ->check(CLI::IsMember({"accuracy", "scratchpad", "tokens"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        HarnessConfig cfg = config_path.empty() ? default_config() : load_config(config_path);

        if (gen->parsed()) {
            PuzzleInstance inst = resolve_instance(gen_args, cfg);
            std::cout << instance_to_json(inst).dump(2) << "\n";
            return kExitOk;
        }

        if (solve->parsed()) {
            PuzzleInstance inst = resolve_instance(solve_args, cfg);
            OracleResult result = solve_instance(inst, solve_cap);
            if (result.status == OracleResult::Status::Unsolvable) {
                std::cerr << "unsolvable: exhaustive search explored " << result.explored_states
                          << " states without reaching the goal\n";
                return kExitDomain;
            }
            if (result.status == OracleResult::Status::Exhausted) {
                std::cerr << "exhausted: state cap " << solve_cap
                          << " hit before completing the search\n";
                return kExitDomain;
            }
            std::cout << moves_to_text(*result.moves);
            return kExitOk;
        }

        if (verify_cmd->parsed()) {
            if (verify_args.instance_file.empty() && verify_args.kind_s.empty())
                throw CLI::ValidationError("verify", "provide --instance or --kind/--n");
            if (verify_args.instance_file == "-" && moves_path == "-")
                throw CLI::ValidationError("verify",
                                           "--instance and --moves cannot both read stdin");
            PuzzleInstance inst = resolve_instance(verify_args, cfg);
            std::string moves_text = read_input(moves_path);
            auto parsed = parse_moves_text(moves_text, inst.kind);
            if (!parsed) {
                std::cerr << "move list parse error: " << parsed.error() << "\n";
                return kExitUsage;
            }
            VerifyReport vr = verify(inst, parsed.value());
            std::cout << report_to_json(vr, inst).dump(2) << "\n";
            return vr.verdict == Verdict::Valid ? kExitOk : kExitDomain;
        }

        if (run->parsed()) {
            ExperimentPlan plan = load_plan(plan_path);
            ExecuteOptions options;
            options.config = cfg;
            if (!interpreter.empty()) options.config.sandbox.interpreter_command = interpreter;
            if (run_river_capacity) options.config.river_capacity_override = run_river_capacity;
            options.concurrency = concurrency;
            options.stop_after_records = limit;
            if (backend_name == "replay") {
                if (cassette_path.empty())
                    throw CLI::ValidationError("--cassette", "replay requires a cassette");
                options.backend = std::make_shared<ReplayBackend>(cassette_path);
            } else {
                BackendPtr base;
                if (backend_name == "scripted-fixture") {
                    base = make_fixture_backend(cfg);
                } else {
                    // One live backend per endpoint profile, dispatched by spec.
                    struct LiveDispatch : Backend {
                        HarnessConfig cfg;
                        std::map<std::string, BackendPtr> by_profile;
                        explicit LiveDispatch(HarnessConfig c) : cfg(std::move(c)) {
                            for (const auto& [name, profile] : cfg.endpoint_profiles)
                                by_profile[name] = std::make_shared<LiveBackend>(profile);
                        }
                        Result<ModelReply, BackendError> complete(const ModelSpec& spec,
                                                                  const PromptBundle& bundle,
                                                                  std::chrono::seconds deadline,
                                                                  const CallContext& ctx) override {
                            auto it = by_profile.find(spec.endpoint_profile);
                            if (it == by_profile.end())
                                return BackendError{BackendError::Kind::Transport, 0,
                                                    "unknown endpoint profile: " +
                                                        spec.endpoint_profile};
                            return it->second->complete(spec, bundle, deadline, ctx);
                        }
                    };
                    base = std::make_shared<LiveDispatch>(cfg);
                }
                options.backend =
                    cassette_path.empty() ? base : record_wrap(base, cassette_path);
            }
            ExecuteSummary summary = execute(plan, store_path, options);
            std::cout << "planned " << summary.planned << ", skipped " << summary.skipped
                      << " (already in store), executed " << summary.executed << " ("
                      << summary.succeeded << " succeeded, " << summary.failed << " failed)"
                      << (summary.interrupted ? ", interrupted by --limit" : "") << "\n";
            return summary.failed == 0 ? kExitOk : kExitDomain;
        }

        if (report->parsed()) {
            RunStore store(report_store, false);
            auto records = store.load_records();
            if (records.empty())
                std::cerr << "warning: store contains no records; reporting 0/0 cells\n";
            ReportOptions options;
            options.pairs = cfg.pairs;
            ReportFormat format = format_s == "csv" ? ReportFormat::Csv
                                  : format_s == "json" ? ReportFormat::Json
                                                       : ReportFormat::Table;
            if (view_s == "accuracy") {
                std::cout << accuracy_report(records, options, format);
            } else if (view_s == "scratchpad") {
                std::cout << scratchpad_usage_csv(records);
            } else {
                std::cout << token_breakdown_csv(records);
            }
            return kExitOk;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::string what = e.what();
        if (what.find("cannot open") != std::string::npos ||
            what.find("not found") != std::string::npos ||
            what.find("interpreter") != std::string::npos ||
            what.find("credential") != std::string::npos)
            return kExitEnv;
        return kExitDomain;
    }
    return kExitUsage;
}
