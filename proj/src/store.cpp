#include "tabench/store.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include <fcntl.h>
#include <unistd.h>

#include "tabench/hash.hpp"
#include "tabench/oracle.hpp"
#include "tabench/strings.hpp"

namespace tabench {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

ExperimentPlan plan_from_json(const json& j) {
    if (j.value("schema", "") != "v1") throw std::runtime_error("plan: unsupported schema");
    ExperimentPlan plan;
    plan.models = j.at("models").get<std::vector<std::string>>();
    plan.tools.clear();
    for (const auto& t : j.at("tools")) {
        auto tool = tool_kind_from_string(t.get<std::string>());
        if (!tool) throw std::runtime_error("plan: unknown tool " + t.get<std::string>());
        plan.tools.push_back(*tool);
    }
    for (const auto& k : j.at("kinds")) {
        auto kind = puzzle_kind_from_string(k.get<std::string>());
        if (!kind) throw std::runtime_error("plan: unknown kind " + k.get<std::string>());
        plan.kinds.push_back(*kind);
    }
    if (j.contains("n_values")) plan.n_values = j.at("n_values").get<std::vector<int>>();
    if (j.contains("trials")) plan.trials = j.at("trials").get<int>();
    if (plan.trials < 1) throw std::runtime_error("plan: trials must be >= 1");
    if (plan.models.empty() || plan.tools.empty() || plan.kinds.empty() || plan.n_values.empty())
        throw std::runtime_error("plan: the model/tool/kind/n cross-product must be non-empty");
    if (j.contains("seeds"))
        plan.seed_overrides = j.at("seeds").get<std::map<std::string, uint64_t>>();
    return plan;
}

json plan_to_json(const ExperimentPlan& plan) {
    json j;
    j["schema"] = "v1";
    j["models"] = plan.models;
    j["tools"] = json::array();
    for (auto t : plan.tools) j["tools"].push_back(to_string(t));
    j["kinds"] = json::array();
    for (auto k : plan.kinds) j["kinds"].push_back(to_string(k));
    j["n_values"] = plan.n_values;
    j["trials"] = plan.trials;
    j["seeds"] = plan.seed_overrides;
    return j;
}

ExperimentPlan load_plan(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open plan file: " + path);
    return plan_from_json(json::parse(in));
}

std::string cell_key(const std::string& model, ToolKind tool, PuzzleKind kind, int n, int trial) {
    return model + "|" + to_string(tool) + "|" + to_string(kind) + "|" + std::to_string(n) + "|" +
           std::to_string(trial);
}

uint64_t trial_seed(const std::string& model, ToolKind tool, PuzzleKind kind, int n, int trial) {
    return fnv1a64(cell_key(model, tool, kind, n, trial));
}

// ---------------------------------------------------------------------------
// RunRecord JSON
// ---------------------------------------------------------------------------

json RunRecord::to_json() const {
    json j;
    j["model"] = model;
    j["tool"] = to_string(tool);
    j["kind"] = to_string(kind);
    j["n"] = n;
    j["trial"] = trial;
    j["success"] = success;
    j["verify_verdict"] = verify_verdict;
    j["failure"] = failure;
    j["transcript"] = transcript_hash;
    j["prompt_tokens"] = tokens.prompt;
    j["output_tokens"] = tokens.output;
    if (tokens.thinking) j["thinking_tokens"] = *tokens.thinking;
    else j["thinking_tokens"] = nullptr;
    j["tokens_estimated"] = tokens_estimated;
    j["scratchpad_steps_used"] = scratchpad_steps_used;
    j["oracle_solvable"] = oracle_solvable;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    return j;
}

RunRecord RunRecord::from_json(const json& j) {
    RunRecord r;
    r.model = j.at("model").get<std::string>();
    auto tool = tool_kind_from_string(j.at("tool").get<std::string>());
    auto kind = puzzle_kind_from_string(j.at("kind").get<std::string>());
    if (!tool || !kind) throw std::runtime_error("record: unknown tool/kind");
    r.tool = *tool;
    r.kind = *kind;
    r.n = j.at("n").get<int>();
    r.trial = j.at("trial").get<int>();
    r.success = j.at("success").get<bool>();
    r.verify_verdict = j.at("verify_verdict").get<std::string>();
    r.failure = j.at("failure").get<std::string>();
    r.transcript_hash = j.at("transcript").get<std::string>();
    r.tokens.prompt = j.at("prompt_tokens").get<int64_t>();
    r.tokens.output = j.at("output_tokens").get<int64_t>();
    if (!j.at("thinking_tokens").is_null())
        r.tokens.thinking = j.at("thinking_tokens").get<int64_t>();
    r.tokens_estimated = j.at("tokens_estimated").get<bool>();
    r.scratchpad_steps_used = j.at("scratchpad_steps_used").get<int>();
    r.oracle_solvable = j.at("oracle_solvable").get<bool>();
    r.started_at = j.at("started_at").get<std::string>();
    r.finished_at = j.at("finished_at").get<std::string>();
    return r;
}

// ---------------------------------------------------------------------------
// RunStore
// ---------------------------------------------------------------------------

namespace {

std::string records_path(const std::string& dir) { return dir + "/records.jsonl"; }
std::string transcripts_dir(const std::string& dir) { return dir + "/transcripts"; }
std::string meta_dir(const std::string& dir) { return dir + "/meta"; }

std::string record_line(const RunRecord& record) {
    json body = record.to_json();
    json line;
    line["schema"] = "v1";
    line["record"] = body;
    line["crc"] = fnv1a64_hex(body.dump());
    return line.dump();
}

/// Atomic file write: temp + rename.
void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

} // namespace

RunStore::RunStore(std::string dir, bool create) : dir_(std::move(dir)) {
    if (create) {
        fs::create_directories(dir_);
        fs::create_directories(transcripts_dir(dir_));
        fs::create_directories(meta_dir(dir_));
    } else if (!fs::is_directory(dir_)) {
        throw std::runtime_error("store directory not found: " + dir_);
    }

    // Truncate a torn trailing line (a killed writer never completed it).
    std::string path = records_path(dir_);
    if (fs::exists(path)) {
        std::ifstream in(path, std::ios::binary);
        std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (!content.empty() && content.back() != '\n') {
            size_t last_nl = content.find_last_of('\n');
            size_t keep = last_nl == std::string::npos ? 0 : last_nl + 1;
            fs::resize_file(path, keep);
        }
    }

    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd_ < 0) throw std::runtime_error("cannot open store records file: " + path);
}

RunStore::~RunStore() {
    if (fd_ >= 0) {
        ::fsync(fd_);
        ::close(fd_);
    }
}

std::vector<RunRecord> RunStore::load_records() const {
    std::vector<RunRecord> records;
    std::ifstream in(records_path(dir_), std::ios::binary);
    if (!in) return records;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        std::string why;
        if (j.is_discarded() || !j.is_object() || !j.contains("record") || !j.contains("crc")) {
            why = "unparsable line";
        } else if (fnv1a64_hex(j.at("record").dump()) != j.at("crc").get<std::string>()) {
            why = "checksum mismatch";
        }
        if (!why.empty())
            throw std::runtime_error(
                "store corruption at records.jsonl line " + std::to_string(line_no) + " (" + why +
                "); refusing to resume. Repair by removing the damaged line (the record can be "
                "re-run) or start a fresh store directory.");
        records.push_back(RunRecord::from_json(j.at("record")));
    }
    return records;
}

void RunStore::append(const RunRecord& record, const json& transcript) {
    std::string transcript_body = transcript.dump();
    std::string line = record_line(record);
    line.push_back('\n');
    std::lock_guard lock(mu_);
    // Sidecar first so every persisted record's transcript reference resolves.
    fs::path tpath = fs::path(transcripts_dir(dir_)) / (record.transcript_hash + ".json");
    if (!fs::exists(tpath)) write_file_atomic(tpath, transcript_body);
    ssize_t n = ::write(fd_, line.data(), line.size());
    if (n != static_cast<ssize_t>(line.size()))
        throw std::runtime_error("short write to store records file");
    ::fsync(fd_);
}

json RunStore::load_transcript(const std::string& hash) const {
    std::ifstream in(fs::path(transcripts_dir(dir_)) / (hash + ".json"), std::ios::binary);
    if (!in) throw std::runtime_error("transcript not found: " + hash);
    return json::parse(in);
}

bool RunStore::has_transcript(const std::string& hash) const {
    return fs::exists(fs::path(transcripts_dir(dir_)) / (hash + ".json"));
}

void RunStore::put_pseudocode(PuzzleKind kind, const std::string& model,
                              const PseudocodeCache::Entry& entry) {
    json j;
    j["schema"] = "v1";
    j["kind"] = to_string(kind);
    j["model"] = model;
    j["pseudocode"] = entry.pseudocode;
    json step;
    step["prompt_hash"] = entry.meta_step.prompt_hash;
    step["raw_reply"] = entry.meta_step.raw_reply;
    if (entry.meta_step.thinking_text) step["thinking_text"] = *entry.meta_step.thinking_text;
    else step["thinking_text"] = nullptr;
    step["prompt_tokens"] = entry.meta_step.tokens.prompt;
    step["output_tokens"] = entry.meta_step.tokens.output;
    if (entry.meta_step.tokens.thinking) step["thinking_tokens"] = *entry.meta_step.tokens.thinking;
    else step["thinking_tokens"] = nullptr;
    step["tokens_estimated"] = entry.meta_step.tokens_estimated;
    step["latency_ms"] = entry.meta_step.latency_ms;
    j["meta_step"] = step;
    fs::path path = fs::path(meta_dir(dir_)) /
                    ("pseudocode_" + to_string(kind) + "_" + fnv1a64_hex(model) + ".json");
    std::lock_guard lock(mu_);
    if (!fs::exists(path)) write_file_atomic(path, j.dump());
}

std::optional<PseudocodeCache::Entry> RunStore::get_pseudocode(PuzzleKind kind,
                                                               const std::string& model) const {
    fs::path path = fs::path(meta_dir(dir_)) /
                    ("pseudocode_" + to_string(kind) + "_" + fnv1a64_hex(model) + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    json j = json::parse(in);
    PseudocodeCache::Entry entry;
    entry.pseudocode = j.at("pseudocode").get<std::string>();
    const auto& step = j.at("meta_step");
    entry.meta_step.role = "meta";
    entry.meta_step.template_id = "tae.meta";
    entry.meta_step.template_version = PromptKit::kVersion;
    entry.meta_step.prompt_hash = step.at("prompt_hash").get<std::string>();
    entry.meta_step.raw_reply = step.at("raw_reply").get<std::string>();
    if (!step.at("thinking_text").is_null())
        entry.meta_step.thinking_text = step.at("thinking_text").get<std::string>();
    entry.meta_step.tokens.prompt = step.at("prompt_tokens").get<int64_t>();
    entry.meta_step.tokens.output = step.at("output_tokens").get<int64_t>();
    if (!step.at("thinking_tokens").is_null())
        entry.meta_step.tokens.thinking = step.at("thinking_tokens").get<int64_t>();
    entry.meta_step.tokens_estimated = step.at("tokens_estimated").get<bool>();
    entry.meta_step.latency_ms = step.at("latency_ms").get<int64_t>();
    entry.meta_step.decoded_code = entry.pseudocode;
    return entry;
}

// ---------------------------------------------------------------------------
// execute
// ---------------------------------------------------------------------------

namespace {

struct Job {
    std::string model;
    ToolKind tool;
    PuzzleKind kind;
    int n;
    int trial;
};

/// Lazily computed river solvability verdicts shared across trials.
class SolvabilityProbe {
public:
    SolvabilityProbe(const HarnessConfig& config) : config_(config) {}

    bool solvable(const PuzzleInstance& inst) {
        if (inst.kind != PuzzleKind::River) return true;
        std::string key = std::to_string(inst.n) + "/" + std::to_string(inst.boat_capacity);
        {
            std::lock_guard lock(mu_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        OracleResult probe = bfs_solve(inst, config_.solvability_probe_cap);
        // Exhausted is not proof of unsolvability; only a completed search
        // may claim it.
        bool verdict = probe.status != OracleResult::Status::Unsolvable;
        std::lock_guard lock(mu_);
        cache_.emplace(key, verdict);
        return verdict;
    }

private:
    const HarnessConfig& config_;
    std::mutex mu_;
    std::map<std::string, bool> cache_;
};

} // namespace

ExecuteSummary execute(const ExperimentPlan& plan, const std::string& store_path,
                       const ExecuteOptions& options) {
    if (!options.backend) throw std::invalid_argument("execute: backend is required");
    const HarnessConfig& config = options.config;
    for (const auto& name : plan.models)
        if (!config.find_model(name))
            throw std::runtime_error("plan references unknown model: " + name);

    RunStore store(store_path, true);
    std::set<std::string> done;
    for (const auto& r : store.load_records()) done.insert(r.key());

    std::vector<Job> jobs;
    ExecuteSummary summary;
    for (const auto& model : plan.models)
        for (ToolKind tool : plan.tools)
            for (PuzzleKind kind : plan.kinds)
                for (int n : plan.n_values)
                    for (int trial = 0; trial < plan.trials; ++trial) {
                        ++summary.planned;
                        if (done.contains(cell_key(model, tool, kind, n, trial))) {
                            ++summary.skipped;
                            continue;
                        }
                        jobs.push_back(Job{model, tool, kind, n, trial});
                    }

    PromptKit kit(config.template_dir);
    PseudocodeCache cache;
    for (const auto& model : plan.models)
        for (PuzzleKind kind : plan.kinds)
            if (auto entry = store.get_pseudocode(kind, model))
                cache.put(kind, model, std::move(*entry));

    SolvabilityProbe probe(config);

    std::atomic<size_t> next_job{0};
    std::atomic<uint64_t> appended{0};
    std::atomic<bool> stopped{false};
    std::mutex summary_mu;
    std::vector<std::string> errors;

    auto worker = [&]() {
        while (!stopped.load()) {
            size_t i = next_job.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job& job = jobs[i];
            try {
                std::optional<uint64_t> seed;
                if (job.kind == PuzzleKind::Blocks) {
                    auto it = plan.seed_overrides.find(
                        cell_key(job.model, job.tool, job.kind, job.n, job.trial));
                    seed = it != plan.seed_overrides.end()
                               ? it->second
                               : trial_seed(job.model, job.tool, job.kind, job.n, job.trial);
                }
                PuzzleInstance inst =
                    make_instance(job.kind, job.n, seed,
                                  job.kind == PuzzleKind::River ? config.river_capacity_override
                                                                : std::nullopt,
                                  config.checker_allow_backward);

                RunRecord record;
                record.model = job.model;
                record.tool = job.tool;
                record.kind = job.kind;
                record.n = job.n;
                record.trial = job.trial;
                record.started_at = iso8601_now();
                record.oracle_solvable = probe.solvable(inst);

                FrameworkDeps deps{kit, options.backend, *config.find_model(job.model),
                                   std::chrono::seconds(config.deadline_s)};
                TrialContext ctx{job.model, job.trial};
                ToolTranscript transcript = run_tool(job.tool, inst, deps, config.sandbox,
                                                     config.scratchpad, cache, ctx);

                // Persist the shared pseudocode artifact before any record
                // that depends on it, so resume sees the identical entry.
                if (job.tool == ToolKind::ThinkExecute) {
                    if (auto entry = cache.peek(job.kind, job.model))
                        store.put_pseudocode(job.kind, job.model, *entry);
                }

                if (transcript.final_moves) {
                    VerifyReport vr = verify(inst, *transcript.final_moves);
                    record.verify_verdict = to_string(vr.verdict);
                    record.success = vr.verdict == Verdict::Valid;
                } else {
                    record.verify_verdict = "none";
                    record.success = false;
                }
                record.failure = transcript.failure.value_or("");
                // An unsolvable instance is the benchmark's defect, not the
                // model's; the cell is labeled accordingly.
                if (!record.oracle_solvable && !record.success)
                    record.failure = "oracle-unsolvable";
                record.tokens = transcript.totals;
                for (const auto& s : transcript.steps)
                    if (s.tokens_estimated) record.tokens_estimated = true;
                if (job.tool == ToolKind::Scratchpad)
                    record.scratchpad_steps_used = static_cast<int>(transcript.steps.size());
                record.finished_at = iso8601_now();
                record.transcript_hash = transcript.content_hash();

                if (options.stop_after_records &&
                    appended.load() >= *options.stop_after_records) {
                    stopped.store(true);
                    return;
                }
                store.append(record, transcript.to_json());
                appended.fetch_add(1);

                std::lock_guard lock(summary_mu);
                ++summary.executed;
                if (record.success) ++summary.succeeded;
                else ++summary.failed;
            } catch (const std::exception& e) {
                std::lock_guard lock(summary_mu);
                errors.push_back(std::string("cell ") +
                                 cell_key(job.model, job.tool, job.kind, job.n, job.trial) + ": " +
                                 e.what());
                stopped.store(true);
                return;
            }
        }
    };

    int workers = std::max(1, options.concurrency);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    if (!errors.empty()) throw std::runtime_error("execute failed: " + errors.front());
    summary.interrupted = stopped.load() && options.stop_after_records.has_value();
    return summary;
}

nlohmann::json store_canonical_records(const std::string& store_path) {
    RunStore store(store_path, false);
    auto records = store.load_records();
    std::sort(records.begin(), records.end(),
              [](const RunRecord& a, const RunRecord& b) { return a.key() < b.key(); });
    json out = json::array();
    for (const auto& r : records) {
        json j = r.to_json();
        j.erase("started_at");
        j.erase("finished_at");
        out.push_back(std::move(j));
    }
    return out;
}

} // namespace tabench
