#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tabench {

struct SandboxPolicy {
    std::vector<std::string> interpreter_command = {"python3"}; // overridden by config
    double wall_time_limit_s = 30.0;
    int64_t output_byte_limit = 16 * 1024 * 1024;
    std::string script_filename = "prog.py";
    std::string temp_root; // empty: system temp dir
};

struct ExecOutcome {
    enum class Status { Ok, NonzeroExit, TimedOut, OutputTruncated };
    Status status = Status::Ok;
    int exit_code = 0;
    std::string stdout_text;
    std::string stderr_text;
    bool stdout_truncated = false;
    bool stderr_truncated = false;
    int64_t duration_ms = 0;
};

std::string to_string(ExecOutcome::Status s);

/// Runs `code` under the policy's interpreter in a fresh temporary working
/// directory. Program failures come back as data (status, exit code,
/// captured streams); only harness-level faults throw (missing interpreter
/// binary, temp dir creation failure). The wall-clock limit kills the whole
/// process group; stdout/stderr are captured up to the byte limit each and
/// flagged truncated beyond it. The child environment is scrubbed to a
/// minimal PATH (best-effort network denial, not kernel isolation).
ExecOutcome run_code(const std::string& code, const SandboxPolicy& policy);

} // namespace tabench
