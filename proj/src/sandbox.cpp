#include "tabench/sandbox.hpp"

#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

namespace tabench {

namespace fs = std::filesystem;

std::string to_string(ExecOutcome::Status s) {
    switch (s) {
        case ExecOutcome::Status::Ok: return "ok";
        case ExecOutcome::Status::NonzeroExit: return "nonzero-exit";
        case ExecOutcome::Status::TimedOut: return "timed-out";
        case ExecOutcome::Status::OutputTruncated: return "output-truncated";
    }
    return "?";
}

namespace {

struct Pipe {
    int fds[2] = {-1, -1};
    Pipe() {
        if (pipe(fds) != 0) throw std::runtime_error("pipe() failed");
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    void close_read() {
        if (fds[0] >= 0) ::close(fds[0]);
        fds[0] = -1;
    }
    void close_write() {
        if (fds[1] >= 0) ::close(fds[1]);
        fds[1] = -1;
    }
};

struct Capture {
    std::string data;
    bool truncated = false;
    bool open = true;

    void feed(const char* buf, ssize_t len, int64_t limit) {
        int64_t room = limit - static_cast<int64_t>(data.size());
        if (room > 0) data.append(buf, static_cast<size_t>(std::min<int64_t>(len, room)));
        if (len > room) truncated = true;
    }
};

} // namespace

ExecOutcome run_code(const std::string& code, const SandboxPolicy& policy) {
    if (code.empty()) throw std::invalid_argument("run_code: code must be non-empty");
    if (policy.interpreter_command.empty())
        throw std::invalid_argument("run_code: interpreter_command must be non-empty");
    if (policy.wall_time_limit_s <= 0 || policy.output_byte_limit <= 0)
        throw std::invalid_argument("run_code: limits must be positive");

    fs::path root = policy.temp_root.empty() ? fs::temp_directory_path() : fs::path(policy.temp_root);
    std::string tmpl = (root / "tabench-exec-XXXXXX").string();
    std::vector<char> tmpl_buf(tmpl.begin(), tmpl.end());
    tmpl_buf.push_back('\0');
    if (!mkdtemp(tmpl_buf.data()))
        throw std::runtime_error(std::string("mkdtemp failed: ") + std::strerror(errno));
    fs::path workdir(tmpl_buf.data());

    struct WorkdirGuard {
        fs::path p;
        ~WorkdirGuard() {
            std::error_code ec;
            fs::remove_all(p, ec); // best effort
        }
    } guard{workdir};

    fs::path script = workdir / policy.script_filename;
    {
        std::ofstream out(script, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write sandbox script: " + script.string());
        out << code;
    }

    Pipe out_pipe, err_pipe, status_pipe;
    // The status pipe reports exec failure from the child: CLOEXEC makes it
    // close silently on successful exec.
    fcntl(status_pipe.fds[1], F_SETFD, FD_CLOEXEC);

    std::vector<std::string> argv_s = policy.interpreter_command;
    argv_s.push_back(script.string());
    std::vector<char*> argv;
    for (auto& a : argv_s) argv.push_back(a.data());
    argv.push_back(nullptr);

    // Minimal environment: PATH for the interpreter plus stable Python I/O
    // settings. Proxy/credential variables never reach the child.
    std::vector<std::string> env_s = {
        "PATH=/usr/local/bin:/usr/bin:/bin",
        "PYTHONDONTWRITEBYTECODE=1",
        "PYTHONIOENCODING=utf-8",
        "HOME=" + workdir.string(),
    };
    std::vector<char*> envp;
    for (auto& e : env_s) envp.push_back(e.data());
    envp.push_back(nullptr);

    auto started = std::chrono::steady_clock::now();
    pid_t pid = fork();
    if (pid < 0) throw std::runtime_error("fork() failed");
    if (pid == 0) {
        setpgid(0, 0);
        if (chdir(workdir.c_str()) != 0) _exit(125);
        dup2(out_pipe.fds[1], STDOUT_FILENO);
        dup2(err_pipe.fds[1], STDERR_FILENO);
        int devnull = open("/dev/null", O_RDONLY);
        if (devnull >= 0) dup2(devnull, STDIN_FILENO);
        out_pipe.close_read();
        err_pipe.close_read();
        status_pipe.close_read();
        execve(argv[0], argv.data(), envp.data());
        // Fall back to PATH lookup when the command is not an absolute path.
        execvpe(argv[0], argv.data(), envp.data());
        int err = errno;
        ssize_t ignored = write(status_pipe.fds[1], &err, sizeof(err));
        (void)ignored;
        _exit(127);
    }

    out_pipe.close_write();
    err_pipe.close_write();
    status_pipe.close_write();

    ExecOutcome outcome;
    Capture out_cap, err_cap;
    bool timed_out = false;
    int exec_errno = 0;
    bool exec_failed = false;

    auto deadline = started + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                  std::chrono::duration<double>(policy.wall_time_limit_s));

    char buf[65536];
    while (out_cap.open || err_cap.open || status_pipe.fds[0] >= 0) {
        struct pollfd fds[3];
        nfds_t nfds = 0;
        int out_idx = -1, err_idx = -1, status_idx = -1;
        if (out_cap.open) {
            out_idx = static_cast<int>(nfds);
            fds[nfds++] = {out_pipe.fds[0], POLLIN, 0};
        }
        if (err_cap.open) {
            err_idx = static_cast<int>(nfds);
            fds[nfds++] = {err_pipe.fds[0], POLLIN, 0};
        }
        if (status_pipe.fds[0] >= 0) {
            status_idx = static_cast<int>(nfds);
            fds[nfds++] = {status_pipe.fds[0], POLLIN, 0};
        }

        auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            timed_out = true;
            kill(-pid, SIGKILL);
            break;
        }
        int wait_ms = static_cast<int>(
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
        if (wait_ms < 1) wait_ms = 1;
        if (wait_ms > 50) wait_ms = 50;

        int rc = poll(fds, nfds, wait_ms);
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (rc == 0) continue;

        auto drain = [&](int idx, Pipe& pipe, Capture& cap) {
            if (idx < 0 || !(fds[idx].revents & (POLLIN | POLLHUP))) return;
            ssize_t n = read(pipe.fds[0], buf, sizeof(buf));
            if (n > 0) {
                cap.feed(buf, n, policy.output_byte_limit);
            } else {
                cap.open = false;
                pipe.close_read();
            }
        };
        drain(out_idx, out_pipe, out_cap);
        drain(err_idx, err_pipe, err_cap);
        if (status_idx >= 0 && (fds[static_cast<size_t>(status_idx)].revents & (POLLIN | POLLHUP))) {
            ssize_t n = read(status_pipe.fds[0], &exec_errno, sizeof(exec_errno));
            if (n == sizeof(exec_errno)) exec_failed = true;
            if (n <= 0 || exec_failed) status_pipe.close_read();
        }
    }

    if (timed_out) {
        // Keep draining briefly so the kill is observable in the captures.
        out_pipe.close_read();
        err_pipe.close_read();
    }

    int wstatus = 0;
    waitpid(pid, &wstatus, 0);
    // Reap any process-group stragglers.
    kill(-pid, SIGKILL);

    outcome.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - started)
                              .count();
    outcome.stdout_text = std::move(out_cap.data);
    outcome.stderr_text = std::move(err_cap.data);
    outcome.stdout_truncated = out_cap.truncated;
    outcome.stderr_truncated = err_cap.truncated;

    if (exec_failed)
        throw std::runtime_error("sandbox interpreter could not be executed (" +
                                 policy.interpreter_command[0] +
                                 "): " + std::strerror(exec_errno));

    if (timed_out) {
        outcome.status = ExecOutcome::Status::TimedOut;
        outcome.exit_code = -1;
    } else if (WIFEXITED(wstatus) && WEXITSTATUS(wstatus) != 0) {
        outcome.status = ExecOutcome::Status::NonzeroExit;
        outcome.exit_code = WEXITSTATUS(wstatus);
    } else if (!WIFEXITED(wstatus)) {
        outcome.status = ExecOutcome::Status::NonzeroExit;
        outcome.exit_code = -WTERMSIG(wstatus);
    } else if (outcome.stdout_truncated || outcome.stderr_truncated) {
        outcome.status = ExecOutcome::Status::OutputTruncated;
    } else {
        outcome.status = ExecOutcome::Status::Ok;
    }
    return outcome;
}

} // namespace tabench
