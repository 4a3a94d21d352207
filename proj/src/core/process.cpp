// SPDX-License-Identifier: Apache-2.0
#include "selfplan/core/process.hpp"

#include "selfplan/core/error.hpp"

#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

namespace selfplan {

namespace {

using Clock = std::chrono::steady_clock;

void close_fd(int& fd) {
    if (fd >= 0) ::close(fd);
    fd = -1;
}

} // namespace

ProcessResult run_process(const ProcessSpec& spec) {
    if (spec.argv.empty()) throw IoError("run_process: empty argv");

    int pipe_fds[2];
    if (::pipe(pipe_fds) != 0) throw IoError(std::string("pipe: ") + std::strerror(errno));

    std::vector<char*> argv;
    argv.reserve(spec.argv.size() + 1);
    for (const auto& arg : spec.argv) argv.push_back(const_cast<char*>(arg.c_str()));
    argv.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) {
        ::close(pipe_fds[0]);
        ::close(pipe_fds[1]);
        throw IoError(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
        ::dup2(pipe_fds[1], STDOUT_FILENO);
        ::dup2(pipe_fds[1], STDERR_FILENO);
        ::close(pipe_fds[0]);
        ::close(pipe_fds[1]);
        if (spec.working_dir && ::chdir(spec.working_dir->c_str()) != 0) _exit(126);
        ::execvp(argv[0], argv.data());
        const char msg[] = "exec failed\n";
        [[maybe_unused]] auto n = ::write(STDERR_FILENO, msg, sizeof(msg) - 1);
        _exit(127);
    }
    ::setpgid(pid, pid);
    ::close(pipe_fds[1]);
    int read_fd = pipe_fds[0];

    ProcessResult result;
    const bool limited = spec.timeout.count() > 0;
    const auto deadline = Clock::now() + spec.timeout;
    char buffer[4096];

    while (read_fd >= 0) {
        int wait_ms = -1;
        if (limited) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
            if (left <= 0) {
                result.timed_out = true;
                break;
            }
            wait_ms = static_cast<int>(left);
        }
        pollfd pfd{read_fd, POLLIN, 0};
        int ready = ::poll(&pfd, 1, wait_ms);
        if (ready < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (ready == 0) continue;
        auto n = ::read(read_fd, buffer, sizeof(buffer));
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) {
            close_fd(read_fd);
            break;
        }
        const auto room = spec.output_cap > result.output.size() ? spec.output_cap - result.output.size() : 0;
        const auto take = std::min<std::size_t>(room, static_cast<std::size_t>(n));
        result.output.append(buffer, take);
        if (take < static_cast<std::size_t>(n)) result.output_truncated = true;
    }

    if (result.timed_out) ::kill(-pid, SIGKILL);
    close_fd(read_fd);

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (WIFEXITED(status)) {
        result.exited = true;
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.term_signal = WTERMSIG(status);
    }
    return result;
}

} // namespace selfplan
