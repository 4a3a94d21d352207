// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace selfplan {

struct ProcessSpec {
    std::vector<std::string> argv;
    std::optional<std::string> working_dir;
    std::chrono::milliseconds timeout{0};  // zero = no limit
    std::size_t output_cap = 1 << 20;      // bytes kept from merged stdout/stderr
};

struct ProcessResult {
    int exit_code = -1;            // valid when exited normally
    bool exited = false;
    bool timed_out = false;
    int term_signal = 0;
    std::string output;            // stdout and stderr, interleaved
    bool output_truncated = false;
};

/// Runs a child process in its own process group with stdin closed and
/// stdout/stderr merged into one pipe. On timeout the whole group is killed.
/// Throws IoError when the process cannot be spawned.
ProcessResult run_process(const ProcessSpec& spec);

} // namespace selfplan
