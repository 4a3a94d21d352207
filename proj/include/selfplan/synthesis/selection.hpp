// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "selfplan/backend/backend.hpp"
#include "selfplan/core/error.hpp"
#include "selfplan/core/types.hpp"

#include <string>
#include <vector>

namespace selfplan {

class UnknownTool : public Error {
public:
    explicit UnknownTool(const std::string& name);
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class WrongCount : public Error {
public:
    WrongCount(std::size_t got, std::size_t expected);
};

/// Tool-selection prompt. `correction`, when nonempty, is appended as a
/// note about the previous invalid answer.
std::string render_tool_selection_prompt(const TaskInfo& task, const ToolLibrary& library, std::size_t select_count,
                                         const std::string& correction = {});

/// Leading tool name of each nonempty line, with list markers stripped.
std::vector<std::string> parse_tool_lines(std::string_view text);

/// Resolves a selection answer against the library. Throws UnknownTool for
/// the first unmatched line and WrongCount when the distinct names differ
/// from `select_count`.
SelectedTools resolve_selection(std::string_view completion, const ToolLibrary& library, std::size_t select_count);

/// Asks `backend` for `select_count` tools, re-prompting up to
/// `max_reprompts` times with a correction note. Rethrows the last
/// UnknownTool or WrongCount when every attempt fails.
SelectedTools select_tools(Backend& backend, const ToolLibrary& library, const TaskInfo& task,
                           std::size_t select_count, int max_reprompts = 3);

} // namespace selfplan
