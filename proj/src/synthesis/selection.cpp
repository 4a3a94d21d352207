// SPDX-License-Identifier: Apache-2.0
#include "selfplan/synthesis/selection.hpp"

#include "selfplan/core/text.hpp"

#include <cctype>

namespace selfplan {

UnknownTool::UnknownTool(const std::string& name) : Error("unknown tool '" + name + "'"), name_(name) {}

WrongCount::WrongCount(std::size_t got, std::size_t expected)
    : Error("selected " + std::to_string(got) + " distinct tools, expected " + std::to_string(expected)) {}

std::string render_tool_selection_prompt(const TaskInfo& task, const ToolLibrary& library, std::size_t select_count,
                                         const std::string& correction) {
    const auto n = std::to_string(select_count);
    std::string out =
        "To successfully complete a complex task, the collaborative effort of three types of agents is typically "
        "required:\n"
        "1. Plan Agent. This agent is used to plan the specific execution process of the benchmark, solving a given "
        "task by determining the order in which other expert language models are invoked;\n"
        "2. Tool Agent. This agent is employed to decide how to use a specific tool when addressing a task. Tools "
        "encompass interactive tools within the task environment as well as external tools or models. The Tool Agent "
        "includes various tools that can be flexibly chosen;\n"
        "3. Reflect Agent. This agent reflects on historical information and answers to assess whether the response "
        "aligns with the provided query.\n"
        "Above all, the Tool Agent includes many tools that can be flexibly selected. Now your task is to select " +
        n +
        " tools from the Tool Library for solving a given task. Note that all tools are based on language models, and "
        "their inputs and outputs must be text. You only need to provide the names and descriptions of the tools in "
        "order, without any additional output.\n"
        "The following is the given task name and description, and you need to choose " +
        n +
        " corresponding tools from the Tool Library according to the above rules in the format of one line, one "
        "tool.\n";
    out += "Task Name: " + task.name + "\n";
    out += "Task Description: " + task.description + "\n";
    out += "Tool Library:\n";
    for (const auto& tool : library.tools()) {
        out += tool.name + ": " + tool.definition + " Usage: " + tool.usage + "\n";
    }
    if (!correction.empty()) {
        out += "Note: your previous answer was invalid (" + correction + "). Answer with exactly " + n +
               " distinct tool names from the Tool Library, one per line.\n";
    }
    return out;
}

std::vector<std::string> parse_tool_lines(std::string_view text) {
    std::vector<std::string> out;
    for (auto raw : text::split_lines(text)) {
        auto line = text::trim(raw);
        // list markers: "1.", "2)", "-", "*", "**"
        std::size_t i = 0;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
        if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) line = text::trim(line.substr(i + 1));
        while (!line.empty() && (line[0] == '-' || line[0] == '*' || line[0] == ' ')) line.remove_prefix(1);
        line = text::trim(line);
        if (line.empty()) continue;
        std::size_t n = 0;
        while (n < line.size() && (std::isalnum(static_cast<unsigned char>(line[n])) || line[n] == '_')) ++n;
        out.emplace_back(n == 0 ? line : line.substr(0, n));
    }
    return out;
}

SelectedTools resolve_selection(std::string_view completion, const ToolLibrary& library, std::size_t select_count) {
    std::vector<std::string> names;
    for (const auto& name : parse_tool_lines(completion)) {
        const auto* spec = library.find(name);
        if (!spec) throw UnknownTool(name);
        bool seen = false;
        for (const auto& n : names) seen = seen || n == spec->name;
        if (!seen) names.push_back(spec->name);
    }
    if (names.size() != select_count) throw WrongCount(names.size(), select_count);
    return SelectedTools::from_names(library, names, select_count);
}

SelectedTools select_tools(Backend& backend, const ToolLibrary& library, const TaskInfo& task,
                           std::size_t select_count, int max_reprompts) {
    if (select_count == 0 || select_count > library.size()) {
        throw InvalidRecord("cannot select " + std::to_string(select_count) + " tools from a library of " +
                            std::to_string(library.size()));
    }
    std::string correction;
    for (int attempt = 0;; ++attempt) {
        CompletionRequest request{render_tool_selection_prompt(task, library, select_count, correction), {}};
        request.overrides.stop_sequences = std::vector<std::string>{};
        const auto completion = backend.complete(request);
        try {
            return resolve_selection(completion, library, select_count);
        } catch (const UnknownTool& e) {
            if (attempt >= max_reprompts) throw;
            correction = e.what();
        } catch (const WrongCount& e) {
            if (attempt >= max_reprompts) throw;
            correction = e.what();
        }
    }
}

} // namespace selfplan
