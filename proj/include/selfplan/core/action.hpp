// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "selfplan/core/types.hpp"

#include <string>
#include <string_view>

namespace selfplan {

/// Extracts the first `Name[param]` occurrence in `text`. The name is the
/// identifier directly before '[', the param is everything up to the
/// matching ']' (inner brackets must balance). Throws MalformedAction.
Action parse_action(std::string_view text);

/// Thought and full action of one Meta-Agent completion, e.g.
/// "Thought 2: ...\nAction 2: Lookup[river]".
struct StepCompletion {
    std::string thought;
    Action action;
};

/// Accepts numbered or unnumbered `Thought:`/`Action:` labels. Without an
/// Action label the whole text is searched for an action.
StepCompletion parse_step_completion(std::string_view text);

/// Plan-agent output: a thought and an action name only.
struct PlanCompletion {
    std::string thought;
    std::string action_name;
};

/// Reads the identifier after the Action label. A trailing `[...]` emitted by
/// an untuned model is ignored so the parameter never leaks into dispatch.
PlanCompletion parse_plan_completion(std::string_view text);

/// Canonical plan-agent output: "Thought: <t>\nAction: <name>". Square
/// brackets in the thought are rewritten as parentheses so the output never
/// carries an action call.
std::string render_plan_output(std::string_view thought, std::string_view action_name);

/// Tool-agent prompt: plan prompt + plan output + "\nAction Input:".
std::string render_tool_instruction(std::string_view plan_prompt, std::string_view plan_output);

/// Tool-agent completion to parameter: trims, and unwraps `Name[param]` when
/// the model echoed the full call for `action_name`.
std::string clean_tool_param(std::string_view completion, std::string_view action_name);

/// Observation injected after a completion that carried no usable action.
inline constexpr std::string_view kInvalidActionObservation =
    "Error: invalid action format. Use Tool[input].";

/// Observation recorded on the Finish step.
inline constexpr std::string_view kFinishObservation = "Episode finished.";

/// Scratchpad continuation shown to the model after a malformed completion.
std::string render_repair(std::string_view raw_completion, std::size_t step_number);

} // namespace selfplan
