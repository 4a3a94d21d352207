// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "selfplan/core/types.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace selfplan {

/// Planning format rules. `[action_num]` is replaced with the number of
/// listed actions (selected tools plus Finish).
inline constexpr std::string_view kDefaultFormatRules =
    "Solve a question-answering task with interleaving Thought, Action, and Observation steps. "
    "Thought can reason about the current situation, and Action can be [action_num] types:";

/// Line describing the reserved terminal action.
inline constexpr std::string_view kFinishCard =
    "Finish[answer], which returns the answer and finishes the task.";

/// Question text as shown to agents: the question, then Options and Caption
/// lines when present.
std::string render_question(const QAPair& pair);

/// Question/Options/Caption/Answer block used for few-shot examples.
std::string render_qa_block(const QAPair& pair);

/// "(A) West Virginia (B) Louisiana"
std::string render_choices(std::span<const Choice> choices);
/// Inverse of render_choices. Empty when the text does not start with a
/// "(X)" marker, a choice is blank, or a label repeats.
std::vector<Choice> parse_choices(std::string_view text);

/// `Thought i:/Action i:/Observation i:` lines per plan step and
/// `Reflection i:/Action i:` lines per reflect step, 1-indexed.
std::string render_history(std::span<const Step> steps);

/// Trajectory-synthesis prompt with the rendered history as scratchpad.
/// `tools` must be nonempty.
std::string render_prompt(const PromptContext& context, const SelectedTools& tools, std::span<const Step> history);

/// Canonical reflect-agent outputs.
std::string render_correct_reflection();
std::string render_incorrect_reflection(std::string_view thought, std::string_view hint);

inline constexpr std::string_view kCorrectReflectionThought =
    "The trajectory is consistent and the answer matches the reasoning.";

} // namespace selfplan
