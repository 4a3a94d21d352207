// SPDX-License-Identifier: Apache-2.0
#include "selfplan/core/prompt.hpp"

#include "selfplan/core/text.hpp"

#include <cassert>

namespace selfplan {

std::string render_choices(std::span<const Choice> choices) {
    std::string out;
    for (const auto& choice : choices) {
        if (!out.empty()) out += ' ';
        out += '(' + choice.label + ") " + choice.text;
    }
    return out;
}

std::vector<Choice> parse_choices(std::string_view text) {
    const auto s = text::trim(text);
    auto marker_at = [&](std::size_t i) {
        return i + 2 < s.size() && s[i] == '(' && s[i + 1] >= 'A' && s[i + 1] <= 'Z' && s[i + 2] == ')';
    };
    if (!marker_at(0)) return {};
    std::vector<Choice> out;
    std::size_t i = 0;
    while (i < s.size()) {
        Choice choice{std::string(1, s[i + 1]), {}};
        std::size_t j = i + 3;
        while (j < s.size() && !(marker_at(j) && (s[j - 1] == ' ' || s[j - 1] == '\t'))) ++j;
        choice.text = std::string(text::trim(s.substr(i + 3, j - i - 3)));
        if (choice.text.empty()) return {};
        for (const auto& prior : out) {
            if (prior.label == choice.label) return {};
        }
        out.push_back(std::move(choice));
        i = j;
    }
    return out;
}

std::string render_question(const QAPair& pair) {
    std::string out = pair.question;
    if (!pair.choices.empty()) out += "\nOptions: " + render_choices(pair.choices);
    if (pair.caption) out += "\nCaption: " + *pair.caption;
    return out;
}

std::string render_qa_block(const QAPair& pair) {
    std::string out = "Question: " + pair.question + "\n";
    if (!pair.choices.empty()) out += "Options: " + render_choices(pair.choices) + "\n";
    if (pair.caption) out += "Caption: " + *pair.caption + "\n";
    out += "Answer: " + pair.answer;
    return out;
}

std::string render_history(std::span<const Step> steps) {
    std::string out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto n = std::to_string(i + 1);
        const auto& step = steps[i];
        if (step.kind == StepKind::reflect) {
            out += "Reflection " + n + ": " + step.thought + "\n";
            out += "Action " + n + ": " + step.action.str() + "\n";
            continue;
        }
        out += "Thought " + n + ": " + step.thought + "\n";
        out += "Action " + n + ": " + step.action.str() + "\n";
        out += "Observation " + n + ": " + step.observation + "\n";
    }
    return out;
}

std::string render_prompt(const PromptContext& context, const SelectedTools& tools, std::span<const Step> history) {
    assert(!tools.empty());
    const auto action_count = tools.size() + 1;

    std::string out = "I expect you to excel as a proficient question answerer in the task.\n";
    out += "Task Name: " + context.task_name + "\n";
    out += "Task Description: " + context.task_description + "\n";
    out += text::replace_all(context.format_rules, "[action_num]", std::to_string(action_count)) + "\n";
    std::size_t index = 1;
    for (const auto& tool : tools.tools()) {
        out += "(" + std::to_string(index++) + ") " + tool.name + ": " + tool.definition + " Usage: " + tool.usage +
               "\n";
    }
    out += "(" + std::to_string(index) + ") " + std::string(kFinishCard) + "\n";
    out += "Question: " + context.question + "\n";
    out += render_history(history);
    return out;
}

std::string render_correct_reflection() {
    return "Thought: " + std::string(kCorrectReflectionThought) + "\nAction: " + std::string(kReflectAction) +
           "[CORRECT]";
}

std::string render_incorrect_reflection(std::string_view thought, std::string_view hint) {
    std::string out = "Thought: " + std::string(thought) + "\nAction: " + std::string(kReflectAction) + "[INCORRECT";
    if (!hint.empty()) out += ": " + std::string(hint);
    out += "]";
    return out;
}

} // namespace selfplan
