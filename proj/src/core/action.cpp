// SPDX-License-Identifier: Apache-2.0
#include "selfplan/core/action.hpp"

#include "selfplan/core/error.hpp"
#include "selfplan/core/text.hpp"

#include <cctype>

namespace selfplan {

namespace {

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

struct Label {
    std::size_t start = std::string_view::npos;  // first char of the label word
    std::size_t content = std::string_view::npos; // first char after ':'
    bool found() const { return start != std::string_view::npos; }
};

// Finds `word` at the start of a line (leading blanks allowed), optionally
// followed by a step number, then ':'. "Action Input:" is not an Action label.
Label find_label(std::string_view s, std::string_view word, std::size_t from = 0) {
    std::size_t line_start = from;
    while (line_start <= s.size()) {
        std::size_t i = line_start;
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        if (text::istarts_with(s.substr(i), word)) {
            std::size_t j = i + word.size();
            while (j < s.size() && s[j] == ' ') ++j;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            while (j < s.size() && s[j] == ' ') ++j;
            if (j < s.size() && s[j] == ':') return Label{i, j + 1};
        }
        auto nl = s.find('\n', line_start);
        if (nl == std::string_view::npos) break;
        line_start = nl + 1;
    }
    return {};
}

} // namespace

Action parse_action(std::string_view text) {
    std::size_t pos = 0;
    while (true) {
        auto open = text.find('[', pos);
        if (open == std::string_view::npos) break;
        auto name_start = open;
        while (name_start > 0 && is_ident_char(text[name_start - 1])) --name_start;
        if (name_start == open) {
            pos = open + 1;
            continue;
        }
        int depth = 0;
        for (auto k = open; k < text.size(); ++k) {
            if (text[k] == '[') {
                ++depth;
            } else if (text[k] == ']' && --depth == 0) {
                return Action{std::string(text.substr(name_start, open - name_start)),
                              std::string(text.substr(open + 1, k - open - 1))};
            }
        }
        throw MalformedAction("unbalanced brackets in action: " + std::string(text::trim(text)));
    }
    throw MalformedAction("no Name[param] action found in: " + std::string(text::trim(text)));
}

StepCompletion parse_step_completion(std::string_view text) {
    auto action_label = find_label(text, "Action");
    StepCompletion out;
    if (!action_label.found()) {
        out.action = parse_action(text);
        auto thought = find_label(text, "Thought");
        if (thought.found()) {
            auto end = text.find('\n', thought.content);
            out.thought = std::string(text::trim(text.substr(thought.content, end - thought.content)));
        }
        return out;
    }
    out.action = parse_action(text.substr(action_label.content));
    auto head = text.substr(0, action_label.start);
    auto thought = find_label(head, "Thought");
    out.thought = std::string(text::trim(thought.found() ? head.substr(thought.content) : head));
    return out;
}

PlanCompletion parse_plan_completion(std::string_view text) {
    auto action_label = find_label(text, "Action");
    PlanCompletion out;
    if (!action_label.found()) {
        auto action = parse_action(text);
        out.action_name = action.name;
        auto thought = find_label(text, "Thought");
        if (thought.found()) {
            auto end = text.find('\n', thought.content);
            out.thought = std::string(text::trim(text.substr(thought.content, end - thought.content)));
        }
        return out;
    }
    auto rest = text::trim(text.substr(action_label.content));
    std::size_t n = 0;
    while (n < rest.size() && is_ident_char(rest[n])) ++n;
    if (n == 0) throw MalformedAction("plan output has no action name: " + std::string(text::trim(text)));
    out.action_name = std::string(rest.substr(0, n));
    auto head = text.substr(0, action_label.start);
    auto thought = find_label(head, "Thought");
    out.thought = std::string(text::trim(thought.found() ? head.substr(thought.content) : head));
    return out;
}

std::string render_plan_output(std::string_view thought, std::string_view action_name) {
    std::string clean(thought);
    for (char& c : clean) {
        if (c == '[') c = '(';
        else if (c == ']') c = ')';
    }
    std::string out = "Thought: ";
    out += clean;
    out += "\nAction: ";
    out += action_name;
    return out;
}

std::string render_tool_instruction(std::string_view plan_prompt, std::string_view plan_output) {
    std::string out(plan_prompt);
    out += plan_output;
    out += "\nAction Input:";
    return out;
}

std::string clean_tool_param(std::string_view completion, std::string_view action_name) {
    auto t = text::trim(completion);
    if (text::istarts_with(t, "Action Input:")) t = text::trim(t.substr(13));
    if (t.size() >= action_name.size() + 2 && text::istarts_with(t, action_name) && t[action_name.size()] == '[' &&
        t.back() == ']') {
        return std::string(t.substr(action_name.size() + 1, t.size() - action_name.size() - 2));
    }
    return std::string(t);
}

std::string render_repair(std::string_view raw_completion, std::size_t step_number) {
    std::string out(text::trim(raw_completion));
    out += "\nObservation ";
    out += std::to_string(step_number);
    out += ": ";
    out += kInvalidActionObservation;
    out += '\n';
    return out;
}

} // namespace selfplan
