// SPDX-License-Identifier: Apache-2.0
#include "selfplan/core/types.hpp"

#include "selfplan/core/answer.hpp"
#include "selfplan/core/error.hpp"
#include "selfplan/core/prompt.hpp"
#include "selfplan/core/text.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace selfplan {

std::string qa_pair_problem(const QAPair& pair) {
    if (text::trim(pair.question).empty()) return "question is empty";
    if (text::trim(pair.answer).empty()) return "answer is empty";
    if (!pair.choices.empty()) {
        auto letter = extract_choice_letter(pair.answer);
        if (!letter) return "answer does not start with a choice letter";
        auto hits = std::count_if(pair.choices.begin(), pair.choices.end(), [&](const Choice& c) {
            return c.label.size() == 1 && c.label[0] == *letter;
        });
        if (hits != 1) return std::string("answer letter ") + *letter + " does not name exactly one choice";
    }
    return {};
}

void validate(const QAPair& pair) {
    if (auto problem = qa_pair_problem(pair); !problem.empty()) {
        throw InvalidRecord("invalid QA pair: " + problem);
    }
}

void validate(const TaskInfo& task) {
    if (text::trim(task.name).empty()) throw InvalidRecord("task name is empty");
    if (text::trim(task.description).empty()) throw InvalidRecord("task description is empty");
    if (task.examples.empty()) throw InvalidRecord("task has no examples");
    for (const auto& ex : task.examples) validate(ex);
}

bool is_identifier(std::string_view text) noexcept {
    if (text.empty()) return false;
    return std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

void validate(const ToolSpec& spec) {
    if (!is_identifier(spec.name)) throw InvalidRecord("tool name is not an identifier: '" + spec.name + "'");
    if (text::trim(spec.definition).empty()) throw InvalidRecord("tool " + spec.name + " has no definition");
    if (text::trim(spec.usage).empty()) throw InvalidRecord("tool " + spec.name + " has no usage");
}

ToolLibrary::ToolLibrary(std::vector<ToolSpec> tools) : tools_(std::move(tools)) {
    std::set<std::string> seen;
    for (const auto& tool : tools_) {
        validate(tool);
        if (text::iequals(tool.name, kFinishAction)) {
            throw InvalidRecord("tool name 'Finish' is reserved");
        }
        if (!seen.insert(text::to_lower(tool.name)).second) {
            throw InvalidRecord("duplicate tool name: " + tool.name);
        }
    }
}

const ToolSpec* ToolLibrary::find(std::string_view name) const noexcept {
    for (const auto& tool : tools_) {
        if (text::iequals(tool.name, name)) return &tool;
    }
    return nullptr;
}

SelectedTools SelectedTools::from_names(const ToolLibrary& library, const std::vector<std::string>& names,
                                        std::size_t expected_count) {
    SelectedTools out;
    for (const auto& name : names) {
        const ToolSpec* spec = library.find(name);
        if (!spec) throw InvalidRecord("tool not in library: " + name);
        if (out.find(spec->name)) continue;
        out.tools_.push_back(*spec);
    }
    if (out.tools_.size() != expected_count) {
        throw InvalidRecord("expected " + std::to_string(expected_count) + " distinct tools, got " +
                            std::to_string(out.tools_.size()));
    }
    return out;
}

const ToolSpec* SelectedTools::find(std::string_view name) const noexcept {
    for (const auto& tool : tools_) {
        if (text::iequals(tool.name, name)) return &tool;
    }
    return nullptr;
}

std::string Action::str() const {
    std::string out;
    out.reserve(name.size() + param.size() + 2);
    out += name;
    out += '[';
    out += param;
    out += ']';
    return out;
}

bool Action::is_finish() const noexcept { return text::iequals(name, kFinishAction); }

PromptContext PromptContext::make(const TaskInfo& task, const QAPair& question) {
    return PromptContext{task.name, task.description, std::string(kDefaultFormatRules), render_question(question)};
}

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view text, const std::string_view (&names)[N], const char* what) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == text) return static_cast<E>(i);
    }
    throw InvalidRecord(std::string("unknown ") + what + ": '" + std::string(text) + "'");
}

constexpr std::string_view kProvenanceNames[] = {"seed", "generated"};
constexpr std::string_view kStepKindNames[] = {"plan", "reflect"};
constexpr std::string_view kHaltNames[] = {"finished", "step_limit", "parse_failure", "backend_error"};
constexpr std::string_view kRewardNames[] = {"token_f1", "choice_accuracy"};
constexpr std::string_view kRoleNames[] = {"plan", "tool", "reflect"};

} // namespace

std::string_view to_string(Provenance value) noexcept { return kProvenanceNames[static_cast<int>(value)]; }
std::string_view to_string(StepKind value) noexcept { return kStepKindNames[static_cast<int>(value)]; }
std::string_view to_string(HaltReason value) noexcept { return kHaltNames[static_cast<int>(value)]; }
std::string_view to_string(RewardKind value) noexcept { return kRewardNames[static_cast<int>(value)]; }
std::string_view to_string(Role value) noexcept { return kRoleNames[static_cast<int>(value)]; }

Provenance parse_provenance(std::string_view text) {
    return parse_enum<Provenance>(text, kProvenanceNames, "provenance");
}
StepKind parse_step_kind(std::string_view text) { return parse_enum<StepKind>(text, kStepKindNames, "step kind"); }
HaltReason parse_halt_reason(std::string_view text) {
    return parse_enum<HaltReason>(text, kHaltNames, "halt reason");
}
RewardKind parse_reward_kind(std::string_view text) {
    return parse_enum<RewardKind>(text, kRewardNames, "reward kind");
}
Role parse_role(std::string_view text) { return parse_enum<Role>(text, kRoleNames, "role"); }

} // namespace selfplan
