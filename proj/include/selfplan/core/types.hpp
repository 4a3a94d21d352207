// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace selfplan {

enum class Provenance { seed, generated };

struct Choice {
    std::string label;  // "A", "B", ...
    std::string text;

    bool operator==(const Choice&) const = default;
};

/// One question-answer entry, either user-provided or generated.
/// Multiple-choice entries carry `choices`; image content arrives as `caption`.
struct QAPair {
    std::string question;
    std::string answer;
    std::vector<Choice> choices;  // empty when the question is open-ended
    std::optional<std::string> caption;
    std::optional<std::string> level;
    Provenance provenance = Provenance::seed;

    bool operator==(const QAPair&) const = default;
};

/// Returns an empty string when `pair` is well formed, otherwise the reason.
std::string qa_pair_problem(const QAPair& pair);
void validate(const QAPair& pair);

struct TaskInfo {
    std::string name;
    std::string description;
    std::vector<QAPair> examples;

    bool operator==(const TaskInfo&) const = default;
};

void validate(const TaskInfo& task);

/// Alphanumerics and underscore, nonempty.
bool is_identifier(std::string_view text) noexcept;

/// A tool card: name, what the tool does, and how to call it.
struct ToolSpec {
    std::string name;
    std::string definition;
    std::string usage;

    bool operator==(const ToolSpec&) const = default;
};

void validate(const ToolSpec& spec);

class ToolLibrary {
public:
    ToolLibrary() = default;
    explicit ToolLibrary(std::vector<ToolSpec> tools);

    const std::vector<ToolSpec>& tools() const noexcept { return tools_; }
    std::size_t size() const noexcept { return tools_.size(); }

    /// Case-insensitive lookup.
    const ToolSpec* find(std::string_view name) const noexcept;

private:
    std::vector<ToolSpec> tools_;
};

/// Ordered subset of a library picked for one task.
class SelectedTools {
public:
    SelectedTools() = default;

    /// Resolves `names` against `library` (case-insensitive) and checks the
    /// result holds exactly `expected_count` distinct tools.
    static SelectedTools from_names(const ToolLibrary& library, const std::vector<std::string>& names,
                                    std::size_t expected_count);

    const std::vector<ToolSpec>& tools() const noexcept { return tools_; }
    std::size_t size() const noexcept { return tools_.size(); }
    bool empty() const noexcept { return tools_.empty(); }
    const ToolSpec* find(std::string_view name) const noexcept;

    bool operator==(const SelectedTools&) const = default;

private:
    std::vector<ToolSpec> tools_;
};

/// Reserved terminal pseudo-action.
inline constexpr std::string_view kFinishAction = "Finish";
/// Action name carried by reflection verdicts.
inline constexpr std::string_view kReflectAction = "Reflect";

struct Action {
    std::string name;
    std::string param;

    /// `name[param]`
    std::string str() const;
    bool is_finish() const noexcept;

    bool operator==(const Action&) const = default;
};

enum class StepKind { plan, reflect };

struct Step {
    std::string thought;
    Action action;
    std::string observation;
    StepKind kind = StepKind::plan;

    bool operator==(const Step&) const = default;
};

enum class HaltReason { finished, step_limit, parse_failure, backend_error };

enum class RewardKind { token_f1, choice_accuracy };

struct Reward {
    double value = 0.0;
    RewardKind kind = RewardKind::token_f1;

    bool operator==(const Reward&) const = default;
};

struct Trajectory {
    std::string id;
    QAPair question;
    std::vector<Step> steps;
    std::optional<std::string> prediction;
    std::optional<Reward> reward;
    HaltReason halt_reason = HaltReason::finished;

    bool operator==(const Trajectory&) const = default;
};

/// Task card, planning format rules, and question: everything the planning
/// prompt needs besides the tool list and history.
struct PromptContext {
    std::string task_name;
    std::string task_description;
    std::string format_rules;
    std::string question;

    static PromptContext make(const TaskInfo& task, const QAPair& question);

    bool operator==(const PromptContext&) const = default;
};

enum class Role { plan, tool, reflect };

/// One differentiated training record.
struct RoleExample {
    Role role = Role::plan;
    std::string instruction;
    std::string output;
    std::string source_trajectory;
    std::optional<int> step_index;  // absent for reflect records

    bool operator==(const RoleExample&) const = default;
};

std::string_view to_string(Provenance value) noexcept;
std::string_view to_string(StepKind value) noexcept;
std::string_view to_string(HaltReason value) noexcept;
std::string_view to_string(RewardKind value) noexcept;
std::string_view to_string(Role value) noexcept;

Provenance parse_provenance(std::string_view text);
StepKind parse_step_kind(std::string_view text);
HaltReason parse_halt_reason(std::string_view text);
RewardKind parse_reward_kind(std::string_view text);
Role parse_role(std::string_view text);

} // namespace selfplan
