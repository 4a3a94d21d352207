// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "selfplan/backend/backend.hpp"
#include "selfplan/core/error.hpp"
#include "selfplan/core/types.hpp"
#include "selfplan/tools/registry.hpp"

#include <memory>
#include <optional>
#include <string>

namespace selfplan {

/// Backends for the three sub-agents. Aliasing one backend to all three
/// gives the single-model variant.
struct AgentGroup {
    std::shared_ptr<Backend> plan;
    std::shared_ptr<Backend> tool;
    std::shared_ptr<Backend> reflect;

    static AgentGroup single(std::shared_ptr<Backend> backend) { return {backend, backend, backend}; }
    void validate() const;
};

struct PlanLimits {
    int max_steps = 8;           // plan steps, shared across reflection rounds
    int max_reflect_rounds = 2;
    bool reflection_enabled = true;
    int max_malformed = 2;       // malformed plan outputs tolerated per run

    void validate() const;
};

struct PlanResult {
    std::optional<std::string> prediction;
    Trajectory trajectory;
    int reflect_rounds_used = 0;
    HaltReason halt_reason = HaltReason::finished;
};

enum class Verdict { correct, incorrect };

struct Reflection {
    Verdict verdict = Verdict::correct;
    std::string thought;
    Action action;
    std::string hint;
};

class MalformedReflection : public Error {
public:
    using Error::Error;
};

/// Reads "Thought: ...\nAction: Reflect[CORRECT]" or
/// "Reflect[INCORRECT: hint]". Throws MalformedReflection otherwise.
Reflection parse_reflection_strict(std::string_view text);

/// parse_reflection_strict, except that malformed text reads as CORRECT.
Reflection parse_reflection(std::string_view text);

/// Plan agent picks the action name, tool agent fills the parameter, and on
/// Finish the reflect agent either accepts the answer or sends planning
/// back with its reflection in the history. BackendError propagates.
PlanResult run_group_planning(const AgentGroup& group, const SelectedTools& tools, const PromptContext& context,
                              const QAPair& qa, const PlanLimits& limits, const ToolRegistry& registry,
                              std::string id = "q00000");

PlanResult run_group_planning(const AgentGroup& group, const SelectedTools& tools, const TaskInfo& task,
                              const QAPair& qa, const PlanLimits& limits, const ToolRegistry& registry,
                              std::string id = "q00000");

} // namespace selfplan
