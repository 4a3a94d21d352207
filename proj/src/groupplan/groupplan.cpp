// SPDX-License-Identifier: Apache-2.0
#include "selfplan/groupplan/groupplan.hpp"

#include "selfplan/core/action.hpp"
#include "selfplan/core/prompt.hpp"
#include "selfplan/core/text.hpp"

namespace selfplan {

void AgentGroup::validate() const {
    if (!plan || !tool || !reflect) throw InvalidRecord("agent group needs plan, tool and reflect backends");
}

void PlanLimits::validate() const {
    if (max_steps < 1) throw InvalidRecord("max_steps must be at least 1");
    if (max_reflect_rounds < 0) throw InvalidRecord("max_reflect_rounds must not be negative");
    if (max_malformed < 1) throw InvalidRecord("max_malformed must be at least 1");
}

Reflection parse_reflection_strict(std::string_view text) {
    StepCompletion parsed;
    try {
        parsed = parse_step_completion(text);
    } catch (const MalformedAction& e) {
        throw MalformedReflection(e.what());
    }
    if (!text::iequals(parsed.action.name, kReflectAction)) {
        throw MalformedReflection("reflection action is not Reflect: " + parsed.action.str());
    }
    Reflection out;
    out.thought = parsed.thought;
    const auto param = text::trim(parsed.action.param);
    if (text::istarts_with(param, "INCORRECT")) {
        auto rest = text::trim(param.substr(9));
        if (!rest.empty() && rest.front() != ':') throw MalformedReflection("bad verdict: " + std::string(param));
        if (!rest.empty()) rest = text::trim(rest.substr(1));
        out.verdict = Verdict::incorrect;
        out.hint = std::string(rest);
        out.action = Action{std::string(kReflectAction), out.hint.empty() ? "INCORRECT" : "INCORRECT: " + out.hint};
        return out;
    }
    if (text::iequals(param, "CORRECT")) {
        out.verdict = Verdict::correct;
        out.action = Action{std::string(kReflectAction), "CORRECT"};
        return out;
    }
    throw MalformedReflection("unknown verdict: " + std::string(param));
}

Reflection parse_reflection(std::string_view text) {
    try {
        return parse_reflection_strict(text);
    } catch (const MalformedReflection&) {
        return Reflection{Verdict::correct, std::string(text::trim(text)), Action{std::string(kReflectAction), "CORRECT"}, {}};
    }
}

PlanResult run_group_planning(const AgentGroup& group, const SelectedTools& tools, const PromptContext& context,
                              const QAPair& qa, const PlanLimits& limits, const ToolRegistry& registry,
                              std::string id) {
    group.validate();
    limits.validate();
    if (tools.empty()) throw InvalidRecord("group planning needs selected tools");

    PlanResult result;
    auto& traj = result.trajectory;
    traj.id = std::move(id);
    traj.question = qa;
    result.halt_reason = HaltReason::step_limit;

    ToolSession session;
    std::string repair;
    int malformed = 0;
    int consecutive = 0;
    int plan_steps = 0;
    while (plan_steps < limits.max_steps) {
        const auto prompt = render_prompt(context, tools, traj.steps);
        const auto plan_text = group.plan->complete(prompt + repair);
        PlanCompletion plan;
        try {
            plan = parse_plan_completion(plan_text);
        } catch (const MalformedAction&) {
            ++malformed;
            ++consecutive;
            if (consecutive >= 2 || malformed >= limits.max_malformed) {
                result.halt_reason = HaltReason::parse_failure;
                break;
            }
            repair = render_repair(plan_text, traj.steps.size() + 1);
            continue;
        }
        consecutive = 0;
        repair.clear();

        // the tool agent sees the canonical plan output, never the raw text
        const auto plan_output = render_plan_output(plan.thought, plan.action_name);
        const auto param =
            clean_tool_param(group.tool->complete(render_tool_instruction(prompt, plan_output)), plan.action_name);
        const Action action{plan.action_name, param};
        ++plan_steps;

        if (!action.is_finish()) {
            auto observation = registry.invoke(session, action);
            traj.steps.push_back({plan.thought, action, std::move(observation), StepKind::plan});
            continue;
        }

        traj.steps.push_back({plan.thought, Action{std::string(kFinishAction), param}, std::string(kFinishObservation),
                              StepKind::plan});
        result.prediction = param;
        if (limits.reflection_enabled && result.reflect_rounds_used < limits.max_reflect_rounds) {
            ++result.reflect_rounds_used;
            const auto reflection = parse_reflection(group.reflect->complete(render_prompt(context, tools, traj.steps)));
            if (reflection.verdict == Verdict::incorrect) {
                traj.steps.push_back({reflection.thought, reflection.action, "", StepKind::reflect});
                continue;
            }
        }
        result.halt_reason = HaltReason::finished;
        break;
    }

    traj.prediction = result.prediction;
    traj.halt_reason = result.halt_reason;
    return result;
}

PlanResult run_group_planning(const AgentGroup& group, const SelectedTools& tools, const TaskInfo& task,
                              const QAPair& qa, const PlanLimits& limits, const ToolRegistry& registry,
                              std::string id) {
    return run_group_planning(group, tools, PromptContext::make(task, qa), qa, limits, registry, std::move(id));
}

} // namespace selfplan
