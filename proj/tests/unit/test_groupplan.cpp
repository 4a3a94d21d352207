// SPDX-License-Identifier: Apache-2.0
#include "selfplan/backend/scripted_backend.hpp"
#include "selfplan/core/action.hpp"
#include "selfplan/core/prompt.hpp"
#include "selfplan/groupplan/groupplan.hpp"
#include "selfplan/tools/adapters.hpp"

#include <doctest.h>

using namespace selfplan;

namespace {

const char* kCorrect = "Thought: ok\nAction: Reflect[CORRECT]";

struct Fixture {
    ToolLibrary lib{{{"Retrieve", "Encyclopedia.", "Retrieve[entity]"},
                     {"Lookup", "Find in page.", "Lookup[keyword]"},
                     {"BingSearch", "Web search.", "BingSearch[query]"}}};
    SelectedTools tools = SelectedTools::from_names(lib, {"Retrieve", "Lookup", "BingSearch"}, 3);
    ToolRegistry registry{lib};
    TaskInfo task{"HotpotQA", "Multi-hop questions.", {{"Seed?", "yes"}}};
    QAPair qa{"Who is Milhouse?", "a Simpsons character"};
    PromptContext ctx = PromptContext::make(task, qa);
    std::shared_ptr<Transcript> transcript = std::make_shared<Transcript>();

    Fixture() {
        registry.add("Retrieve", std::make_shared<RetrieveTool>(std::make_shared<LocalCorpus>(std::vector<CorpusPage>{
                                     {"Milhouse", {"Milhouse is a character in The Simpsons."}}})));
        registry.add("Lookup", std::make_shared<LookupTool>());
    }

    AgentGroup group(Script plan, Script tool, Script reflect) {
        return {std::make_shared<RecordingBackend>(std::make_shared<ScriptedBackend>(std::move(plan)), "plan", transcript),
                std::make_shared<RecordingBackend>(std::make_shared<ScriptedBackend>(std::move(tool)), "tool", transcript),
                std::make_shared<RecordingBackend>(std::make_shared<ScriptedBackend>(std::move(reflect)), "reflect",
                                                   transcript)};
    }

    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        for (const auto& e : transcript->entries()) out.push_back(e.label);
        return out;
    }
};

Script lines(std::initializer_list<const char*> responses) {
    Script s;
    for (auto r : responses) s.push_back({"*", r});
    return s;
}

} // namespace

TEST_CASE("parse_reflection grammar") {
    auto ok = parse_reflection("Thought: ok\nAction: Reflect[CORRECT]");
    CHECK(ok.verdict == Verdict::correct);
    CHECK(ok.thought == "ok");

    auto bad = parse_reflection("Thought: the year is wrong\nAction: Reflect[INCORRECT: re-check dates]");
    CHECK(bad.verdict == Verdict::incorrect);
    CHECK(bad.hint == "re-check dates");
    CHECK(bad.thought == "the year is wrong");
    CHECK(bad.action == Action{"Reflect", "INCORRECT: re-check dates"});
    CHECK(parse_reflection("Action: Reflect[INCORRECT]").hint.empty());

    CHECK(parse_reflection("I think it is fine").verdict == Verdict::correct);
    CHECK_THROWS_AS(parse_reflection_strict("I think it is fine"), MalformedReflection);
    CHECK_THROWS_AS(parse_reflection_strict("Action: Retrieve[x]"), MalformedReflection);
    CHECK_THROWS_AS(parse_reflection_strict("Action: Reflect[MAYBE]"), MalformedReflection);
    CHECK(parse_reflection_strict(render_correct_reflection()).verdict == Verdict::correct);
    CHECK(parse_reflection_strict(render_incorrect_reflection("t", "h")).hint == "h");
}

TEST_CASE("tool then finish with a correct reflection") {
    Fixture f;
    auto group = f.group(lines({"Thought: I need Milhouse.\nAction: Retrieve", "Thought: Done.\nAction: Finish"}),
                         lines({"Milhouse", "a Simpsons character"}), lines({kCorrect}));
    auto result = run_group_planning(group, f.tools, f.ctx, f.qa, PlanLimits{}, f.registry, "q00001");
    CHECK(result.prediction == std::optional<std::string>("a Simpsons character"));
    CHECK(result.reflect_rounds_used == 1);
    CHECK(result.halt_reason == HaltReason::finished);
    CHECK(f.labels() == std::vector<std::string>{"plan", "tool", "plan", "tool", "reflect"});

    const auto& steps = result.trajectory.steps;
    REQUIRE(steps.size() == 2);
    CHECK(steps[0].action == Action{"Retrieve", "Milhouse"});
    CHECK(steps[0].observation == "Milhouse is a character in The Simpsons.");
    CHECK(steps[1].action == Action{"Finish", "a Simpsons character"});

    const auto calls = f.transcript->entries();
    const auto p0 = render_prompt(f.ctx, f.tools, {});
    CHECK(calls[0].prompt == p0);
    CHECK(calls[1].prompt == p0 + "Thought: I need Milhouse.\nAction: Retrieve\nAction Input:");
    const auto p1 = render_prompt(f.ctx, f.tools, std::span<const Step>(steps).first(1));
    CHECK(calls[2].prompt == p1);
    CHECK(calls[3].prompt == p1 + "Thought: Done.\nAction: Finish\nAction Input:");
    CHECK(calls[4].prompt == render_prompt(f.ctx, f.tools, steps));
    CHECK(result.trajectory.prediction == result.prediction);
    CHECK(result.trajectory.halt_reason == HaltReason::finished);
}

TEST_CASE("incorrect reflection sends planning back") {
    Fixture f;
    auto group = f.group(lines({"Thought: Guess.\nAction: Finish", "Thought: Check first.\nAction: Retrieve",
                                "Thought: Now I know.\nAction: Finish"}),
                         lines({"a teacher", "Milhouse", "a Simpsons character"}),
                         lines({"Thought: no evidence\nAction: Reflect[INCORRECT: look it up]", kCorrect}));
    auto result = run_group_planning(group, f.tools, f.ctx, f.qa, PlanLimits{}, f.registry);
    CHECK(result.reflect_rounds_used == 2);
    CHECK(result.prediction == std::optional<std::string>("a Simpsons character"));
    CHECK(result.halt_reason == HaltReason::finished);
    CHECK(f.labels() ==
          std::vector<std::string>{"plan", "tool", "reflect", "plan", "tool", "plan", "tool", "reflect"});
    const auto& steps = result.trajectory.steps;
    REQUIRE(steps.size() == 4);
    CHECK(steps[1].kind == StepKind::reflect);
    CHECK(steps[1].action == Action{"Reflect", "INCORRECT: look it up"});
    // the reflection is in context for the next plan call
    const auto calls = f.transcript->entries();
    CHECK(calls[3].prompt == render_prompt(f.ctx, f.tools, std::span<const Step>(steps).first(2)));
    CHECK(calls[3].prompt.find("Reflection 2: no evidence\nAction 2: Reflect[INCORRECT: look it up]\n") !=
          std::string::npos);
}

TEST_CASE("reflection budget and the disabled switch") {
    Fixture f;
    PlanLimits no_reflect;
    no_reflect.reflection_enabled = false;
    auto group = f.group(lines({"Thought: Guess.\nAction: Finish"}), lines({"a teacher"}), lines({}));
    auto result = run_group_planning(group, f.tools, f.ctx, f.qa, no_reflect, f.registry);
    CHECK(result.prediction == std::optional<std::string>("a teacher"));
    CHECK(result.reflect_rounds_used == 0);
    CHECK(result.halt_reason == HaltReason::finished);
    CHECK(f.labels() == std::vector<std::string>{"plan", "tool"});

    Fixture g;
    PlanLimits one_round;
    one_round.max_reflect_rounds = 1;
    auto stubborn = g.group(lines({"Thought: a\nAction: Finish", "Thought: b\nAction: Finish"}), lines({"x", "y"}),
                            lines({"Action: Reflect[INCORRECT: again]"}));
    auto r = run_group_planning(stubborn, g.tools, g.ctx, g.qa, one_round, g.registry);
    CHECK(r.reflect_rounds_used == 1);
    CHECK(r.prediction == std::optional<std::string>("y"));
    CHECK(r.halt_reason == HaltReason::finished);
    CHECK(g.labels() == std::vector<std::string>{"plan", "tool", "reflect", "plan", "tool"});
}

TEST_CASE("immediate finish, step limit and parse failure") {
    {
        Fixture f;
        auto group = f.group(lines({"Thought: easy\nAction: Finish"}), lines({"yes"}), lines({kCorrect}));
        auto r = run_group_planning(group, f.tools, f.ctx, f.qa, PlanLimits{}, f.registry);
        CHECK(r.trajectory.steps.size() == 1);
        CHECK(r.halt_reason == HaltReason::finished);
        CHECK(f.labels() == std::vector<std::string>{"plan", "tool", "reflect"});
    }
    {
        Fixture f;
        PlanLimits limits;
        limits.max_steps = 3;
        auto group = f.group(lines({"Thought: a\nAction: Lookup", "Thought: b\nAction: Lookup", "Thought: c\nAction: Lookup"}),
                             lines({"x", "y", "z"}), lines({}));
        auto r = run_group_planning(group, f.tools, f.ctx, f.qa, limits, f.registry);
        CHECK(r.halt_reason == HaltReason::step_limit);
        CHECK_FALSE(r.prediction);
        CHECK(r.trajectory.steps.size() == 3);
        CHECK(r.trajectory.steps[0].observation == "Error: no passage to look up in.");
        CHECK(f.transcript->size() == 6);
    }
    {
        Fixture f;
        auto group = f.group(lines({"hmm", "still unsure"}), lines({}), lines({}));
        auto r = run_group_planning(group, f.tools, f.ctx, f.qa, PlanLimits{}, f.registry);
        CHECK(r.halt_reason == HaltReason::parse_failure);
        CHECK(r.trajectory.steps.empty());
        const auto calls = f.transcript->entries();
        REQUIRE(calls.size() == 2);
        CHECK(calls[1].prompt == render_prompt(f.ctx, f.tools, {}) + render_repair("hmm", 1));
    }
    {
        // a step limit after an incorrect reflection keeps the earlier answer
        Fixture f;
        PlanLimits limits;
        limits.max_steps = 2;
        auto group = f.group(lines({"Thought: a\nAction: Finish", "Thought: b\nAction: Lookup"}), lines({"first", "x"}),
                             lines({"Action: Reflect[INCORRECT]"}));
        auto r = run_group_planning(group, f.tools, f.ctx, f.qa, limits, f.registry);
        CHECK(r.halt_reason == HaltReason::step_limit);
        CHECK(r.prediction == std::optional<std::string>("first"));
    }
}

TEST_CASE("plan outputs are consumed name-only") {
    for (const char* tool_reply : {"Milhouse", "Retrieve[Milhouse]", "Lookup[Milhouse]"}) {
        Fixture f;
        auto group = f.group(lines({"Thought: t\nAction: Retrieve[ignored]", "Thought: d\nAction: Finish"}),
                             lines({tool_reply, "done"}), lines({kCorrect}));
        auto r = run_group_planning(group, f.tools, f.ctx, f.qa, PlanLimits{}, f.registry);
        CHECK(r.trajectory.steps[0].action.name == "Retrieve");
    }
}

TEST_CASE("aliasing all roles to one backend adds no calls") {
    Fixture split;
    auto separate = split.group(lines({"Thought: a\nAction: Retrieve", "Thought: b\nAction: Finish"}),
                                lines({"Milhouse", "ans"}), lines({kCorrect}));
    auto r1 = run_group_planning(separate, split.tools, split.ctx, split.qa, PlanLimits{}, split.registry);

    Fixture joint;
    auto shared = std::make_shared<RecordingBackend>(
        std::make_shared<ScriptedBackend>(
            lines({"Thought: a\nAction: Retrieve", "Milhouse", "Thought: b\nAction: Finish", "ans", kCorrect})),
        "single", joint.transcript);
    auto r2 = run_group_planning(AgentGroup::single(shared), joint.tools, joint.ctx, joint.qa, PlanLimits{},
                                 joint.registry);
    const auto a = split.transcript->entries();
    const auto b = joint.transcript->entries();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].prompt == b[i].prompt);
        CHECK(a[i].response == b[i].response);
    }
    CHECK(r1.trajectory == r2.trajectory);
}

TEST_CASE("call budget holds under random scripts") {
    const std::vector<std::string> plan_shapes{"Thought: t\nAction: Lookup", "Thought: t\nAction: Finish", "garbage",
                                               "Thought: t\nAction: Retrieve"};
    const std::vector<std::string> reflect_shapes{kCorrect, "Action: Reflect[INCORRECT: x]", "nonsense"};
    std::uint64_t state = 17;
    auto pick = [&](std::size_t n) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<std::size_t>((state >> 33) % n);
    };
    for (int trial = 0; trial < 200; ++trial) {
        Fixture f;
        Script plan, tool, reflect;
        for (int i = 0; i < 40; ++i) {
            plan.push_back({"*", plan_shapes[pick(plan_shapes.size())]});
            tool.push_back({"*", "Milhouse"});
            reflect.push_back({"*", reflect_shapes[pick(reflect_shapes.size())]});
        }
        PlanLimits limits;
        limits.max_steps = 1 + static_cast<int>(pick(8));
        limits.max_reflect_rounds = static_cast<int>(pick(3));
        auto group = f.group(plan, tool, reflect);
        auto r = run_group_planning(group, f.tools, f.ctx, f.qa, limits, f.registry);
        const auto calls = f.transcript->size();
        CHECK(calls <= static_cast<std::size_t>(2 * limits.max_steps + limits.max_reflect_rounds + limits.max_malformed));
        CHECK(r.reflect_rounds_used <= limits.max_reflect_rounds);
        CHECK(r.prediction.has_value() ==
              std::any_of(r.trajectory.steps.begin(), r.trajectory.steps.end(),
                          [](const Step& s) { return s.action.is_finish(); }));
    }
}
