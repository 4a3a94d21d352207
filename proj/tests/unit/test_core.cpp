// SPDX-License-Identifier: Apache-2.0
#include "selfplan/core/action.hpp"
#include "selfplan/core/answer.hpp"
#include "selfplan/core/error.hpp"
#include "selfplan/core/process.hpp"
#include "selfplan/core/prompt.hpp"
#include "selfplan/core/records.hpp"
#include "selfplan/core/rng.hpp"
#include "selfplan/core/text.hpp"

#include <doctest.h>

#include <filesystem>
#include <set>

using namespace selfplan;

namespace {

ToolLibrary sample_library() {
    return ToolLibrary({
        {"BingSearch", "Searches the internet.", "BingSearch[query], e.g. BingSearch[popular dog breeds]"},
        {"Retrieve", "Retrieves background knowledge.", "Retrieve[entity], e.g. Retrieve[Milhouse]"},
        {"Lookup", "Finds the next sentence with a keyword.", "Lookup[keyword], e.g. Lookup[river]"},
        {"Code", "Executes Python code.", "Code[python], e.g. Code[print(\"hello world!\")]"},
    });
}

TaskInfo sample_task() {
    return TaskInfo{"HotpotQA",
                    "A question-answering task with multi-hop questions.",
                    {QAPair{"Are both Shangri-La City and Ma'anshan cities in China?", "yes"}}};
}

} // namespace

TEST_CASE("parse_action extracts the first Name[param]") {
    auto a = parse_action("Retrieve[Milhouse]");
    CHECK(a.name == "Retrieve");
    CHECK(a.param == "Milhouse");

    auto b = parse_action("BingSearch[popular dog breeds in the United States]");
    CHECK(b.name == "BingSearch");
    CHECK(b.param == "popular dog breeds in the United States");

    auto finish = parse_action("Finish[]");
    CHECK(finish.name == "Finish");
    CHECK(finish.param.empty());
    CHECK(finish.is_finish());

    CHECK_THROWS_AS(parse_action("let me think more"), MalformedAction);
    CHECK_THROWS_AS(parse_action("Retrieve[Milhouse"), MalformedAction);
    CHECK_THROWS_AS(parse_action("[no name]"), MalformedAction);
    CHECK_THROWS_AS(parse_action("Code[print([1,2)]"), MalformedAction);
}

TEST_CASE("parse_action handles nesting and surrounding text") {
    auto a = parse_action("  Code[print([1, 2][0])]  ");
    CHECK(a.name == "Code");
    CHECK(a.param == "print([1, 2][0])");
    CHECK(a.str() == "Code[print([1, 2][0])]");

    auto b = parse_action("I will call [x] then Lookup[river] and Retrieve[Y]");
    CHECK(b.name == "Lookup");
    CHECK(b.param == "river");
}

TEST_CASE("parse_step_completion reads numbered and bare labels") {
    auto s = parse_step_completion("Thought 1: x\nAction 1: Finish[yes]");
    CHECK(s.thought == "x");
    CHECK(s.action == Action{"Finish", "yes"});

    auto t = parse_step_completion(" I need the river.\nAction: Lookup[river]\n");
    CHECK(t.thought == "I need the river.");
    CHECK(t.action == Action{"Lookup", "river"});

    auto u = parse_step_completion("Retrieve[Milhouse]");
    CHECK(u.thought.empty());
    CHECK(u.action.name == "Retrieve");

    // A thought that mentions brackets must not be mistaken for the action.
    auto v = parse_step_completion("Thought 3: maybe Foo[bar] is wrong\nAction 3: Retrieve[Baz]");
    CHECK(v.action == Action{"Retrieve", "Baz"});
    CHECK(v.thought == "maybe Foo[bar] is wrong");

    CHECK_THROWS_AS(parse_step_completion("Thought 1: hmm\nAction 1: I am not sure"), MalformedAction);
}

TEST_CASE("plan completions are consumed name-only") {
    auto p = parse_plan_completion("Thought: search first\nAction: Retrieve");
    CHECK(p.thought == "search first");
    CHECK(p.action_name == "Retrieve");

    auto q = parse_plan_completion("Thought 2: x\nAction 2: Retrieve[Something Else]");
    CHECK(q.action_name == "Retrieve");

    CHECK_THROWS_AS(parse_plan_completion("Thought: x\nAction: "), MalformedAction);
    CHECK_THROWS_AS(parse_plan_completion("no idea"), MalformedAction);

    auto out = render_plan_output("check [list]", "Lookup");
    CHECK(out == "Thought: check (list)\nAction: Lookup");
    CHECK(out.find('[') == std::string::npos);

    CHECK(render_tool_instruction("P\n", out) == "P\n" + out + "\nAction Input:");
    CHECK(clean_tool_param(" Milhouse \n", "Retrieve") == "Milhouse");
    CHECK(clean_tool_param("Retrieve[Milhouse]", "Retrieve") == "Milhouse");
    CHECK(clean_tool_param("Action Input: river", "Lookup") == "river");
}

TEST_CASE("render_history template") {
    CHECK(render_history({}) == "");

    std::vector<Step> steps{{"Search it", {"Retrieve", "X"}, "X is a thing.", StepKind::plan}};
    CHECK(render_history(steps) == "Thought 1: Search it\nAction 1: Retrieve[X]\nObservation 1: X is a thing.\n");

    steps.push_back({"Done", {"Finish", "X"}, std::string(kFinishObservation), StepKind::plan});
    steps.push_back({"The year is wrong", {"Reflect", "INCORRECT: re-check dates"}, "", StepKind::reflect});
    const auto two = render_history(std::span(steps).first(2));
    const auto three = render_history(steps);
    CHECK(two.rfind(render_history(std::span(steps).first(1)), 0) == 0);
    CHECK(three.rfind(two, 0) == 0);
    CHECK(three.substr(two.size()) ==
          "Reflection 3: The year is wrong\nAction 3: Reflect[INCORRECT: re-check dates]\n");
}

TEST_CASE("render_prompt fills the synthesis template") {
    auto library = sample_library();
    auto tools = SelectedTools::from_names(library, {"Retrieve", "lookup", "BingSearch"}, 3);
    auto task = sample_task();
    auto ctx = PromptContext::make(task, task.examples[0]);

    auto prompt = render_prompt(ctx, tools, {});
    CHECK(prompt.rfind("I expect you to excel as a proficient question answerer in the task.\n", 0) == 0);
    CHECK(prompt.find("Task Name: HotpotQA\n") != std::string::npos);
    CHECK(prompt.find("Action can be 4 types:\n") != std::string::npos);
    const std::string tail = "Question: Are both Shangri-La City and Ma'anshan cities in China?\n";
    REQUIRE(prompt.size() > tail.size());
    CHECK(prompt.substr(prompt.size() - tail.size()) == tail);

    // tools plus Finish
    int entries = 0;
    for (auto line : text::split_lines(prompt)) {
        if (line.size() > 3 && line[0] == '(' && std::isdigit(static_cast<unsigned char>(line[1]))) ++entries;
    }
    CHECK(entries == 4);
    CHECK(prompt.find("(4) Finish[answer]") != std::string::npos);
    CHECK(prompt.find("(2) Lookup: ") != std::string::npos);

    CHECK(render_prompt(ctx, tools, {}) == prompt);

    std::vector<Step> history{{"t", {"Retrieve", "X"}, "o", StepKind::plan}};
    CHECK(render_prompt(ctx, tools, history) == prompt + render_history(history));
}

TEST_CASE("render_question includes options and caption") {
    QAPair q{"Which of these states is the farthest north?",
             "A. West Virginia",
             {{"A", "West Virginia"}, {"B", "Louisiana"}},
             "An aerial view of a painting of a forest.",
             std::nullopt,
             Provenance::seed};
    CHECK(render_question(q) ==
          "Which of these states is the farthest north?\nOptions: (A) West Virginia (B) Louisiana\n"
          "Caption: An aerial view of a painting of a forest.");
    CHECK(render_qa_block(q).substr(render_qa_block(q).size() - 25) == "\nAnswer: A. West Virginia");
}

TEST_CASE("normalize_answer") {
    CHECK(normalize_answer("The Manhattan") == "manhattan");
    CHECK(normalize_answer("yes.") == "yes");
    CHECK(normalize_answer("Ma'anshan") == "maanshan");
    CHECK(normalize_answer("  An   apple, a day ") == "apple day");
    CHECK(normalize_answer("theater") == "theater");

    Rng rng(11);
    const std::string alphabet = "abcATHE .,'!-  \tn";
    for (int i = 0; i < 500; ++i) {
        std::string s;
        auto len = rng.below(30);
        for (std::size_t k = 0; k < len; ++k) s += alphabet[rng.below(alphabet.size())];
        auto once = normalize_answer(s);
        CHECK(normalize_answer(once) == once);
    }
}

TEST_CASE("extract_choice_letter") {
    CHECK(extract_choice_letter("B. Do ping pong balls travel farther") == 'B');
    CHECK(extract_choice_letter("(C) Arizona") == 'C');
    CHECK(extract_choice_letter("The answer is D") == 'D');
    CHECK(extract_choice_letter("I think A.") == 'A');
    CHECK_FALSE(extract_choice_letter("none of these").has_value());
}

TEST_CASE("QA pair and task validation") {
    QAPair ok{"Q?", "B. second", {{"A", "first"}, {"B", "second"}}, std::nullopt, std::nullopt, Provenance::seed};
    CHECK(qa_pair_problem(ok).empty());
    auto bad = ok;
    bad.answer = "C. third";
    CHECK_FALSE(qa_pair_problem(bad).empty());
    bad.answer = "second";
    CHECK_FALSE(qa_pair_problem(bad).empty());
    CHECK_THROWS_AS(validate(QAPair{"", "x"}), InvalidRecord);
    CHECK_THROWS_AS(validate(TaskInfo{"n", "d", {}}), InvalidRecord);
    CHECK_NOTHROW(validate(sample_task()));
}

TEST_CASE("tool library and selection invariants") {
    CHECK_THROWS_AS(ToolLibrary({{"Retrieve", "d", "u"}, {"retrieve", "d", "u"}}), InvalidRecord);
    CHECK_THROWS_AS(ToolLibrary({{"Bad Name", "d", "u"}}), InvalidRecord);
    CHECK_THROWS_AS(ToolLibrary({{"Finish", "d", "u"}}), InvalidRecord);

    auto library = sample_library();
    CHECK(library.find("bingsearch") != nullptr);
    auto picked = SelectedTools::from_names(library, {"lookup", "Retrieve"}, 2);
    CHECK(picked.tools()[0].name == "Lookup");
    CHECK_THROWS_AS(SelectedTools::from_names(library, {"Retrieve", "Retrieve", "Lookup"}, 3), InvalidRecord);
    CHECK_THROWS_AS(SelectedTools::from_names(library, {"Wikipedia"}, 1), InvalidRecord);
}

TEST_CASE("records round-trip through JSON lines") {
    Trajectory t;
    t.id = "q00001";
    t.question = QAPair{"Q?", "A. x", {{"A", "x"}, {"B", "y"}}, std::string("cap"), std::string("easy"),
                        Provenance::generated};
    t.steps = {{"think", {"Retrieve", "x [1]"}, "obs\nline", StepKind::plan},
               {"done", {"Finish", "A. x"}, std::string(kFinishObservation), StepKind::plan}};
    t.prediction = "A. x";
    t.reward = Reward{1.0, RewardKind::choice_accuracy};
    t.halt_reason = HaltReason::finished;

    Trajectory empty;
    empty.id = "q2";
    empty.question = QAPair{"Q2", "a"};
    empty.halt_reason = HaltReason::step_limit;

    auto dir = std::filesystem::temp_directory_path() / "selfplan_test_core";
    std::filesystem::remove_all(dir);
    io::write_records(dir / "t.jsonl", std::vector<Trajectory>{t, empty});
    auto back = io::read_records<Trajectory>(dir / "t.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[0] == t);
    CHECK(back[1] == empty);

    RoleExample ex{Role::tool, "instr", "out", "q00001", 2};
    Json j = ex;
    CHECK(j.get<RoleExample>() == ex);
    CHECK(j.dump() == R"({"role":"tool","instruction":"instr","output":"out","source_trajectory":"q00001","step_index":2})");

    io::write_text(dir / "bad.jsonl", "{\"name\": 1}\n");
    CHECK_THROWS_AS(io::read_records<ToolSpec>(dir / "bad.jsonl"), InvalidRecord);
    std::filesystem::remove_all(dir);
}

TEST_CASE("rng is seed-deterministic") {
    Rng a(7), b(7);
    for (int i = 0; i < 20; ++i) CHECK(a.below(13) == b.below(13));
    auto s = a.sample_without_replacement(10, 4);
    CHECK(s.size() == 4);
    CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 4);
    CHECK(a.sample_without_replacement(3, 9).size() == 3);
    CHECK(Rng::derive(1, "synthesis") != Rng::derive(1, "selfinstruct"));
}

TEST_CASE("utf8 helpers") {
    std::string s = "h\xC3\xA9llo";  // héllo
    CHECK(text::utf8_length(s) == 5);
    CHECK(text::utf8_truncate(s, 2) == "h\xC3\xA9");
    CHECK(text::utf8_truncate(s, 10) == s);
}

TEST_CASE("run_process captures output and enforces the timeout") {
    auto ok = run_process({{"sh", "-c", "echo out; echo err 1>&2; exit 3"}});
    CHECK(ok.exited);
    CHECK(ok.exit_code == 3);
    CHECK(ok.output.find("out") != std::string::npos);
    CHECK(ok.output.find("err") != std::string::npos);

    ProcessSpec slow{{"sh", "-c", "sleep 5"}};
    slow.timeout = std::chrono::milliseconds(200);
    auto r = run_process(slow);
    CHECK(r.timed_out);
    CHECK_FALSE(r.exited);

    auto missing = run_process({{"/nonexistent/binary"}});
    CHECK(missing.exit_code == 127);
}

TEST_CASE("choice lists round-trip through their rendering") {
    std::vector<Choice> choices{{"A", "West Virginia"}, {"B", "Louisiana"}, {"C", "Arizona (AZ)"}, {"D", "Oklahoma"}};
    CHECK(render_choices(choices) == "(A) West Virginia (B) Louisiana (C) Arizona (AZ) (D) Oklahoma");
    CHECK(parse_choices(render_choices(choices)) == choices);
    CHECK(parse_choices("West Virginia").empty());
    CHECK(parse_choices("(A) x (A) y").empty());
    CHECK(parse_choices("(A) (B) y").empty());
}
