// SPDX-License-Identifier: Apache-2.0
#include "selfplan/core/records.hpp"
#include "selfplan/core/text.hpp"
#include "selfplan/tools/adapters.hpp"
#include "selfplan/tools/factory.hpp"

#include <doctest.h>

#include <thread>

using namespace selfplan;

namespace {

ToolLibrary library() {
    return ToolLibrary({{"BingSearch", "web search", "BingSearch[query]"},
                        {"Retrieve", "encyclopedia", "Retrieve[entity]"},
                        {"Lookup", "find in page", "Lookup[keyword]"},
                        {"Image2Text", "captions", "Image2Text[image]"},
                        {"Code", "python", "Code[python]"}});
}

std::shared_ptr<LocalCorpus> corpus() {
    return std::make_shared<LocalCorpus>(std::vector<CorpusPage>{
        {"Milhouse", {"Milhouse Mussolini Van Houten is a character in The Simpsons.", "He is voiced by Pamela Hayden."}},
        {"Mississippi River", {"The Mississippi River is the second-longest river in North America.",
                               "It flows south. The river drains 31 states! Its source is Lake Itasca."}},
        {"Milhouse Van Houten", {"Alias page."}},
        {"Lake Itasca", {"Lake Itasca is a small glacial lake."}}});
}

ToolRegistry registry_with_corpus(std::size_t cap = ToolRegistry::kDefaultObservationCap) {
    ToolRegistry registry(library(), cap);
    registry.add("Retrieve", std::make_shared<RetrieveTool>(corpus()));
    registry.add("Lookup", std::make_shared<LookupTool>());
    return registry;
}

} // namespace

TEST_CASE("Retrieve returns the first paragraph and primes the session") {
    auto registry = registry_with_corpus();
    ToolSession session;
    CHECK(registry.invoke(session, {"Retrieve", "Milhouse"}) ==
          "Milhouse Mussolini Van Houten is a character in The Simpsons.");
    REQUIRE(session.last_passage());
    CHECK(session.last_passage()->find("Pamela Hayden") != std::string::npos);
    // title match ignores case and articles
    CHECK(registry.invoke(session, {"Retrieve", "the mississippi river"}).rfind("The Mississippi River", 0) == 0);
}

TEST_CASE("Retrieve of a missing entity suggests similar titles") {
    auto registry = registry_with_corpus();
    ToolSession session;
    const auto obs = registry.invoke(session, {"Retrieve", "Milhouse Houten"});
    CHECK(obs == "Could not find [Milhouse Houten]. Similar: ['Milhouse Van Houten', 'Milhouse', 'Lake Itasca', "
                 "'Mississippi River'].");
    CHECK_FALSE(session.last_passage());
}

TEST_CASE("Lookup walks matching sentences with a cursor") {
    auto registry = registry_with_corpus();
    ToolSession session;
    CHECK(registry.invoke(session, {"Lookup", "river"}) == "Error: no passage to look up in.");

    registry.invoke(session, {"Retrieve", "Mississippi River"});
    CHECK(registry.invoke(session, {"Lookup", "river"}) ==
          "(Result 1 / 2) The Mississippi River is the second-longest river in North America.");
    CHECK(registry.invoke(session, {"Lookup", "river"}) == "(Result 2 / 2) The river drains 31 states!");
    CHECK(registry.invoke(session, {"Lookup", "river"}) == "No more results.");

    // a new keyword restarts the cursor
    CHECK(registry.invoke(session, {"Lookup", "Itasca"}) == "(Result 1 / 1) Its source is Lake Itasca.");
    CHECK(session.lookup_cursor() == 1);
    // a new passage restarts it as well
    registry.invoke(session, {"Retrieve", "Lake Itasca"});
    CHECK(session.lookup_cursor() == 0);
    CHECK_FALSE(session.lookup_keyword());
    CHECK(registry.invoke(session, {"Lookup", "itasca"}) == "(Result 1 / 1) Lake Itasca is a small glacial lake.");
}

TEST_CASE("sentence splitting") {
    CHECK(split_sentences("A b. C d? E!\nF") == std::vector<std::string>{"A b.", "C d?", "E!", "F"});
    CHECK(split_sentences("Version 3.5 is out.") == std::vector<std::string>{"Version 3.5 is out."});
    CHECK(split_sentences("").empty());
}

TEST_CASE("unknown tools and adapter failures become observations") {
    auto registry = registry_with_corpus();
    ToolSession session;
    CHECK(registry.invoke(session, {"Teleport", "x"}) == "Error: unknown tool 'Teleport'. Available: Retrieve, Lookup.");

    struct Throwing : ToolAdapter {
        std::string run(std::string_view, ToolSession&) const override { throw std::runtime_error("boom"); }
    };
    registry.add("BingSearch", std::make_shared<Throwing>());
    CHECK(registry.invoke(session, {"bingsearch", "q"}) == "Error: boom");
    CHECK_THROWS_AS(registry.add("NotInLibrary", std::make_shared<LookupTool>()), InvalidRecord);
}

TEST_CASE("observations never exceed the cap") {
    struct Long : ToolAdapter {
        std::string run(std::string_view p, ToolSession&) const override {
            return std::string(std::stoul(std::string(p)), 'x') + "\xc3\xa9";
        }
    };
    ToolRegistry registry(library(), 16);
    registry.add("Code", std::make_shared<Long>());
    ToolSession session;
    for (int n : {0, 10, 15, 16, 100, 5000}) {
        auto obs = registry.invoke(session, {"Code", std::to_string(n)});
        CHECK(text::utf8_length(obs) <= 16);
        CHECK(text::utf8_length(obs) == std::min<std::size_t>(n + 1, 16));
    }
    ToolRegistry defaults(library());
    defaults.add("Code", std::make_shared<Long>());
    CHECK(text::utf8_length(defaults.invoke(session, {"Code", "9999"})) == 2048);
}

TEST_CASE("sessions are isolated across concurrent trajectories") {
    auto registry = registry_with_corpus();
    std::vector<std::string> seen(2);
    auto worker = [&](int idx, const std::string& entity) {
        ToolSession session;
        for (int i = 0; i < 200; ++i) {
            registry.invoke(session, {"Retrieve", entity});
            seen[idx] = registry.invoke(session, {"Lookup", idx == 0 ? "Simpsons" : "south"});
            if (seen[idx].rfind("(Result 1", 0) != 0) return;
        }
    };
    std::thread a(worker, 0, "Milhouse");
    std::thread b(worker, 1, "Mississippi River");
    a.join();
    b.join();
    CHECK(seen[0] == "(Result 1 / 1) Milhouse Mussolini Van Houten is a character in The Simpsons.");
    CHECK(seen[1] == "(Result 1 / 1) It flows south.");
}

TEST_CASE("fixture search feeds Lookup") {
    ToolRegistry registry(library());
    registry.add("BingSearch", std::make_shared<SearchTool>(std::make_shared<FixtureSearch>(
                                   std::map<std::string, std::vector<std::string>>{
                                       {"popular dog breeds in the United States",
                                        {"Labrador Retrievers lead the list.", "French Bulldogs rank second."}}})));
    registry.add("Lookup", std::make_shared<LookupTool>());
    ToolSession session;
    CHECK(registry.invoke(session, {"BingSearch", "Popular dog breeds in the United States"}) ==
          "(1) Labrador Retrievers lead the list.\n(2) French Bulldogs rank second.");
    CHECK(registry.invoke(session, {"Lookup", "bulldogs"}) == "(Result 1 / 1) French Bulldogs rank second.");
    CHECK(registry.invoke(session, {"BingSearch", "nothing here"}) == "No results found for [nothing here].");
}

TEST_CASE("Code runs in a subprocess with a time limit") {
    CodeLimits limits{{"python3", "-I"}, std::chrono::milliseconds(2000)};
    CHECK(run_code("print(\"hello world!\")", limits) == "hello world!\n");

    const auto started = std::chrono::steady_clock::now();
    CHECK(run_code("while True:\n    pass", limits) == "Error: timeout after 2s");
    CHECK(std::chrono::steady_clock::now() - started < std::chrono::seconds(5));

    const auto syntax = run_code("print(", limits);
    CHECK(syntax.rfind("Error: exit status 1\n", 0) == 0);
    CHECK(syntax.find("SyntaxError") != std::string::npos);
}

TEST_CASE("build_registry wires only the selected tools") {
    auto dir = std::filesystem::temp_directory_path() / "selfplan_test_tools";
    io::write_text(dir / "corpus.jsonl", "{\"title\":\"Milhouse\",\"paragraphs\":[\"First.\",\"Second.\"]}\n");
    auto lib = library();

    ToolsConfig config;
    config.corpus_path = dir / "corpus.jsonl";
    auto selected = SelectedTools::from_names(lib, {"Retrieve", "Lookup", "Code"}, 3);
    auto registry = build_registry(lib, selected, config);
    CHECK(registry->names() == std::vector<std::string>{"Retrieve", "Lookup", "Code"});
    ToolSession session;
    CHECK(registry->invoke(session, {"Retrieve", "milhouse"}) == "First.");
    CHECK(registry->invoke(session, {"Code", "print(1)"}) == "Error: the Code tool is disabled.");
    CHECK(registry->invoke(session, {"BingSearch", "x"}).rfind("Error: unknown tool 'BingSearch'", 0) == 0);

    auto with_image = SelectedTools::from_names(lib, {"Image2Text"}, 1);
    CHECK(build_registry(lib, with_image, config)->invoke(session, {"Image2Text", "image"}) ==
          "Error: tool 'Image2Text' is not available in this environment.");

    auto with_search = SelectedTools::from_names(lib, {"BingSearch"}, 1);
    CHECK_THROWS_AS(build_registry(lib, with_search, config), InvalidRecord);

    config.code_enabled = true;
    config.code_interpreter = "python3 -I";
    auto code = build_registry(lib, SelectedTools::from_names(lib, {"Code"}, 1), config);
    CHECK(code->invoke(session, {"Code", "print(6*7)"}) == "42\n");
    std::filesystem::remove_all(dir);
}
