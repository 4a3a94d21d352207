// SPDX-License-Identifier: Apache-2.0
#include "selfplan/tools/factory.hpp"

#include "selfplan/core/error.hpp"
#include "selfplan/core/text.hpp"
#include "selfplan/tools/adapters.hpp"

#include <sstream>

namespace selfplan {

namespace {

std::vector<std::string> split_words(const std::string& command) {
    std::istringstream in(command);
    std::vector<std::string> out;
    for (std::string word; in >> word;) out.push_back(word);
    return out;
}

} // namespace

std::shared_ptr<const ToolRegistry> build_registry(const ToolLibrary& library, const SelectedTools& selected,
                                                   const ToolsConfig& config) {
    auto registry = std::make_shared<ToolRegistry>(library, config.observation_cap);
    std::shared_ptr<const CorpusProvider> corpus;
    std::shared_ptr<const SearchProvider> search;

    for (const auto& spec : selected.tools()) {
        const auto& name = spec.name;
        if (text::iequals(name, "Retrieve")) {
            if (!corpus) {
                if (!config.corpus_path.empty()) {
                    corpus = LocalCorpus::from_file(config.corpus_path);
                } else if (!config.remote_corpus_endpoint.empty()) {
                    corpus = std::make_shared<RemoteCorpus>(config.remote_corpus_endpoint);
                } else {
                    throw InvalidRecord("Retrieve is selected but no corpus is configured");
                }
            }
            registry->add(name, std::make_shared<RetrieveTool>(corpus, config.suggestion_count));
        } else if (text::iequals(name, "Lookup")) {
            registry->add(name, std::make_shared<LookupTool>());
        } else if (text::iequals(name, "BingSearch")) {
            if (!search) {
                if (!config.search_fixtures_path.empty()) {
                    search = FixtureSearch::from_file(config.search_fixtures_path);
                } else if (!config.remote_search_endpoint.empty()) {
                    search = std::make_shared<RemoteSearch>(config.remote_search_endpoint, config.search_key_env);
                } else {
                    throw InvalidRecord("BingSearch is selected but no search source is configured");
                }
            }
            registry->add(name, std::make_shared<SearchTool>(search));
        } else if (text::iequals(name, "Code")) {
            if (config.code_enabled) {
                CodeLimits limits;
                limits.interpreter = split_words(config.code_interpreter);
                if (limits.interpreter.empty()) throw InvalidRecord("Code is enabled but no interpreter is configured");
                limits.timeout = config.code_timeout;
                registry->add(name, std::make_shared<CodeTool>(std::move(limits)));
            } else {
                registry->add(name, std::make_shared<UnavailableTool>("Error: the Code tool is disabled."));
            }
        } else {
            registry->add(name, std::make_shared<UnavailableTool>("Error: tool '" + name +
                                                                  "' is not available in this environment."));
        }
    }
    return registry;
}

} // namespace selfplan
