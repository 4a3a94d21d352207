// SPDX-License-Identifier: Apache-2.0
#include "selfplan/tools/adapters.hpp"

#include "selfplan/core/error.hpp"
#include "selfplan/core/process.hpp"
#include "selfplan/core/records.hpp"
#include "selfplan/core/text.hpp"

#include <cstdlib>
#include <sstream>

namespace selfplan {

std::vector<std::string> split_sentences(std::string_view passage) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        auto piece = text::trim(current);
        if (!piece.empty()) out.emplace_back(piece);
        current.clear();
    };
    for (std::size_t i = 0; i < passage.size(); ++i) {
        const char c = passage[i];
        if (c == '\n') {
            flush();
            continue;
        }
        current += c;
        if ((c == '.' || c == '!' || c == '?') &&
            (i + 1 == passage.size() || passage[i + 1] == ' ' || passage[i + 1] == '\t' || passage[i + 1] == '\n')) {
            flush();
        }
    }
    flush();
    return out;
}

RetrieveTool::RetrieveTool(std::shared_ptr<const CorpusProvider> corpus, std::size_t suggestions)
    : corpus_(std::move(corpus)), suggestions_(suggestions) {}

std::string RetrieveTool::run(std::string_view param, ToolSession& session) const {
    const std::string entity(text::trim(param));
    if (entity.empty()) return "Error: Retrieve needs an entity, e.g. Retrieve[Milhouse].";
    if (auto page = corpus_->fetch(entity)) {
        session.set_passage(text::join(page->paragraphs, "\n"));
        return page->paragraphs.front();
    }
    std::string out = "Could not find [" + entity + "]. Similar: [";
    const auto titles = corpus_->similar(entity, suggestions_);
    for (std::size_t i = 0; i < titles.size(); ++i) {
        if (i) out += ", ";
        out += "'" + titles[i] + "'";
    }
    return out + "].";
}

std::string LookupTool::run(std::string_view param, ToolSession& session) const {
    if (!session.last_passage()) return "Error: no passage to look up in.";
    const std::string keyword(text::trim(param));
    if (keyword.empty()) return "Error: Lookup needs a keyword, e.g. Lookup[river].";
    session.set_keyword(keyword);

    std::vector<std::string> hits;
    for (auto& sentence : split_sentences(*session.last_passage())) {
        if (text::ifind(sentence, keyword) != std::string_view::npos) hits.push_back(std::move(sentence));
    }
    const auto cursor = session.lookup_cursor();
    if (cursor >= hits.size()) return "No more results.";
    session.advance_cursor();
    return "(Result " + std::to_string(cursor + 1) + " / " + std::to_string(hits.size()) + ") " + hits[cursor];
}

SearchTool::SearchTool(std::shared_ptr<const SearchProvider> provider) : provider_(std::move(provider)) {}

std::string SearchTool::run(std::string_view param, ToolSession& session) const {
    const std::string query(text::trim(param));
    if (query.empty()) return "Error: BingSearch needs a query.";
    const auto results = provider_->search(query);
    if (results.empty()) return "No results found for [" + query + "].";
    session.set_passage(text::join(results, "\n"));
    std::string out;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (i) out += '\n';
        out += "(" + std::to_string(i + 1) + ") " + results[i];
    }
    return out;
}

namespace {

std::string seconds_text(std::chrono::milliseconds d) {
    std::ostringstream s;
    if (d.count() % 1000 == 0) {
        s << d.count() / 1000;
    } else {
        s << static_cast<double>(d.count()) / 1000.0;
    }
    return s.str() + "s";
}

} // namespace

std::string run_code(std::string_view source, const CodeLimits& limits) {
    if (limits.interpreter.empty()) return "Error: no interpreter configured for Code.";
    std::string scratch_template = (std::filesystem::temp_directory_path() / "selfplan_code_XXXXXX").string();
    if (!::mkdtemp(scratch_template.data())) return "Error: cannot create a scratch directory.";
    const std::filesystem::path scratch(scratch_template);

    std::string observation;
    try {
        io::write_text(scratch / "main.py", std::string(source) + "\n");
        ProcessSpec spec;
        spec.argv = limits.interpreter;
        spec.argv.push_back((scratch / "main.py").string());
        spec.working_dir = scratch.string();
        spec.timeout = limits.timeout;
        spec.output_cap = limits.output_cap;
        const auto result = run_process(spec);
        if (result.timed_out) {
            observation = "Error: timeout after " + seconds_text(limits.timeout);
        } else if (!result.exited) {
            observation = "Error: killed by signal " + std::to_string(result.term_signal) + "\n" + result.output;
        } else if (result.exit_code != 0) {
            observation = "Error: exit status " + std::to_string(result.exit_code) + "\n" + result.output;
        } else {
            observation = result.output;
        }
    } catch (const std::exception& e) {
        observation = std::string("Error: ") + e.what();
    }
    std::error_code ec;
    std::filesystem::remove_all(scratch, ec);
    return observation;
}

CodeTool::CodeTool(CodeLimits limits) : limits_(std::move(limits)) {
    if (limits_.interpreter.empty()) throw InvalidRecord("Code tool needs an interpreter command");
}

std::string CodeTool::run(std::string_view param, ToolSession&) const { return run_code(param, limits_); }

} // namespace selfplan
