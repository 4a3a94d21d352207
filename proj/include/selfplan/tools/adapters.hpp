// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "selfplan/tools/providers.hpp"
#include "selfplan/tools/registry.hpp"

#include <chrono>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace selfplan {

/// Splits after '.', '!' or '?' when followed by whitespace or end of text,
/// and at newlines. Empty pieces are dropped.
std::vector<std::string> split_sentences(std::string_view passage);

/// Retrieve[entity]: first paragraph of the entry, or similar titles.
class RetrieveTool : public ToolAdapter {
public:
    explicit RetrieveTool(std::shared_ptr<const CorpusProvider> corpus, std::size_t suggestions = 5);
    std::string run(std::string_view param, ToolSession& session) const override;

private:
    std::shared_ptr<const CorpusProvider> corpus_;
    std::size_t suggestions_;
};

/// Lookup[keyword]: next sentence containing the keyword in the last passage.
class LookupTool : public ToolAdapter {
public:
    std::string run(std::string_view param, ToolSession& session) const override;
};

/// BingSearch[query]: numbered result snippets; the snippets become the
/// Lookup passage.
class SearchTool : public ToolAdapter {
public:
    explicit SearchTool(std::shared_ptr<const SearchProvider> provider);
    std::string run(std::string_view param, ToolSession& session) const override;

private:
    std::shared_ptr<const SearchProvider> provider_;
};

struct CodeLimits {
    std::vector<std::string> interpreter;  // argv prefix; the script path is appended
    std::chrono::milliseconds timeout{2000};
    std::size_t output_cap = 16384;
};

/// Runs `source` with the interpreter in a scratch directory and returns
/// its merged stdout/stderr, or an "Error: ..." observation.
std::string run_code(std::string_view source, const CodeLimits& limits);

class CodeTool : public ToolAdapter {
public:
    explicit CodeTool(CodeLimits limits);
    std::string run(std::string_view param, ToolSession& session) const override;

private:
    CodeLimits limits_;
};

/// Fixed error observation for cards with no executable backing (or
/// deliberately disabled ones).
class UnavailableTool : public ToolAdapter {
public:
    explicit UnavailableTool(std::string message) : message_(std::move(message)) {}
    std::string run(std::string_view, ToolSession&) const override { return message_; }

private:
    std::string message_;
};

} // namespace selfplan
