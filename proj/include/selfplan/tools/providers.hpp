// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace selfplan {

struct CorpusPage {
    std::string title;
    std::vector<std::string> paragraphs;
};

/// Title-keyed encyclopedia source behind Retrieve.
class CorpusProvider {
public:
    virtual ~CorpusProvider() = default;
    virtual std::optional<CorpusPage> fetch(const std::string& title) const = 0;
    virtual std::vector<std::string> similar(const std::string& title, std::size_t limit) const = 0;
};

/// Local snapshot: one {"title", "paragraphs"} record per line. Titles match
/// after answer-style normalization (case, punctuation, articles).
class LocalCorpus : public CorpusProvider {
public:
    explicit LocalCorpus(std::vector<CorpusPage> pages);
    static std::shared_ptr<LocalCorpus> from_file(const std::filesystem::path& path);

    std::optional<CorpusPage> fetch(const std::string& title) const override;
    /// Ranked by shared normalized tokens, then edit distance, then title.
    std::vector<std::string> similar(const std::string& title, std::size_t limit) const override;

private:
    std::vector<CorpusPage> pages_;
    std::map<std::string, std::size_t> index_;
};

/// MediaWiki-style remote source (`/api/rest_v1/page/summary/<title>` and
/// the opensearch API). Opt-in; plain HTTP(S).
class RemoteCorpus : public CorpusProvider {
public:
    explicit RemoteCorpus(std::string endpoint);
    std::optional<CorpusPage> fetch(const std::string& title) const override;
    std::vector<std::string> similar(const std::string& title, std::size_t limit) const override;

private:
    std::string endpoint_;
};

/// Web search source behind BingSearch.
class SearchProvider {
public:
    virtual ~SearchProvider() = default;
    virtual std::vector<std::string> search(const std::string& query) const = 0;
};

/// Fixture search: one {"query", "results"} record per line, keyed by the
/// normalized query.
class FixtureSearch : public SearchProvider {
public:
    explicit FixtureSearch(std::map<std::string, std::vector<std::string>> results);
    static std::shared_ptr<FixtureSearch> from_file(const std::filesystem::path& path);
    std::vector<std::string> search(const std::string& query) const override;

private:
    std::map<std::string, std::vector<std::string>> results_;
};

/// Bing Web Search v7 client; the subscription key is read from `key_env`.
class RemoteSearch : public SearchProvider {
public:
    RemoteSearch(std::string endpoint, std::string key_env, std::size_t count = 5);
    std::vector<std::string> search(const std::string& query) const override;

private:
    std::string endpoint_;
    std::string key_env_;
    std::size_t count_;
};

} // namespace selfplan
