// SPDX-License-Identifier: Apache-2.0
#include "selfplan/tools/providers.hpp"

#include "selfplan/backend/http_backend.hpp"
#include "selfplan/core/answer.hpp"
#include "selfplan/core/records.hpp"
#include "selfplan/core/text.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <set>
#include <tuple>

namespace selfplan {

namespace {

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

httplib::Client make_client(const HttpUrl& url) {
    httplib::Client client(url.origin());
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(20, 0);
    client.set_follow_location(true);
    return client;
}

Json get_json(const HttpUrl& url, const std::string& path, const httplib::Params& params, const httplib::Headers& headers) {
    auto client = make_client(url);
    auto res = client.Get(url.base_path + path, params, headers);
    if (!res) throw TransportError("GET " + url.origin() + url.base_path + path + " failed: " + httplib::to_string(res.error()));
    if (res->status == 404) return Json();
    if (res->status != 200) throw EndpointError(res->status, res->body);
    try {
        return Json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
        throw TransportError("non-JSON reply from " + url.origin());
    }
}

} // namespace

LocalCorpus::LocalCorpus(std::vector<CorpusPage> pages) : pages_(std::move(pages)) {
    for (std::size_t i = 0; i < pages_.size(); ++i) {
        if (pages_[i].paragraphs.empty()) throw InvalidRecord("corpus entry '" + pages_[i].title + "' has no paragraphs");
        index_.emplace(normalize_answer(pages_[i].title), i);  // first entry wins
    }
}

std::shared_ptr<LocalCorpus> LocalCorpus::from_file(const std::filesystem::path& path) {
    std::vector<CorpusPage> pages;
    for (const auto& j : io::read_jsonl(path)) {
        try {
            pages.push_back({j.at("title").get<std::string>(), j.at("paragraphs").get<std::vector<std::string>>()});
        } catch (const nlohmann::json::exception& e) {
            throw InvalidRecord(path.string() + ": " + e.what());
        }
    }
    return std::make_shared<LocalCorpus>(std::move(pages));
}

std::optional<CorpusPage> LocalCorpus::fetch(const std::string& title) const {
    auto it = index_.find(normalize_answer(title));
    if (it == index_.end()) return std::nullopt;
    return pages_[it->second];
}

std::vector<std::string> LocalCorpus::similar(const std::string& title, std::size_t limit) const {
    const auto query = normalize_answer(title);
    const auto query_tokens = answer_tokens(title);
    const std::set<std::string> wanted(query_tokens.begin(), query_tokens.end());

    std::vector<std::tuple<std::size_t, std::size_t, std::string>> ranked;
    for (const auto& page : pages_) {
        std::size_t overlap = 0;
        std::set<std::string> seen;
        for (const auto& t : answer_tokens(page.title)) {
            if (wanted.count(t) && seen.insert(t).second) ++overlap;
        }
        ranked.emplace_back(overlap, edit_distance(query, normalize_answer(page.title)), page.title);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
        return std::get<2>(a) < std::get<2>(b);
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ranked.size() && out.size() < limit; ++i) out.push_back(std::get<2>(ranked[i]));
    return out;
}

RemoteCorpus::RemoteCorpus(std::string endpoint) : endpoint_(std::move(endpoint)) { HttpUrl::parse(endpoint_); }

std::optional<CorpusPage> RemoteCorpus::fetch(const std::string& title) const {
    const auto url = HttpUrl::parse(endpoint_);
    const auto slug = text::replace_all(std::string(text::trim(title)), " ", "_");
    auto reply = get_json(url, "/api/rest_v1/page/summary/" + httplib::detail::encode_query_param(slug), {}, {});
    if (!reply.is_object() || reply.value("type", "") == "disambiguation") return std::nullopt;
    const auto extract = reply.value("extract", "");
    if (text::trim(extract).empty()) return std::nullopt;
    CorpusPage page{reply.value("title", title), {}};
    for (auto line : text::split_lines(extract)) {
        if (!text::trim(line).empty()) page.paragraphs.emplace_back(text::trim(line));
    }
    return page;
}

std::vector<std::string> RemoteCorpus::similar(const std::string& title, std::size_t limit) const {
    const auto url = HttpUrl::parse(endpoint_);
    auto reply = get_json(url, "/w/api.php",
                          {{"action", "opensearch"}, {"search", title}, {"limit", std::to_string(limit)}, {"format", "json"}},
                          {});
    std::vector<std::string> out;
    if (reply.is_array() && reply.size() > 1 && reply[1].is_array()) {
        for (const auto& t : reply[1]) {
            if (t.is_string() && out.size() < limit) out.push_back(t.get<std::string>());
        }
    }
    return out;
}

FixtureSearch::FixtureSearch(std::map<std::string, std::vector<std::string>> results) {
    for (auto& [query, hits] : results) results_[normalize_answer(query)] = std::move(hits);
}

std::shared_ptr<FixtureSearch> FixtureSearch::from_file(const std::filesystem::path& path) {
    std::map<std::string, std::vector<std::string>> results;
    for (const auto& j : io::read_jsonl(path)) {
        try {
            results.emplace(j.at("query").get<std::string>(), j.at("results").get<std::vector<std::string>>());
        } catch (const nlohmann::json::exception& e) {
            throw InvalidRecord(path.string() + ": " + e.what());
        }
    }
    return std::make_shared<FixtureSearch>(std::move(results));
}

std::vector<std::string> FixtureSearch::search(const std::string& query) const {
    auto it = results_.find(normalize_answer(query));
    return it == results_.end() ? std::vector<std::string>{} : it->second;
}

RemoteSearch::RemoteSearch(std::string endpoint, std::string key_env, std::size_t count)
    : endpoint_(std::move(endpoint)), key_env_(std::move(key_env)), count_(count) {
    HttpUrl::parse(endpoint_);
}

std::vector<std::string> RemoteSearch::search(const std::string& query) const {
    const char* key = std::getenv(key_env_.c_str());
    if (!key || !*key) throw Error("search key variable " + key_env_ + " is not set");
    const auto url = HttpUrl::parse(endpoint_);
    auto reply = get_json(url, "", {{"q", query}, {"count", std::to_string(count_)}},
                          {{"Ocp-Apim-Subscription-Key", key}});
    std::vector<std::string> out;
    if (reply.is_object() && reply.contains("webPages")) {
        for (const auto& page : reply["webPages"].value("value", Json::array())) {
            const auto snippet = page.value("snippet", "");
            if (!snippet.empty()) out.push_back(snippet);
        }
    }
    return out;
}

} // namespace selfplan
