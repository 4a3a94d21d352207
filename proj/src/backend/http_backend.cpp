// SPDX-License-Identifier: Apache-2.0
#include "selfplan/backend/http_backend.hpp"

#include "selfplan/core/records.hpp"
#include "selfplan/core/text.hpp"

#include <httplib.h>

#include <cstdlib>
#include <regex>
#include <thread>

namespace selfplan {

std::string HttpUrl::origin() const { return scheme + "://" + host + ":" + std::to_string(port); }

HttpUrl HttpUrl::parse(const std::string& url) {
    static const std::regex pattern(R"(^(https?)://([^/:\s]+)(?::(\d+))?(/[^\s]*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, pattern)) throw InvalidRecord("malformed endpoint URL: '" + url + "'");
    HttpUrl out;
    out.scheme = m[1];
    out.host = m[2];
    out.port = m[3].matched ? std::stoi(m[3]) : (out.scheme == "https" ? 443 : 80);
    out.base_path = m[4].matched ? std::string(m[4]) : std::string();
    while (!out.base_path.empty() && out.base_path.back() == '/') out.base_path.pop_back();
    return out;
}

namespace {

class Slot {
public:
    Slot(std::mutex& m, std::condition_variable& cv, int& in_flight, int limit) : m_(m), cv_(cv), n_(in_flight) {
        std::unique_lock lock(m_);
        cv_.wait(lock, [&] { return n_ < limit; });
        ++n_;
    }
    ~Slot() {
        {
            std::lock_guard lock(m_);
            --n_;
        }
        cv_.notify_one();
    }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

private:
    std::mutex& m_;
    std::condition_variable& cv_;
    int& n_;
};

bool retryable_status(int status) { return status == 429 || status >= 500; }

} // namespace

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)), url_(HttpUrl::parse(config_.endpoint)) {
    config_.validate();
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
    }
}

std::string HttpBackend::attempt(const std::string& body) {
    httplib::Client client(url_.origin());
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    const auto started = std::chrono::steady_clock::now();
    auto res = client.Post(url_.base_path + "/chat/completions", headers, body, "application/json");
    if (!res) {
        const auto elapsed = std::chrono::steady_clock::now() - started;
        if (res.error() == httplib::Error::ConnectionTimeout || elapsed >= config_.timeout) {
            throw TimeoutError("request to " + config_.endpoint + " timed out");
        }
        throw TransportError("request to " + config_.endpoint + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) throw EndpointError(res->status, res->body);
    return res->body;
}

std::string HttpBackend::complete(const CompletionRequest& request) {
    if (text::trim(request.prompt).empty()) throw InvalidRecord("completion prompt is empty");
    const auto& o = request.overrides;
    const auto& stops = o.stop_sequences ? *o.stop_sequences : config_.stop_sequences;

    Json body = Json::object();
    body["model"] = config_.served_model();
    body["messages"] = Json::array({Json{{"role", "user"}, {"content", request.prompt}}});
    body["temperature"] = o.temperature.value_or(config_.temperature);
    body["top_p"] = o.top_p.value_or(config_.top_p);
    body["max_tokens"] = o.max_new_tokens.value_or(config_.max_new_tokens);
    if (!stops.empty()) {
        // most servers accept at most four
        std::vector<std::string> wire(stops.begin(), stops.begin() + std::min<std::size_t>(stops.size(), 4));
        body["stop"] = wire;
    }
    body["stream"] = false;
    const auto payload = body.dump();

    Slot slot(slots_mutex_, slots_cv_, in_flight_, config_.parallelism);
    std::string raw;
    for (int attempt_no = 0;; ++attempt_no) {
        try {
            raw = attempt(payload);
            break;
        } catch (const EndpointError& e) {
            if (!retryable_status(e.status()) || attempt_no >= config_.max_retries) throw;
        } catch (const TransportError&) {
            if (attempt_no >= config_.max_retries) throw;
        } catch (const TimeoutError&) {
            if (attempt_no >= config_.max_retries) throw;
        }
        std::this_thread::sleep_for(config_.retry_backoff * (1 << std::min(attempt_no, 10)));
    }

    Json reply;
    try {
        reply = Json::parse(raw);
    } catch (const nlohmann::json::parse_error&) {
        throw EmptyCompletion("endpoint returned a non-JSON body");
    }
    const auto choices = reply.find("choices");
    if (choices == reply.end() || !choices->is_array() || choices->empty()) {
        throw EmptyCompletion("endpoint returned no choices");
    }
    const auto& first = (*choices)[0];
    std::string content;
    if (first.contains("message") && first["message"].contains("content") && first["message"]["content"].is_string()) {
        content = first["message"]["content"].get<std::string>();
    } else if (first.contains("text") && first["text"].is_string()) {
        content = first["text"].get<std::string>();
    } else {
        throw EmptyCompletion("endpoint returned a choice without content");
    }

    std::uint64_t prompt_tokens = approx_tokens(request.prompt);
    std::uint64_t completion_tokens = approx_tokens(content);
    if (auto usage = reply.find("usage"); usage != reply.end() && usage->is_object()) {
        prompt_tokens = usage->value("prompt_tokens", prompt_tokens);
        completion_tokens = usage->value("completion_tokens", completion_tokens);
    }
    usage_.record(prompt_tokens, completion_tokens);
    return truncate_at_stop(std::move(content), stops);
}

} // namespace selfplan
