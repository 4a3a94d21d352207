// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "selfplan/backend/backend.hpp"

#include <condition_variable>
#include <mutex>
#include <string>

namespace selfplan {

/// Parts of an `http(s)://host[:port][/base]` URL.
struct HttpUrl {
    std::string scheme;
    std::string host;
    int port = 0;
    std::string base_path;  // no trailing slash

    /// "scheme://host:port"
    std::string origin() const;
    static HttpUrl parse(const std::string& url);
};

/// OpenAI-compatible `POST {base}/chat/completions` client. The prompt is
/// sent as a single user message; the served model name is the adapter id
/// when one is configured. Transport failures, timeouts, 429 and 5xx are
/// retried with exponential backoff up to `max_retries`.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(BackendConfig config);

    using Backend::complete;
    std::string complete(const CompletionRequest& request) override;
    const BackendConfig& config() const override { return config_; }
    UsageStats usage() const override { return usage_.snapshot(); }

private:
    std::string attempt(const std::string& body);

    BackendConfig config_;
    HttpUrl url_;
    std::string api_key_;
    UsageCounter usage_;

    std::mutex slots_mutex_;
    std::condition_variable slots_cv_;
    int in_flight_ = 0;
};

} // namespace selfplan
