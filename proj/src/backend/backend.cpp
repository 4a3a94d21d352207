// SPDX-License-Identifier: Apache-2.0
#include "selfplan/backend/backend.hpp"

#include "selfplan/backend/http_backend.hpp"
#include "selfplan/backend/scripted_backend.hpp"
#include "selfplan/core/text.hpp"

#include <cctype>

namespace selfplan {

namespace {
constexpr std::string_view kScriptedScheme = "scripted://";
}

void BackendConfig::validate() const {
    if (endpoint.rfind(kScriptedScheme, 0) == 0) {
        if (endpoint.size() == kScriptedScheme.size()) throw InvalidRecord("scripted endpoint has no script path");
    } else {
        HttpUrl::parse(endpoint);
    }
    if (max_new_tokens < 1) throw InvalidRecord("max_new_tokens must be >= 1");
    if (temperature < 0) throw InvalidRecord("temperature must be >= 0");
    if (!(top_p > 0 && top_p <= 1)) throw InvalidRecord("top_p must be in (0, 1]");
    if (max_retries < 0) throw InvalidRecord("max_retries must be >= 0");
    if (parallelism < 1) throw InvalidRecord("parallelism must be >= 1");
    if (timeout.count() <= 0) throw InvalidRecord("timeout must be positive");
}

EndpointError::EndpointError(int status, const std::string& body)
    : BackendError("endpoint returned HTTP " + std::to_string(status) + ": " + text::utf8_truncate(body, 300)),
      status_(status) {}

std::string truncate_at_stop(std::string text, std::span<const std::string> stops) {
    auto cut = std::string::npos;
    for (const auto& stop : stops) {
        if (stop.empty()) continue;
        auto pos = text.find(stop);
        if (pos < cut) cut = pos;
    }
    if (cut != std::string::npos) text.resize(cut);
    return text;
}

std::uint64_t approx_tokens(std::string_view text) noexcept {
    std::uint64_t count = 0;
    bool in_word = false;
    for (char c : text) {
        bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_word) ++count;
        in_word = !space;
    }
    return count;
}

void UsageCounter::record(std::uint64_t prompt_tokens, std::uint64_t completion_tokens) noexcept {
    calls_.fetch_add(1, std::memory_order_relaxed);
    prompt_.fetch_add(prompt_tokens, std::memory_order_relaxed);
    completion_.fetch_add(completion_tokens, std::memory_order_relaxed);
}

UsageStats UsageCounter::snapshot() const noexcept {
    return UsageStats{calls_.load(), prompt_.load(), completion_.load()};
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config, const std::filesystem::path& base_dir) {
    config.validate();
    if (config.endpoint.rfind(kScriptedScheme, 0) == 0) {
        std::filesystem::path script = config.endpoint.substr(kScriptedScheme.size());
        if (script.is_relative() && !base_dir.empty()) script = base_dir / script;
        return ScriptedBackend::from_file(script, config);
    }
    return std::make_shared<HttpBackend>(config);
}

void Transcript::append(Exchange exchange) {
    std::lock_guard lock(mutex_);
    entries_.push_back(std::move(exchange));
}

std::vector<Exchange> Transcript::entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

std::size_t Transcript::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

RecordingBackend::RecordingBackend(std::shared_ptr<Backend> inner, std::string label,
                                   std::shared_ptr<Transcript> transcript)
    : inner_(std::move(inner)), label_(std::move(label)), transcript_(std::move(transcript)) {}

std::string RecordingBackend::complete(const CompletionRequest& request) {
    auto response = inner_->complete(request);
    transcript_->append(Exchange{label_, request.prompt, response});
    return response;
}

} // namespace selfplan
