// SPDX-License-Identifier: Apache-2.0
#include "selfplan/backend/scripted_backend.hpp"

#include "selfplan/core/records.hpp"
#include "selfplan/core/text.hpp"

namespace selfplan {

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> script, BackendConfig config)
    : config_(std::move(config)), script_(std::move(script)), consumed_(script_.size(), false) {}

BackendConfig ScriptedBackend::default_config() {
    BackendConfig config;
    config.endpoint = "scripted://inline";
    config.model_id = "scripted";
    return config;
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path, BackendConfig config) {
    std::vector<ScriptEntry> script;
    for (const auto& j : io::read_jsonl(path)) {
        try {
            script.push_back(ScriptEntry{j.value("match", std::string("*")), j.at("response").get<std::string>()});
        } catch (const nlohmann::json::exception& e) {
            throw InvalidRecord(path.string() + ": bad script entry: " + e.what());
        }
    }
    return std::make_shared<ScriptedBackend>(std::move(script), std::move(config));
}

std::string ScriptedBackend::complete(const CompletionRequest& request) {
    if (text::trim(request.prompt).empty()) throw InvalidRecord("completion prompt is empty");
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < script_.size(); ++i) {
        if (consumed_[i]) continue;
        const auto& entry = script_[i];
        if (entry.match != "*" && request.prompt.find(entry.match) == std::string::npos) continue;
        consumed_[i] = true;
        const auto& stops = request.overrides.stop_sequences ? *request.overrides.stop_sequences
                                                             : config_.stop_sequences;
        auto response = truncate_at_stop(entry.response, stops);
        usage_.record(approx_tokens(request.prompt), approx_tokens(response));
        transcript_.push_back(Exchange{config_.endpoint, request.prompt, response});
        return response;
    }
    auto tail = request.prompt.size() > 200 ? request.prompt.substr(request.prompt.size() - 200) : request.prompt;
    throw ScriptExhausted("no scripted response left for prompt ending: ..." + tail);
}

std::size_t ScriptedBackend::remaining() const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (bool used : consumed_) n += used ? 0 : 1;
    return n;
}

std::vector<Exchange> ScriptedBackend::transcript() const {
    std::lock_guard lock(mutex_);
    return transcript_;
}

} // namespace selfplan
