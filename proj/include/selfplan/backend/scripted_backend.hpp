// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "selfplan/backend/backend.hpp"

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

namespace selfplan {

/// One scripted reply. `match` is a substring the prompt must contain, or
/// "*" to match any prompt.
struct ScriptEntry {
    std::string match;
    std::string response;
};

using Script = std::vector<ScriptEntry>;

/// Deterministic offline backend. Each call consumes the earliest unconsumed
/// entry whose matcher accepts the prompt; a wildcard-only script is
/// therefore replayed strictly in order. Calls are serialized internally.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::vector<ScriptEntry> script, BackendConfig config = default_config());

    /// Script file: one {"match": ..., "response": ...} record per line.
    static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& path, BackendConfig config);

    static BackendConfig default_config();

    using Backend::complete;
    std::string complete(const CompletionRequest& request) override;
    const BackendConfig& config() const override { return config_; }
    UsageStats usage() const override { return usage_.snapshot(); }

    std::size_t remaining() const;
    /// Prompt/response pairs in call order.
    std::vector<Exchange> transcript() const;

private:
    BackendConfig config_;
    mutable std::mutex mutex_;
    std::vector<ScriptEntry> script_;
    std::vector<bool> consumed_;
    std::vector<Exchange> transcript_;
    UsageCounter usage_;
};

} // namespace selfplan
