// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "selfplan/tools/registry.hpp"

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>

namespace selfplan {

struct ToolsConfig {
    std::size_t observation_cap = ToolRegistry::kDefaultObservationCap;
    std::size_t suggestion_count = 5;

    std::filesystem::path corpus_path;   // local snapshot for Retrieve
    std::string remote_corpus_endpoint;  // used when no snapshot is given

    std::filesystem::path search_fixtures_path;  // fixture results for BingSearch
    std::string remote_search_endpoint;
    std::string search_key_env = "BING_SEARCH_V7_SUBSCRIPTION_KEY";

    bool code_enabled = false;
    std::string code_interpreter;  // e.g. "python3 -I"
    std::chrono::milliseconds code_timeout{2000};
};

/// Registers an adapter for every selected card: Retrieve, Lookup,
/// BingSearch and Code map to their implementations; other cards get an
/// "unavailable" adapter. Throws InvalidRecord when a selected tool lacks
/// the configuration it needs.
std::shared_ptr<const ToolRegistry> build_registry(const ToolLibrary& library, const SelectedTools& selected,
                                                   const ToolsConfig& config);

} // namespace selfplan
