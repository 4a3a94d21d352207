// SPDX-License-Identifier: Apache-2.0
#include "selfplan/tools/registry.hpp"

#include "selfplan/core/error.hpp"
#include "selfplan/core/text.hpp"

namespace selfplan {

void ToolSession::set_passage(std::string passage) {
    last_passage_ = std::move(passage);
    lookup_keyword_.reset();
    lookup_cursor_ = 0;
}

void ToolSession::set_keyword(std::string keyword) {
    if (lookup_keyword_ && *lookup_keyword_ == keyword) return;
    lookup_keyword_ = std::move(keyword);
    lookup_cursor_ = 0;
}

ToolRegistry::ToolRegistry(const ToolLibrary& library, std::size_t observation_cap)
    : observation_cap_(observation_cap) {
    if (observation_cap_ == 0) throw InvalidRecord("observation cap must be positive");
    for (const auto& spec : library.tools()) library_names_.push_back(spec.name);
}

void ToolRegistry::add(std::string_view name, std::shared_ptr<const ToolAdapter> adapter) {
    if (!adapter) throw InvalidRecord("null adapter for tool '" + std::string(name) + "'");
    const std::string* card = nullptr;
    for (const auto& n : library_names_) {
        if (text::iequals(n, name)) card = &n;
    }
    if (!card) throw InvalidRecord("tool '" + std::string(name) + "' is not in the tool library");
    for (auto& [existing, slot] : adapters_) {
        if (existing == *card) {
            slot = std::move(adapter);
            return;
        }
    }
    adapters_.emplace_back(*card, std::move(adapter));
}

bool ToolRegistry::contains(std::string_view name) const {
    for (const auto& entry : adapters_) {
        if (text::iequals(entry.first, name)) return true;
    }
    return false;
}

std::vector<std::string> ToolRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& entry : adapters_) out.push_back(entry.first);
    return out;
}

std::string ToolRegistry::invoke(ToolSession& session, const Action& action) const {
    const ToolAdapter* adapter = nullptr;
    for (const auto& entry : adapters_) {
        if (text::iequals(entry.first, action.name)) adapter = entry.second.get();
    }
    std::string observation;
    if (!adapter) {
        observation = "Error: unknown tool '" + action.name + "'. Available: " + text::join(names(), ", ") + ".";
    } else {
        try {
            observation = adapter->run(action.param, session);
        } catch (const std::exception& e) {
            observation = std::string("Error: ") + e.what();
        }
    }
    if (text::utf8_length(observation) > observation_cap_) observation = text::utf8_truncate(observation, observation_cap_);
    return observation;
}

} // namespace selfplan
