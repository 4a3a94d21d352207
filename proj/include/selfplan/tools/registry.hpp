// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "selfplan/core/types.hpp"

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace selfplan {

/// Per-trajectory tool state. Never shared between trajectories.
class ToolSession {
public:
    const std::optional<std::string>& last_passage() const noexcept { return last_passage_; }
    const std::optional<std::string>& lookup_keyword() const noexcept { return lookup_keyword_; }
    std::size_t lookup_cursor() const noexcept { return lookup_cursor_; }

    /// Replaces the passage Lookup searches; the cursor restarts.
    void set_passage(std::string passage);
    /// Switches the Lookup keyword; the cursor restarts when it differs.
    void set_keyword(std::string keyword);
    void advance_cursor() noexcept { ++lookup_cursor_; }

private:
    std::optional<std::string> last_passage_;
    std::optional<std::string> lookup_keyword_;
    std::size_t lookup_cursor_ = 0;
};

/// Executable side of a tool card. Failures may throw; the registry turns
/// them into observation text.
class ToolAdapter {
public:
    virtual ~ToolAdapter() = default;
    virtual std::string run(std::string_view param, ToolSession& session) const = 0;
};

/// Tool name to adapter map. Read-only once built; safe to share.
class ToolRegistry {
public:
    static constexpr std::size_t kDefaultObservationCap = 2048;

    explicit ToolRegistry(const ToolLibrary& library, std::size_t observation_cap = kDefaultObservationCap);

    /// `name` must be a card in the library (case-insensitive).
    void add(std::string_view name, std::shared_ptr<const ToolAdapter> adapter);

    /// Dispatches `action` and returns the observation, capped to
    /// `observation_cap()` characters. Never throws for tool-level failures.
    std::string invoke(ToolSession& session, const Action& action) const;

    bool contains(std::string_view name) const;
    /// Registered card names in registration order.
    std::vector<std::string> names() const;
    std::size_t observation_cap() const noexcept { return observation_cap_; }

private:
    std::vector<std::string> library_names_;
    std::vector<std::pair<std::string, std::shared_ptr<const ToolAdapter>>> adapters_;
    std::size_t observation_cap_;
};

inline std::string invoke(const ToolRegistry& registry, ToolSession& session, const Action& action) {
    return registry.invoke(session, action);
}

} // namespace selfplan
