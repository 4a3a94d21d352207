// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "selfplan/core/types.hpp"

#include <string_view>

namespace selfplan {

/// Token-level F1 over normalized whitespace tokens, with multiset overlap.
/// Zero when either side has no tokens.
double token_f1(std::string_view prediction, std::string_view gold);

/// 1 when both texts carry the same leading choice letter, else 0.
double choice_accuracy(std::string_view prediction, std::string_view gold);

Reward compute_reward(std::string_view prediction, const QAPair& gold, RewardKind kind);

/// Multiple-choice questions score by letter, everything else by F1.
RewardKind default_reward_kind(const QAPair& gold) noexcept;

} // namespace selfplan
