// SPDX-License-Identifier: Apache-2.0
#include "selfplan/synthesis/reward.hpp"

#include "selfplan/core/answer.hpp"

#include <map>

namespace selfplan {

double token_f1(std::string_view prediction, std::string_view gold) {
    const auto pred = answer_tokens(prediction);
    const auto ref = answer_tokens(gold);
    if (pred.empty() || ref.empty()) return 0.0;
    std::map<std::string, long> counts;
    for (const auto& t : ref) ++counts[t];
    long common = 0;
    for (const auto& t : pred) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    if (common == 0) return 0.0;
    const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
    const double recall = static_cast<double>(common) / static_cast<double>(ref.size());
    return 2.0 * precision * recall / (precision + recall);
}

double choice_accuracy(std::string_view prediction, std::string_view gold) {
    const auto want = extract_choice_letter(gold);
    const auto got = extract_choice_letter(prediction);
    return want && got && *want == *got ? 1.0 : 0.0;
}

Reward compute_reward(std::string_view prediction, const QAPair& gold, RewardKind kind) {
    if (kind == RewardKind::choice_accuracy) return Reward{choice_accuracy(prediction, gold.answer), kind};
    return Reward{token_f1(prediction, gold.answer), kind};
}

RewardKind default_reward_kind(const QAPair& gold) noexcept {
    return gold.choices.empty() ? RewardKind::token_f1 : RewardKind::choice_accuracy;
}

} // namespace selfplan
