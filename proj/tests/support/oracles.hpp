// SPDX-License-Identifier: Apache-2.0
// Reference implementations kept deliberately naive and separate from the
// library code they check.
#pragma once

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

inline std::vector<std::string> tokens(const std::string& text) {
    std::string lowered;
    for (unsigned char c : text) lowered += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
    static const std::regex punct(R"([!-/:-@\[-`{-~])");
    static const std::regex articles(R"(\b(a|an|the)\b)");
    auto cleaned = std::regex_replace(std::regex_replace(lowered, punct, ""), articles, " ");
    std::istringstream in(cleaned);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

/// Explicit precision and recall over token multisets.
inline double f1(const std::string& prediction, const std::string& gold) {
    const auto p = tokens(prediction);
    const auto g = tokens(gold);
    if (p.empty() || g.empty()) return 0.0;
    std::vector<bool> used(g.size(), false);
    double overlap = 0;
    for (const auto& token : p) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!used[i] && g[i] == token) {
                used[i] = true;
                overlap += 1;
                break;
            }
        }
    }
    if (overlap == 0) return 0.0;
    const double precision = overlap / static_cast<double>(p.size());
    const double recall = overlap / static_cast<double>(g.size());
    return 2 * precision * recall / (precision + recall);
}

} // namespace oracle
