// SPDX-License-Identifier: Apache-2.0
#include "selfplan/core/answer.hpp"

#include <cctype>
#include <sstream>

namespace selfplan {

namespace {

bool is_article(std::string_view word) { return word == "a" || word == "an" || word == "the"; }

} // namespace

std::string normalize_answer(std::string_view text) {
    std::string stripped;
    stripped.reserve(text.size());
    for (char c : text) {
        auto u = static_cast<unsigned char>(c);
        if (u < 0x80 && std::ispunct(u)) continue;
        stripped += static_cast<char>(u < 0x80 ? std::tolower(u) : u);
    }

    std::string out;
    std::istringstream words(stripped);
    std::string word;
    while (words >> word) {
        if (is_article(word)) continue;
        if (!out.empty()) out += ' ';
        out += word;
    }
    return out;
}

std::vector<std::string> answer_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::istringstream words(normalize_answer(text));
    std::string word;
    while (words >> word) tokens.push_back(std::move(word));
    return tokens;
}

std::optional<char> extract_choice_letter(std::string_view text) noexcept {
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c < 'A' || c > 'Z') continue;
        if (i > 0 && std::isalnum(static_cast<unsigned char>(text[i - 1]))) continue;
        if (i + 1 == text.size() || text[i + 1] == '.' || text[i + 1] == ')') return c;
    }
    return std::nullopt;
}

} // namespace selfplan
