// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace selfplan {

/// Lowercase, drop ASCII punctuation, remove the articles a/an/the, and
/// collapse whitespace. Idempotent.
std::string normalize_answer(std::string_view text);

/// Whitespace tokens of the normalized text.
std::vector<std::string> answer_tokens(std::string_view text);

/// First standalone Latin capital followed by '.', ')' or end of text.
/// "B. Do ping pong balls..." yields 'B'; "(C) Arizona" yields 'C'.
std::optional<char> extract_choice_letter(std::string_view text) noexcept;

} // namespace selfplan
