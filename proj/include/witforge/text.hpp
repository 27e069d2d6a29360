/*
 * Copyright 2026 The Witforge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Small ASCII-oriented string helpers shared by the modules.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace witforge::text {

inline bool is_space(char c) noexcept { return std::isspace(static_cast<unsigned char>(c)) != 0; }
inline bool is_alpha(char c) noexcept { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
inline bool is_digit(char c) noexcept { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
inline bool is_upper(char c) noexcept { return std::isupper(static_cast<unsigned char>(c)) != 0; }
inline bool is_punct(char c) noexcept { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

inline char lower(char c) noexcept { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }
inline char upper(char c) noexcept { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); }

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), lower);
    return out;
}

inline std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

inline std::string_view trim_punct(std::string_view s) noexcept {
    s = trim(s);
    while (!s.empty() && (is_punct(s.front()) || is_space(s.front()))) s.remove_prefix(1);
    while (!s.empty() && (is_punct(s.back()) || is_space(s.back()))) s.remove_suffix(1);
    return s;
}

inline bool has_letter(std::string_view s) noexcept {
    return std::any_of(s.begin(), s.end(), [](char c) { return is_alpha(c) || static_cast<unsigned char>(c) >= 0x80; });
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        const std::size_t start = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (i > start) out.emplace_back(s.substr(start, i - start));
    }
    return out;
}

inline std::size_t word_count(std::string_view s) { return split_whitespace(s).size(); }

inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    for (const auto& token : split_whitespace(s)) {
        if (!out.empty()) out.push_back(' ');
        out += token;
    }
    return out;
}

/// Splits on `delimiter`, trims every item and drops empty ones.
inline std::vector<std::string> split_items(std::string_view s, char delimiter = ';') {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t end = s.find(delimiter, start);
        if (end == std::string_view::npos) end = s.size();
        auto item = trim(s.substr(start, end - start));
        if (!item.empty()) out.emplace_back(item);
        start = end + 1;
    }
    return out;
}

/// Case-insensitive search; returns the byte offset of the first match at or after `from`.
inline std::optional<std::size_t> ifind(std::string_view haystack, std::string_view needle, std::size_t from = 0) {
    if (needle.empty()) return from <= haystack.size() ? std::optional<std::size_t>(from) : std::nullopt;
    if (needle.size() > haystack.size()) return std::nullopt;
    for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
        bool match = true;
        for (std::size_t j = 0; j < needle.size(); ++j) {
            if (lower(haystack[i + j]) != lower(needle[j])) {
                match = false;
                break;
            }
        }
        if (match) return i;
    }
    return std::nullopt;
}

/// Case-insensitive search for the last occurrence.
inline std::optional<std::size_t> ifind_last(std::string_view haystack, std::string_view needle) {
    std::optional<std::size_t> found;
    std::size_t from = 0;
    while (auto pos = ifind(haystack, needle, from)) {
        found = pos;
        from = *pos + 1;
    }
    return found;
}

inline bool iequals(std::string_view a, std::string_view b) noexcept {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) { return lower(x) == lower(y); });
}

/// Case-insensitive containment of `needle` in `haystack` on word boundaries.
inline bool icontains_words(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return false;
    std::size_t from = 0;
    while (auto pos = ifind(haystack, needle, from)) {
        const std::size_t end = *pos + needle.size();
        const bool left_ok = *pos == 0 || !is_alpha(haystack[*pos - 1]);
        const bool right_ok = end >= haystack.size() || !is_alpha(haystack[end]);
        if (left_ok && right_ok) return true;
        from = *pos + 1;
    }
    return false;
}

/// Lower-cases, strips punctuation and collapses whitespace.
inline std::string normalize_for_compare(std::string_view s) {
    std::string stripped;
    stripped.reserve(s.size());
    for (char c : s) {
        if (is_punct(c)) continue;
        stripped.push_back(lower(c));
    }
    return collapse_whitespace(stripped);
}

inline std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

}  // namespace witforge::text
