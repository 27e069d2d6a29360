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

// Wordplay punch lines, built locally from phonetic similarity. Nothing in
// this header talks to a language model.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "witforge/core_model.hpp"
#include "witforge/double_metaphone.hpp"
#include "witforge/error.hpp"
#include "witforge/text.hpp"

namespace witforge::wordplay {

/// Separates the codes of the words of a multi-word term.
inline constexpr char kWordBoundary = '|';

inline constexpr double kDefaultThreshold = 0.4;

struct PhoneticCode {
    std::string primary;
    std::optional<std::string> alternate;

    bool operator==(const PhoneticCode&) const = default;
};

struct WordplayPair {
    Association a;
    Association b;
    double distance = 1.0;
    std::size_t index_a = 0;
    std::size_t index_b = 0;
};

namespace detail {

struct WordSpan {
    std::size_t begin;
    std::size_t end;
};

inline std::vector<WordSpan> word_spans(std::string_view term) {
    std::vector<WordSpan> out;
    std::size_t i = 0;
    while (i < term.size()) {
        while (i < term.size() && text::is_space(term[i])) ++i;
        const std::size_t start = i;
        while (i < term.size() && !text::is_space(term[i])) ++i;
        if (i > start) out.push_back({start, i});
    }
    return out;
}

inline bool is_article(std::string_view word) {
    const auto w = text::to_lower(text::trim_punct(word));
    return w == "the" || w == "a" || w == "an";
}

/// Word spans left after dropping one leading article ("The Alamo" -> "Alamo").
inline std::vector<WordSpan> content_words(std::string_view term) {
    auto spans = word_spans(term);
    if (spans.size() > 1 && is_article(term.substr(spans[0].begin, spans[0].end - spans[0].begin))) {
        spans.erase(spans.begin());
    }
    return spans;
}

struct EncodedTerm {
    PhoneticCode code;
    /// Byte offset in the term of the letter behind each primary symbol. A
    /// word boundary symbol points at the end of the word before it.
    std::vector<std::size_t> offsets;
    std::vector<WordSpan> words;
};

inline EncodedTerm encode_term(std::string_view term) {
    EncodedTerm out;
    std::string alternate;
    bool first = true;
    for (const auto& span : content_words(term)) {
        const auto word = term.substr(span.begin, span.end - span.begin);
        auto dm = phonetics::double_metaphone(word);
        if (dm.primary.empty() && dm.alternate.empty()) continue;
        if (!first) {
            out.code.primary.push_back(kWordBoundary);
            out.offsets.push_back(out.words.back().end);
            alternate.push_back(kWordBoundary);
        }
        first = false;
        out.code.primary += dm.primary;
        for (auto off : dm.primary_offsets) out.offsets.push_back(span.begin + off);
        alternate += dm.alternate;
        out.words.push_back(span);
    }
    if (alternate != out.code.primary) out.code.alternate = std::move(alternate);
    return out;
}

inline std::vector<std::string_view> variants(const PhoneticCode& c) {
    std::vector<std::string_view> v{c.primary};
    if (c.alternate) v.emplace_back(*c.alternate);
    return v;
}

}  // namespace detail

/// Double Metaphone code of a word or phrase. Multi-word terms are encoded
/// word by word and joined with `kWordBoundary`; a leading article is dropped.
inline PhoneticCode phonetic_encode(std::string_view term) { return detail::encode_term(term).code; }

/// Levenshtein distance over code symbols (unit costs).
inline std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

/// Normalized distance of two codes, minimized over primary/alternate combinations.
inline double code_distance(const PhoneticCode& a, const PhoneticCode& b) {
    double best = 1.0;
    bool any = false;
    for (auto x : detail::variants(a)) {
        for (auto y : detail::variants(b)) {
            const std::size_t longer = std::max(x.size(), y.size());
            const double d = longer == 0 ? 0.0 : static_cast<double>(edit_distance(x, y)) / static_cast<double>(longer);
            best = any ? std::min(best, d) : d;
            any = true;
        }
    }
    return best;
}

/// Phonetic distance in [0, 1]; 0 means some pair of codes is identical.
inline double phonetic_distance(std::string_view a, std::string_view b) {
    return code_distance(phonetic_encode(a), phonetic_encode(b));
}

/// Scores every cross pair and returns the closest one at or under
/// `threshold`. Ties go to the lower index in `list_a`, then in `list_b`.
inline std::optional<WordplayPair> best_wordplay_pair(std::span<const Association> list_a,
                                                      std::span<const Association> list_b,
                                                      double threshold = kDefaultThreshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw Error(ErrorKind::ConfigError, "wordplay threshold must be in [0, 1]");
    }
    std::vector<PhoneticCode> codes_b;
    codes_b.reserve(list_b.size());
    for (const auto& b : list_b) codes_b.push_back(phonetic_encode(b.text));

    std::optional<WordplayPair> best;
    for (std::size_t i = 0; i < list_a.size(); ++i) {
        const auto code_a = phonetic_encode(list_a[i].text);
        for (std::size_t j = 0; j < list_b.size(); ++j) {
            const double d = code_distance(code_a, codes_b[j]);
            if (!best || d < best->distance) {
                best = WordplayPair{list_a[i], list_b[j], d, i, j};
            }
        }
    }
    if (best && best->distance <= threshold) return best;
    return std::nullopt;
}

/// Blends the two terms of a pair into a punch line.
///
/// When the shorter primary code occurs inside the longer one, the letters of
/// the longer term that produce the matched symbols are replaced by the
/// shorter term ("pie" + "piano" -> "pieno"). Otherwise the terms are
/// juxtaposed, `a` first.
inline std::string build_pun_phrase(const WordplayPair& pair) {
    const auto a_text = std::string(text::trim(pair.a.text));
    const auto b_text = std::string(text::trim(pair.b.text));
    const auto ea = detail::encode_term(a_text);
    const auto eb = detail::encode_term(b_text);

    const bool a_is_short = ea.code.primary.size() <= eb.code.primary.size();
    const auto& shorter = a_is_short ? ea : eb;
    const auto& longer = a_is_short ? eb : ea;
    const std::string& shorter_text = a_is_short ? a_text : b_text;
    const std::string& longer_text = a_is_short ? b_text : a_text;

    const auto& needle = shorter.code.primary;
    const auto& hay = longer.code.primary;
    const auto pos = needle.empty() ? std::string::npos : hay.find(needle);
    if (pos == std::string::npos) {
        return a_text + " " + b_text;
    }

    auto word_of = [&](std::size_t offset) {
        for (const auto& w : longer.words) {
            if (offset >= w.begin && offset < w.end) return w;
        }
        return longer.words.back();
    };

    const std::size_t last = pos + needle.size() - 1;
    std::size_t begin = longer.offsets[pos];
    if (pos == 0 || hay[pos - 1] == kWordBoundary) begin = word_of(begin).begin;

    std::size_t end = word_of(longer.offsets[last]).end;
    for (std::size_t k = last + 1; k < hay.size(); ++k) {
        if (hay[k] == kWordBoundary) break;
        if (longer.offsets[k] > longer.offsets[last]) {
            end = longer.offsets[k];
            break;
        }
    }

    // the spliced-in term goes without its article
    const auto words = detail::content_words(shorter_text);
    const std::string insert = shorter_text.substr(words.front().begin);
    return longer_text.substr(0, begin) + insert + longer_text.substr(end);
}

}  // namespace witforge::wordplay
