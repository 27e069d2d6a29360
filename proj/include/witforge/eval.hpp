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

// Evaluation harness: picking input sentences from a dialogue corpus,
// producing baseline responses, shuffling for blind rating, and summarizing
// the ratings per source.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "witforge/csv.hpp"
#include "witforge/error.hpp"
#include "witforge/lm_backend.hpp"
#include "witforge/noun_lexicon.hpp"
#include "witforge/text.hpp"

namespace witforge::eval {

struct DialogueComment {
    std::string conversation_id;
    int turn_index = 0;
    std::string text;

    bool operator==(const DialogueComment&) const = default;
};

// ---------------------------------------------------------------------------
// Ingestion

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline int parse_int(std::string_view s, const std::string& where) {
    const auto t = text::trim(s);
    if (t.empty()) throw Error(ErrorKind::FormatError, where + ": empty integer field");
    int value = 0;
    std::size_t i = 0;
    bool negative = false;
    if (t[0] == '-') {
        negative = true;
        i = 1;
    }
    if (i == t.size()) throw Error(ErrorKind::FormatError, where + ": \"" + std::string(t) + "\" is not an integer");
    for (; i < t.size(); ++i) {
        if (!text::is_digit(t[i]) || value > 100000000) {
            throw Error(ErrorKind::FormatError, where + ": \"" + std::string(t) + "\" is not an integer");
        }
        value = value * 10 + (t[i] - '0');
    }
    return negative ? -value : value;
}

inline std::string where(const std::filesystem::path& path, const csv::Record& r) {
    return path.filename().string() + " record " + std::to_string(r.number) + " (line " + std::to_string(r.line) + ")";
}

inline std::vector<DialogueComment> ingest_csv(const std::filesystem::path& path, std::string_view data) {
    const auto records = csv::parse(data);
    std::vector<DialogueComment> out;
    if (records.empty()) return out;
    const csv::Header header(records.front());
    const auto conv = header.require("conversation_id", path.string());
    const auto msg = header.require("message", path.string());
    const auto turn = header.find("turn_index");

    std::map<std::string, int> next_turn;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != header.size()) {
            throw Error(ErrorKind::FormatError, where(path, rec) + ": expected " + std::to_string(header.size()) +
                                                    " fields, found " + std::to_string(rec.fields.size()));
        }
        DialogueComment c;
        c.conversation_id = std::string(text::trim(rec.fields[conv]));
        c.text = std::string(text::trim(rec.fields[msg]));
        if (c.conversation_id.empty()) throw Error(ErrorKind::FormatError, where(path, rec) + ": empty conversation_id");
        if (c.text.empty()) throw Error(ErrorKind::FormatError, where(path, rec) + ": empty message");
        if (turn) {
            c.turn_index = parse_int(rec.fields[*turn], where(path, rec));
            if (c.turn_index < 0) throw Error(ErrorKind::FormatError, where(path, rec) + ": negative turn_index");
        } else {
            c.turn_index = next_turn[c.conversation_id]++;
        }
        out.push_back(std::move(c));
    }
    return out;
}

inline std::vector<DialogueComment> ingest_jsonl(const std::filesystem::path& path, std::string_view data) {
    std::vector<DialogueComment> out;
    std::map<std::string, int> next_turn;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= data.size()) {
        auto nl = data.find('\n', pos);
        if (nl == std::string_view::npos) nl = data.size();
        const auto line = text::trim(data.substr(pos, nl - pos));
        ++line_no;
        pos = nl + 1;
        if (line.empty()) continue;
        const auto at = path.filename().string() + " line " + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::FormatError, at + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("conversation_id") || !j.contains("message") || !j["message"].is_string()) {
            throw Error(ErrorKind::FormatError, at + ": need conversation_id and message");
        }
        DialogueComment c;
        const auto& id = j["conversation_id"];
        if (id.is_string()) {
            c.conversation_id = id.get<std::string>();
        } else if (id.is_number_integer()) {
            c.conversation_id = std::to_string(id.get<long long>());
        } else {
            throw Error(ErrorKind::FormatError, at + ": conversation_id must be a string or integer");
        }
        c.text = std::string(text::trim(j["message"].get<std::string>()));
        if (c.text.empty()) throw Error(ErrorKind::FormatError, at + ": empty message");
        if (j.contains("turn_index")) {
            if (!j["turn_index"].is_number_integer() || j["turn_index"].get<long long>() < 0) {
                throw Error(ErrorKind::FormatError, at + ": turn_index must be a non-negative integer");
            }
            c.turn_index = j["turn_index"].get<int>();
        } else {
            c.turn_index = next_turn[c.conversation_id]++;
        }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace detail

/// Reads a Topical-Chat style export. `.jsonl` files hold one object per
/// line; anything else is read as CSV with a header naming at least
/// conversation_id and message (turn_index optional, other columns ignored).
inline std::vector<DialogueComment> ingest_dataset(const std::filesystem::path& path) {
    const auto data = detail::read_file(path);
    if (path.extension() == ".jsonl") return detail::ingest_jsonl(path, data);
    return detail::ingest_csv(path, data);
}

// ---------------------------------------------------------------------------
// Sentences

namespace detail {

inline bool is_abbreviation(std::string_view word) {
    static const std::set<std::string, std::less<>> known = {
        "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "vs", "etc", "e.g", "i.e", "u.s", "u.k", "a.m", "p.m",
        "inc", "ltd", "co", "mt", "ft", "approx", "dept", "est", "fig", "gen", "gov", "sen", "rep", "jan", "feb",
        "mar", "apr", "aug", "sep", "sept", "oct", "nov", "dec"};
    const auto w = text::to_lower(word);
    if (known.count(w)) return true;
    // single initials: "J. K. Rowling"
    return word.size() == 1 && text::is_upper(word[0]);
}

inline bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

}  // namespace detail

/// The last sentence in `comment` that ends in . ! or ?, or nothing if the
/// comment has no complete sentence.
inline std::optional<std::string> last_complete_sentence(std::string_view comment) {
    std::vector<std::string> sentences;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < comment.size()) {
        const char c = comment[i];
        if (c != '.' && c != '!' && c != '?') {
            ++i;
            continue;
        }
        std::size_t end = i + 1;
        while (end < comment.size() && (comment[end] == '.' || comment[end] == '!' || comment[end] == '?')) ++end;
        while (end < comment.size() && detail::is_closer(comment[end])) ++end;
        const bool at_break = end == comment.size() || text::is_space(comment[end]);
        if (!at_break) {
            i = end;
            continue;
        }
        if (c == '.' && end == i + 1) {
            std::size_t w = i;
            while (w > start && !text::is_space(comment[w - 1])) --w;
            auto word = comment.substr(w, i - w);
            while (!word.empty() && !text::is_alpha(word.front())) word.remove_prefix(1);
            // "No. 5" but not "No. I heard"
            const bool numero = text::iequals(word, "no") && end + 1 < comment.size() && text::is_digit(comment[end + 1]);
            if ((detail::is_abbreviation(word) || numero) && end < comment.size()) {
                i = end;
                continue;
            }
        }
        const auto s = text::trim(comment.substr(start, end - start));
        if (!s.empty()) sentences.emplace_back(s);
        start = end;
        i = end;
    }
    if (sentences.empty()) return std::nullopt;
    return sentences.back();
}

inline std::optional<std::string> last_complete_sentence(const DialogueComment& comment) {
    return last_complete_sentence(comment.text);
}

/// Mechanical clean-up only: collapse whitespace, capitalize the first letter,
/// make sure the sentence ends in terminal punctuation.
inline std::string standardize(std::string_view sentence) {
    auto s = text::collapse_whitespace(sentence);
    for (char& c : s) {
        if (text::is_alpha(c)) {
            c = text::upper(c);
            break;
        }
        if (!text::is_punct(c)) break;
    }
    if (s.empty()) return s;
    std::size_t k = s.size();
    while (k > 0 && detail::is_closer(s[k - 1])) --k;
    if (k == 0 || (s[k - 1] != '.' && s[k - 1] != '!' && s[k - 1] != '?')) s.push_back('.');
    return s;
}

// ---------------------------------------------------------------------------
// Eligibility

enum class Criterion { a_length, c_noun_count, d_duplicate };

inline std::string_view to_string(Criterion c) noexcept {
    switch (c) {
        case Criterion::a_length: return "a_length";
        case Criterion::c_noun_count: return "c_noun_count";
        case Criterion::d_duplicate: return "d_duplicate";
    }
    return "?";
}

struct EligibilityVerdict {
    bool passed = true;
    std::vector<Criterion> failed_criteria;
    bool requires_review = false;
};

inline constexpr std::size_t kMaxWords = 20;
inline constexpr std::size_t kMinNouns = 2;

/// Finds the nouns, noun phrases and named entities of a sentence.
class NounAnnotator {
public:
    virtual ~NounAnnotator() = default;
    virtual std::vector<std::string> annotate(std::string_view sentence) const = 0;
};

/// Capitalized runs after the first word are named entities; other words are
/// nouns when a bundled lexicon knows them (plurals included). Adjacent nouns
/// merge into one phrase.
class RuleBasedAnnotator final : public NounAnnotator {
public:
    std::vector<std::string> annotate(std::string_view sentence) const override {
        struct Token {
            std::string word;
            bool capitalized;
            bool breaks_after;  // punctuation ends the phrase
        };
        std::vector<Token> tokens;
        for (const auto& raw : text::split_whitespace(sentence)) {
            const auto core = text::trim_punct(raw);
            if (core.empty() || !text::has_letter(core)) {
                if (!tokens.empty()) tokens.back().breaks_after = true;
                continue;
            }
            const bool trailing = core.data() + core.size() != raw.data() + raw.size();
            const bool leading = core.data() != raw.data();
            if (leading && !tokens.empty()) tokens.back().breaks_after = true;
            tokens.push_back({std::string(core), text::is_upper(core.front()), trailing});
        }

        std::vector<std::string> out;
        std::string current;
        auto flush = [&] {
            if (!current.empty()) out.push_back(std::move(current));
            current.clear();
        };
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const auto& t = tokens[i];
            const auto low = text::to_lower(t.word);
            const bool entity = t.capitalized && i > 0 && !is_function_word(low);
            const bool noun = entity || (!is_function_word(low) && lexicon::is_common_noun(low));
            if (noun) {
                if (!current.empty()) current += ' ';
                current += t.word;
            } else {
                flush();
            }
            if (t.breaks_after) flush();
        }
        flush();
        return out;
    }

    static bool is_function_word(std::string_view w) {
        static const std::set<std::string, std::less<>> words = {
            "i", "a", "an", "the", "and", "or", "but", "if", "so", "of", "to", "in", "on", "at", "by", "for", "with",
            "from", "as", "is", "are", "was", "were", "be", "been", "do", "did", "does", "have", "has", "had", "that",
            "this", "these", "those", "there", "it", "he", "she", "they", "we", "you", "my", "your", "our", "their",
            "his", "her", "its", "not", "no", "yes", "oh", "wow", "well", "like", "just", "even", "only", "once"};
        return words.count(w) > 0;
    }
};

/// Asks the model for the nouns, one per line, and keeps those that occur in
/// the sentence.
class LlmNounAnnotator final : public NounAnnotator {
public:
    LlmNounAnnotator(Backend& backend, PromptCatalog prompts, std::string model_id = {})
        : backend_(backend), prompts_(std::move(prompts)), model_id_(std::move(model_id)) {}

    std::vector<std::string> annotate(std::string_view sentence) const override {
        const auto reply = backend_.complete(
            make_request(prompts_, TemplateId::noun_annotation, {{"sentence", std::string(sentence)}}, model_id_));
        std::vector<std::string> out;
        std::istringstream lines(reply.text);
        std::string line;
        while (std::getline(lines, line)) {
            auto item = text::trim(line);
            while (!item.empty() && (item.front() == '-' || item.front() == '*' || text::is_space(item.front()))) {
                item.remove_prefix(1);
            }
            item = text::trim_punct(item);
            if (!item.empty() && text::icontains_words(sentence, item)) out.emplace_back(item);
        }
        return out;
    }

private:
    Backend& backend_;
    PromptCatalog prompts_;
    std::string model_id_;
};

inline bool has_third_person_pronoun(std::string_view sentence) {
    static const std::set<std::string, std::less<>> pronouns = {
        "he", "him", "his", "himself", "she", "her", "hers", "herself", "it", "its", "itself",
        "they", "them", "their", "theirs", "themselves"};
    for (const auto& raw : text::split_whitespace(sentence)) {
        auto w = text::to_lower(text::trim_punct(raw));
        if (auto apos = w.find('\''); apos != std::string::npos) w.resize(apos);
        if (pronouns.count(w)) return true;
    }
    return false;
}

/// Criteria (a), (c) and (d) decide the verdict. A third-person pronoun only
/// raises `requires_review`, since whether its antecedent is clear is a human
/// call.
inline EligibilityVerdict eligibility_check(std::string_view sentence, const std::vector<std::string>& prior,
                                            const NounAnnotator& annotator) {
    EligibilityVerdict v;
    if (text::word_count(sentence) > kMaxWords) v.failed_criteria.push_back(Criterion::a_length);
    if (annotator.annotate(sentence).size() < kMinNouns) v.failed_criteria.push_back(Criterion::c_noun_count);
    const auto norm = text::normalize_for_compare(sentence);
    for (const auto& p : prior) {
        if (text::normalize_for_compare(p) == norm) {
            v.failed_criteria.push_back(Criterion::d_duplicate);
            break;
        }
    }
    v.requires_review = has_third_person_pronoun(sentence);
    v.passed = v.failed_criteria.empty();
    return v;
}

// ---------------------------------------------------------------------------
// Seeded randomness. Spelled out rather than taken from <random> so the same
// seed gives the same order with every standard library.

/// xoshiro256** seeded through splitmix64.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) {
        for (auto& word : s_) {
            seed += 0x9E3779B97F4A7C15ULL;
            std::uint64_t z = seed;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, bound), bound > 0, by rejection.
    std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = (0 - bound) % bound;  // 2^64 mod bound
        for (;;) {
            const std::uint64_t r = next();
            if (r >= limit) return r % bound;
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> s_{};
};

template <typename T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed) {
    Xoshiro256 rng(seed);
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(items[i - 1], items[j]);
    }
}

// ---------------------------------------------------------------------------
// Sampling

struct SampledInput {
    std::string sentence;  // standardized
    std::string conversation_id;
    int turn_index = 0;
    bool requires_review = false;
};

/// Visits comments in a seeded random order and keeps the standardized last
/// complete sentence of each one that passes the eligibility check, until `n`
/// are collected.
inline std::vector<SampledInput> sample_inputs(const std::vector<DialogueComment>& comments, std::size_t n,
                                               std::uint64_t seed, const NounAnnotator& annotator) {
    if (n == 0) throw Error(ErrorKind::ConfigError, "sample size must be at least 1");
    std::vector<std::size_t> order(comments.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    seeded_shuffle(order, seed);

    std::vector<SampledInput> out;
    std::vector<std::string> chosen;
    for (auto idx : order) {
        if (out.size() == n) break;
        const auto& c = comments[idx];
        const auto sentence = last_complete_sentence(c);
        if (!sentence) continue;
        const auto verdict = eligibility_check(*sentence, chosen, annotator);
        if (!verdict.passed) continue;
        auto clean = standardize(*sentence);
        chosen.push_back(clean);
        out.push_back({std::move(clean), c.conversation_id, c.turn_index, verdict.requires_review});
    }
    if (out.size() < n) {
        throw Error(ErrorKind::InsufficientEligible, "wanted " + std::to_string(n) + " eligible sentences, found " +
                                                         std::to_string(out.size()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Responses and presentation

/// The baseline: one call with the fixed prompt and fixed decoding.
inline std::string gpt_lol_respond(std::string_view sentence, Backend& backend, const std::string& model_id = {}) {
    const auto tpl = gpt_lol_template();
    CompletionRequest req{TemplateId::gpt_lol, render_template(tpl, {{"sentence", std::string(sentence)}}), model_id,
                          tpl.decoding};
    return std::string(text::trim(backend.complete(req).text));
}

inline constexpr std::string_view kHuman = "human";
inline constexpr std::string_view kGptLol = "gpt_lol";
inline constexpr std::string_view kWitscript3 = "witscript3";

inline std::string display_name(std::string_view source) {
    if (source == kHuman) return "Human";
    if (source == kGptLol) return "GPT-LOL";
    if (source == kWitscript3) return "Witscript 3";
    return std::string(source);
}

/// One input/response pair shown to raters.
struct ResponsePair {
    std::string pair_id;
    int item = 0;
    std::string source;
    std::string input;
    std::string response;

    bool operator==(const ResponsePair&) const = default;
};

template <typename T>
std::vector<T> randomize_presentation(std::vector<T> pairs, std::uint64_t seed) {
    seeded_shuffle(pairs, seed);
    return pairs;
}

inline std::string make_pair_id(int item, std::string_view source) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d", item);
    return std::string(buf) + "-" + std::string(source);
}

/// Reads pairs from CSV with columns pair_id, source and optionally item,
/// input, response.
inline std::vector<ResponsePair> read_pairs(const std::filesystem::path& path) {
    const auto records = csv::parse(detail::read_file(path));
    std::vector<ResponsePair> out;
    if (records.empty()) return out;
    const csv::Header h(records.front());
    const auto id = h.require("pair_id", path.string());
    const auto source = h.require("source", path.string());
    const auto item = h.find("item");
    const auto input = h.find("input");
    const auto response = h.find("response");
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != h.size()) {
            throw Error(ErrorKind::FormatError, detail::where(path, rec) + ": expected " + std::to_string(h.size()) +
                                                    " fields, found " + std::to_string(rec.fields.size()));
        }
        ResponsePair p;
        p.pair_id = std::string(text::trim(rec.fields[id]));
        p.source = std::string(text::trim(rec.fields[source]));
        if (p.pair_id.empty() || p.source.empty()) {
            throw Error(ErrorKind::FormatError, detail::where(path, rec) + ": empty pair_id or source");
        }
        if (item) p.item = detail::parse_int(rec.fields[*item], detail::where(path, rec));
        if (input) p.input = rec.fields[*input];
        if (response) p.response = rec.fields[*response];
        out.push_back(std::move(p));
    }
    return out;
}

inline void write_pairs(std::ostream& os, const std::vector<ResponsePair>& pairs) {
    csv::write_row(os, {"pair_id", "item", "source", "input", "response"});
    for (const auto& p : pairs) csv::write_row(os, {p.pair_id, std::to_string(p.item), p.source, p.input, p.response});
}

// ---------------------------------------------------------------------------
// Ratings

struct RatingRecord {
    std::string pair_id;
    std::string rater_id;
    int score = 1;
};

inline constexpr int kMinScore = 1;
inline constexpr int kMaxScore = 4;
inline constexpr int kJokeScore = 3;  // "a joke" or better

inline std::vector<RatingRecord> read_ratings(const std::filesystem::path& path) {
    const auto records = csv::parse(detail::read_file(path));
    std::vector<RatingRecord> out;
    if (records.empty()) return out;
    std::size_t first = 0;
    std::size_t id = 0, rater = 1, score = 2;
    if (records.front().fields.size() >= 3 && text::trim(records.front().fields[0]) == "pair_id") {
        const csv::Header h(records.front());
        id = h.require("pair_id", path.string());
        rater = h.require("rater_id", path.string());
        score = h.require("score", path.string());
        first = 1;
    }
    for (std::size_t r = first; r < records.size(); ++r) {
        const auto& rec = records[r];
        const auto at = detail::where(path, rec);
        if (rec.fields.size() <= std::max({id, rater, score})) {
            throw Error(ErrorKind::FormatError, at + ": expected pair_id, rater_id, score");
        }
        RatingRecord rr{std::string(text::trim(rec.fields[id])), std::string(text::trim(rec.fields[rater])),
                        detail::parse_int(rec.fields[score], at)};
        if (rr.score < kMinScore || rr.score > kMaxScore) {
            throw Error(ErrorKind::FormatError, at + ": score " + std::to_string(rr.score) + " outside 1..4");
        }
        if (rr.pair_id.empty()) throw Error(ErrorKind::FormatError, at + ": empty pair_id");
        out.push_back(std::move(rr));
    }
    return out;
}

struct PairSummary {
    std::string pair_id;
    std::string source;
    std::size_t ratings = 0;
    double mean_rating = 0.0;
    double pct_jokes = 0.0;
};

struct SourceSummary {
    std::string source;
    std::size_t ratings = 0;
    double mean_rating = 0.0;
    double pct_jokes = 0.0;
};

struct Aggregate {
    std::vector<PairSummary> pairs;  // sorted by pair_id
    std::vector<SourceSummary> sources;  // human, gpt_lol, witscript3, then others by name
};

/// Per-pair and per-source statistics. A source's mean is taken over all of
/// its individual ratings.
inline Aggregate aggregate(const std::vector<RatingRecord>& records,
                           const std::map<std::string, std::string>& pair_source) {
    struct Acc {
        std::size_t n = 0;
        long long sum = 0;
        std::size_t jokes = 0;
        void add(int s) {
            ++n;
            sum += s;
            if (s >= kJokeScore) ++jokes;
        }
    };
    std::map<std::string, Acc> by_pair;
    std::map<std::string, Acc> by_source;
    for (const auto& [pair, source] : pair_source) by_source[source];
    for (const auto& r : records) {
        auto it = pair_source.find(r.pair_id);
        if (it == pair_source.end()) throw Error(ErrorKind::UnknownPair, r.pair_id);
        if (r.score < kMinScore || r.score > kMaxScore) {
            throw Error(ErrorKind::FormatError, "score " + std::to_string(r.score) + " outside 1..4 for " + r.pair_id);
        }
        by_pair[r.pair_id].add(r.score);
        by_source[it->second].add(r.score);
    }
    if (by_source.empty()) throw Error(ErrorKind::EmptySource, "no sources to summarize");

    Aggregate out;
    for (const auto& [pair, acc] : by_pair) {
        out.pairs.push_back({pair, pair_source.at(pair), acc.n, static_cast<double>(acc.sum) / static_cast<double>(acc.n),
                             100.0 * static_cast<double>(acc.jokes) / static_cast<double>(acc.n)});
    }
    for (const auto& [source, acc] : by_source) {
        if (acc.n == 0) throw Error(ErrorKind::EmptySource, "source \"" + source + "\" has no ratings");
        out.sources.push_back({source, acc.n, static_cast<double>(acc.sum) / static_cast<double>(acc.n),
                               100.0 * static_cast<double>(acc.jokes) / static_cast<double>(acc.n)});
    }
    auto rank = [](const std::string& s) {
        if (s == kHuman) return 0;
        if (s == kGptLol) return 1;
        if (s == kWitscript3) return 2;
        return 3;
    };
    std::stable_sort(out.sources.begin(), out.sources.end(), [&](const SourceSummary& a, const SourceSummary& b) {
        return rank(a.source) < rank(b.source);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Report

/// Fixed-point text rounded half-up. The small nudge keeps values such as
/// 1.835 (stored as 1.83499999...) from rounding down.
inline std::string round_half_up(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    const double scaled = std::floor(value * scale + 0.5 + 1e-9);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, scaled / scale);
    return buf;
}

/// Table of sources followed by a per-pair appendix. `pairs` supplies item,
/// input and response text for the appendix and may be empty.
inline void emit_report(std::ostream& os, const Aggregate& agg, const std::vector<ResponsePair>& pairs = {}) {
    if (agg.sources.empty()) throw Error(ErrorKind::EmptySource, "nothing to report");
    csv::write_row(os, {"source", "mean_rating", "pct_jokes"});
    for (const auto& s : agg.sources) {
        csv::write_row(os, {display_name(s.source), round_half_up(s.mean_rating, 2), round_half_up(s.pct_jokes, 1)});
    }
    os << '\n';
    std::map<std::string, const ResponsePair*> info;
    for (const auto& p : pairs) info[p.pair_id] = &p;
    csv::write_row(os, {"pair_id", "item", "source", "input", "response", "mean_rating", "pct_jokes", "ratings"});
    for (const auto& p : agg.pairs) {
        const auto it = info.find(p.pair_id);
        const ResponsePair* meta = it == info.end() ? nullptr : it->second;
        csv::write_row(os, {p.pair_id, meta ? std::to_string(meta->item) : "", display_name(p.source),
                            meta ? meta->input : "", meta ? meta->response : "", round_half_up(p.mean_rating, 2),
                            round_half_up(p.pct_jokes, 1), std::to_string(p.ratings)});
    }
    if (!os) throw Error(ErrorKind::IoError, "failed writing report");
}

inline void emit_report(const std::filesystem::path& path, const Aggregate& agg,
                        const std::vector<ResponsePair>& pairs = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    emit_report(out, agg, pairs);
    out.flush();
    if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

}  // namespace witforge::eval
