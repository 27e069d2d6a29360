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

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "witforge/error.hpp"
#include "witforge/text.hpp"

namespace witforge {

/// The six stages of the joke chain, in production order.
enum class Stage : int {
    TopicSet = 0,
    HandlesSelected = 1,
    AssociationsGenerated = 2,
    CandidatesCreated = 3,
    JokesGenerated = 4,
    Selected = 5,
};

inline constexpr std::array<Stage, 6> kAllStages = {Stage::TopicSet,          Stage::HandlesSelected,
                                                    Stage::AssociationsGenerated, Stage::CandidatesCreated,
                                                    Stage::JokesGenerated,    Stage::Selected};

constexpr std::string_view to_string(Stage stage) noexcept {
    switch (stage) {
        case Stage::TopicSet: return "TopicSet";
        case Stage::HandlesSelected: return "HandlesSelected";
        case Stage::AssociationsGenerated: return "AssociationsGenerated";
        case Stage::CandidatesCreated: return "CandidatesCreated";
        case Stage::JokesGenerated: return "JokesGenerated";
        case Stage::Selected: return "Selected";
    }
    return "Unknown";
}

inline std::optional<Stage> stage_from_string(std::string_view name) noexcept {
    for (Stage s : kAllStages) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

constexpr int index_of(Stage s) noexcept { return static_cast<int>(s); }

// ---------------------------------------------------------------------------
// Domain types

struct Topic {
    std::string text;
    std::size_t word_count = 0;

    /// Trims `sentence` and validates it. Throws EmptyTopic when nothing with a letter remains.
    static Topic make(std::string_view sentence) {
        const auto trimmed = text::trim(sentence);
        if (trimmed.empty() || !text::has_letter(trimmed)) {
            throw Error(ErrorKind::EmptyTopic, "topic must contain at least one letter",
                        std::string(to_string(Stage::TopicSet)));
        }
        return Topic{std::string(trimmed), text::word_count(trimmed)};
    }

    bool operator==(const Topic&) const = default;
};

enum class HandleKind { noun, noun_phrase, named_entity };

struct TopicHandle {
    std::string surface;
    HandleKind kind = HandleKind::noun;

    bool operator==(const TopicHandle&) const = default;
};

struct Association {
    std::string text;
    int handle_index = 0;

    bool operator==(const Association&) const = default;
};

enum class Mechanism { wordplay, commonsense, third };

struct PunchLineCandidate {
    std::string text;
    Mechanism mechanism = Mechanism::commonsense;
    std::vector<Association> sources;

    bool operator==(const PunchLineCandidate&) const = default;
};

struct JokeCandidate {
    Topic topic;
    std::string angle;
    PunchLineCandidate punch_line;
    std::string full_text;

    bool operator==(const JokeCandidate&) const = default;
};

/// Snapshot of a joke chain. Fields are populated exactly when the stage that
/// produces them has been reached.
struct PipelineState {
    Stage stage = Stage::TopicSet;
    Topic topic;
    std::vector<TopicHandle> handles;
    std::vector<std::vector<Association>> associations;
    std::vector<PunchLineCandidate> candidates;
    std::vector<JokeCandidate> jokes;
    std::optional<std::size_t> selected_index;

    static PipelineState with_topic(Topic topic) {
        PipelineState s;
        s.topic = std::move(topic);
        return s;
    }

    [[nodiscard]] const JokeCandidate* selected_joke() const noexcept {
        if (!selected_index || *selected_index >= jokes.size()) return nullptr;
        return &jokes[*selected_index];
    }

    bool operator==(const PipelineState&) const = default;
};

constexpr std::string_view to_string(HandleKind k) noexcept {
    switch (k) {
        case HandleKind::noun: return "noun";
        case HandleKind::noun_phrase: return "noun_phrase";
        case HandleKind::named_entity: return "named_entity";
    }
    return "noun";
}

constexpr std::string_view to_string(Mechanism m) noexcept {
    switch (m) {
        case Mechanism::wordplay: return "wordplay";
        case Mechanism::commonsense: return "commonsense";
        case Mechanism::third: return "third";
    }
    return "third";
}

inline std::optional<Mechanism> mechanism_from_string(std::string_view name) noexcept {
    for (Mechanism m : {Mechanism::wordplay, Mechanism::commonsense, Mechanism::third}) {
        if (to_string(m) == name) return m;
    }
    return std::nullopt;
}

inline std::optional<HandleKind> handle_kind_from_string(std::string_view name) noexcept {
    for (HandleKind k : {HandleKind::noun, HandleKind::noun_phrase, HandleKind::named_entity}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Punch-line placement

/// Fraction of the joke text, counted from the end, that the punch line has to reach into.
inline constexpr double kPunchLineTailFraction = 0.4;

namespace detail {

inline bool is_terminal_punct(char c) noexcept {
    switch (c) {
        case '.': case '!': case '?': case ',': case ';': case ':':
        case '"': case '\'': case ')': case ']':
            return true;
        default:
            return text::is_space(c);
    }
}

inline std::string_view strip_terminal(std::string_view s) noexcept {
    while (!s.empty() && is_terminal_punct(s.back())) s.remove_suffix(1);
    return s;
}

}  // namespace detail

/// True when the last case-insensitive occurrence of `punch_line` in `full_text`
/// extends into the final 40% of the text. Terminal punctuation is ignored on both.
inline bool satisfies_punch_line_position(std::string_view full_text, std::string_view punch_line) {
    const auto body = detail::strip_terminal(text::trim(full_text));
    const auto needle = text::trim_punct(punch_line);
    if (body.empty() || needle.empty()) return false;
    const auto pos = text::ifind_last(body, needle);
    if (!pos) return false;
    const double end = static_cast<double>(*pos + needle.size());
    return end > (1.0 - kPunchLineTailFraction) * static_cast<double>(body.size());
}

/// Joins an angle and a punch line into the text of a joke.
///
/// The angle is kept as-is when it already contains the punch line; otherwise
/// the punch line is appended after a single space. Throws
/// PunchLinePositionViolated when the result buries the punch line.
inline std::string assemble_full_text(std::string_view angle, std::string_view punch_line) {
    const auto a = text::trim(angle);
    const auto p = text::trim(punch_line);
    if (a.empty() || p.empty()) {
        throw Error(ErrorKind::InvalidPayload, "angle and punch line must be non-empty");
    }
    std::string full(a);
    if (!text::ifind(a, text::trim_punct(p))) {
        full += ' ';
        full += p;
    }
    if (!satisfies_punch_line_position(full, p)) {
        throw Error(ErrorKind::PunchLinePositionViolated, "punch line \"" + std::string(p) + "\" is not at the end of \"" + full + "\"");
    }
    return full;
}

/// Handle check: the surface, stripped of edge punctuation, must occur in the topic ignoring case.
inline bool handle_in_topic(std::string_view topic, std::string_view surface) {
    const auto core = text::trim_punct(surface);
    return !core.empty() && text::ifind(topic, core).has_value();
}

// ---------------------------------------------------------------------------
// Stage payloads

struct TopicPayload {
    Topic topic;
    bool operator==(const TopicPayload&) const = default;
};
struct HandlesPayload {
    std::vector<TopicHandle> handles;
    bool operator==(const HandlesPayload&) const = default;
};
struct AssociationsPayload {
    std::vector<std::vector<Association>> lists;
    bool operator==(const AssociationsPayload&) const = default;
};
struct CandidatesPayload {
    std::vector<PunchLineCandidate> candidates;
    bool operator==(const CandidatesPayload&) const = default;
};
struct JokesPayload {
    std::vector<JokeCandidate> jokes;
    bool operator==(const JokesPayload&) const = default;
};
struct SelectionPayload {
    std::size_t index = 0;
    bool operator==(const SelectionPayload&) const = default;
};

/// Data produced by one stage; the variant index equals the stage index.
using StagePayload =
    std::variant<TopicPayload, HandlesPayload, AssociationsPayload, CandidatesPayload, JokesPayload, SelectionPayload>;

inline Stage payload_stage(const StagePayload& p) noexcept { return static_cast<Stage>(p.index()); }

namespace detail {

[[noreturn]] inline void invalid(Stage stage, const std::string& what) {
    throw Error(ErrorKind::InvalidPayload, what, std::string(to_string(stage)));
}

inline void validate(const PipelineState& s, const HandlesPayload& p) {
    constexpr Stage st = Stage::HandlesSelected;
    if (p.handles.size() != 2) invalid(st, "exactly 2 topic handles are required, got " + std::to_string(p.handles.size()));
    for (const auto& h : p.handles) {
        if (text::trim(h.surface).empty()) invalid(st, "topic handle must be non-empty");
        if (!handle_in_topic(s.topic.text, h.surface)) {
            throw Error(ErrorKind::HandleNotInTopic, "\"" + h.surface + "\" does not occur in the topic",
                        std::string(to_string(st)));
        }
    }
    if (text::iequals(text::trim_punct(p.handles[0].surface), text::trim_punct(p.handles[1].surface))) {
        invalid(st, "the two topic handles must differ");
    }
}

inline void validate(const PipelineState& s, const AssociationsPayload& p) {
    constexpr Stage st = Stage::AssociationsGenerated;
    if (p.lists.size() != 2) invalid(st, "exactly 2 association lists are required");
    for (int i = 0; i < 2; ++i) {
        const auto& list = p.lists[static_cast<std::size_t>(i)];
        if (list.empty()) {
            throw Error(ErrorKind::EmptyAssociationList,
                        "no associations for handle \"" + s.handles[static_cast<std::size_t>(i)].surface + "\"",
                        std::string(to_string(st)));
        }
        for (const auto& a : list) {
            if (text::trim(a.text).empty()) invalid(st, "association must be non-empty");
            if (a.handle_index != i) invalid(st, "association \"" + a.text + "\" is in the wrong list");
            if (text::iequals(text::trim(a.text), text::trim_punct(s.handles[static_cast<std::size_t>(i)].surface))) {
                invalid(st, "association \"" + a.text + "\" repeats its handle");
            }
        }
    }
}

inline void validate(const PipelineState&, const CandidatesPayload& p) {
    constexpr Stage st = Stage::CandidatesCreated;
    if (p.candidates.empty() || p.candidates.size() > 3) invalid(st, "between 1 and 3 punch line candidates are required");
    for (const auto& c : p.candidates) {
        if (text::trim(c.text).empty()) invalid(st, "punch line must be non-empty");
        if (c.sources.size() > 2) invalid(st, "a punch line has at most 2 source associations");
        for (const auto& src : c.sources) {
            if (src.handle_index != 0 && src.handle_index != 1) invalid(st, "source association has a bad handle index");
        }
    }
}

inline void validate(const PipelineState& s, const JokesPayload& p) {
    constexpr Stage st = Stage::JokesGenerated;
    if (p.jokes.empty() || p.jokes.size() > 3) invalid(st, "between 1 and 3 jokes are required");
    for (const auto& j : p.jokes) {
        if (j.topic != s.topic) invalid(st, "joke topic differs from the session topic");
        if (!satisfies_punch_line_position(j.full_text, j.punch_line.text)) {
            throw Error(ErrorKind::PunchLinePositionViolated, "\"" + j.full_text + "\"", std::string(to_string(st)));
        }
    }
}

inline void validate(const PipelineState& s, const SelectionPayload& p) {
    if (p.index >= s.jokes.size()) invalid(Stage::Selected, "selected index out of range");
}

inline void validate(const PipelineState&, const TopicPayload&) {}

inline void install(PipelineState& s, TopicPayload p) { s.topic = std::move(p.topic); }
inline void install(PipelineState& s, HandlesPayload p) { s.handles = std::move(p.handles); }
inline void install(PipelineState& s, AssociationsPayload p) { s.associations = std::move(p.lists); }
inline void install(PipelineState& s, CandidatesPayload p) { s.candidates = std::move(p.candidates); }
inline void install(PipelineState& s, JokesPayload p) { s.jokes = std::move(p.jokes); }
inline void install(PipelineState& s, SelectionPayload p) { s.selected_index = p.index; }

}  // namespace detail

/// Installs the payload of the stage right after `state.stage`.
inline PipelineState advance_stage(const PipelineState& state, StagePayload produced) {
    const Stage target = payload_stage(produced);
    if (state.stage == Stage::Selected || index_of(target) != index_of(state.stage) + 1) {
        throw Error(ErrorKind::StageOrderViolation,
                    "cannot install " + std::string(to_string(target)) + " data on a state at " +
                        std::string(to_string(state.stage)),
                    std::string(to_string(target)));
    }
    PipelineState next = state;
    std::visit(
        [&](auto&& payload) {
            detail::validate(state, payload);
            detail::install(next, std::move(payload));
        },
        std::move(produced));
    next.stage = target;
    return next;
}

/// Rewinds `state` to `stage`, clearing everything produced after it.
inline PipelineState invalidate_from(const PipelineState& state, Stage stage) {
    if (index_of(stage) > index_of(state.stage)) {
        throw Error(ErrorKind::StageOrderViolation,
                    "cannot rewind a state at " + std::string(to_string(state.stage)) + " forward to " +
                        std::string(to_string(stage)),
                    std::string(to_string(stage)));
    }
    PipelineState out = state;
    out.stage = stage;
    if (index_of(stage) < index_of(Stage::HandlesSelected)) out.handles.clear();
    if (index_of(stage) < index_of(Stage::AssociationsGenerated)) out.associations.clear();
    if (index_of(stage) < index_of(Stage::CandidatesCreated)) out.candidates.clear();
    if (index_of(stage) < index_of(Stage::JokesGenerated)) out.jokes.clear();
    if (index_of(stage) < index_of(Stage::Selected)) out.selected_index.reset();
    return out;
}

/// Returns a description of the first broken state invariant, or nothing.
inline std::optional<std::string> check_invariants(const PipelineState& s) {
    const int at = index_of(s.stage);
    auto presence = [&](bool populated, Stage producer, const char* field) -> std::optional<std::string> {
        if (populated != (at >= index_of(producer))) {
            return std::string(field) + (populated ? " populated" : " missing") + " at stage " +
                   std::string(to_string(s.stage));
        }
        return std::nullopt;
    };
    if (s.topic.text.empty() || !text::has_letter(s.topic.text)) return "topic is empty";
    if (s.topic.word_count != text::word_count(s.topic.text)) return "topic word count is stale";
    if (auto e = presence(!s.handles.empty(), Stage::HandlesSelected, "handles")) return e;
    if (auto e = presence(!s.associations.empty(), Stage::AssociationsGenerated, "associations")) return e;
    if (auto e = presence(!s.candidates.empty(), Stage::CandidatesCreated, "candidates")) return e;
    if (auto e = presence(!s.jokes.empty(), Stage::JokesGenerated, "jokes")) return e;
    if (auto e = presence(s.selected_index.has_value(), Stage::Selected, "selected_index")) return e;
    if (!s.handles.empty() && s.handles.size() != 2) return "handles must come in a pair";
    if (!s.associations.empty() && s.associations.size() != 2) return "associations must come in two lists";
    if (s.candidates.size() > 3 || s.jokes.size() > 3) return "too many candidates or jokes";
    if (s.selected_index && *s.selected_index >= s.jokes.size()) return "selected_index out of range";
    for (const auto& h : s.handles) {
        if (!handle_in_topic(s.topic.text, h.surface)) return "handle not in topic";
    }
    for (const auto& j : s.jokes) {
        if (!satisfies_punch_line_position(j.full_text, j.punch_line.text)) return "joke buries its punch line";
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Canonical JSON form

using json = nlohmann::json;

inline void to_json(json& j, const Topic& t) { j = json{{"text", t.text}, {"word_count", t.word_count}}; }
inline void to_json(json& j, const TopicHandle& h) { j = json{{"surface", h.surface}, {"kind", to_string(h.kind)}}; }
inline void to_json(json& j, const Association& a) { j = json{{"text", a.text}, {"handle_index", a.handle_index}}; }
inline void to_json(json& j, const PunchLineCandidate& c) {
    j = json{{"text", c.text}, {"mechanism", to_string(c.mechanism)}, {"sources", c.sources}};
}
inline void to_json(json& j, const JokeCandidate& k) {
    j = json{{"topic", k.topic}, {"angle", k.angle}, {"punch_line", k.punch_line}, {"full_text", k.full_text}};
}
inline void to_json(json& j, const PipelineState& s) {
    j = json{{"stage", to_string(s.stage)},
             {"topic", s.topic},
             {"handles", s.handles},
             {"associations", s.associations},
             {"candidates", s.candidates},
             {"jokes", s.jokes},
             {"selected_index", s.selected_index ? json(*s.selected_index) : json(nullptr)}};
}

/// Serialized payload of a single stage, as stored in session logs.
inline json payload_to_json(const StagePayload& p) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, TopicPayload>) return v.topic.text;
            if constexpr (std::is_same_v<T, HandlesPayload>) return v.handles;
            if constexpr (std::is_same_v<T, AssociationsPayload>) return v.lists;
            if constexpr (std::is_same_v<T, CandidatesPayload>) return v.candidates;
            if constexpr (std::is_same_v<T, JokesPayload>) return v.jokes;
            if constexpr (std::is_same_v<T, SelectionPayload>) return v.index;
        },
        p);
}

/// Data of `stage` as currently held in `s`.
inline StagePayload payload_of(const PipelineState& s, Stage stage) {
    switch (stage) {
        case Stage::TopicSet: return TopicPayload{s.topic};
        case Stage::HandlesSelected: return HandlesPayload{s.handles};
        case Stage::AssociationsGenerated: return AssociationsPayload{s.associations};
        case Stage::CandidatesCreated: return CandidatesPayload{s.candidates};
        case Stage::JokesGenerated: return JokesPayload{s.jokes};
        case Stage::Selected: return SelectionPayload{s.selected_index.value_or(0)};
    }
    return TopicPayload{s.topic};
}

namespace detail {

[[noreturn]] inline void bad_json(Stage stage, const std::string& what) {
    throw Error(ErrorKind::InvalidPayload, what, std::string(to_string(stage)));
}

inline std::string json_text(const json& j, Stage stage, const char* field) {
    if (!j.is_string()) bad_json(stage, std::string(field) + " must be a string");
    return j.get<std::string>();
}

inline Association association_from_json(const json& j, int list_index, Stage stage) {
    if (j.is_string()) return Association{std::string(text::trim(j.get<std::string>())), list_index};
    if (!j.is_object() || !j.contains("text")) bad_json(stage, "association must be a string or {text}");
    Association a{std::string(text::trim(json_text(j.at("text"), stage, "text"))), list_index};
    if (j.contains("handle_index")) {
        if (!j.at("handle_index").is_number_integer()) bad_json(stage, "handle_index must be an integer");
        a.handle_index = j.at("handle_index").get<int>();
    }
    return a;
}

inline PunchLineCandidate candidate_from_json(const json& j, Stage stage) {
    if (!j.is_object() || !j.contains("text") || !j.contains("mechanism")) {
        bad_json(stage, "candidate must be an object with text and mechanism");
    }
    PunchLineCandidate c;
    c.text = std::string(text::trim(json_text(j.at("text"), stage, "text")));
    const auto m = mechanism_from_string(json_text(j.at("mechanism"), stage, "mechanism"));
    if (!m) bad_json(stage, "unknown mechanism");
    c.mechanism = *m;
    if (j.contains("sources")) {
        if (!j.at("sources").is_array()) bad_json(stage, "sources must be an array");
        for (const auto& src : j.at("sources")) {
            if (!src.is_object() || !src.contains("handle_index")) bad_json(stage, "source needs text and handle_index");
            c.sources.push_back(association_from_json(src, -1, stage));
        }
    }
    return c;
}

}  // namespace detail

/// Parses the payload of `stage` from its JSON form. `context` is the state the
/// payload will be installed on; it supplies the topic (jokes) and the candidate
/// list used to resolve jokes whose punch line is given as plain text.
///
/// Accepted shapes: TopicSet takes a string; HandlesSelected an array of strings
/// or {surface, kind}; AssociationsGenerated two arrays of strings or {text};
/// CandidatesCreated an array of {text, mechanism, sources?}; JokesGenerated an
/// array of {angle, punch_line} where punch_line is a candidate object or its
/// text; Selected a zero-based integer.
inline StagePayload payload_from_json(Stage stage, const json& j, const PipelineState& context) {
    using detail::bad_json;
    switch (stage) {
        case Stage::TopicSet:
            if (!j.is_string()) bad_json(stage, "topic must be a string");
            return TopicPayload{Topic::make(j.get<std::string>())};

        case Stage::HandlesSelected: {
            if (!j.is_array()) bad_json(stage, "handles must be an array");
            HandlesPayload p;
            for (const auto& h : j) {
                if (h.is_string()) {
                    p.handles.push_back({std::string(text::trim(h.get<std::string>())), HandleKind::noun});
                } else if (h.is_object() && h.contains("surface")) {
                    TopicHandle th{std::string(text::trim(detail::json_text(h.at("surface"), stage, "surface"))), HandleKind::noun};
                    if (h.contains("kind")) {
                        auto k = handle_kind_from_string(detail::json_text(h.at("kind"), stage, "kind"));
                        if (!k) bad_json(stage, "unknown handle kind");
                        th.kind = *k;
                    }
                    p.handles.push_back(std::move(th));
                } else {
                    bad_json(stage, "handle must be a string or {surface, kind}");
                }
            }
            return p;
        }

        case Stage::AssociationsGenerated: {
            if (!j.is_array()) bad_json(stage, "associations must be an array of two arrays");
            AssociationsPayload p;
            int idx = 0;
            for (const auto& list : j) {
                if (!list.is_array()) bad_json(stage, "associations must be an array of two arrays");
                std::vector<Association> out;
                for (const auto& a : list) out.push_back(detail::association_from_json(a, idx, stage));
                p.lists.push_back(std::move(out));
                ++idx;
            }
            return p;
        }

        case Stage::CandidatesCreated: {
            if (!j.is_array()) bad_json(stage, "candidates must be an array");
            CandidatesPayload p;
            for (const auto& c : j) p.candidates.push_back(detail::candidate_from_json(c, stage));
            return p;
        }

        case Stage::JokesGenerated: {
            if (!j.is_array()) bad_json(stage, "jokes must be an array");
            JokesPayload p;
            for (const auto& k : j) {
                if (!k.is_object() || !k.contains("angle") || !k.contains("punch_line")) {
                    bad_json(stage, "joke must be an object with angle and punch_line");
                }
                JokeCandidate joke;
                joke.topic = context.topic;
                joke.angle = std::string(text::trim(detail::json_text(k.at("angle"), stage, "angle")));
                const auto& pl = k.at("punch_line");
                if (pl.is_string()) {
                    const auto wanted = pl.get<std::string>();
                    const PunchLineCandidate* match = nullptr;
                    for (const auto& c : context.candidates) {
                        if (text::iequals(c.text, text::trim(wanted))) match = &c;
                    }
                    if (!match) bad_json(stage, "punch line \"" + wanted + "\" is not one of the candidates");
                    joke.punch_line = *match;
                } else {
                    joke.punch_line = detail::candidate_from_json(pl, stage);
                }
                try {
                    joke.full_text = assemble_full_text(joke.angle, joke.punch_line.text);
                } catch (const Error& e) {
                    throw e.with_stage(std::string(to_string(stage)));
                }
                p.jokes.push_back(std::move(joke));
            }
            return p;
        }

        case Stage::Selected:
            if (!j.is_number_integer() || j.get<long long>() < 0) bad_json(stage, "selection must be a non-negative integer");
            return SelectionPayload{j.get<std::size_t>()};
    }
    bad_json(stage, "unknown stage");
}

/// Rebuilds a state from its canonical JSON form, re-validating every stage.
inline PipelineState state_from_json(const json& j) {
    if (!j.is_object() || !j.contains("stage") || !j.contains("topic")) {
        throw Error(ErrorKind::InvalidPayload, "state must be an object with stage and topic");
    }
    const auto stage = stage_from_string(j.at("stage").is_string() ? j.at("stage").get<std::string>() : "");
    if (!stage) throw Error(ErrorKind::InvalidPayload, "unknown stage");
    const auto& topic = j.at("topic");
    PipelineState s = PipelineState::with_topic(
        Topic::make(topic.is_object() && topic.contains("text") ? detail::json_text(topic.at("text"), Stage::TopicSet, "text")
                                                                : detail::json_text(topic, Stage::TopicSet, "topic")));
    static constexpr std::array<const char*, 6> fields = {"topic", "handles", "associations", "candidates", "jokes",
                                                          "selected_index"};
    for (int i = 1; i <= index_of(*stage); ++i) {
        const auto st = static_cast<Stage>(i);
        s = advance_stage(s, payload_from_json(st, j.at(fields[static_cast<std::size_t>(i)]), s));
    }
    return s;
}

}  // namespace witforge
