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

#include <algorithm>
#include <array>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "witforge/error.hpp"
#include "witforge/text.hpp"

namespace witforge {

enum class TemplateId {
    handle_selection,
    association_generation,
    commonsense_punchline,
    third_mechanism,
    angle_generation,
    candidate_selection,
    gpt_lol,
    noun_annotation,
};

inline constexpr std::array<TemplateId, 8> kAllTemplates = {
    TemplateId::handle_selection, TemplateId::association_generation, TemplateId::commonsense_punchline,
    TemplateId::third_mechanism,  TemplateId::angle_generation,       TemplateId::candidate_selection,
    TemplateId::gpt_lol,          TemplateId::noun_annotation,
};

constexpr std::string_view to_string(TemplateId id) noexcept {
    switch (id) {
        case TemplateId::handle_selection: return "handle_selection";
        case TemplateId::association_generation: return "association_generation";
        case TemplateId::commonsense_punchline: return "commonsense_punchline";
        case TemplateId::third_mechanism: return "third_mechanism";
        case TemplateId::angle_generation: return "angle_generation";
        case TemplateId::candidate_selection: return "candidate_selection";
        case TemplateId::gpt_lol: return "gpt_lol";
        case TemplateId::noun_annotation: return "noun_annotation";
    }
    return "unknown";
}

inline std::optional<TemplateId> template_from_string(std::string_view name) noexcept {
    for (auto id : kAllTemplates) {
        if (to_string(id) == name) return id;
    }
    return std::nullopt;
}

/// The baseline prompt. It is a fixed protocol, not a tunable prompt.
inline constexpr std::string_view kGptLolBody = "You want to be funny. Respond to this: {sentence}";

struct DecodingParams {
    double temperature = 0.7;
    double top_p = 1.0;
    int max_tokens = 64;
    std::vector<std::string> stop;

    void validate() const {
        if (!(temperature >= 0.0)) throw Error(ErrorKind::ConfigError, "temperature must be >= 0");
        if (!(top_p > 0.0 && top_p <= 1.0)) throw Error(ErrorKind::ConfigError, "top_p must be in (0, 1]");
        if (max_tokens <= 0) throw Error(ErrorKind::ConfigError, "max_tokens must be positive");
    }

    bool operator==(const DecodingParams&) const = default;
};

/// Default decoding per template. Generation steps sample at 0.7 / 1.0,
/// selection and tagging are greedy.
inline DecodingParams default_decoding(TemplateId id) {
    switch (id) {
        case TemplateId::gpt_lol:
            return DecodingParams{0.7, 1.0, 128, {}};
        case TemplateId::candidate_selection:
            return DecodingParams{0.0, 1.0, 16, {}};
        case TemplateId::noun_annotation:
            return DecodingParams{0.0, 1.0, 64, {"\n"}};
        case TemplateId::angle_generation:
            return DecodingParams{0.7, 1.0, 96, {"\n"}};
        default:
            return DecodingParams{0.7, 1.0, 64, {"\n"}};
    }
}

/// Placeholder names each template may use.
inline const std::set<std::string>& allowed_placeholders(TemplateId id) {
    static const std::map<TemplateId, std::set<std::string>> table = {
        {TemplateId::handle_selection, {"topic"}},
        {TemplateId::association_generation, {"topic", "handle", "count"}},
        {TemplateId::commonsense_punchline, {"topic", "handle_a", "handle_b", "associations_a", "associations_b"}},
        {TemplateId::third_mechanism, {"topic", "handle_a", "handle_b"}},
        {TemplateId::angle_generation, {"topic", "punch_line"}},
        {TemplateId::candidate_selection, {"topic", "jokes", "count"}},
        {TemplateId::gpt_lol, {"sentence"}},
        {TemplateId::noun_annotation, {"sentence"}},
    };
    return table.at(id);
}

namespace detail {

struct PlaceholderSpan {
    std::size_t begin;
    std::size_t end;  // one past the closing brace
    std::string name;
};

inline bool is_ident_start(char c) { return text::is_alpha(c) || c == '_'; }
inline bool is_ident(char c) { return text::is_alpha(c) || text::is_digit(c) || c == '_'; }

/// `{name}` where name is an identifier; any other brace is literal text.
inline std::vector<PlaceholderSpan> scan_placeholders(std::string_view body) {
    std::vector<PlaceholderSpan> out;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] != '{' || i + 1 >= body.size() || !is_ident_start(body[i + 1])) continue;
        std::size_t j = i + 1;
        while (j < body.size() && is_ident(body[j])) ++j;
        if (j < body.size() && body[j] == '}') {
            out.push_back({i, j + 1, std::string(body.substr(i + 1, j - i - 1))});
            i = j;
        }
    }
    return out;
}

}  // namespace detail

struct PromptTemplate {
    TemplateId id = TemplateId::gpt_lol;
    std::string body;
    DecodingParams decoding;

    /// Distinct placeholder names, in first-use order.
    [[nodiscard]] std::vector<std::string> placeholders() const {
        std::vector<std::string> names;
        for (auto& span : detail::scan_placeholders(body)) {
            if (std::find(names.begin(), names.end(), span.name) == names.end()) names.push_back(span.name);
        }
        return names;
    }

    /// Throws UnknownPlaceholder if the body uses a name this template id does not provide.
    void validate() const {
        const auto& allowed = allowed_placeholders(id);
        for (const auto& name : placeholders()) {
            if (!allowed.contains(name)) {
                throw Error(ErrorKind::UnknownPlaceholder,
                            "{" + name + "} in template " + std::string(to_string(id)));
            }
        }
        decoding.validate();
    }
};

using Bindings = std::map<std::string, std::string, std::less<>>;

/// Substitutes every `{name}` in the template body. Bindings that the body
/// does not use are ignored.
inline std::string render_template(const PromptTemplate& tpl, const Bindings& bindings) {
    std::string out;
    out.reserve(tpl.body.size() + 64);
    std::size_t cursor = 0;
    const auto& allowed = allowed_placeholders(tpl.id);
    for (const auto& span : detail::scan_placeholders(tpl.body)) {
        if (!allowed.contains(span.name)) {
            throw Error(ErrorKind::UnknownPlaceholder, "{" + span.name + "} in template " + std::string(to_string(tpl.id)));
        }
        const auto it = bindings.find(span.name);
        if (it == bindings.end()) {
            throw Error(ErrorKind::MissingBinding, span.name);
        }
        out.append(tpl.body, cursor, span.begin - cursor);
        out += it->second;
        cursor = span.end;
    }
    out.append(tpl.body, cursor, std::string::npos);
    return out;
}

inline PromptTemplate gpt_lol_template() {
    return PromptTemplate{TemplateId::gpt_lol, std::string(kGptLolBody), default_decoding(TemplateId::gpt_lol)};
}

/// The set of prompt templates, loaded from one `<template id>.txt` file per
/// template in a directory.
class PromptCatalog {
public:
    PromptCatalog() { templates_.emplace(TemplateId::gpt_lol, gpt_lol_template()); }

    static PromptCatalog load(const std::filesystem::path& dir) {
        PromptCatalog catalog;
        for (auto id : kAllTemplates) {
            const auto path = dir / (std::string(to_string(id)) + ".txt");
            std::ifstream in(path, std::ios::binary);
            if (!in) {
                throw Error(ErrorKind::ConfigError, "missing prompt file " + path.string());
            }
            std::stringstream ss;
            ss << in.rdbuf();
            std::string body = ss.str();
            while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
            if (id == TemplateId::gpt_lol && body != kGptLolBody) {
                throw Error(ErrorKind::ConfigError, "the gpt_lol prompt is fixed and may not be edited: " + path.string());
            }
            catalog.set(PromptTemplate{id, std::move(body), default_decoding(id)});
        }
        return catalog;
    }

    void set(PromptTemplate tpl) {
        tpl.validate();
        if (tpl.id == TemplateId::gpt_lol && (tpl.body != kGptLolBody || tpl.decoding != default_decoding(TemplateId::gpt_lol))) {
            throw Error(ErrorKind::ConfigError, "the gpt_lol template and its decoding parameters are fixed");
        }
        templates_.insert_or_assign(tpl.id, std::move(tpl));
    }

    /// Overrides decoding for one template; refused for the baseline.
    void set_decoding(TemplateId id, DecodingParams params) {
        if (id == TemplateId::gpt_lol && params != default_decoding(TemplateId::gpt_lol)) {
            throw Error(ErrorKind::ConfigError, "gpt_lol decoding is fixed at temperature 0.7, top_p 1.0");
        }
        params.validate();
        auto it = templates_.find(id);
        if (it == templates_.end()) {
            throw Error(ErrorKind::ConfigError, "no template " + std::string(to_string(id)) + " loaded");
        }
        it->second.decoding = std::move(params);
    }

    [[nodiscard]] const PromptTemplate& get(TemplateId id) const {
        auto it = templates_.find(id);
        if (it == templates_.end()) {
            throw Error(ErrorKind::ConfigError, "no template " + std::string(to_string(id)) + " loaded");
        }
        return it->second;
    }

    [[nodiscard]] bool contains(TemplateId id) const { return templates_.contains(id); }

private:
    std::map<TemplateId, PromptTemplate> templates_;
};

// ---------------------------------------------------------------------------
// Completion backends

struct CompletionRequest {
    TemplateId template_id = TemplateId::gpt_lol;
    std::string prompt;
    std::string model_id;
    DecodingParams decoding;

    bool operator==(const CompletionRequest&) const = default;
};

enum class FinishReason { stop, length, other };

struct CompletionResult {
    std::string text;
    FinishReason finish_reason = FinishReason::stop;
};

/// A text-completion language model. Implementations must be safe to call
/// from several threads at once.
class Backend {
public:
    virtual ~Backend() = default;
    virtual CompletionResult complete(const CompletionRequest& request) = 0;
};

/// Renders `id` from the catalog and wraps it in a request.
inline CompletionRequest make_request(const PromptCatalog& catalog, TemplateId id, const Bindings& bindings,
                                      std::string model_id = {}) {
    const auto& tpl = catalog.get(id);
    return CompletionRequest{id, render_template(tpl, bindings), std::move(model_id), tpl.decoding};
}

/// One scripted reply: either text or a simulated backend failure.
struct ScriptItem {
    std::string text;
    std::optional<ErrorKind> error;
};

using Script = std::map<TemplateId, std::vector<ScriptItem>>;

/// Deterministic backend that replays canned replies per template id, in order.
/// Never touches the network.
class ScriptedBackend final : public Backend {
public:
    explicit ScriptedBackend(Script script) {
        for (auto& [id, items] : script) queues_[id] = std::deque<ScriptItem>(items.begin(), items.end());
    }

    /// Script JSON: {"<template id>": ["reply", {"error": "TransportError"}, ...], ...}
    static Script parse_script(const nlohmann::json& j) {
        if (!j.is_object()) throw Error(ErrorKind::FormatError, "mock script must be a JSON object");
        Script script;
        for (const auto& [key, value] : j.items()) {
            const auto id = template_from_string(key);
            if (!id) throw Error(ErrorKind::FormatError, "unknown template id in mock script: " + key);
            if (!value.is_array()) throw Error(ErrorKind::FormatError, "mock script entry " + key + " must be an array");
            auto& items = script[*id];
            for (const auto& v : value) {
                if (v.is_string()) {
                    items.push_back({v.get<std::string>(), std::nullopt});
                } else if (v.is_object() && v.contains("error") && v.at("error").is_string()) {
                    items.push_back({{}, error_kind_from_name(v.at("error").get<std::string>())});
                } else {
                    throw Error(ErrorKind::FormatError, "mock script item must be a string or {\"error\": kind}");
                }
            }
        }
        return script;
    }

    static Script load_script(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorKind::IoError, "cannot read mock script " + path.string());
        try {
            return parse_script(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::FormatError, path.string() + ": " + e.what());
        }
    }

    CompletionResult complete(const CompletionRequest& request) override {
        std::lock_guard lock(mutex_);
        transcript_.push_back(request);
        if (request.prompt.empty()) throw Error(ErrorKind::InvalidPayload, "empty prompt");
        auto it = queues_.find(request.template_id);
        if (it == queues_.end() || it->second.empty()) {
            throw Error(ErrorKind::ScriptExhausted, "no scripted reply left for " + std::string(to_string(request.template_id)));
        }
        ScriptItem item = std::move(it->second.front());
        it->second.pop_front();
        if (item.error) throw Error(*item.error, "scripted failure");
        return CompletionResult{std::string(text::trim(item.text)), FinishReason::stop};
    }

    [[nodiscard]] std::vector<CompletionRequest> transcript() const {
        std::lock_guard lock(mutex_);
        return transcript_;
    }

    [[nodiscard]] std::size_t calls() const {
        std::lock_guard lock(mutex_);
        return transcript_.size();
    }

    [[nodiscard]] std::size_t remaining(TemplateId id) const {
        std::lock_guard lock(mutex_);
        auto it = queues_.find(id);
        return it == queues_.end() ? 0 : it->second.size();
    }

private:
    static ErrorKind error_kind_from_name(std::string_view name) {
        for (auto kind : {ErrorKind::AuthError, ErrorKind::RateLimited, ErrorKind::TransportError,
                          ErrorKind::EmptyCompletion, ErrorKind::ScriptExhausted}) {
            if (to_string(kind) == name) return kind;
        }
        throw Error(ErrorKind::FormatError, "unsupported scripted error " + std::string(name));
    }

    mutable std::mutex mutex_;
    std::map<TemplateId, std::deque<ScriptItem>> queues_;
    std::vector<CompletionRequest> transcript_;
};

inline std::unique_ptr<ScriptedBackend> scripted_mock(Script script) {
    return std::make_unique<ScriptedBackend>(std::move(script));
}

}  // namespace witforge
