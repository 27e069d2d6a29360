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

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "witforge/core_model.hpp"
#include "witforge/error.hpp"
#include "witforge/lm_backend.hpp"
#include "witforge/text.hpp"
#include "witforge/wordplay.hpp"

namespace witforge {

struct PipelineConfig {
    int associations_per_handle = 8;
    double wordplay_threshold = wordplay::kDefaultThreshold;
    int angle_retry_limit = 3;
    std::string third_mechanism = "handle_blend";
    /// Passed through to every request; empty lets the backend pick its configured model.
    std::string model_id;

    void validate() const {
        if (associations_per_handle <= 0) throw Error(ErrorKind::ConfigError, "associations_per_handle must be positive");
        if (!(wordplay_threshold >= 0.0 && wordplay_threshold <= 1.0)) {
            throw Error(ErrorKind::ConfigError, "wordplay_threshold must be in [0, 1]");
        }
        if (angle_retry_limit <= 0) throw Error(ErrorKind::ConfigError, "angle_retry_limit must be positive");
    }
};

/// Everything a punch-line mechanism may use.
struct MechanismContext {
    Backend& backend;
    const PromptCatalog& prompts;
    const PipelineConfig& config;
};

/// Pluggable producer for the third punch-line candidate.
class PunchLineMechanism {
public:
    virtual ~PunchLineMechanism() = default;
    [[nodiscard]] virtual std::string_view name() const = 0;
    /// Returns nothing when the mechanism has no usable punch line for this state.
    virtual std::optional<PunchLineCandidate> produce(const PipelineState& state, MechanismContext& ctx) const = 0;
};

/// Default third mechanism: asks the model for a punch line built from the two
/// handle surfaces alone.
class HandleBlendMechanism final : public PunchLineMechanism {
public:
    [[nodiscard]] std::string_view name() const override { return "handle_blend"; }

    std::optional<PunchLineCandidate> produce(const PipelineState& state, MechanismContext& ctx) const override {
        const auto request = make_request(ctx.prompts, TemplateId::third_mechanism,
                                          {{"topic", state.topic.text},
                                           {"handle_a", state.handles[0].surface},
                                           {"handle_b", state.handles[1].surface}},
                                          ctx.config.model_id);
        const auto reply = ctx.backend.complete(request);
        const auto items = text::split_items(reply.text);
        if (items.empty()) return std::nullopt;
        auto line = std::string(text::trim_punct(items.front()));
        if (line.empty()) return std::nullopt;
        return PunchLineCandidate{std::move(line), Mechanism::third, {}};
    }
};

class DisabledMechanism final : public PunchLineMechanism {
public:
    [[nodiscard]] std::string_view name() const override { return "disabled"; }
    std::optional<PunchLineCandidate> produce(const PipelineState&, MechanismContext&) const override {
        return std::nullopt;
    }
};

using MechanismFactory = std::function<std::unique_ptr<PunchLineMechanism>()>;

namespace detail {

struct MechanismRegistry {
    std::mutex mutex;
    std::map<std::string, MechanismFactory, std::less<>> factories{
        {"handle_blend", [] { return std::make_unique<HandleBlendMechanism>(); }},
        {"disabled", [] { return std::make_unique<DisabledMechanism>(); }},
    };
};

inline MechanismRegistry& mechanism_registry() {
    static MechanismRegistry registry;
    return registry;
}

}  // namespace detail

inline void register_third_mechanism(std::string name, MechanismFactory factory) {
    auto& r = detail::mechanism_registry();
    std::lock_guard lock(r.mutex);
    r.factories.insert_or_assign(std::move(name), std::move(factory));
}

inline std::unique_ptr<PunchLineMechanism> make_third_mechanism(std::string_view name) {
    auto& r = detail::mechanism_registry();
    std::lock_guard lock(r.mutex);
    auto it = r.factories.find(name);
    if (it == r.factories.end()) {
        throw Error(ErrorKind::ConfigError, "unknown third mechanism \"" + std::string(name) + "\"");
    }
    return it->second();
}

// ---------------------------------------------------------------------------

/// Starts a chain from a user sentence.
inline PipelineState set_topic(std::string_view sentence) { return PipelineState::with_topic(Topic::make(sentence)); }

/// Replaces the data of an already reached stage with human-provided data and
/// clears everything downstream of it.
inline PipelineState edit_stage(const PipelineState& state, Stage stage, StagePayload payload) {
    if (payload_stage(payload) != stage) {
        throw Error(ErrorKind::InvalidPayload, "payload does not belong to stage " + std::string(to_string(stage)),
                    std::string(to_string(stage)));
    }
    if (index_of(stage) > index_of(state.stage)) {
        throw Error(ErrorKind::StageOrderViolation,
                    std::string(to_string(stage)) + " has not been reached yet (state is at " +
                        std::string(to_string(state.stage)) + ")",
                    std::string(to_string(stage)));
    }
    if (stage == Stage::TopicSet) {
        return PipelineState::with_topic(std::get<TopicPayload>(std::move(payload)).topic);
    }
    const auto base = invalidate_from(state, static_cast<Stage>(index_of(stage) - 1));
    return advance_stage(base, std::move(payload));
}

namespace detail {

inline HandleKind classify_handle(std::string_view surface) {
    const auto words = text::split_whitespace(surface);
    for (const auto& w : words) {
        if (!w.empty() && text::is_upper(w.front())) return HandleKind::named_entity;
    }
    return words.size() > 1 ? HandleKind::noun_phrase : HandleKind::noun;
}

/// Associations of each list whose content words occur in `punch_line`.
inline std::vector<Association> find_sources(std::string_view punch_line,
                                             const std::vector<std::vector<Association>>& lists) {
    std::vector<Association> out;
    for (const auto& list : lists) {
        const Association* best = nullptr;
        std::size_t best_len = 0;
        for (const auto& a : list) {
            const auto words = wordplay::detail::content_words(a.text);
            if (words.empty()) continue;
            const auto core = std::string_view(a.text).substr(words.front().begin);
            if (core.size() > best_len && text::icontains_words(punch_line, core)) {
                best = &a;
                best_len = core.size();
            }
        }
        if (best) out.push_back(*best);
    }
    return out;
}

inline std::optional<std::size_t> first_index_in_range(std::string_view reply, std::size_t count) {
    std::size_t i = 0;
    while (i < reply.size()) {
        if (!text::is_digit(reply[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        unsigned long long value = 0;
        while (j < reply.size() && text::is_digit(reply[j])) {
            if (value < 1000000) value = value * 10 + static_cast<unsigned long long>(reply[j] - '0');
            ++j;
        }
        if (value >= 1 && value <= count) return static_cast<std::size_t>(value - 1);
        i = j;
    }
    return std::nullopt;
}

}  // namespace detail

/// Preference order when the model's choice cannot be used.
inline std::size_t fallback_selection(const std::vector<JokeCandidate>& jokes) {
    for (Mechanism m : {Mechanism::commonsense, Mechanism::wordplay, Mechanism::third}) {
        for (std::size_t i = 0; i < jokes.size(); ++i) {
            if (jokes[i].punch_line.mechanism == m) return i;
        }
    }
    return 0;
}

/// Runs the joke chain over a completion backend, one stage at a time.
///
/// Every stage takes a state at the previous stage and returns a new state;
/// nothing is mutated in place, so any intermediate state can be inspected,
/// edited with `edit_stage`, and resumed.
class JokePipeline {
public:
    JokePipeline(Backend& backend, PromptCatalog prompts, PipelineConfig config = {})
        : backend_(backend),
          prompts_(std::move(prompts)),
          config_(std::move(config)),
          third_(make_third_mechanism(config_.third_mechanism)) {
        config_.validate();
    }

    [[nodiscard]] const PipelineConfig& config() const noexcept { return config_; }
    [[nodiscard]] const PromptCatalog& prompts() const noexcept { return prompts_; }

    PipelineState select_topic_handles(const PipelineState& state) const {
        return staged(state, Stage::HandlesSelected, [&] {
            const auto reply = complete(TemplateId::handle_selection, {{"topic", state.topic.text}});
            const auto items = text::split_items(reply);
            if (items.size() != 2) {
                throw Error(ErrorKind::HandleParseError,
                            "expected 2 handles, got " + std::to_string(items.size()) + " in \"" + reply + "\"");
            }
            HandlesPayload payload;
            for (const auto& item : items) {
                const auto surface = std::string(text::trim_punct(item));
                payload.handles.push_back({surface, detail::classify_handle(surface)});
            }
            return advance_stage(state, std::move(payload));
        });
    }

    PipelineState generate_associations(const PipelineState& state) const {
        return staged(state, Stage::AssociationsGenerated, [&] {
            AssociationsPayload payload;
            for (int i = 0; i < 2; ++i) {
                const auto& handle = state.handles[static_cast<std::size_t>(i)];
                const auto reply = complete(TemplateId::association_generation,
                                            {{"topic", state.topic.text},
                                             {"handle", handle.surface},
                                             {"count", std::to_string(config_.associations_per_handle)}});
                std::vector<Association> list;
                for (const auto& raw : text::split_items(reply)) {
                    const auto item = std::string(text::trim_punct(raw));
                    if (item.empty()) continue;
                    if (text::iequals(item, text::trim_punct(handle.surface))) continue;
                    if (text::icontains_words(state.topic.text, item)) continue;
                    const bool dup = std::any_of(list.begin(), list.end(),
                                                 [&](const Association& a) { return text::iequals(a.text, item); });
                    if (dup) continue;
                    list.push_back({item, i});
                    if (static_cast<int>(list.size()) == config_.associations_per_handle) break;
                }
                if (list.empty()) {
                    throw Error(ErrorKind::EmptyAssociationList,
                                "no usable associations for \"" + handle.surface + "\" in \"" + reply + "\"");
                }
                payload.lists.push_back(std::move(list));
            }
            return advance_stage(state, std::move(payload));
        });
    }

    PipelineState create_candidates(const PipelineState& state) const {
        return staged(state, Stage::CandidatesCreated, [&] {
            CandidatesPayload payload;
            if (auto c = wordplay_candidate(state)) payload.candidates.push_back(std::move(*c));
            if (auto c = commonsense_candidate(state)) payload.candidates.push_back(std::move(*c));
            MechanismContext ctx{backend_, prompts_, config_};
            if (auto c = third_->produce(state, ctx)) {
                c->mechanism = Mechanism::third;
                payload.candidates.push_back(std::move(*c));
            }
            if (payload.candidates.empty()) {
                throw Error(ErrorKind::NoCandidates, "no mechanism produced a punch line");
            }
            return advance_stage(state, std::move(payload));
        });
    }

    PipelineState generate_angles(const PipelineState& state) const {
        return staged(state, Stage::JokesGenerated, [&] {
            JokesPayload payload;
            for (const auto& candidate : state.candidates) {
                for (int attempt = 0; attempt < config_.angle_retry_limit; ++attempt) {
                    const auto reply = complete(TemplateId::angle_generation,
                                                {{"topic", state.topic.text}, {"punch_line", candidate.text}});
                    try {
                        auto full = assemble_full_text(reply, candidate.text);
                        payload.jokes.push_back({state.topic, std::string(text::trim(reply)), candidate, std::move(full)});
                        break;
                    } catch (const Error& e) {
                        if (e.kind() != ErrorKind::PunchLinePositionViolated && e.kind() != ErrorKind::InvalidPayload) throw;
                    }
                }
            }
            if (payload.jokes.empty()) {
                throw Error(ErrorKind::NoJokes, "no angle kept any punch line at the end of its joke");
            }
            return advance_stage(state, std::move(payload));
        });
    }

    PipelineState select_funniest(const PipelineState& state) const {
        return staged(state, Stage::Selected, [&] {
            const auto& jokes = state.jokes;
            if (jokes.size() == 1) return advance_stage(state, SelectionPayload{0});
            std::string listing;
            for (std::size_t i = 0; i < jokes.size(); ++i) {
                listing += std::to_string(i + 1) + ". " + jokes[i].full_text;
                if (i + 1 < jokes.size()) listing += '\n';
            }
            std::optional<std::size_t> choice;
            try {
                const auto reply = complete(TemplateId::candidate_selection,
                                            {{"topic", state.topic.text},
                                             {"jokes", listing},
                                             {"count", std::to_string(jokes.size())}});
                choice = detail::first_index_in_range(reply, jokes.size());
            } catch (const Error& e) {
                if (!e.is_backend_failure()) throw;
            }
            return advance_stage(state, SelectionPayload{choice.value_or(fallback_selection(jokes))});
        });
    }

    /// Runs exactly the stage after `state.stage`.
    PipelineState advance(const PipelineState& state) const {
        switch (state.stage) {
            case Stage::TopicSet: return select_topic_handles(state);
            case Stage::HandlesSelected: return generate_associations(state);
            case Stage::AssociationsGenerated: return create_candidates(state);
            case Stage::CandidatesCreated: return generate_angles(state);
            case Stage::JokesGenerated: return select_funniest(state);
            case Stage::Selected: break;
        }
        throw Error(ErrorKind::StageOrderViolation, "the chain is already complete", std::string(to_string(Stage::Selected)));
    }

    /// Advances until a joke is selected.
    PipelineState resume(PipelineState state) const {
        while (state.stage != Stage::Selected) state = advance(state);
        return state;
    }

    struct Result {
        JokeCandidate joke;
        PipelineState state;
    };

    Result run(std::string_view topic_text) const {
        auto state = resume(set_topic(topic_text));
        return Result{*state.selected_joke(), std::move(state)};
    }

    /// The wordplay candidate depends only on the association lists.
    std::optional<PunchLineCandidate> wordplay_candidate(const PipelineState& state) const {
        const auto pair = wordplay::best_wordplay_pair(state.associations[0], state.associations[1], config_.wordplay_threshold);
        if (!pair) return std::nullopt;
        return PunchLineCandidate{wordplay::build_pun_phrase(*pair), Mechanism::wordplay, {pair->a, pair->b}};
    }

private:
    template <typename Fn>
    PipelineState staged(const PipelineState& state, Stage produces, Fn&& fn) const {
        if (index_of(state.stage) + 1 != index_of(produces)) {
            throw Error(ErrorKind::StageOrderViolation,
                        "state is at " + std::string(to_string(state.stage)), std::string(to_string(produces)));
        }
        try {
            return fn();
        } catch (const Error& e) {
            throw e.with_stage(std::string(to_string(produces)));
        }
    }

    std::string complete(TemplateId id, const Bindings& bindings) const {
        return backend_.complete(make_request(prompts_, id, bindings, config_.model_id)).text;
    }

    std::optional<PunchLineCandidate> commonsense_candidate(const PipelineState& state) const {
        auto texts = [](const std::vector<Association>& list) {
            std::vector<std::string> out;
            for (const auto& a : list) out.push_back(a.text);
            return text::join(out, "; ");
        };
        const auto reply = complete(TemplateId::commonsense_punchline,
                                    {{"topic", state.topic.text},
                                     {"handle_a", state.handles[0].surface},
                                     {"handle_b", state.handles[1].surface},
                                     {"associations_a", texts(state.associations[0])},
                                     {"associations_b", texts(state.associations[1])}});
        const auto items = text::split_items(reply);
        if (items.empty()) return std::nullopt;
        auto line = std::string(text::trim_punct(items.front()));
        if (line.empty()) return std::nullopt;
        auto sources = detail::find_sources(line, state.associations);
        return PunchLineCandidate{std::move(line), Mechanism::commonsense, std::move(sources)};
    }

    Backend& backend_;
    PromptCatalog prompts_;
    PipelineConfig config_;
    std::unique_ptr<PunchLineMechanism> third_;
};

}  // namespace witforge
