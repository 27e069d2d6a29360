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

// Shared fixtures for the test binaries and the acceptance runner.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "witforge/core_model.hpp"
#include "witforge/lm_backend.hpp"

namespace witforge::testing {

inline constexpr const char* kPigs = "Authorities caught two pigs that were wandering around loose in San Antonio, Texas.";
inline constexpr const char* kGoldenJoke = "They were taken to the Alamo Sausage Company.";

inline std::filesystem::path test_data(const std::string& name) { return std::filesystem::path(WITFORGE_TEST_DATA) / name; }
inline std::filesystem::path repo_data(const std::string& name) { return std::filesystem::path(WITFORGE_REPO_DATA) / name; }

inline PromptCatalog prompts() { return PromptCatalog::load(WITFORGE_PROMPT_DIR); }
inline Script golden_script() { return ScriptedBackend::load_script(repo_data("golden_pigs.json")); }

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    auto dir = std::filesystem::temp_directory_path() / ("witforge-" + tag + "-" + std::to_string(rng()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

struct CommandResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr
};

inline CommandResult run_command(const std::string& cmd) {
    CommandResult r;
    FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

inline std::string cli() { return std::string("\"") + WITFORGE_CLI + "\""; }

inline std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out.push_back(c);
        }
    }
    return out + "'";
}

// ---------------------------------------------------------------------------
// Random stage payloads for state-machine walks.

class PayloadGenerator {
public:
    explicit PayloadGenerator(std::uint64_t seed) : rng_(seed) {}

    std::mt19937_64& rng() { return rng_; }

    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

    Topic topic() {
        static const std::vector<std::string> topics = {
            kPigs,
            "Germany has given animals legal rights in their constitution.",
            "Did you know that panda researchers wear panda costumes to work?",
            "An aluminum piano was once built for an airship and weighed only 365 pounds!",
            "There is a radio station that turns solar activity to sound.",
        };
        return Topic::make(topics[pick(topics.size())]);
    }

    /// A valid payload for the stage after `s.stage`.
    StagePayload next_for(const PipelineState& s) {
        switch (s.stage) {
            case Stage::TopicSet: return handles(s);
            case Stage::HandlesSelected: return associations(s);
            case Stage::AssociationsGenerated: return candidates(s);
            case Stage::CandidatesCreated: return jokes(s);
            case Stage::JokesGenerated: return SelectionPayload{pick(s.jokes.size())};
            case Stage::Selected: break;
        }
        return TopicPayload{topic()};
    }

    /// A valid payload for `stage`, installed on `s` rewound to just before it.
    StagePayload for_stage(const PipelineState& s, Stage stage) {
        if (stage == Stage::TopicSet) return TopicPayload{topic()};
        return next_for(invalidate_from(s, static_cast<Stage>(index_of(stage) - 1)));
    }

    HandlesPayload handles(const PipelineState& s) {
        std::vector<std::string> words;
        for (const auto& w : text::split_whitespace(s.topic.text)) {
            const auto core = std::string(text::trim_punct(w));
            if (core.size() < 3 || !text::has_letter(core)) continue;
            bool seen = false;
            for (const auto& x : words) seen = seen || text::iequals(x, core);
            if (!seen) words.push_back(core);
        }
        const auto a = pick(words.size());
        auto b = pick(words.size() - 1);
        if (b >= a) ++b;
        return HandlesPayload{{{words[a], HandleKind::noun}, {words[b], HandleKind::noun_phrase}}};
    }

    AssociationsPayload associations(const PipelineState& s) {
        static const std::vector<std::string> pool = {"bacon", "ham", "sausage", "mud", "The Alamo", "River Walk",
                                                      "tacos", "boots", "jazz", "piano", "moon", "radio waves"};
        AssociationsPayload p;
        for (int i = 0; i < 2; ++i) {
            std::vector<Association> list;
            const auto n = 1 + pick(4);
            for (std::size_t k = 0; k < n; ++k) {
                const auto& w = pool[pick(pool.size())];
                if (text::iequals(w, s.handles[static_cast<std::size_t>(i)].surface)) continue;
                list.push_back({w, i});
            }
            if (list.empty()) list.push_back({"zebra", i});
            p.lists.push_back(std::move(list));
        }
        return p;
    }

    CandidatesPayload candidates(const PipelineState& s) {
        CandidatesPayload p;
        const auto n = 1 + pick(3);
        for (std::size_t k = 0; k < n; ++k) {
            const auto& a = s.associations[0][pick(s.associations[0].size())];
            const auto& b = s.associations[1][pick(s.associations[1].size())];
            const auto m = static_cast<Mechanism>(pick(3));
            p.candidates.push_back({a.text + " " + b.text, m, m == Mechanism::third ? std::vector<Association>{} : std::vector<Association>{a, b}});
        }
        return p;
    }

    JokesPayload jokes(const PipelineState& s) {
        static const std::vector<std::string> leads = {"They ended up at", "Now everyone is talking about",
                                                       "I hear the new name is", "Next year it becomes"};
        JokesPayload p;
        for (const auto& c : s.candidates) {
            if (p.jokes.size() > 0 && coin(0.2)) continue;
            JokeCandidate j;
            j.topic = s.topic;
            j.angle = leads[pick(leads.size())] + (coin() ? " " + c.text + "." : "");
            j.punch_line = c;
            j.full_text = assemble_full_text(j.angle, c.text);
            p.jokes.push_back(std::move(j));
        }
        return p;
    }

    /// A joke payload whose punch line sits at the front of a long text.
    JokesPayload buried_jokes(const PipelineState& s) {
        JokesPayload p;
        const auto& c = s.candidates.front();
        JokeCandidate j;
        j.topic = s.topic;
        j.angle = c.text + " is what they said, but the rest of this sentence keeps going on about other things";
        j.punch_line = c;
        j.full_text = j.angle;
        p.jokes.push_back(std::move(j));
        return p;
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace witforge::testing
