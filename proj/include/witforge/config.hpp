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

// `key = value` configuration files. Lines starting with '#' are comments.
//
//   associations_per_handle = 8
//   wordplay_threshold = 0.4
//   angle_retry_limit = 3
//   third_mechanism = handle_blend
//   prompt_dir = prompts            # relative to the config file
//   model = my-model
//   endpoint = https://api.example.com/v1/completions
//   angle_generation.temperature = 0.9
//   handle_selection.stop = \n

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "witforge/error.hpp"
#include "witforge/lm_backend.hpp"
#include "witforge/pipeline.hpp"
#include "witforge/text.hpp"

namespace witforge {

struct Settings {
    PipelineConfig pipeline;
    std::optional<std::filesystem::path> prompt_dir;
    std::string endpoint;
    std::map<TemplateId, DecodingParams> decoding;
};

namespace detail {

inline double parse_double(std::string_view v, const std::string& at) {
    try {
        std::size_t used = 0;
        const std::string s(v);
        const double d = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return d;
    } catch (const std::exception&) {
        throw Error(ErrorKind::ConfigError, at + ": \"" + std::string(v) + "\" is not a number");
    }
}

inline int parse_positive(std::string_view v, const std::string& at) {
    const double d = parse_double(v, at);
    if (d != static_cast<double>(static_cast<int>(d)) || d <= 0) {
        throw Error(ErrorKind::ConfigError, at + ": \"" + std::string(v) + "\" is not a positive integer");
    }
    return static_cast<int>(d);
}

inline std::string unescape(std::string_view v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] == '\\' && i + 1 < v.size()) {
            const char n = v[++i];
            out.push_back(n == 'n' ? '\n' : n == 't' ? '\t' : n);
        } else {
            out.push_back(v[i]);
        }
    }
    return out;
}

}  // namespace detail

/// `base_dir` resolves a relative prompt_dir.
inline Settings parse_settings(std::string_view content, const std::filesystem::path& base_dir = {},
                               const std::string& name = "config") {
    Settings s;
    std::istringstream in{std::string(content)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto at = name + ":" + std::to_string(line_no);
        auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) throw Error(ErrorKind::ConfigError, at + ": expected key = value");
        const auto key = std::string(text::trim(t.substr(0, eq)));
        auto value = text::trim(t.substr(eq + 1));
        if (const auto hash = value.find(" #"); hash != std::string_view::npos) value = text::trim(value.substr(0, hash));

        if (key == "associations_per_handle") {
            s.pipeline.associations_per_handle = detail::parse_positive(value, at);
        } else if (key == "wordplay_threshold") {
            s.pipeline.wordplay_threshold = detail::parse_double(value, at);
        } else if (key == "angle_retry_limit") {
            s.pipeline.angle_retry_limit = detail::parse_positive(value, at);
        } else if (key == "third_mechanism") {
            s.pipeline.third_mechanism = std::string(value);
        } else if (key == "model") {
            s.pipeline.model_id = std::string(value);
        } else if (key == "endpoint") {
            s.endpoint = std::string(value);
        } else if (key == "prompt_dir") {
            std::filesystem::path p{std::string(value)};
            s.prompt_dir = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
        } else if (const auto dot = key.find('.'); dot != std::string::npos) {
            const auto id = template_from_string(key.substr(0, dot));
            if (!id) throw Error(ErrorKind::ConfigError, at + ": unknown template \"" + key.substr(0, dot) + "\"");
            if (*id == TemplateId::gpt_lol) throw Error(ErrorKind::ConfigError, at + ": gpt_lol decoding is fixed");
            auto [it, inserted] = s.decoding.try_emplace(*id, default_decoding(*id));
            auto& d = it->second;
            const auto field = key.substr(dot + 1);
            if (field == "temperature") {
                d.temperature = detail::parse_double(value, at);
            } else if (field == "top_p") {
                d.top_p = detail::parse_double(value, at);
            } else if (field == "max_tokens") {
                d.max_tokens = detail::parse_positive(value, at);
            } else if (field == "stop") {
                d.stop = {detail::unescape(value)};
            } else {
                throw Error(ErrorKind::ConfigError, at + ": unknown decoding field \"" + field + "\"");
            }
            d.validate();
        } else {
            throw Error(ErrorKind::ConfigError, at + ": unknown key \"" + key + "\"");
        }
    }
    s.pipeline.validate();
    return s;
}

inline Settings load_settings(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_settings(ss.str(), path.parent_path(), path.string());
}

/// Loads templates from `dir` and applies the decoding overrides.
inline PromptCatalog build_catalog(const std::filesystem::path& dir, const Settings& settings) {
    auto catalog = PromptCatalog::load(dir);
    for (const auto& [id, d] : settings.decoding) catalog.set_decoding(id, d);
    return catalog;
}

}  // namespace witforge
