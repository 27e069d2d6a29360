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

#include <chrono>
#include <cstdlib>
#include <functional>
#include <regex>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "witforge/error.hpp"
#include "witforge/lm_backend.hpp"

namespace witforge {

/// Exponential backoff: up to `max_retries` retries after the first attempt,
/// waiting base, base*factor, base*factor^2, ... between them.
struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds base_delay{1000};
    double factor = 2.0;

    [[nodiscard]] std::chrono::milliseconds delay_before_retry(int retry) const {
        double ms = static_cast<double>(base_delay.count());
        for (int i = 1; i < retry; ++i) ms *= factor;
        return std::chrono::milliseconds(static_cast<long long>(ms));
    }
};

struct HttpBackendConfig {
    std::string endpoint;  // full completions URL, e.g. https://api.example.com/v1/completions
    std::string api_key;
    std::string model_id;
    RetryPolicy retry;
    std::chrono::seconds timeout{60};
    std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
        std::this_thread::sleep_for(d);
    };

    /// Reads WITFORGE_ENDPOINT, WITFORGE_API_KEY and WITFORGE_MODEL. Values
    /// already set in `base` win over the environment, except the key, which
    /// only ever comes from the environment.
    static HttpBackendConfig from_environment(HttpBackendConfig base) {
        auto env = [](const char* name) -> std::string {
            const char* v = std::getenv(name);
            return v ? std::string(v) : std::string();
        };
        if (base.endpoint.empty()) base.endpoint = env("WITFORGE_ENDPOINT");
        if (base.model_id.empty()) base.model_id = env("WITFORGE_MODEL");
        base.api_key = env("WITFORGE_API_KEY");
        return base;
    }
    static HttpBackendConfig from_environment() { return from_environment(HttpBackendConfig{}); }
};

/// OpenAI-style `/completions` client.
class HttpBackend final : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
        if (config_.endpoint.empty()) throw Error(ErrorKind::ConfigError, "no completions endpoint configured");
        if (config_.model_id.empty()) throw Error(ErrorKind::ConfigError, "no model id configured");
        static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
        std::smatch m;
        if (!std::regex_match(config_.endpoint, m, url)) {
            throw Error(ErrorKind::ConfigError, "malformed endpoint URL: " + config_.endpoint);
        }
        origin_ = m[1].str();
        path_ = m[2].matched ? m[2].str() : std::string("/");
    }

    CompletionResult complete(const CompletionRequest& request) override {
        if (config_.api_key.empty()) {
            throw Error(ErrorKind::AuthError, "WITFORGE_API_KEY is not set");
        }
        if (request.prompt.empty()) throw Error(ErrorKind::InvalidPayload, "empty prompt");

        const std::string body = request_body(request).dump();
        for (int attempt = 0;; ++attempt) {
            try {
                return attempt_once(body);
            } catch (const Error& e) {
                const bool retryable = e.kind() == ErrorKind::RateLimited || e.kind() == ErrorKind::TransportError;
                if (!retryable || attempt >= config_.retry.max_retries) throw;
                config_.sleep(config_.retry.delay_before_retry(attempt + 1));
            }
        }
    }

    nlohmann::json request_body(const CompletionRequest& request) const {
        nlohmann::json j = {
            {"model", request.model_id.empty() ? config_.model_id : request.model_id},
            {"prompt", request.prompt},
            {"temperature", request.decoding.temperature},
            {"top_p", request.decoding.top_p},
            {"max_tokens", request.decoding.max_tokens},
        };
        if (!request.decoding.stop.empty()) j["stop"] = request.decoding.stop;
        return j;
    }

private:
    CompletionResult attempt_once(const std::string& body) const {
        httplib::Client client(origin_);
        client.set_connection_timeout(config_.timeout);
        client.set_read_timeout(config_.timeout);
        client.set_bearer_token_auth(config_.api_key);
        auto res = client.Post(path_, body, "application/json");
        if (!res) {
            throw Error(ErrorKind::TransportError, httplib::to_string(res.error()));
        }
        if (res->status == 401 || res->status == 403) {
            throw Error(ErrorKind::AuthError, "HTTP " + std::to_string(res->status));
        }
        if (res->status == 429) {
            throw Error(ErrorKind::RateLimited, "HTTP 429");
        }
        if (res->status < 200 || res->status >= 300) {
            throw Error(ErrorKind::TransportError, "HTTP " + std::to_string(res->status));
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::TransportError, std::string("unparseable response: ") + e.what());
        }
        if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty() ||
            !j["choices"][0].contains("text") || !j["choices"][0]["text"].is_string()) {
            throw Error(ErrorKind::TransportError, "response has no choices[0].text");
        }
        const auto& choice = j["choices"][0];
        CompletionResult out;
        out.text = std::string(text::trim(choice["text"].get<std::string>()));
        const std::string reason = choice.contains("finish_reason") && choice["finish_reason"].is_string()
                                       ? choice["finish_reason"].get<std::string>()
                                       : std::string();
        out.finish_reason = reason == "stop" ? FinishReason::stop : reason == "length" ? FinishReason::length : FinishReason::other;
        if (out.text.empty()) {
            throw Error(ErrorKind::EmptyCompletion, "model returned no text");
        }
        return out;
    }

    HttpBackendConfig config_;
    std::string origin_;
    std::string path_;
};

}  // namespace witforge
