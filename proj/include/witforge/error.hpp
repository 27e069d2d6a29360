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

#include <stdexcept>
#include <string>
#include <string_view>

namespace witforge {

enum class ErrorKind {
    // core model
    EmptyTopic,
    PunchLinePositionViolated,
    StageOrderViolation,
    InvalidPayload,
    // prompts and backends
    MissingBinding,
    UnknownPlaceholder,
    AuthError,
    RateLimited,
    TransportError,
    EmptyCompletion,
    ScriptExhausted,
    // pipeline
    HandleParseError,
    HandleNotInTopic,
    EmptyAssociationList,
    NoCandidates,
    NoJokes,
    // evaluation
    FormatError,
    InsufficientEligible,
    UnknownPair,
    EmptySource,
    // service and plumbing
    NotFound,
    ConfigError,
    IoError,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::EmptyTopic: return "EmptyTopic";
        case ErrorKind::PunchLinePositionViolated: return "PunchLinePositionViolated";
        case ErrorKind::StageOrderViolation: return "StageOrderViolation";
        case ErrorKind::InvalidPayload: return "InvalidPayload";
        case ErrorKind::MissingBinding: return "MissingBinding";
        case ErrorKind::UnknownPlaceholder: return "UnknownPlaceholder";
        case ErrorKind::AuthError: return "AuthError";
        case ErrorKind::RateLimited: return "RateLimited";
        case ErrorKind::TransportError: return "TransportError";
        case ErrorKind::EmptyCompletion: return "EmptyCompletion";
        case ErrorKind::ScriptExhausted: return "ScriptExhausted";
        case ErrorKind::HandleParseError: return "HandleParseError";
        case ErrorKind::HandleNotInTopic: return "HandleNotInTopic";
        case ErrorKind::EmptyAssociationList: return "EmptyAssociationList";
        case ErrorKind::NoCandidates: return "NoCandidates";
        case ErrorKind::NoJokes: return "NoJokes";
        case ErrorKind::FormatError: return "FormatError";
        case ErrorKind::InsufficientEligible: return "InsufficientEligible";
        case ErrorKind::UnknownPair: return "UnknownPair";
        case ErrorKind::EmptySource: return "EmptySource";
        case ErrorKind::NotFound: return "NotFound";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

/// The single exception type thrown by the library.
///
/// `kind` is machine-readable; `stage` names the pipeline stage that was being
/// produced when the error happened (empty outside the pipeline).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string detail, std::string stage = {})
        : std::runtime_error(compose(kind, detail, stage)),
          kind_(kind),
          detail_(std::move(detail)),
          stage_(std::move(stage)) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }
    [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

    [[nodiscard]] Error with_stage(std::string stage) const {
        return stage_.empty() ? Error(kind_, detail_, std::move(stage)) : *this;
    }

    [[nodiscard]] bool is_backend_failure() const noexcept {
        switch (kind_) {
            case ErrorKind::AuthError:
            case ErrorKind::RateLimited:
            case ErrorKind::TransportError:
            case ErrorKind::EmptyCompletion:
            case ErrorKind::ScriptExhausted:
                return true;
            default:
                return false;
        }
    }

private:
    static std::string compose(ErrorKind kind, const std::string& detail, const std::string& stage) {
        std::string out(to_string(kind));
        if (!stage.empty()) {
            out += " at stage " + stage;
        }
        if (!detail.empty()) {
            out += ": " + detail;
        }
        return out;
    }

    ErrorKind kind_;
    std::string detail_;
    std::string stage_;
};

}  // namespace witforge
