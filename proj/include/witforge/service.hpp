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

// Sessions over the joke pipeline, persisted as append-only event logs, and
// the /v1 REST surface that exposes them.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include "witforge/core_model.hpp"
#include "witforge/error.hpp"
#include "witforge/pipeline.hpp"

namespace witforge::service {

using json = nlohmann::json;

inline std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorKind::IoError, "SHA-256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

inline std::string new_session_id() {
    unsigned char bytes[12];
    if (RAND_bytes(bytes, sizeof bytes) != 1) throw Error(ErrorKind::IoError, "no randomness for a session id");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned char b : bytes) {
        out.push_back(hex[b >> 4]);
        out.push_back(hex[b & 0xF]);
    }
    return out;
}

/// UTC, millisecond precision: 2026-10-15T08:30:00.123Z
inline std::string utc_timestamp() {
    using namespace std::chrono;
    const auto now = system_clock::now();
    const auto t = system_clock::to_time_t(now);
    const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[96];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                  tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return buf;
}

enum class EventKind { create, advance, edit };

inline std::string_view to_string(EventKind k) noexcept {
    switch (k) {
        case EventKind::create: return "create";
        case EventKind::advance: return "advance";
        case EventKind::edit: return "edit";
    }
    return "?";
}

/// One accepted mutation. The payload holds the stage data that was
/// installed, so replay never needs the backend.
struct Event {
    std::string timestamp;
    EventKind kind = EventKind::create;
    json payload;

    [[nodiscard]] std::string digest() const { return sha256_hex(payload.dump()); }
    [[nodiscard]] json to_log_line() const {
        return json{{"timestamp", timestamp}, {"kind", to_string(kind)}, {"payload", payload}};
    }
};

struct EventLogEntry {
    std::string timestamp;
    EventKind kind = EventKind::create;
    std::string payload_digest;
};

struct SessionRecord {
    std::string session_id;
    PipelineState state;
    std::string created_at;
    std::vector<EventLogEntry> event_log;
};

/// Applies one event to `state` (ignored for create).
inline PipelineState apply_event(const std::optional<PipelineState>& state, const Event& e) {
    if (e.kind == EventKind::create) {
        if (!e.payload.is_object() || !e.payload.contains("topic") || !e.payload["topic"].is_string()) {
            throw Error(ErrorKind::FormatError, "create event without a topic");
        }
        return set_topic(e.payload["topic"].get<std::string>());
    }
    if (!state) throw Error(ErrorKind::FormatError, "event before create");
    if (!e.payload.is_object() || !e.payload.contains("stage") || !e.payload.contains("data")) {
        throw Error(ErrorKind::FormatError, "event payload needs stage and data");
    }
    const auto stage = stage_from_string(e.payload["stage"].is_string() ? e.payload["stage"].get<std::string>() : "");
    if (!stage) throw Error(ErrorKind::FormatError, "event names an unknown stage");
    if (e.kind == EventKind::advance) {
        return advance_stage(*state, payload_from_json(*stage, e.payload["data"], *state));
    }
    const auto base = *stage == Stage::TopicSet ? *state : invalidate_from(*state, static_cast<Stage>(index_of(*stage) - 1));
    return edit_stage(*state, *stage, payload_from_json(*stage, e.payload["data"], base));
}

inline SessionRecord replay(const std::string& session_id, const std::vector<Event>& events) {
    if (events.empty() || events.front().kind != EventKind::create) {
        throw Error(ErrorKind::FormatError, "session " + session_id + " log does not start with create");
    }
    SessionRecord rec;
    rec.session_id = session_id;
    rec.created_at = events.front().timestamp;
    std::optional<PipelineState> state;
    for (const auto& e : events) {
        state = apply_event(state, e);
        rec.event_log.push_back({e.timestamp, e.kind, e.digest()});
    }
    rec.state = *state;
    return rec;
}

/// Sessions keyed by id. Mutations of one session are serialized by its
/// writer lock, held across backend calls; readers only take the snapshot
/// lock and see the last committed state. Different sessions never contend.
class SessionStore {
public:
    /// With an empty `state_dir` nothing is persisted.
    SessionStore(const JokePipeline& pipeline, std::filesystem::path state_dir = {})
        : pipeline_(pipeline), state_dir_(std::move(state_dir)) {
        if (!state_dir_.empty()) {
            std::filesystem::create_directories(state_dir_);
            load_all();
        }
    }

    SessionRecord create(std::string_view topic_text) {
        auto state = set_topic(topic_text);
        auto session = std::make_shared<Session>();
        session->record.session_id = new_session_id();
        Event e{utc_timestamp(), EventKind::create, json{{"topic", state.topic.text}}};
        session->record.created_at = e.timestamp;
        session->record.state = std::move(state);
        {
            std::lock_guard w(session->writer);
            persist(session->record.session_id, e);
            session->record.event_log.push_back({e.timestamp, e.kind, e.digest()});
        }
        std::unique_lock lock(map_mutex_);
        sessions_.emplace(session->record.session_id, session);
        return session->record;
    }

    [[nodiscard]] SessionRecord get(const std::string& id) const {
        auto s = find(id);
        std::shared_lock r(s->snapshot);
        return s->record;
    }

    [[nodiscard]] std::vector<std::string> ids() const {
        std::shared_lock lock(map_mutex_);
        std::vector<std::string> out;
        for (const auto& [id, s] : sessions_) out.push_back(id);
        return out;
    }

    /// Runs exactly the next stage.
    SessionRecord advance(const std::string& id) {
        auto s = find(id);
        std::lock_guard w(s->writer);
        const auto current = snapshot(*s);
        const auto next = pipeline_.advance(current);
        commit_advance(id, *s, next);
        return snapshot_record(*s);
    }

    /// Advances until Selected. Stages finished before a failure stay committed.
    SessionRecord run(const std::string& id) {
        auto s = find(id);
        std::lock_guard w(s->writer);
        auto current = snapshot(*s);
        while (current.stage != Stage::Selected) {
            auto next = pipeline_.advance(current);
            commit_advance(id, *s, next);
            current = std::move(next);
        }
        return snapshot_record(*s);
    }

    SessionRecord edit(const std::string& id, Stage stage, const json& data) {
        auto s = find(id);
        std::lock_guard w(s->writer);
        const auto current = snapshot(*s);
        if (index_of(stage) > index_of(current.stage)) {
            throw Error(ErrorKind::StageOrderViolation,
                        std::string(to_string(stage)) + " has not been reached yet", std::string(to_string(stage)));
        }
        const auto base = stage == Stage::TopicSet ? current : invalidate_from(current, static_cast<Stage>(index_of(stage) - 1));
        auto payload = payload_from_json(stage, data, base);
        auto next = edit_stage(current, stage, payload);
        Event e{utc_timestamp(), EventKind::edit,
                json{{"stage", to_string(stage)}, {"data", payload_to_json(payload)}}};
        commit(id, *s, std::move(next), e);
        return snapshot_record(*s);
    }

    /// Log lines as persisted, for the history endpoint.
    [[nodiscard]] std::vector<EventLogEntry> history(const std::string& id) const { return get(id).event_log; }

    [[nodiscard]] std::filesystem::path log_path(const std::string& id) const { return state_dir_ / (id + ".jsonl"); }

    /// Events of a persisted session, skipping a torn final line.
    static std::vector<Event> read_log(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(in, line)) {
            if (!text::trim(line).empty()) lines.push_back(line);
        }
        std::vector<Event> events;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            json j;
            try {
                j = json::parse(lines[i]);
            } catch (const json::exception& ex) {
                if (i + 1 == lines.size()) break;
                throw Error(ErrorKind::FormatError, path.string() + " line " + std::to_string(i + 1) + ": " + ex.what());
            }
            Event e;
            e.timestamp = j.value("timestamp", "");
            const auto kind = j.value("kind", "");
            if (kind == "create") {
                e.kind = EventKind::create;
            } else if (kind == "advance") {
                e.kind = EventKind::advance;
            } else if (kind == "edit") {
                e.kind = EventKind::edit;
            } else {
                throw Error(ErrorKind::FormatError, path.string() + " line " + std::to_string(i + 1) + ": unknown kind");
            }
            e.payload = j.value("payload", json());
            events.push_back(std::move(e));
        }
        return events;
    }

private:
    struct Session {
        std::mutex writer;
        mutable std::shared_mutex snapshot;
        SessionRecord record;
    };

    std::shared_ptr<Session> find(const std::string& id) const {
        std::shared_lock lock(map_mutex_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) throw Error(ErrorKind::NotFound, "no session " + id);
        return it->second;
    }

    static PipelineState snapshot(const Session& s) {
        std::shared_lock r(s.snapshot);
        return s.record.state;
    }

    static SessionRecord snapshot_record(const Session& s) {
        std::shared_lock r(s.snapshot);
        return s.record;
    }

    void commit_advance(const std::string& id, Session& s, PipelineState next) {
        Event e{utc_timestamp(), EventKind::advance,
                json{{"stage", to_string(next.stage)}, {"data", payload_to_json(payload_of(next, next.stage))}}};
        commit(id, s, std::move(next), e);
    }

    // Caller holds the writer lock. The log line goes out before the state
    // becomes visible.
    void commit(const std::string& id, Session& s, PipelineState next, const Event& e) {
        persist(id, e);
        std::unique_lock w(s.snapshot);
        s.record.state = std::move(next);
        s.record.event_log.push_back({e.timestamp, e.kind, e.digest()});
    }

    void persist(const std::string& id, const Event& e) const {
        if (state_dir_.empty()) return;
        std::ofstream out(log_path(id), std::ios::app | std::ios::binary);
        out << e.to_log_line().dump() << '\n';
        out.flush();
        if (!out) throw Error(ErrorKind::IoError, "cannot append to " + log_path(id).string());
    }

    void load_all() {
        for (const auto& entry : std::filesystem::directory_iterator(state_dir_)) {
            if (!entry.is_regular_file() || entry.path().extension() != ".jsonl") continue;
            const auto id = entry.path().stem().string();
            auto session = std::make_shared<Session>();
            session->record = replay(id, read_log(entry.path()));
            sessions_.emplace(id, std::move(session));
        }
    }

    const JokePipeline& pipeline_;
    std::filesystem::path state_dir_;
    mutable std::shared_mutex map_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

// ---------------------------------------------------------------------------
// REST

inline json session_body(const SessionRecord& r) { return json{{"session_id", r.session_id}, {"state", r.state}}; }

inline json history_body(const SessionRecord& r) {
    json events = json::array();
    for (const auto& e : r.event_log) {
        events.push_back({{"timestamp", e.timestamp}, {"kind", to_string(e.kind)}, {"payload_digest", e.payload_digest}});
    }
    return json{{"session_id", r.session_id}, {"created_at", r.created_at}, {"events", events}};
}

/// HTTP status for an error. `from_model` marks errors raised while running a
/// stage, where bad data came from the model rather than the client.
inline int status_for(const Error& e, bool from_model) {
    switch (e.kind()) {
        case ErrorKind::NotFound: return 404;
        case ErrorKind::StageOrderViolation: return 409;
        case ErrorKind::IoError:
        case ErrorKind::ConfigError: return 500;
        default: break;
    }
    if (e.is_backend_failure() || from_model) return 502;
    return 422;
}

inline json error_body(const Error& e) {
    return json{{"error",
                 {{"kind", to_string(e.kind())},
                  {"stage", e.stage().empty() ? json(nullptr) : json(e.stage())},
                  {"message", e.detail()}}}};
}

/// Registers the /v1 routes on `server`.
inline void install_routes(httplib::Server& server, SessionStore& store) {
    auto reply = [](httplib::Response& res, int status, const json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    };
    auto guarded = [reply](bool from_model, auto&& fn) {
        return [reply, from_model, fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const Error& e) {
                reply(res, status_for(e, from_model), error_body(e));
            } catch (const json::exception& e) {
                reply(res, 400, error_body(Error(ErrorKind::InvalidPayload, e.what())));
            } catch (const std::exception& e) {
                reply(res, 500, error_body(Error(ErrorKind::IoError, e.what())));
            }
        };
    };
    auto body_json = [](const httplib::Request& req) {
        if (req.body.empty()) throw Error(ErrorKind::InvalidPayload, "request body is empty");
        try {
            return json::parse(req.body);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::InvalidPayload, std::string("body is not JSON: ") + e.what());
        }
    };

    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, POST, PATCH, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/v1/health", [reply](const httplib::Request&, httplib::Response& res) {
        reply(res, 200, json{{"status", "ok"}});
    });

    server.Post("/v1/sessions", guarded(false, [&store, reply, body_json](const httplib::Request& req, httplib::Response& res) {
        const auto body = body_json(req);
        if (!body.is_object() || !body.contains("topic") || !body["topic"].is_string()) {
            throw Error(ErrorKind::InvalidPayload, "body needs a string topic", std::string(to_string(Stage::TopicSet)));
        }
        reply(res, 201, session_body(store.create(body["topic"].get<std::string>())));
    }));

    server.Get(R"(/v1/sessions/([0-9a-f]+))", guarded(false, [&store, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, 200, session_body(store.get(req.matches[1])));
    }));

    server.Get(R"(/v1/sessions/([0-9a-f]+)/history)",
               guarded(false, [&store, reply](const httplib::Request& req, httplib::Response& res) {
                   reply(res, 200, history_body(store.get(req.matches[1])));
               }));

    server.Post(R"(/v1/sessions/([0-9a-f]+)/advance)",
                guarded(true, [&store, reply](const httplib::Request& req, httplib::Response& res) {
                    reply(res, 200, session_body(store.advance(req.matches[1])));
                }));

    server.Post(R"(/v1/sessions/([0-9a-f]+)/run)", guarded(true, [&store, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, 200, session_body(store.run(req.matches[1])));
    }));

    server.Patch(R"(/v1/sessions/([0-9a-f]+)/stages/([A-Za-z]+))",
                 guarded(false, [&store, reply, body_json](const httplib::Request& req, httplib::Response& res) {
                     const auto stage = stage_from_string(req.matches[2].str());
                     if (!stage) throw Error(ErrorKind::NotFound, "no stage " + req.matches[2].str());
                     const auto body = body_json(req);
                     if (!body.is_object() || !body.contains("payload")) {
                         throw Error(ErrorKind::InvalidPayload, "body needs a payload", std::string(to_string(*stage)));
                     }
                     reply(res, 200, session_body(store.edit(req.matches[1], *stage, body["payload"])));
                 }));
}

}  // namespace witforge::service
