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

// Minimal RFC 4180 reader and writer: quoted fields, doubled quotes, embedded
// newlines, CRLF or LF line ends.

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "witforge/error.hpp"

namespace witforge::csv {

struct Record {
    std::vector<std::string> fields;
    std::size_t number = 0;  // 1-based record number, header included
    std::size_t line = 0;    // 1-based line the record starts on
};

inline std::vector<Record> parse(std::string_view data, char delimiter = ',') {
    std::vector<Record> out;
    if (data.substr(0, 3) == "\xEF\xBB\xBF") data.remove_prefix(3);

    std::size_t i = 0;
    std::size_t line = 1;
    while (i < data.size()) {
        Record rec;
        rec.line = line;
        rec.number = out.size() + 1;
        std::string field;
        bool at_field_start = true;
        bool done = false;
        while (!done) {
            if (i >= data.size()) {
                rec.fields.push_back(std::move(field));
                break;
            }
            const char c = data[i];
            if (c == '"' && at_field_start) {
                ++i;
                const std::size_t open_line = line;
                for (;;) {
                    if (i >= data.size()) {
                        throw Error(ErrorKind::FormatError, "record " + std::to_string(rec.number) + " (line " +
                                                                std::to_string(open_line) + "): unterminated quoted field");
                    }
                    if (data[i] == '"') {
                        if (i + 1 < data.size() && data[i + 1] == '"') {
                            field.push_back('"');
                            i += 2;
                            continue;
                        }
                        ++i;
                        break;
                    }
                    if (data[i] == '\n') ++line;
                    field.push_back(data[i++]);
                }
                if (i < data.size() && data[i] != delimiter && data[i] != '\n' && data[i] != '\r') {
                    throw Error(ErrorKind::FormatError, "record " + std::to_string(rec.number) + " (line " +
                                                            std::to_string(line) + "): text after closing quote");
                }
                at_field_start = false;
                continue;
            }
            if (c == delimiter) {
                rec.fields.push_back(std::move(field));
                field.clear();
                at_field_start = true;
                ++i;
                continue;
            }
            if (c == '\r' || c == '\n') {
                rec.fields.push_back(std::move(field));
                if (c == '\r' && i + 1 < data.size() && data[i + 1] == '\n') ++i;
                ++i;
                ++line;
                done = true;
                continue;
            }
            field.push_back(c);
            at_field_start = false;
            ++i;
        }
        // blank lines carry no record
        if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
        rec.number = out.size() + 1;
        out.push_back(std::move(rec));
    }
    return out;
}

inline std::string quote(std::string_view field, char delimiter = ',') {
    const bool needs = field.find_first_of(std::string{'"', '\n', '\r', delimiter}) != std::string_view::npos ||
                       (!field.empty() && (field.front() == ' ' || field.back() == ' '));
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline void write_row(std::ostream& os, const std::vector<std::string>& fields, char delimiter = ',') {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << delimiter;
        os << quote(fields[i], delimiter);
    }
    os << '\n';
}

/// Header lookup by column name.
class Header {
public:
    explicit Header(const Record& header) : names_(header.fields) {
        for (auto& n : names_) {
            while (!n.empty() && (n.back() == ' ' || n.back() == '\t')) n.pop_back();
            while (!n.empty() && (n.front() == ' ' || n.front() == '\t')) n.erase(n.begin());
        }
    }

    [[nodiscard]] std::optional<std::size_t> find(std::string_view name) const {
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (names_[i] == name) return i;
        }
        return std::nullopt;
    }

    std::size_t require(std::string_view name, std::string_view file) const {
        auto i = find(name);
        if (!i) throw Error(ErrorKind::FormatError, std::string(file) + ": missing column \"" + std::string(name) + "\"");
        return *i;
    }

    [[nodiscard]] std::size_t size() const noexcept { return names_.size(); }

private:
    std::vector<std::string> names_;
};

}  // namespace witforge::csv
