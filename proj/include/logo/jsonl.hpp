// SPDX-License-Identifier: Apache-2.0
//
// JSON/JSONL file helpers shared by every module that reads or writes
// files: line-numbered parse errors, typed field access with schema
// errors, and atomic (temp file + rename) output.
#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "logo/error.hpp"

namespace logo {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

std::string read_file(const std::filesystem::path& path);
Json read_json(const std::filesystem::path& path);
// Blank lines are skipped.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

// Field access that reports the offending key and location on failure.
const Json& field(const Json& object, std::string_view key, std::string_view where);
const Json* optional_field(const Json& object, std::string_view key);

template <class T>
T get_as(const Json& object, std::string_view key, std::string_view where) {
    const Json& value = field(object, key, where);
    try {
        return value.get<T>();
    } catch (const nlohmann::json::exception&) {
        fail(ErrorKind::schema, std::string(where) + ": field '" + std::string(key) + "' has the wrong type");
    }
}

// Writes `contents` to `<path>.tmp` and renames it over `path`. The temp
// file is removed if anything fails, so `path` is either complete or absent.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// One compact JSON document per line, each terminated by '\n'.
std::string to_jsonl(const std::vector<Json>& lines);

}  // namespace logo
