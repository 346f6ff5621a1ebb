// SPDX-License-Identifier: Apache-2.0
#include "logo/jsonl.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

namespace logo {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::not_found, "cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) fail(ErrorKind::io, "read error on '" + path.string() + "'");
    return buffer.str();
}

Json read_json(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::schema, path.string() + ": invalid JSON: " + e.what());
    }
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::vector<Json> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        ++line_no;
        std::string_view line(text.data() + pos, nl - pos);
        if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
            try {
                out.push_back(Json::parse(line));
            } catch (const nlohmann::json::parse_error& e) {
                fail(ErrorKind::schema,
                     path.string() + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
            }
        }
        pos = nl + 1;
    }
    return out;
}

const Json& field(const Json& object, std::string_view key, std::string_view where) {
    if (!object.is_object()) fail(ErrorKind::schema, std::string(where) + ": expected a JSON object");
    auto it = object.find(key);
    if (it == object.end()) {
        fail(ErrorKind::schema, std::string(where) + ": missing field '" + std::string(key) + "'");
    }
    return *it;
}

const Json* optional_field(const Json& object, std::string_view key) {
    if (!object.is_object()) return nullptr;
    auto it = object.find(key);
    if (it == object.end() || it->is_null()) return nullptr;
    return &*it;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::io, "cannot create '" + tmp.string() + "'");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            fail(ErrorKind::io, "write error on '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        fail(ErrorKind::io, "cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
    }
}

std::string to_jsonl(const std::vector<Json>& lines) {
    std::string out;
    for (const auto& line : lines) {
        out += line.dump();
        out += '\n';
    }
    return out;
}

}  // namespace logo
