// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "selfplan/core/error.hpp"
#include "selfplan/core/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace selfplan {

/// Records keep insertion order so files list fields as the types declare them.
using Json = nlohmann::ordered_json;

void to_json(Json& j, const Choice& value);
void from_json(const Json& j, Choice& value);
void to_json(Json& j, const QAPair& value);
void from_json(const Json& j, QAPair& value);
void to_json(Json& j, const TaskInfo& value);
void from_json(const Json& j, TaskInfo& value);
void to_json(Json& j, const ToolSpec& value);
void from_json(const Json& j, ToolSpec& value);
void to_json(Json& j, const Action& value);
void from_json(const Json& j, Action& value);
void to_json(Json& j, const Step& value);
void from_json(const Json& j, Step& value);
void to_json(Json& j, const Reward& value);
void from_json(const Json& j, Reward& value);
void to_json(Json& j, const Trajectory& value);
void from_json(const Json& j, Trajectory& value);
void to_json(Json& j, const RoleExample& value);
void from_json(const Json& j, RoleExample& value);

namespace io {

std::string read_text(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames, creating parent dirs.
void write_text(const std::filesystem::path& path, const std::string& content);

/// One compact JSON value per line. Blank lines are skipped on read.
std::vector<Json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records);
std::string to_jsonl(const std::vector<Json>& records);

Json read_json(const std::filesystem::path& path);
/// Pretty-printed, two-space indent, trailing newline.
void write_json(const std::filesystem::path& path, const Json& value);

template <typename T>
std::vector<T> read_records(const std::filesystem::path& path) {
    std::vector<T> out;
    std::size_t line = 0;
    for (const auto& j : read_jsonl(path)) {
        ++line;
        try {
            out.push_back(j.get<T>());
        } catch (const nlohmann::json::exception& e) {
            throw InvalidRecord(path.string() + ": record " + std::to_string(line) + ": " + e.what());
        }
    }
    return out;
}

template <typename T>
void write_records(const std::filesystem::path& path, const std::vector<T>& values) {
    std::vector<Json> records;
    records.reserve(values.size());
    for (const auto& v : values) records.emplace_back(v);
    write_jsonl(path, records);
}

/// Task card: a single TaskInfo record (pretty or single-line JSON).
TaskInfo load_task(const std::filesystem::path& path);
/// Tool library: one ToolSpec record per line.
ToolLibrary load_library(const std::filesystem::path& path);

} // namespace io

} // namespace selfplan
