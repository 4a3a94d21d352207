// SPDX-License-Identifier: Apache-2.0
#include "selfplan/core/records.hpp"

#include "selfplan/core/text.hpp"

#include <fstream>
#include <sstream>

namespace selfplan {

namespace {

template <typename T>
void get_optional(const Json& j, const char* key, std::optional<T>& out) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        out.reset();
    } else {
        out = it->template get<T>();
    }
}

} // namespace

void to_json(Json& j, const Choice& value) { j = Json{{"label", value.label}, {"text", value.text}}; }

void from_json(const Json& j, Choice& value) {
    j.at("label").get_to(value.label);
    j.at("text").get_to(value.text);
}

void to_json(Json& j, const QAPair& value) {
    j = Json::object();
    j["question"] = value.question;
    j["answer"] = value.answer;
    if (!value.choices.empty()) j["choices"] = value.choices;
    if (value.caption) j["caption"] = *value.caption;
    if (value.level) j["level"] = *value.level;
    j["provenance"] = to_string(value.provenance);
}

void from_json(const Json& j, QAPair& value) {
    j.at("question").get_to(value.question);
    j.at("answer").get_to(value.answer);
    value.choices.clear();
    if (auto it = j.find("choices"); it != j.end() && !it->is_null()) it->get_to(value.choices);
    get_optional(j, "caption", value.caption);
    get_optional(j, "level", value.level);
    value.provenance = j.contains("provenance") ? parse_provenance(j.at("provenance").get<std::string>())
                                                : Provenance::seed;
}

void to_json(Json& j, const TaskInfo& value) {
    j = Json{{"name", value.name}, {"description", value.description}, {"examples", value.examples}};
}

void from_json(const Json& j, TaskInfo& value) {
    j.at("name").get_to(value.name);
    j.at("description").get_to(value.description);
    j.at("examples").get_to(value.examples);
}

void to_json(Json& j, const ToolSpec& value) {
    j = Json{{"name", value.name}, {"definition", value.definition}, {"usage", value.usage}};
}

void from_json(const Json& j, ToolSpec& value) {
    j.at("name").get_to(value.name);
    j.at("definition").get_to(value.definition);
    j.at("usage").get_to(value.usage);
}

void to_json(Json& j, const Action& value) { j = Json{{"name", value.name}, {"param", value.param}}; }

void from_json(const Json& j, Action& value) {
    j.at("name").get_to(value.name);
    j.at("param").get_to(value.param);
}

void to_json(Json& j, const Step& value) {
    j = Json{{"thought", value.thought},
             {"action", value.action},
             {"observation", value.observation},
             {"kind", to_string(value.kind)}};
}

void from_json(const Json& j, Step& value) {
    j.at("thought").get_to(value.thought);
    j.at("action").get_to(value.action);
    j.at("observation").get_to(value.observation);
    value.kind = parse_step_kind(j.at("kind").get<std::string>());
}

void to_json(Json& j, const Reward& value) { j = Json{{"value", value.value}, {"kind", to_string(value.kind)}}; }

void from_json(const Json& j, Reward& value) {
    j.at("value").get_to(value.value);
    value.kind = parse_reward_kind(j.at("kind").get<std::string>());
}

void to_json(Json& j, const Trajectory& value) {
    j = Json::object();
    j["id"] = value.id;
    j["question"] = value.question;
    j["steps"] = value.steps;
    j["prediction"] = value.prediction ? Json(*value.prediction) : Json(nullptr);
    j["reward"] = value.reward ? Json(*value.reward) : Json(nullptr);
    j["halt_reason"] = to_string(value.halt_reason);
}

void from_json(const Json& j, Trajectory& value) {
    j.at("id").get_to(value.id);
    j.at("question").get_to(value.question);
    j.at("steps").get_to(value.steps);
    get_optional(j, "prediction", value.prediction);
    get_optional(j, "reward", value.reward);
    value.halt_reason = parse_halt_reason(j.at("halt_reason").get<std::string>());
}

void to_json(Json& j, const RoleExample& value) {
    j = Json::object();
    j["role"] = to_string(value.role);
    j["instruction"] = value.instruction;
    j["output"] = value.output;
    j["source_trajectory"] = value.source_trajectory;
    j["step_index"] = value.step_index ? Json(*value.step_index) : Json(nullptr);
}

void from_json(const Json& j, RoleExample& value) {
    value.role = parse_role(j.at("role").get<std::string>());
    j.at("instruction").get_to(value.instruction);
    j.at("output").get_to(value.output);
    j.at("source_trajectory").get_to(value.source_trajectory);
    get_optional(j, "step_index", value.step_index);
}

namespace io {

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw IoError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
    const auto content = read_text(path);
    std::vector<Json> out;
    std::size_t line_no = 0;
    for (auto line : text::split_lines(content)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            out.push_back(Json::parse(line));
        } catch (const nlohmann::json::parse_error& e) {
            throw InvalidRecord(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::string to_jsonl(const std::vector<Json>& records) {
    std::string out;
    for (const auto& r : records) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records) {
    write_text(path, to_jsonl(records));
}

Json read_json(const std::filesystem::path& path) {
    try {
        return Json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidRecord(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const Json& value) { write_text(path, value.dump(2) + "\n"); }

TaskInfo load_task(const std::filesystem::path& path) {
    TaskInfo task;
    try {
        task = read_json(path).get<TaskInfo>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidRecord(path.string() + ": " + e.what());
    }
    validate(task);
    return task;
}

ToolLibrary load_library(const std::filesystem::path& path) { return ToolLibrary(read_records<ToolSpec>(path)); }

} // namespace io

} // namespace selfplan
