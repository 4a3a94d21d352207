// SPDX-License-Identifier: Apache-2.0
#include "selfplan/differentiate/differentiate.hpp"

#include "selfplan/core/action.hpp"
#include "selfplan/core/process.hpp"
#include "selfplan/core/prompt.hpp"
#include "selfplan/core/records.hpp"
#include "selfplan/core/text.hpp"

#include <cstdio>

namespace selfplan {

std::vector<RoleExample> reorganize(const Trajectory& trajectory, const SelectedTools& tools,
                                    const PromptContext& context) {
    if (trajectory.steps.empty()) throw EmptyTrajectory("trajectory " + trajectory.id + " has no steps");
    std::vector<RoleExample> out;
    const std::span<const Step> steps(trajectory.steps);
    for (std::size_t t = 0; t < steps.size(); ++t) {
        const auto& step = steps[t];
        if (step.kind != StepKind::plan) continue;
        const auto instruction = render_prompt(context, tools, steps.first(t));
        const auto plan_output = render_plan_output(step.thought, step.action.name);
        const auto index = static_cast<int>(t);
        out.push_back({Role::plan, instruction, plan_output, trajectory.id, index});
        out.push_back({Role::tool, render_tool_instruction(instruction, plan_output), step.action.param, trajectory.id,
                       index});
    }
    out.push_back({Role::reflect, render_prompt(context, tools, steps), render_correct_reflection(), trajectory.id,
                   std::nullopt});
    return out;
}

std::vector<RoleExample> build_reflect_negatives(const std::vector<Trajectory>& rejected, const SelectedTools& tools,
                                                 const TaskInfo& task, std::size_t limit) {
    std::vector<RoleExample> out;
    for (const auto& traj : rejected) {
        if (out.size() >= limit) break;
        if (!traj.prediction || !traj.reward || traj.reward->value >= 1.0 || traj.steps.empty()) continue;
        char score[16];
        std::snprintf(score, sizeof score, "%.2f", traj.reward->value);
        const auto thought = std::string("The answer \"") + *traj.prediction +
                             "\" is not supported by the observations (score " + score + ").";
        out.push_back({Role::reflect, render_prompt(PromptContext::make(task, traj.question), tools, traj.steps),
                       render_incorrect_reflection(thought, "re-check the evidence and answer again"), traj.id,
                       std::nullopt});
    }
    return out;
}

std::map<Role, RoleDataset> group_by_role(const std::vector<RoleExample>& examples) {
    std::map<Role, RoleDataset> out;
    for (const auto& ex : examples) {
        auto& ds = out[ex.role];
        ds.role = ex.role;
        ds.records.push_back(ex);
    }
    return out;
}

namespace {

Json alpaca(const RoleExample& ex) { return Json{{"instruction", ex.instruction}, {"input", ""}, {"output", ex.output}}; }

} // namespace

std::size_t export_dataset(const RoleDataset& dataset, const std::filesystem::path& path) {
    if (dataset.records.empty()) throw InvalidRecord("refusing to export an empty " + std::string(to_string(dataset.role)) + " dataset");
    std::vector<Json> lines;
    for (const auto& ex : dataset.records) {
        if (ex.role != dataset.role) throw InvalidRecord("dataset mixes roles");
        lines.push_back(alpaca(ex));
    }
    io::write_jsonl(path, lines);
    return lines.size();
}

RoleDataset import_dataset(const std::filesystem::path& path, Role role) {
    RoleDataset ds;
    ds.role = role;
    for (const auto& j : io::read_jsonl(path)) {
        try {
            RoleExample ex;
            ex.role = role;
            ex.instruction = j.at("instruction").get<std::string>();
            const auto input = j.value("input", std::string());
            if (!input.empty()) ex.instruction += "\n" + input;
            ex.output = j.at("output").get<std::string>();
            ds.records.push_back(std::move(ex));
        } catch (const nlohmann::json::exception& e) {
            throw InvalidRecord(path.string() + ": " + e.what());
        }
    }
    return ds;
}

Hyperparameters Hyperparameters::preset(const std::string& name) {
    Hyperparameters hp;
    if (name == "7b-13b") return hp;
    if (name == "70b") {
        hp.epochs = 3;
        hp.batch_size = 1;
        return hp;
    }
    throw InvalidRecord("unknown hyperparameter preset '" + name + "' (use 7b-13b or 70b)");
}

void Hyperparameters::validate() const {
    if (!(learning_rate > 0)) throw InvalidRecord("learning_rate must be positive");
    if (sequence_length <= 0 || epochs <= 0 || batch_size <= 0 || per_device_batch_size <= 0 ||
        gradient_accumulation_steps <= 0 || adapter_rank <= 0 || adapter_alpha <= 0) {
        throw InvalidRecord("integer hyperparameters must be positive");
    }
    if (warmup_ratio < 0 || warmup_ratio >= 1) throw InvalidRecord("warmup_ratio must lie in [0, 1)");
    if (adapter_dropout < 0 || adapter_dropout >= 1) throw InvalidRecord("adapter_dropout must lie in [0, 1)");
}

void TrainingManifest::validate() const {
    if (text::trim(base_model_id).empty()) throw InvalidRecord("manifest needs base_model_id");
    for (auto role : {Role::plan, Role::tool, Role::reflect}) {
        auto it = role_dataset_paths.find(role);
        if (it == role_dataset_paths.end()) throw InvalidRecord("manifest lacks a " + std::string(to_string(role)) + " dataset");
        if (!std::filesystem::exists(it->second)) throw InvalidRecord("dataset not found: " + it->second.string());
    }
    if (output_dir.empty()) throw InvalidRecord("manifest needs output_dir");
    if (result_path.empty()) throw InvalidRecord("manifest needs result_path");
    hyperparameters.validate();
}

namespace {

Json role_map(const std::map<Role, std::filesystem::path>& paths) {
    Json j = Json::object();
    for (const auto& [role, path] : paths) j[std::string(to_string(role))] = path.string();
    return j;
}

template <typename T>
T required(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw MalformedResult(std::string("missing field '") + key + "'");
    return it->template get<T>();
}

} // namespace

std::string to_json_text(const TrainingManifest& m) {
    const auto& hp = m.hyperparameters;
    Json j = Json::object();
    j["base_model_id"] = m.base_model_id;
    j["role_dataset_paths"] = role_map(m.role_dataset_paths);
    j["hyperparameters"] = Json{{"learning_rate", hp.learning_rate},
                                {"sequence_length", hp.sequence_length},
                                {"epochs", hp.epochs},
                                {"batch_size", hp.batch_size},
                                {"per_device_batch_size", hp.per_device_batch_size},
                                {"gradient_accumulation_steps", hp.gradient_accumulation_steps},
                                {"warmup_ratio", hp.warmup_ratio},
                                {"adapter_rank", hp.adapter_rank},
                                {"adapter_alpha", hp.adapter_alpha},
                                {"adapter_dropout", hp.adapter_dropout},
                                {"target_module_names", hp.target_module_names}};
    j["output_dir"] = m.output_dir.string();
    j["smoke_mode"] = m.smoke_mode;
    j["shared_adapter"] = m.shared_adapter;
    j["result_path"] = m.result_path.string();
    return j.dump(2) + "\n";
}

TrainingManifest parse_manifest(const std::string& json_text) {
    try {
        const auto j = Json::parse(json_text);
        TrainingManifest m;
        m.base_model_id = j.at("base_model_id").get<std::string>();
        for (const auto& [role, path] : j.at("role_dataset_paths").items()) {
            m.role_dataset_paths[parse_role(role)] = path.get<std::string>();
        }
        const auto& hp = j.at("hyperparameters");
        auto& h = m.hyperparameters;
        h.learning_rate = hp.at("learning_rate").get<double>();
        h.sequence_length = hp.at("sequence_length").get<int>();
        h.epochs = hp.at("epochs").get<int>();
        h.batch_size = hp.at("batch_size").get<int>();
        h.per_device_batch_size = hp.value("per_device_batch_size", h.per_device_batch_size);
        h.gradient_accumulation_steps = hp.value("gradient_accumulation_steps", h.gradient_accumulation_steps);
        h.warmup_ratio = hp.value("warmup_ratio", h.warmup_ratio);
        h.adapter_rank = hp.at("adapter_rank").get<int>();
        h.adapter_alpha = hp.at("adapter_alpha").get<int>();
        h.adapter_dropout = hp.at("adapter_dropout").get<double>();
        h.target_module_names = hp.at("target_module_names").get<std::vector<std::string>>();
        m.output_dir = j.at("output_dir").get<std::string>();
        m.smoke_mode = j.value("smoke_mode", false);
        m.shared_adapter = j.value("shared_adapter", false);
        m.result_path = j.value("result_path", (m.output_dir / "training_result.json").string());
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidRecord(std::string("malformed manifest: ") + e.what());
    }
}

std::string to_json_text(const TrainingResult& r) {
    Json j = Json::object();
    Json adapters = Json::object();
    for (const auto& [role, path] : r.adapter_paths) adapters[std::string(to_string(role))] = path;
    Json losses = Json::object();
    for (const auto& [role, loss] : r.final_loss) losses[std::string(to_string(role))] = loss;
    j["adapter_paths"] = adapters;
    j["final_loss"] = losses;
    j["wall_time"] = r.wall_time;
    j["status"] = r.status == TrainingStatus::ok ? "ok" : "failed";
    if (!r.message.empty()) j["message"] = r.message;
    return j.dump(2) + "\n";
}

TrainingResult parse_training_result(const std::string& json_text) {
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedResult(std::string("training result is not JSON: ") + e.what());
    }
    if (!j.is_object()) throw MalformedResult("training result is not an object");
    TrainingResult r;
    try {
        const auto status = required<std::string>(j, "status");
        if (status == "ok") {
            r.status = TrainingStatus::ok;
        } else if (status == "failed") {
            r.status = TrainingStatus::failed;
        } else {
            throw MalformedResult("unknown status '" + status + "'");
        }
        r.message = j.value("message", std::string());
        r.wall_time = j.value("wall_time", 0.0);
        if (auto it = j.find("adapter_paths"); it != j.end() && it->is_object()) {
            for (const auto& [role, path] : it->items()) r.adapter_paths[parse_role(role)] = path.get<std::string>();
        }
        if (auto it = j.find("final_loss"); it != j.end() && it->is_object()) {
            for (const auto& [role, loss] : it->items()) {
                if (loss.is_number()) r.final_loss[parse_role(role)] = loss.get<double>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw MalformedResult(std::string("training result has bad fields: ") + e.what());
    } catch (const InvalidRecord& e) {
        throw MalformedResult(e.what());
    }
    if (r.status == TrainingStatus::ok) {
        for (auto role : {Role::plan, Role::tool, Role::reflect}) {
            if (!r.adapter_paths.count(role)) {
                throw MalformedResult("status ok without a " + std::string(to_string(role)) + " adapter path");
            }
        }
    }
    return r;
}

TrainingResult invoke_training(const TrainingManifest& manifest, const std::filesystem::path& manifest_path,
                               const TrainingCommand& command) {
    manifest.validate();
    if (text::trim(command.command).empty()) throw AdapterLaunchFailure("no training command configured");
    io::write_text(manifest_path, to_json_text(manifest));
    std::error_code ec;
    std::filesystem::create_directories(manifest.output_dir, ec);
    std::filesystem::remove(manifest.result_path, ec);

    ProcessSpec spec;
    spec.argv = {"/bin/sh", "-c", command.command + " \"$1\"", "sh", std::filesystem::absolute(manifest_path).string()};
    spec.timeout = command.timeout;
    ProcessResult run;
    try {
        run = run_process(spec);
    } catch (const IoError& e) {
        throw AdapterLaunchFailure(e.what());
    }

    const bool has_result = std::filesystem::exists(manifest.result_path);
    if (run.timed_out) throw AdapterLaunchFailure("training command timed out");
    if (!run.exited || run.exit_code != 0) {
        const auto tail = run.output.size() > 2000 ? run.output.substr(run.output.size() - 2000) : run.output;
        std::string why = run.exited ? "exit status " + std::to_string(run.exit_code)
                                     : "signal " + std::to_string(run.term_signal);
        if (has_result) {
            try {
                auto reported = parse_training_result(io::read_text(manifest.result_path));
                if (reported.status == TrainingStatus::failed) {
                    throw AdapterReportedFailure("training failed (" + why + "): " + reported.message);
                }
            } catch (const MalformedResult&) {
            }
        }
        throw AdapterLaunchFailure("training command failed with " + why + "\n" + tail);
    }
    if (!has_result) throw MalformedResult("training command produced no result at " + manifest.result_path.string());
    auto result = parse_training_result(io::read_text(manifest.result_path));
    if (result.status == TrainingStatus::failed) throw AdapterReportedFailure("training failed: " + result.message);
    return result;
}

DatasetPaths write_role_datasets(const std::vector<RoleExample>& examples, const std::filesystem::path& dir,
                                 bool merged) {
    DatasetPaths out;
    out.shared = merged;
    auto grouped = group_by_role(examples);
    for (auto role : {Role::plan, Role::tool, Role::reflect}) {
        if (!grouped.count(role)) throw InvalidRecord("no " + std::string(to_string(role)) + " records to export");
    }
    io::write_records(dir / "records.jsonl", examples);
    if (merged) {
        std::vector<Json> lines;
        for (auto role : {Role::plan, Role::tool, Role::reflect}) {
            for (const auto& ex : grouped[role].records) lines.push_back(alpaca(ex));
            out.counts[role] = grouped[role].records.size();
        }
        io::write_jsonl(dir / "all.jsonl", lines);
        for (auto role : {Role::plan, Role::tool, Role::reflect}) out.role_paths[role] = dir / "all.jsonl";
        return out;
    }
    for (auto role : {Role::plan, Role::tool, Role::reflect}) {
        const auto path = dir / (std::string(to_string(role)) + ".jsonl");
        out.counts[role] = export_dataset(grouped[role], path);
        out.role_paths[role] = path;
    }
    return out;
}

} // namespace selfplan
