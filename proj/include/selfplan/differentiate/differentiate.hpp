// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "selfplan/core/error.hpp"
#include "selfplan/core/types.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace selfplan {

class EmptyTrajectory : public Error {
public:
    using Error::Error;
};

/// Splits one trajectory into role records. Plan step t yields a plan record
/// (history H_t to "Thought: ...\nAction: <name>") and a tool record (plan
/// instruction + plan output + "\nAction Input:" to the parameter); the whole
/// trajectory yields one reflect record with the correct verdict.
std::vector<RoleExample> reorganize(const Trajectory& trajectory, const SelectedTools& tools,
                                    const PromptContext& context);

/// Incorrect-verdict reflect records from scored, rejected trajectories.
/// At most `limit`, in input order.
std::vector<RoleExample> build_reflect_negatives(const std::vector<Trajectory>& rejected, const SelectedTools& tools,
                                                 const TaskInfo& task, std::size_t limit);

struct RoleDataset {
    Role role = Role::plan;
    std::vector<RoleExample> records;
};

/// Buckets `examples` by role, keeping order within each role.
std::map<Role, RoleDataset> group_by_role(const std::vector<RoleExample>& examples);

/// Writes {instruction, input, output} lines with an empty input. Returns the
/// record count. Throws InvalidRecord for an empty or mixed-role dataset.
std::size_t export_dataset(const RoleDataset& dataset, const std::filesystem::path& path);

/// Reads an exported file back. Source ids and step indices are not part of
/// the format and come back empty.
RoleDataset import_dataset(const std::filesystem::path& path, Role role);

struct Hyperparameters {
    double learning_rate = 1e-4;
    int sequence_length = 4096;
    int epochs = 5;
    int batch_size = 4;               // effective batch size
    int per_device_batch_size = 2;
    int gradient_accumulation_steps = 1;
    double warmup_ratio = 0.03;
    int adapter_rank = 8;
    int adapter_alpha = 16;
    double adapter_dropout = 0.05;
    std::vector<std::string> target_module_names{"q_proj", "v_proj"};

    /// "7b-13b" (the defaults) or "70b" (3 epochs, batch size 1).
    static Hyperparameters preset(const std::string& name);
    void validate() const;
    bool operator==(const Hyperparameters&) const = default;
};

struct TrainingManifest {
    std::string base_model_id;
    std::map<Role, std::filesystem::path> role_dataset_paths;
    Hyperparameters hyperparameters;
    std::filesystem::path output_dir;
    bool smoke_mode = false;
    bool shared_adapter = false;  // one merged dataset behind all three roles
    std::filesystem::path result_path;

    void validate() const;
};

enum class TrainingStatus { ok, failed };

struct TrainingResult {
    std::map<Role, std::string> adapter_paths;
    std::map<Role, double> final_loss;
    double wall_time = 0.0;  // seconds
    TrainingStatus status = TrainingStatus::failed;
    std::string message;
};

class AdapterLaunchFailure : public Error {
public:
    using Error::Error;
};
class AdapterReportedFailure : public Error {
public:
    using Error::Error;
};
class MalformedResult : public Error {
public:
    using Error::Error;
};

std::string to_json_text(const TrainingManifest& manifest);
TrainingManifest parse_manifest(const std::string& json_text);
TrainingResult parse_training_result(const std::string& json_text);
std::string to_json_text(const TrainingResult& result);

struct TrainingCommand {
    std::string command;                 // shell words; the manifest path is appended as one argument
    std::chrono::milliseconds timeout{0};  // zero waits indefinitely
};

/// Writes `manifest` to `manifest_path`, runs the training command with that
/// path as its only argument, and reads `manifest.result_path`.
TrainingResult invoke_training(const TrainingManifest& manifest, const std::filesystem::path& manifest_path,
                               const TrainingCommand& command);

/// Files written by write_role_datasets.
struct DatasetPaths {
    std::map<Role, std::filesystem::path> role_paths;
    std::map<Role, std::size_t> counts;
    bool shared = false;
};

/// Exports plan/tool/reflect datasets into `dir`, plus records.jsonl with
/// full provenance. With `merged`, every role maps to a single all.jsonl.
DatasetPaths write_role_datasets(const std::vector<RoleExample>& examples, const std::filesystem::path& dir,
                                 bool merged = false);

} // namespace selfplan
