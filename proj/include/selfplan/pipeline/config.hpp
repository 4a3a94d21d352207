// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "selfplan/backend/backend.hpp"
#include "selfplan/core/error.hpp"
#include "selfplan/core/records.hpp"
#include "selfplan/differentiate/differentiate.hpp"
#include "selfplan/groupplan/groupplan.hpp"
#include "selfplan/selfinstruct/selfinstruct.hpp"
#include "selfplan/synthesis/synthesis.hpp"
#include "selfplan/tools/factory.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace selfplan {

/// Unusable configuration: unreadable file, unknown key, wrong type, missing path.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct AblationFlags {
    bool reflection = true;   // reflect agent gates Finish
    bool multi = true;        // one adapter per role; off merges all role data into one
    bool filtering = true;    // keep only reward 1 trajectories
    bool fine_tuning = true;  // evaluate on trained adapters; off uses the configured backends as is
};

struct RoleBackends {
    BackendConfig meta;
    BackendConfig plan;
    BackendConfig tool;
    BackendConfig reflect;
    BackendConfig single;  // the merged agent when multi is off; defaults to plan
};

struct DifferentiateSettings {
    std::string base_model_id;  // defaults to the meta backend's model
    Hyperparameters hyperparameters;
    std::size_t reflect_negatives = 0;
    bool smoke_mode = false;
    TrainingCommand training;
};

struct EvalSettings {
    std::filesystem::path dataset;
    std::vector<std::string> level_labels;
    std::optional<RewardKind> reward_kind;
};

/// Every stage's settings. Relative paths resolve against the directory of
/// the configuration file.
struct PipelineConfig {
    std::filesystem::path base_dir;
    std::filesystem::path task_card;
    std::filesystem::path tool_library;
    std::filesystem::path work_dir;
    std::uint64_t rng_seed = 0;
    int workers = 1;

    RoleBackends backends;
    ToolsConfig tools;
    AugmentConfig selfinstruct;
    SynthesisConfig synthesis;
    int select_reprompts = 3;
    DifferentiateSettings differentiate;
    PlanLimits limits;
    EvalSettings eval;
    AblationFlags ablation;

    /// Parses a configuration document. Role backend sections are merged
    /// over `backends.meta`; roles default to temperature 0.
    static PipelineConfig from_json(const Json& doc, const std::filesystem::path& base_dir);
    static PipelineConfig load(const std::filesystem::path& path);

    /// Pushes the global seed, worker bound and ablation flags into the
    /// stage settings. Call after applying command-line overrides.
    void finalize();

    /// Checks values and that every referenced path exists.
    void validate() const;
};

Json backend_config_json(const BackendConfig& config);
BackendConfig parse_backend_config(const Json& j, const std::string& where);

} // namespace selfplan
