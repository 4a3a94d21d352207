// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "selfplan/evalharness/evalharness.hpp"
#include "selfplan/pipeline/config.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace selfplan {

/// A stage failed; the message reads "[stage] cause".
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& cause);
    const std::string& stage() const noexcept { return stage_; }
    const std::string& cause() const noexcept { return cause_; }

private:
    std::string stage_;
    std::string cause_;
};

/// Artifact locations under the work directory.
struct WorkLayout {
    std::filesystem::path root;

    std::filesystem::path database() const { return root / "selfinstruct" / "database.jsonl"; }
    std::filesystem::path rounds() const { return root / "selfinstruct" / "rounds.jsonl"; }
    std::filesystem::path selected() const { return root / "tools" / "selected.json"; }
    std::filesystem::path synthesis_dir() const { return root / "synthesis"; }
    std::filesystem::path kept() const { return synthesis_dir() / "kept.jsonl"; }
    std::filesystem::path rejected() const { return synthesis_dir() / "rejected.jsonl"; }
    std::filesystem::path differentiate_dir() const { return root / "differentiate"; }
    std::filesystem::path manifest() const { return root / "train" / "manifest.json"; }
    std::filesystem::path adapters_dir() const { return root / "train" / "adapters"; }
    std::filesystem::path training_result() const { return root / "train" / "result.json"; }
    std::filesystem::path eval_dir() const { return root / "eval"; }
    std::filesystem::path eval_trajectories() const { return eval_dir() / "trajectories.jsonl"; }
    std::filesystem::path log() const { return root / "logs" / "pipeline.jsonl"; }
    std::filesystem::path stamp(const std::string& stage) const { return root / "stamps" / (stage + ".json"); }

    /// `path` relative to the root, for messages.
    std::string show(const std::filesystem::path& path) const;
};

enum class StageStatus { ran, skipped };

struct StageOutcome {
    std::string stage;
    StageStatus status = StageStatus::ran;
    std::string summary;
};

void save_selected(const SelectedTools& tools, const std::filesystem::path& path);
SelectedTools load_selected(const ToolLibrary& library, const std::filesystem::path& path);

/// 64-bit FNV-1a, as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

/// Runs pipeline stages against one work directory. A stage whose inputs
/// and settings match its last successful run is skipped unless `force`.
/// Every stage appends one record to logs/pipeline.jsonl.
class Pipeline {
public:
    explicit Pipeline(PipelineConfig config, bool force = false);

    const PipelineConfig& config() const noexcept { return config_; }
    const WorkLayout& layout() const noexcept { return layout_; }

    StageOutcome instruct();
    StageOutcome select_tools();
    StageOutcome synthesize();
    StageOutcome differentiate();
    StageOutcome train();
    StageOutcome eval();
    /// Every stage in order; training only when fine-tuning is on. Stops at
    /// the first failure.
    std::vector<StageOutcome> run_all();

    /// Group planning on one ad hoc question. A nonempty `answer` scores
    /// the prediction.
    PlanResult plan(const std::string& question, const std::string& answer = {});

    /// Backend configs the sub-agents run on. With fine-tuning on, roles
    /// without an explicit adapter take the trained adapter paths.
    std::vector<BackendConfig> agent_configs() const;

private:
    struct StageRun;

    StageOutcome run_stage(const std::string& name, const std::function<Json()>& inputs,
                           const std::vector<std::filesystem::path>& outputs,
                           const std::function<std::string(StageRun&)>& body);
    std::shared_ptr<Backend> backend(StageRun& run, const BackendConfig& config, const std::string& label) const;
    AgentGroup agent_group(StageRun& run) const;
    Json backend_fingerprint(const BackendConfig& config) const;
    Json tools_fingerprint() const;
    void require(const std::filesystem::path& artifact, const std::string& producer) const;
    void append_log(const Json& record) const;

    PipelineConfig config_;
    WorkLayout layout_;
    bool force_;
};

} // namespace selfplan
