// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "selfplan/groupplan/groupplan.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace selfplan {

struct BenchmarkSpec {
    std::filesystem::path dataset_path;
    std::optional<RewardKind> reward_kind;  // unset: by question shape
    std::vector<std::string> level_labels;  // empty: levels in order of appearance
    int worker_count = 1;
    PlanLimits limits;
};

/// Column name for questions without a level tag.
inline constexpr std::string_view kUnleveled = "unleveled";

struct LevelStats {
    std::string level;
    std::size_t count = 0;
    double mean = 0.0;  // in [0, 1]; 0 when count is 0
};

struct EvalReport {
    std::vector<LevelStats> per_level;
    LevelStats overall{"All", 0, 0.0};
    std::map<HaltReason, std::size_t> halt_histogram;
    double wall_time = 0.0;  // seconds; not part of the persisted record
};

/// Loads the benchmark and checks every level against `level_labels`.
std::vector<QAPair> load_benchmark(const BenchmarkSpec& spec);

/// Aggregates scored trajectories. Unscored trajectories count as 0.
/// Levels follow `level_labels`; an unleveled column is added when needed.
EvalReport aggregate(const std::vector<Trajectory>& trajectories, const std::vector<std::string>& level_labels);

/// Recomputes every reward from the stored prediction and gold answer.
std::vector<Trajectory> rescore(std::vector<Trajectory> trajectories, std::optional<RewardKind> kind);

struct EvalRun {
    EvalReport report;
    std::vector<Trajectory> trajectories;  // in dataset order
};

/// Plans every question with its own tool session; failures score 0 with
/// halt reason backend_error and never abort the run.
EvalRun run_eval(const AgentGroup& group, const SelectedTools& tools, const TaskInfo& task, const BenchmarkSpec& spec,
                 const ToolRegistry& registry);

std::string render_report_json(const EvalReport& report);
/// Level columns then All; counts, and means as percentages.
std::string render_report_table(const EvalReport& report);
/// Writes report.json and report.txt into `dir`.
void write_report(const EvalReport& report, const std::filesystem::path& dir);

} // namespace selfplan
