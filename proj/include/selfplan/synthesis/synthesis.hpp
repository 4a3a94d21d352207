// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "selfplan/backend/backend.hpp"
#include "selfplan/core/error.hpp"
#include "selfplan/core/types.hpp"
#include "selfplan/tools/registry.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace selfplan {

struct SynthesisConfig {
    std::size_t select_count = 3;
    int max_steps = 8;
    std::size_t target_kept = 200;
    std::optional<RewardKind> reward_kind;  // unset: by question shape
    std::uint64_t rng_seed = 0;
    bool filtering = true;                  // false keeps every finished trajectory
    int attempts_per_question = 1;
    int workers = 1;
    int max_malformed = 2;  // malformed completions tolerated per trajectory, consecutive pairs always halt

    void validate() const;
};

/// Thought-Action-Observation loop of a single model. The model's own
/// `Finish[answer]` ends the episode. A malformed completion is not
/// recorded as a step; the next prompt carries it followed by an error
/// observation. Reward is left unset. BackendError propagates.
Trajectory synthesize_trajectory(Backend& backend, const ToolRegistry& registry, const SelectedTools& tools,
                                 const PromptContext& context, const QAPair& qa, const SynthesisConfig& config,
                                 std::string id = "q00000");

/// Kept set: reward exactly 1.0. With `filtering` off, every trajectory
/// that produced a prediction passes.
std::vector<Trajectory> filter_trajectories(const std::vector<Trajectory>& trajectories, bool filtering = true);

struct SynthesisStats {
    std::size_t attempts = 0;
    std::size_t kept = 0;
    std::size_t rejected = 0;
    std::size_t questions_used = 0;
    std::map<HaltReason, std::size_t> halts;
    std::uint64_t model_calls = 0;
};

struct SynthesisResult {
    std::vector<Trajectory> kept;
    std::vector<Trajectory> rejected;
    SynthesisStats stats;
};

class SynthesisTargetUnreached : public Error {
public:
    SynthesisTargetUnreached(std::size_t target, SynthesisResult partial);
    const SynthesisResult& partial() const noexcept { return partial_; }

private:
    SynthesisResult partial_;
};

/// Trajectory id for database entry `index`.
std::string trajectory_id(std::size_t index, int attempt = 0);

/// Synthesizes over `entries` in seeded-shuffled order until `target_kept`
/// trajectories pass the filter. Work fans out over `config.workers`;
/// results past the target are trimmed by shuffled position so the outcome
/// matches a sequential run. Backend failures on one question are recorded
/// as rejected `backend_error` trajectories.
SynthesisResult run_synthesis(Backend& backend, const ToolRegistry& registry, const SelectedTools& tools,
                              const TaskInfo& task, const std::vector<QAPair>& entries, const SynthesisConfig& config);

void save_synthesis(const SynthesisResult& result, const std::filesystem::path& dir);

} // namespace selfplan
