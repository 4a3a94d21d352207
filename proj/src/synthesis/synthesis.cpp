// SPDX-License-Identifier: Apache-2.0
#include "selfplan/synthesis/synthesis.hpp"

#include "selfplan/core/action.hpp"
#include "selfplan/core/prompt.hpp"
#include "selfplan/core/records.hpp"
#include "selfplan/core/rng.hpp"
#include "selfplan/synthesis/reward.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>
#include <thread>

namespace selfplan {

void SynthesisConfig::validate() const {
    if (select_count < 1) throw InvalidRecord("select_count must be at least 1");
    if (max_steps < 1) throw InvalidRecord("max_steps must be at least 1");
    if (target_kept < 1) throw InvalidRecord("target_kept must be at least 1");
    if (attempts_per_question < 1) throw InvalidRecord("attempts_per_question must be at least 1");
    if (workers < 1) throw InvalidRecord("workers must be at least 1");
    if (max_malformed < 1) throw InvalidRecord("max_malformed must be at least 1");
}

Trajectory synthesize_trajectory(Backend& backend, const ToolRegistry& registry, const SelectedTools& tools,
                                 const PromptContext& context, const QAPair& qa, const SynthesisConfig& config,
                                 std::string id) {
    Trajectory traj;
    traj.id = std::move(id);
    traj.question = qa;
    traj.halt_reason = HaltReason::step_limit;

    ToolSession session;
    std::string repair;
    int malformed = 0;
    int consecutive = 0;
    while (traj.steps.size() < static_cast<std::size_t>(config.max_steps)) {
        const auto completion = backend.complete(render_prompt(context, tools, traj.steps) + repair);
        StepCompletion parsed;
        try {
            parsed = parse_step_completion(completion);
        } catch (const MalformedAction&) {
            ++malformed;
            ++consecutive;
            if (consecutive >= 2 || malformed >= config.max_malformed) {
                traj.halt_reason = HaltReason::parse_failure;
                return traj;
            }
            repair = render_repair(completion, traj.steps.size() + 1);
            continue;
        }
        consecutive = 0;
        repair.clear();
        if (parsed.action.is_finish()) {
            traj.prediction = parsed.action.param;
            traj.steps.push_back({parsed.thought, parsed.action, std::string(kFinishObservation), StepKind::plan});
            traj.halt_reason = HaltReason::finished;
            return traj;
        }
        auto observation = registry.invoke(session, parsed.action);
        traj.steps.push_back({parsed.thought, parsed.action, std::move(observation), StepKind::plan});
    }
    return traj;
}

std::vector<Trajectory> filter_trajectories(const std::vector<Trajectory>& trajectories, bool filtering) {
    std::vector<Trajectory> kept;
    for (const auto& t : trajectories) {
        if (!t.prediction) continue;
        if (filtering && !(t.reward && t.reward->value == 1.0)) continue;
        kept.push_back(t);
    }
    return kept;
}

SynthesisTargetUnreached::SynthesisTargetUnreached(std::size_t target, SynthesisResult partial)
    : Error("kept " + std::to_string(partial.kept.size()) + " of " + std::to_string(target) +
            " trajectories after " + std::to_string(partial.stats.attempts) + " attempts"),
      partial_(std::move(partial)) {}

std::string trajectory_id(std::size_t index, int attempt) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "q%05zu", index);
    std::string id = buf;
    if (attempt > 0) id += "-a" + std::to_string(attempt + 1);
    return id;
}

namespace {

struct Outcome {
    std::vector<Trajectory> attempts;  // in attempt order
    bool kept = false;
    std::uint64_t calls = 0;
};

// Calls made through this handle only, so concurrent workers can count their own.
class CountingBackend : public Backend {
public:
    explicit CountingBackend(Backend& inner) : inner_(inner) {}
    using Backend::complete;
    std::string complete(const CompletionRequest& request) override {
        ++calls;
        return inner_.complete(request);
    }
    const BackendConfig& config() const override { return inner_.config(); }
    UsageStats usage() const override { return inner_.usage(); }
    std::uint64_t calls = 0;

private:
    Backend& inner_;
};

Outcome synthesize_question(Backend& backend, const ToolRegistry& registry, const SelectedTools& tools,
                            const TaskInfo& task, const QAPair& qa, std::size_t index, const SynthesisConfig& config) {
    Outcome out;
    CountingBackend counted(backend);
    const auto context = PromptContext::make(task, qa);
    const auto kind = config.reward_kind.value_or(default_reward_kind(qa));
    for (int attempt = 0; attempt < config.attempts_per_question && !out.kept; ++attempt) {
        Trajectory traj;
        try {
            traj = synthesize_trajectory(counted, registry, tools, context, qa, config, trajectory_id(index, attempt));
        } catch (const BackendError&) {
            traj = Trajectory{trajectory_id(index, attempt), qa, {}, std::nullopt, std::nullopt,
                              HaltReason::backend_error};
        }
        if (traj.prediction) traj.reward = compute_reward(*traj.prediction, qa, kind);
        out.kept = !filter_trajectories({traj}, config.filtering).empty();
        out.attempts.push_back(std::move(traj));
    }
    out.calls = counted.calls;
    return out;
}

} // namespace

SynthesisResult run_synthesis(Backend& backend, const ToolRegistry& registry, const SelectedTools& tools,
                              const TaskInfo& task, const std::vector<QAPair>& entries, const SynthesisConfig& config) {
    config.validate();
    if (entries.empty()) throw InvalidRecord("synthesis needs a nonempty database");
    if (tools.empty()) throw InvalidRecord("synthesis needs selected tools");

    std::vector<std::size_t> order(entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(Rng::derive(config.rng_seed, "synthesis"));
    rng.shuffle(order);

    std::vector<std::optional<Outcome>> outcomes(order.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> kept_tally{0};
    std::mutex error_mutex;
    std::exception_ptr failure;

    auto worker = [&] {
        while (kept_tally.load() < config.target_kept) {
            const auto pos = next.fetch_add(1);
            if (pos >= order.size()) return;
            try {
                auto outcome = synthesize_question(backend, registry, tools, task, entries[order[pos]], order[pos], config);
                if (outcome.kept) ++kept_tally;
                outcomes[pos] = std::move(outcome);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!failure) failure = std::current_exception();
                kept_tally = config.target_kept;  // stop the others
                return;
            }
        }
    };
    const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(config.workers), order.size());
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    SynthesisResult result;
    for (std::size_t pos = 0; pos < outcomes.size() && result.kept.size() < config.target_kept; ++pos) {
        if (!outcomes[pos]) break;
        auto& outcome = *outcomes[pos];
        ++result.stats.questions_used;
        result.stats.model_calls += outcome.calls;
        for (auto& traj : outcome.attempts) {
            ++result.stats.attempts;
            ++result.stats.halts[traj.halt_reason];
            const bool pass = !filter_trajectories({traj}, config.filtering).empty();
            (pass ? result.kept : result.rejected).push_back(std::move(traj));
        }
    }
    result.stats.kept = result.kept.size();
    result.stats.rejected = result.rejected.size();
    if (result.kept.size() < config.target_kept) throw SynthesisTargetUnreached(config.target_kept, std::move(result));
    return result;
}

void save_synthesis(const SynthesisResult& result, const std::filesystem::path& dir) {
    io::write_records(dir / "kept.jsonl", result.kept);
    io::write_records(dir / "rejected.jsonl", result.rejected);
    Json halts = Json::object();
    for (auto reason : {HaltReason::finished, HaltReason::step_limit, HaltReason::parse_failure, HaltReason::backend_error}) {
        auto it = result.stats.halts.find(reason);
        halts[std::string(to_string(reason))] = it == result.stats.halts.end() ? 0 : it->second;
    }
    io::write_json(dir / "stats.json", Json{{"attempts", result.stats.attempts},
                                            {"kept", result.stats.kept},
                                            {"rejected", result.stats.rejected},
                                            {"questions_used", result.stats.questions_used},
                                            {"model_calls", result.stats.model_calls},
                                            {"halts", halts}});
}

} // namespace selfplan
