// SPDX-License-Identifier: Apache-2.0
#include "selfplan/evalharness/evalharness.hpp"

#include "selfplan/core/records.hpp"
#include "selfplan/synthesis/reward.hpp"
#include "selfplan/synthesis/synthesis.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <thread>

namespace selfplan {

std::vector<QAPair> load_benchmark(const BenchmarkSpec& spec) {
    auto records = io::read_records<QAPair>(spec.dataset_path);
    for (std::size_t i = 0; i < records.size(); ++i) {
        validate(records[i]);
        const auto& level = records[i].level;
        if (level && !spec.level_labels.empty() &&
            std::find(spec.level_labels.begin(), spec.level_labels.end(), *level) == spec.level_labels.end()) {
            throw InvalidRecord(spec.dataset_path.string() + ": record " + std::to_string(i + 1) + " has level '" +
                                *level + "' outside the configured labels");
        }
    }
    return records;
}

EvalReport aggregate(const std::vector<Trajectory>& trajectories, const std::vector<std::string>& level_labels) {
    EvalReport report;
    std::vector<std::string> levels = level_labels;
    bool unleveled = false;
    for (const auto& t : trajectories) {
        if (!t.question.level) {
            unleveled = true;
        } else if (std::find(levels.begin(), levels.end(), *t.question.level) == levels.end()) {
            if (!level_labels.empty()) throw InvalidRecord("level '" + *t.question.level + "' is not configured");
            levels.push_back(*t.question.level);
        }
    }
    if (unleveled) levels.emplace_back(kUnleveled);

    std::map<std::string, std::pair<std::size_t, double>> sums;
    double total = 0.0;
    for (const auto& t : trajectories) {
        const double value = t.reward ? t.reward->value : 0.0;
        auto& bucket = sums[t.question.level ? *t.question.level : std::string(kUnleveled)];
        ++bucket.first;
        bucket.second += value;
        total += value;
        ++report.halt_histogram[t.halt_reason];
    }
    for (const auto& level : levels) {
        const auto [count, sum] = sums[level];
        report.per_level.push_back({level, count, count ? sum / static_cast<double>(count) : 0.0});
    }
    report.overall.count = trajectories.size();
    report.overall.mean = trajectories.empty() ? 0.0 : total / static_cast<double>(trajectories.size());
    return report;
}

std::vector<Trajectory> rescore(std::vector<Trajectory> trajectories, std::optional<RewardKind> kind) {
    for (auto& t : trajectories) {
        t.reward.reset();
        if (t.prediction) t.reward = compute_reward(*t.prediction, t.question, kind.value_or(default_reward_kind(t.question)));
    }
    return trajectories;
}

EvalRun run_eval(const AgentGroup& group, const SelectedTools& tools, const TaskInfo& task, const BenchmarkSpec& spec,
                 const ToolRegistry& registry) {
    const auto started = std::chrono::steady_clock::now();
    group.validate();
    spec.limits.validate();
    if (tools.empty()) throw InvalidRecord("evaluation needs selected tools");
    const auto questions = load_benchmark(spec);
    std::vector<Trajectory> results(questions.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (auto i = next.fetch_add(1); i < questions.size(); i = next.fetch_add(1)) {
            const auto& qa = questions[i];
            const auto id = trajectory_id(i);
            Trajectory traj;
            try {
                traj = run_group_planning(group, tools, task, qa, spec.limits, registry, id).trajectory;
            } catch (const std::exception&) {
                traj = Trajectory{id, qa, {}, std::nullopt, std::nullopt, HaltReason::backend_error};
            }
            if (traj.prediction) {
                traj.reward = compute_reward(*traj.prediction, qa, spec.reward_kind.value_or(default_reward_kind(qa)));
            }
            results[i] = std::move(traj);
        }
    };
    const auto n = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(spec.worker_count, 1)),
                                                                  questions.size()));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    EvalRun run;
    run.report = aggregate(results, spec.level_labels);
    run.report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    run.trajectories = std::move(results);
    return run;
}

std::string render_report_json(const EvalReport& report) {
    Json levels = Json::array();
    for (const auto& l : report.per_level) {
        levels.push_back(Json{{"level", l.level}, {"count", l.count}, {"mean", l.count ? Json(l.mean) : Json(nullptr)}});
    }
    Json halts = Json::object();
    for (auto reason : {HaltReason::finished, HaltReason::step_limit, HaltReason::parse_failure, HaltReason::backend_error}) {
        auto it = report.halt_histogram.find(reason);
        halts[std::string(to_string(reason))] = it == report.halt_histogram.end() ? 0 : it->second;
    }
    Json j = Json::object();
    j["per_level"] = levels;
    j["overall"] = Json{{"count", report.overall.count}, {"mean", report.overall.mean}};
    j["halt_histogram"] = halts;
    return j.dump(2) + "\n";
}

namespace {

std::string percent(const LevelStats& s) {
    if (s.count == 0) return "—";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", s.mean * 100.0);
    return buf;
}

std::string pad(const std::string& cell, std::size_t width) {
    // the dash is one column wide but three bytes long
    const std::size_t shown = cell == "—" ? 1 : cell.size();
    return cell + std::string(width > shown ? width - shown : 0, ' ');
}

} // namespace

std::string render_report_table(const EvalReport& report) {
    std::vector<LevelStats> columns = report.per_level;
    columns.push_back(report.overall);
    std::vector<std::array<std::string, 3>> cells;
    for (const auto& c : columns) cells.push_back({c.level, std::to_string(c.count), percent(c)});
    const std::array<std::string, 3> heads{"Level", "Count", "Score"};

    std::string out;
    for (std::size_t row = 0; row < 3; ++row) {
        std::string line = pad(heads[row], 7);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            std::size_t width = 0;
            for (const auto& cell : cells[c]) width = std::max(width, cell == "—" ? std::size_t{1} : cell.size());
            line += "  " + pad(cells[c][row], width);
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + "\n";
    }
    return out;
}

void write_report(const EvalReport& report, const std::filesystem::path& dir) {
    io::write_text(dir / "report.json", render_report_json(report));
    io::write_text(dir / "report.txt", render_report_table(report));
}

} // namespace selfplan
