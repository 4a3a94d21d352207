// SPDX-License-Identifier: Apache-2.0
// selfplan command line: one subcommand per stage plus run-all.

#include "selfplan/core/prompt.hpp"
#include "selfplan/pipeline/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

constexpr int kOk = 0;
constexpr int kStageFailure = 1;
constexpr int kConfigError = 2;

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::string work_dir;
    bool force = false;
    bool no_reflection = false;
    bool single_agent = false;
    bool no_filtering = false;
    bool no_fine_tuning = false;

    std::optional<std::size_t> target_size;
    std::optional<std::size_t> target_kept;
    bool train = false;
    std::string question;
    std::string answer;
    std::string dataset;
};

void report(const selfplan::StageOutcome& outcome) {
    const char* status = outcome.status == selfplan::StageStatus::ran ? "ok" : "skipped";
    std::cout << "[" << outcome.stage << "] " << status << ": " << outcome.summary << "\n";
}

selfplan::PipelineConfig load_config(const Options& o) {
    auto config = selfplan::PipelineConfig::load(o.config_path);
    if (o.seed) config.rng_seed = *o.seed;
    if (o.workers) config.workers = *o.workers;
    if (!o.work_dir.empty()) config.work_dir = std::filesystem::absolute(o.work_dir);
    if (o.no_reflection) config.ablation.reflection = false;
    if (o.single_agent) config.ablation.multi = false;
    if (o.no_filtering) config.ablation.filtering = false;
    if (o.no_fine_tuning) config.ablation.fine_tuning = false;
    if (o.target_size) config.selfinstruct.target_size = *o.target_size;
    if (o.target_kept) config.synthesis.target_kept = *o.target_kept;
    if (!o.dataset.empty()) config.eval.dataset = std::filesystem::absolute(o.dataset);
    config.finalize();
    return config;
}

void print_plan(const selfplan::PlanResult& result) {
    std::cout << selfplan::render_history(result.trajectory.steps);
    std::cout << "Prediction: " << (result.prediction ? *result.prediction : std::string("(none)")) << "\n";
    std::cout << "Halt: " << selfplan::to_string(result.halt_reason) << "\n";
    std::cout << "Reflection rounds: " << result.reflect_rounds_used << "\n";
    if (result.trajectory.reward) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", result.trajectory.reward->value);
        std::cout << "Reward: " << buf << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"selfplan: self-planning agent pipeline"};
    app.require_subcommand(1);
    app.fallthrough();

    Options o;
    app.add_option("-c,--config", o.config_path, "Pipeline configuration file")->required();
    app.add_option("--seed", o.seed, "Override rng_seed");
    app.add_option("--workers", o.workers, "Bound on parallel synthesis and eval workers")->check(CLI::PositiveNumber);
    app.add_option("--work-dir", o.work_dir, "Override work_dir");
    app.add_flag("--force", o.force, "Re-run stages whose inputs are unchanged");
    app.add_flag("--no-reflection", o.no_reflection, "Disable the reflect agent");
    app.add_flag("--single-agent", o.single_agent, "Train and run one merged agent instead of three");
    app.add_flag("--no-filtering", o.no_filtering, "Keep every finished trajectory regardless of reward");
    app.add_flag("--no-fine-tuning", o.no_fine_tuning, "Evaluate on the configured backends without adapters");

    auto* instruct = app.add_subcommand("instruct", "Grow the task database by self-instruct");
    instruct->add_option("--target-size", o.target_size, "Override selfinstruct.target_size");
    auto* select = app.add_subcommand("select-tools", "Pick tools for the task from the library");
    auto* synthesize = app.add_subcommand("synthesize", "Synthesize and filter trajectories");
    synthesize->add_option("--target-kept", o.target_kept, "Override synthesis.target_kept");
    auto* differentiate = app.add_subcommand("differentiate", "Build role datasets and the training manifest");
    differentiate->add_flag("--train", o.train, "Run the training command on the manifest");
    auto* plan = app.add_subcommand("plan", "Answer one question with group planning");
    plan->add_option("-q,--question", o.question, "Question text")->required();
    plan->add_option("--answer", o.answer, "Gold answer used to score the prediction");
    auto* eval = app.add_subcommand("eval", "Evaluate group planning on the benchmark");
    eval->add_option("--dataset", o.dataset, "Override eval.dataset");
    auto* run_all = app.add_subcommand("run-all", "Run every stage in order");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        selfplan::Pipeline pipeline(load_config(o), o.force);
        if (instruct->parsed()) {
            report(pipeline.instruct());
        } else if (select->parsed()) {
            report(pipeline.select_tools());
        } else if (synthesize->parsed()) {
            report(pipeline.synthesize());
        } else if (differentiate->parsed()) {
            report(pipeline.differentiate());
            if (o.train) report(pipeline.train());
        } else if (plan->parsed()) {
            print_plan(pipeline.plan(o.question, o.answer));
        } else if (eval->parsed()) {
            report(pipeline.eval());
            std::cout << selfplan::io::read_text(pipeline.layout().eval_dir() / "report.txt");
        } else if (run_all->parsed()) {
            for (const auto& outcome : pipeline.run_all()) report(outcome);
            std::cout << selfplan::io::read_text(pipeline.layout().eval_dir() / "report.txt");
        }
    } catch (const selfplan::ConfigError& e) {
        std::cerr << "[config] " << e.what() << "\n";
        return kConfigError;
    } catch (const selfplan::StageError& e) {
        std::cerr << e.what() << "\n";
        return kStageFailure;
    } catch (const std::exception& e) {
        std::cerr << "[error] " << e.what() << "\n";
        return kStageFailure;
    }
    return kOk;
}
