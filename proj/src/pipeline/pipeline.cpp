// SPDX-License-Identifier: Apache-2.0
#include "selfplan/pipeline/pipeline.hpp"

#include "selfplan/core/text.hpp"
#include "selfplan/synthesis/reward.hpp"
#include "selfplan/synthesis/selection.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

namespace selfplan {

namespace {

constexpr std::string_view kScripted = "scripted://";

std::string file_digest(const std::filesystem::path& path) {
    if (!std::filesystem::is_regular_file(path)) return "missing";
    return fnv1a_hex(io::read_text(path));
}

Json usage_json(const UsageStats& u) {
    return Json{{"calls", u.calls}, {"prompt_tokens", u.prompt_tokens}, {"completion_tokens", u.completion_tokens}};
}

Json round_json(const RoundLog& r) {
    return Json{{"round", r.round},         {"example_indices", r.example_indices}, {"parsed", r.parsed},
                {"added", r.added},         {"duplicates", r.duplicates},           {"size_after", r.size_after}};
}

Json limits_json(const PlanLimits& l) {
    return Json{{"max_steps", l.max_steps},
                {"max_reflect_rounds", l.max_reflect_rounds},
                {"reflection_enabled", l.reflection_enabled},
                {"max_malformed", l.max_malformed}};
}

Json optional_kind(const std::optional<RewardKind>& kind) {
    return kind ? Json(std::string(to_string(*kind))) : Json(nullptr);
}

const char* const kTrainHint = "run `differentiate --train` or pass --no-fine-tuning";

} // namespace

StageError::StageError(std::string stage, const std::string& cause)
    : Error("[" + stage + "] " + cause), stage_(std::move(stage)), cause_(cause) {}

std::string WorkLayout::show(const std::filesystem::path& path) const {
    auto rel = path.lexically_relative(root);
    return rel.empty() || rel.native().rfind("..", 0) == 0 ? path.string() : rel.string();
}

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void save_selected(const SelectedTools& tools, const std::filesystem::path& path) {
    io::write_json(path, Json{{"tools", tools.tools()}});
}

SelectedTools load_selected(const ToolLibrary& library, const std::filesystem::path& path) {
    const auto doc = io::read_json(path);
    std::vector<std::string> names;
    try {
        for (const auto& card : doc.at("tools")) names.push_back(card.at("name").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw InvalidRecord(path.string() + ": " + e.what());
    }
    return SelectedTools::from_names(library, names, names.size());
}

struct Pipeline::StageRun {
    std::vector<std::pair<std::string, std::shared_ptr<Backend>>> backends;

    Json usage() const {
        Json out = Json::object();
        for (const auto& [label, b] : backends) out[label] = usage_json(b->usage());
        return out;
    }
};

Pipeline::Pipeline(PipelineConfig config, bool force) : config_(std::move(config)), force_(force) {
    config_.validate();
    layout_.root = std::filesystem::absolute(config_.work_dir).lexically_normal();
}

void Pipeline::append_log(const Json& record) const {
    std::filesystem::create_directories(layout_.log().parent_path());
    std::ofstream out(layout_.log(), std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot append to " + layout_.log().string());
    out << record.dump() << '\n';
}

void Pipeline::require(const std::filesystem::path& artifact, const std::string& producer) const {
    if (!std::filesystem::exists(artifact)) {
        throw Error("missing artifact " + layout_.show(artifact) + "; run `" + producer + "` first");
    }
}

std::shared_ptr<Backend> Pipeline::backend(StageRun& run, const BackendConfig& config, const std::string& label) const {
    auto b = make_backend(config, config_.base_dir);
    run.backends.emplace_back(label, b);
    return b;
}

Json Pipeline::backend_fingerprint(const BackendConfig& config) const {
    auto j = backend_config_json(config);
    if (config.endpoint.rfind(kScripted, 0) == 0) {
        std::filesystem::path script(config.endpoint.substr(kScripted.size()));
        if (script.is_relative()) script = config_.base_dir / script;
        j["script"] = file_digest(script);
    }
    return j;
}

Json Pipeline::tools_fingerprint() const {
    const auto& t = config_.tools;
    return Json{{"observation_cap", t.observation_cap},
                {"suggestion_count", t.suggestion_count},
                {"corpus", t.corpus_path.empty() ? Json(nullptr) : Json(file_digest(t.corpus_path))},
                {"remote_corpus_endpoint", t.remote_corpus_endpoint},
                {"search_fixtures",
                 t.search_fixtures_path.empty() ? Json(nullptr) : Json(file_digest(t.search_fixtures_path))},
                {"remote_search_endpoint", t.remote_search_endpoint},
                {"code_enabled", t.code_enabled},
                {"code_interpreter", t.code_interpreter},
                {"code_timeout_ms", t.code_timeout.count()}};
}

StageOutcome Pipeline::run_stage(const std::string& name, const std::function<Json()>& inputs,
                                 const std::vector<std::filesystem::path>& outputs,
                                 const std::function<std::string(StageRun&)>& body) {
    const auto started = std::chrono::steady_clock::now();
    StageRun run;
    auto log = [&](const std::string& status, const std::string& key, const std::string& detail) {
        const auto ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
        append_log(Json{{"stage", name}, {"status", status}, {key, detail}, {"elapsed_ms", ms}, {"usage", run.usage()}});
    };

    try {
        const auto fingerprint = fnv1a_hex(Json{{"stage", name}, {"inputs", inputs()}}.dump());
        const auto stamp = layout_.stamp(name);
        bool outputs_present = true;
        for (const auto& p : outputs) outputs_present = outputs_present && std::filesystem::exists(p);
        if (!force_ && outputs_present && std::filesystem::exists(stamp)) {
            const auto recorded = io::read_json(stamp);
            if (recorded.value("fingerprint", std::string()) == fingerprint) {
                log("skipped", "summary", "inputs unchanged");
                return StageOutcome{name, StageStatus::skipped, "up to date"};
            }
        }
        std::filesystem::remove(stamp);
        auto summary = body(run);
        io::write_json(stamp, Json{{"stage", name}, {"fingerprint", fingerprint}});
        log("ok", "summary", summary);
        return StageOutcome{name, StageStatus::ran, summary};
    } catch (const ConfigError& e) {
        log("failed", "error", e.what());
        throw;
    } catch (const std::exception& e) {
        log("failed", "error", e.what());
        throw StageError(name, e.what());
    }
}

StageOutcome Pipeline::instruct() {
    const auto& cfg = config_.selfinstruct;
    auto inputs = [&] {
        return Json{{"task", file_digest(config_.task_card)},
                    {"few_shot_k", cfg.few_shot_k},
                    {"gen_per_round", cfg.gen_per_round},
                    {"target_size", cfg.target_size},
                    {"max_rounds", cfg.max_rounds},
                    {"rng_seed", cfg.rng_seed},
                    {"backend", backend_fingerprint(config_.backends.meta)}};
    };
    return run_stage("instruct", inputs, {layout_.database(), layout_.rounds()}, [&](StageRun& run) {
        const auto task = io::load_task(config_.task_card);
        if (cfg.target_size == 0) throw ConfigError("selfinstruct.target_size is not set");
        try {
            cfg.validate(task.examples.size());
        } catch (const InvalidRecord& e) {
            throw ConfigError(std::string("selfinstruct: ") + e.what());
        }
        auto meta = backend(run, config_.backends.meta, "meta");
        Database db(task.examples);
        std::vector<RoundLog> rounds;
        auto persist = [&] {
            save_database(db, layout_.database());
            std::vector<Json> lines;
            for (const auto& r : rounds) lines.push_back(round_json(r));
            io::write_jsonl(layout_.rounds(), lines);
        };
        try {
            rounds = run_until_target(db, task, cfg, *meta);
        } catch (const TargetUnreached& e) {
            rounds = e.log();
            persist();
            throw;
        }
        persist();
        return "database has " + std::to_string(db.size()) + " entries (" + std::to_string(db.seed_count()) +
               " seeds) after " + std::to_string(rounds.size()) + " rounds";
    });
}

StageOutcome Pipeline::select_tools() {
    auto inputs = [&] {
        return Json{{"task", file_digest(config_.task_card)},
                    {"library", file_digest(config_.tool_library)},
                    {"select_count", config_.synthesis.select_count},
                    {"reprompts", config_.select_reprompts},
                    {"backend", backend_fingerprint(config_.backends.meta)}};
    };
    return run_stage("select-tools", inputs, {layout_.selected()}, [&](StageRun& run) {
        const auto task = io::load_task(config_.task_card);
        const auto library = io::load_library(config_.tool_library);
        auto meta = backend(run, config_.backends.meta, "meta");
        auto selected =
            selfplan::select_tools(*meta, library, task, config_.synthesis.select_count, config_.select_reprompts);
        save_selected(selected, layout_.selected());
        std::vector<std::string> names;
        for (const auto& t : selected.tools()) names.push_back(t.name);
        return "selected " + text::join(names, ", ");
    });
}

StageOutcome Pipeline::synthesize() {
    const auto& cfg = config_.synthesis;
    auto inputs = [&] {
        return Json{{"database", file_digest(layout_.database())},
                    {"selected", file_digest(layout_.selected())},
                    {"task", file_digest(config_.task_card)},
                    {"library", file_digest(config_.tool_library)},
                    {"tools", tools_fingerprint()},
                    {"max_steps", cfg.max_steps},
                    {"target_kept", cfg.target_kept},
                    {"reward_kind", optional_kind(cfg.reward_kind)},
                    {"attempts_per_question", cfg.attempts_per_question},
                    {"max_malformed", cfg.max_malformed},
                    {"filtering", cfg.filtering},
                    {"rng_seed", cfg.rng_seed},
                    {"backend", backend_fingerprint(config_.backends.meta)}};
    };
    return run_stage("synthesize", inputs, {layout_.kept(), layout_.rejected()}, [&](StageRun& run) {
        require(layout_.database(), "instruct");
        require(layout_.selected(), "select-tools");
        const auto task = io::load_task(config_.task_card);
        const auto library = io::load_library(config_.tool_library);
        const auto selected = load_selected(library, layout_.selected());
        const auto db = load_database(layout_.database());
        const auto registry = build_registry(library, selected, config_.tools);
        auto meta = backend(run, config_.backends.meta, "meta");
        SynthesisResult result;
        try {
            result = run_synthesis(*meta, *registry, selected, task, db.entries(), cfg);
        } catch (const SynthesisTargetUnreached& e) {
            save_synthesis(e.partial(), layout_.synthesis_dir());
            throw;
        }
        save_synthesis(result, layout_.synthesis_dir());
        return "kept " + std::to_string(result.kept.size()) + " of " + std::to_string(result.stats.attempts) +
               " trajectories";
    });
}

StageOutcome Pipeline::differentiate() {
    const auto& d = config_.differentiate;
    auto inputs = [&] {
        return Json{{"kept", file_digest(layout_.kept())},
                    {"rejected", file_digest(layout_.rejected())},
                    {"selected", file_digest(layout_.selected())},
                    {"task", file_digest(config_.task_card)},
                    {"base_model_id", d.base_model_id},
                    {"hyperparameters", Json::parse(to_json_text(TrainingManifest{
                                            d.base_model_id, {}, d.hyperparameters, {}, false, false, {}}))["hyperparameters"]},
                    {"reflect_negatives", d.reflect_negatives},
                    {"smoke_mode", d.smoke_mode},
                    {"multi", config_.ablation.multi}};
    };
    return run_stage("differentiate", inputs, {layout_.manifest()}, [&](StageRun&) {
        require(layout_.kept(), "synthesize");
        const auto task = io::load_task(config_.task_card);
        const auto library = io::load_library(config_.tool_library);
        const auto selected = load_selected(library, layout_.selected());
        const auto kept = io::read_records<Trajectory>(layout_.kept());
        if (kept.empty()) throw Error("no kept trajectories in " + layout_.show(layout_.kept()));

        std::vector<RoleExample> examples;
        for (const auto& traj : kept) {
            auto records = reorganize(traj, selected, PromptContext::make(task, traj.question));
            examples.insert(examples.end(), records.begin(), records.end());
        }
        if (d.reflect_negatives > 0 && std::filesystem::exists(layout_.rejected())) {
            auto negatives = build_reflect_negatives(io::read_records<Trajectory>(layout_.rejected()), selected, task,
                                                     d.reflect_negatives);
            examples.insert(examples.end(), negatives.begin(), negatives.end());
        }

        std::filesystem::remove_all(layout_.differentiate_dir());
        const auto paths = write_role_datasets(examples, layout_.differentiate_dir(), !config_.ablation.multi);

        TrainingManifest manifest;
        manifest.base_model_id = d.base_model_id;
        manifest.role_dataset_paths = paths.role_paths;
        manifest.hyperparameters = d.hyperparameters;
        manifest.output_dir = layout_.adapters_dir();
        manifest.smoke_mode = d.smoke_mode;
        manifest.shared_adapter = paths.shared;
        manifest.result_path = layout_.training_result();
        manifest.validate();
        io::write_text(layout_.manifest(), to_json_text(manifest));

        return "plan " + std::to_string(paths.counts.at(Role::plan)) + ", tool " +
               std::to_string(paths.counts.at(Role::tool)) + ", reflect " +
               std::to_string(paths.counts.at(Role::reflect)) + " records" + (paths.shared ? " (merged)" : "");
    });
}

StageOutcome Pipeline::train() {
    const auto& cmd = config_.differentiate.training;
    auto inputs = [&] {
        Json datasets = Json::object();
        if (std::filesystem::exists(layout_.manifest())) {
            const auto manifest = parse_manifest(io::read_text(layout_.manifest()));
            for (const auto& [role, path] : manifest.role_dataset_paths) {
                datasets[std::string(to_string(role))] = file_digest(path);
            }
        }
        return Json{{"manifest", file_digest(layout_.manifest())},
                    {"datasets", datasets},
                    {"command", cmd.command},
                    {"timeout_ms", cmd.timeout.count()}};
    };
    return run_stage("train", inputs, {layout_.training_result()}, [&](StageRun&) {
        require(layout_.manifest(), "differentiate");
        if (text::trim(cmd.command).empty()) throw ConfigError("differentiate.training.command is not set");
        const auto manifest = parse_manifest(io::read_text(layout_.manifest()));
        const auto result = invoke_training(manifest, layout_.manifest(), cmd);
        std::vector<std::string> roles;
        for (const auto& [role, path] : result.adapter_paths) roles.push_back(std::string(to_string(role)));
        return "adapters for " + text::join(roles, ", ");
    });
}

std::vector<BackendConfig> Pipeline::agent_configs() const {
    std::vector<BackendConfig> out{config_.backends.plan, config_.backends.tool, config_.backends.reflect};
    if (!config_.ablation.multi) out = {config_.backends.single};
    if (!config_.ablation.fine_tuning) return out;
    bool needs_adapters = false;
    for (const auto& c : out) needs_adapters = needs_adapters || !c.adapter_id;
    if (!needs_adapters) return out;

    const auto result_path = layout_.training_result();
    if (!std::filesystem::exists(result_path)) {
        throw Error("missing artifact " + layout_.show(result_path) + ": evaluation with fine-tuning needs trained " +
                    (config_.ablation.multi ? "plan, tool and reflect adapters" : "shared adapter") + "; " +
                    kTrainHint);
    }
    const auto result = parse_training_result(io::read_text(result_path));
    if (result.status != TrainingStatus::ok) {
        throw Error(layout_.show(result_path) + " reports a failed training run: " + result.message);
    }
    const Role roles[] = {Role::plan, Role::tool, Role::reflect};
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].adapter_id) continue;
        auto it = result.adapter_paths.find(roles[i]);
        if (it == result.adapter_paths.end()) {
            throw Error(layout_.show(result_path) + " has no " + std::string(to_string(roles[i])) + " adapter; " +
                        kTrainHint);
        }
        out[i].adapter_id = it->second;
    }
    return out;
}

AgentGroup Pipeline::agent_group(StageRun& run) const {
    const auto configs = agent_configs();
    if (configs.size() == 1) return AgentGroup::single(backend(run, configs[0], "agent"));
    return AgentGroup{backend(run, configs[0], "plan"), backend(run, configs[1], "tool"),
                      backend(run, configs[2], "reflect")};
}

StageOutcome Pipeline::eval() {
    const auto& e = config_.eval;
    // the trainer's wall time does not change the adapters
    auto training_digest = [&]() -> Json {
        if (!std::filesystem::exists(layout_.training_result())) return "missing";
        auto j = io::read_json(layout_.training_result());
        if (j.is_object()) j.erase("wall_time");
        return fnv1a_hex(j.dump());
    };
    auto inputs = [&] {
        Json agents = Json::array();
        for (const auto& c : agent_configs()) agents.push_back(backend_fingerprint(c));
        return Json{{"selected", file_digest(layout_.selected())},
                    {"library", file_digest(config_.tool_library)},
                    {"task", file_digest(config_.task_card)},
                    {"dataset", e.dataset.empty() ? Json(nullptr) : Json(file_digest(e.dataset))},
                    {"level_labels", e.level_labels},
                    {"reward_kind", optional_kind(e.reward_kind)},
                    {"limits", limits_json(config_.limits)},
                    {"tools", tools_fingerprint()},
                    {"agents", agents},
                    {"training_result", config_.ablation.fine_tuning ? training_digest() : Json(nullptr)}};
    };
    return run_stage("eval", inputs, {layout_.eval_dir() / "report.json", layout_.eval_trajectories()},
                     [&](StageRun& run) {
                         if (e.dataset.empty()) throw ConfigError("eval.dataset is not set");
                         require(layout_.selected(), "select-tools");
                         const auto task = io::load_task(config_.task_card);
                         const auto library = io::load_library(config_.tool_library);
                         const auto selected = load_selected(library, layout_.selected());
                         const auto registry = build_registry(library, selected, config_.tools);
                         const auto group = agent_group(run);

                         BenchmarkSpec spec;
                         spec.dataset_path = e.dataset;
                         spec.reward_kind = e.reward_kind;
                         spec.level_labels = e.level_labels;
                         spec.worker_count = config_.workers;
                         spec.limits = config_.limits;
                         const auto result = run_eval(group, selected, task, spec, *registry);
                         write_report(result.report, layout_.eval_dir());
                         io::write_records(layout_.eval_trajectories(), result.trajectories);
                         char buf[64];
                         std::snprintf(buf, sizeof buf, "%.2f", result.report.overall.mean * 100.0);
                         return "overall " + std::string(buf) + " over " +
                                std::to_string(result.report.overall.count) + " questions";
                     });
}

std::vector<StageOutcome> Pipeline::run_all() {
    std::vector<StageOutcome> out;
    out.push_back(instruct());
    out.push_back(select_tools());
    out.push_back(synthesize());
    out.push_back(differentiate());
    if (config_.ablation.fine_tuning) out.push_back(train());
    out.push_back(eval());
    return out;
}

PlanResult Pipeline::plan(const std::string& question, const std::string& answer) {
    const auto started = std::chrono::steady_clock::now();
    StageRun run;
    auto log = [&](const std::string& status, const std::string& key, const std::string& detail) {
        const auto ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
        append_log(Json{{"stage", "plan"}, {"status", status}, {key, detail}, {"elapsed_ms", ms}, {"usage", run.usage()}});
    };
    try {
        if (text::trim(question).empty()) throw ConfigError("--question must not be empty");
        require(layout_.selected(), "select-tools");
        const auto task = io::load_task(config_.task_card);
        const auto library = io::load_library(config_.tool_library);
        const auto selected = load_selected(library, layout_.selected());
        const auto registry = build_registry(library, selected, config_.tools);
        const auto group = agent_group(run);
        QAPair qa{question, answer};
        auto result = run_group_planning(group, selected, task, qa, config_.limits, *registry, "adhoc");
        if (!answer.empty() && result.prediction) {
            result.trajectory.reward = compute_reward(*result.prediction, qa, default_reward_kind(qa));
        }
        log("ok", "summary", std::string("halt ") + std::string(to_string(result.halt_reason)));
        return result;
    } catch (const ConfigError& e) {
        log("failed", "error", e.what());
        throw;
    } catch (const std::exception& e) {
        log("failed", "error", e.what());
        throw StageError("plan", e.what());
    }
}

} // namespace selfplan
