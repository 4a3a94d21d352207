// SPDX-License-Identifier: Apache-2.0
#include "selfplan/pipeline/config.hpp"

#include "selfplan/core/text.hpp"

#include <set>
#include <type_traits>

namespace selfplan {

namespace {

constexpr std::string_view kScripted = "scripted://";

/// Strict reader over one JSON object: typed optional keys, unknown keys rejected.
class Section {
public:
    Section(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(label() + " must be an object");
    }

    template <typename T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return;
        check_type<T>(*it, key);
        try {
            out = it->template get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(path(key) + ": wrong type");
        }
    }

    template <typename T>
    void read(const char* key, std::optional<T>& out) {
        T value{};
        if (!has(key)) {
            seen_.insert(key);
            return;
        }
        read(key, value);
        out = std::move(value);
    }

    void read_path(const char* key, std::filesystem::path& out, const std::filesystem::path& base) {
        std::string raw;
        read(key, raw);
        if (!raw.empty()) out = resolve(base, raw);
    }

    void read_ms(const char* key, std::chrono::milliseconds& out) {
        std::int64_t ms = out.count();
        read(key, ms);
        out = std::chrono::milliseconds(ms);
    }

    bool has(const char* key) const {
        auto it = j_.find(key);
        return it != j_.end() && !it->is_null();
    }

    /// Nested section; an absent key yields an empty object.
    Section child(const char* key) {
        seen_.insert(key);
        static const Json empty = Json::object();
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return Section(empty, path(key));
        return Section(*it, path(key));
    }

    const Json& raw() const { return j_; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError(path(it.key().c_str()) + ": unknown key");
        }
    }

    std::string path(const char* key) const { return where_.empty() ? std::string(key) : where_ + "." + key; }

private:
    std::string label() const { return where_.empty() ? std::string("configuration") : where_; }

    template <typename T>
    void check_type(const Json& v, const char* key) const {
        bool ok = true;
        if constexpr (std::is_same_v<T, bool>) {
            ok = v.is_boolean();
        } else if constexpr (std::is_unsigned_v<T>) {
            ok = v.is_number_unsigned();
        } else if constexpr (std::is_integral_v<T>) {
            ok = v.is_number_integer();
        } else if constexpr (std::is_floating_point_v<T>) {
            ok = v.is_number();
        } else if constexpr (std::is_same_v<T, std::string>) {
            ok = v.is_string();
        } else {
            ok = v.is_array();
        }
        if (!ok) throw ConfigError(path(key) + ": wrong type");
    }

    static std::filesystem::path resolve(const std::filesystem::path& base, const std::string& raw) {
        std::filesystem::path p(raw);
        return p.is_absolute() ? p : (base / p).lexically_normal();
    }

    const Json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

RewardKind reward_from(const std::string& text, const std::string& where) {
    try {
        return parse_reward_kind(text);
    } catch (const InvalidRecord&) {
        throw ConfigError(where + ": unknown reward kind '" + text + "'");
    }
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

void read_hyperparameters(Section s, Hyperparameters& hp) {
    s.read("learning_rate", hp.learning_rate);
    s.read("sequence_length", hp.sequence_length);
    s.read("epochs", hp.epochs);
    s.read("batch_size", hp.batch_size);
    s.read("per_device_batch_size", hp.per_device_batch_size);
    s.read("gradient_accumulation_steps", hp.gradient_accumulation_steps);
    s.read("warmup_ratio", hp.warmup_ratio);
    s.read("adapter_rank", hp.adapter_rank);
    s.read("adapter_alpha", hp.adapter_alpha);
    s.read("adapter_dropout", hp.adapter_dropout);
    s.read("target_module_names", hp.target_module_names);
    s.finish();
}

void require_exists(const std::filesystem::path& p, const std::string& what) {
    if (!std::filesystem::exists(p)) throw ConfigError(what + " not found: " + p.string());
}

void check_backend(const BackendConfig& b, const std::string& where, const std::filesystem::path& base) {
    try {
        b.validate();
    } catch (const InvalidRecord& e) {
        throw ConfigError(where + ": " + e.what());
    }
    if (b.endpoint.rfind(kScripted, 0) == 0) {
        std::filesystem::path script(b.endpoint.substr(kScripted.size()));
        if (script.is_relative()) script = base / script;
        require_exists(script, where + " script");
    }
}

} // namespace

Json backend_config_json(const BackendConfig& c) {
    Json j = Json::object();
    j["endpoint"] = c.endpoint;
    j["model_id"] = c.model_id;
    j["adapter_id"] = c.adapter_id ? Json(*c.adapter_id) : Json(nullptr);
    j["temperature"] = c.temperature;
    j["top_p"] = c.top_p;
    j["max_new_tokens"] = c.max_new_tokens;
    j["stop_sequences"] = c.stop_sequences;
    j["timeout_ms"] = c.timeout.count();
    j["max_retries"] = c.max_retries;
    j["retry_backoff_ms"] = c.retry_backoff.count();
    j["api_key_env"] = c.api_key_env;
    j["parallelism"] = c.parallelism;
    return j;
}

BackendConfig parse_backend_config(const Json& j, const std::string& where) {
    BackendConfig c;
    Section s(j, where);
    s.read("endpoint", c.endpoint);
    s.read("model_id", c.model_id);
    s.read("adapter_id", c.adapter_id);
    s.read("temperature", c.temperature);
    s.read("top_p", c.top_p);
    s.read("max_new_tokens", c.max_new_tokens);
    s.read("stop_sequences", c.stop_sequences);
    s.read_ms("timeout_ms", c.timeout);
    s.read("max_retries", c.max_retries);
    s.read_ms("retry_backoff_ms", c.retry_backoff);
    s.read("api_key_env", c.api_key_env);
    s.read("parallelism", c.parallelism);
    s.finish();
    if (c.endpoint.empty()) throw ConfigError(where + ".endpoint is required");
    return c;
}

PipelineConfig PipelineConfig::from_json(const Json& doc, const std::filesystem::path& base_dir) {
    PipelineConfig c;
    c.base_dir = base_dir;
    Section top(doc, "");
    top.read_path("task_card", c.task_card, base_dir);
    top.read_path("tool_library", c.tool_library, base_dir);
    c.work_dir = base_dir / "work";
    top.read_path("work_dir", c.work_dir, base_dir);
    top.read("rng_seed", c.rng_seed);
    top.read("workers", c.workers);
    if (c.task_card.empty()) throw ConfigError("task_card is required");
    if (c.tool_library.empty()) throw ConfigError("tool_library is required");

    {
        auto s = top.child("backends");
        if (!s.has("meta")) throw ConfigError("backends.meta is required");
        s.child("meta");
        const Json meta = s.raw().at("meta");
        c.backends.meta = parse_backend_config(meta, "backends.meta");
        auto role = [&](const char* name, const char* fallback) {
            s.child(name);
            const char* source = s.has(name) ? name : fallback;
            Json merged = meta;
            merged["temperature"] = 0.0;
            if (source && s.has(source)) {
                const auto& over = s.raw().at(source);
                if (!over.is_object()) throw ConfigError(std::string("backends.") + source + " must be an object");
                merged.merge_patch(over);
            }
            return parse_backend_config(merged, std::string("backends.") + name);
        };
        c.backends.plan = role("plan", nullptr);
        c.backends.tool = role("tool", nullptr);
        c.backends.reflect = role("reflect", nullptr);
        c.backends.single = role("single", "plan");
        s.finish();
    }
    {
        auto s = top.child("tools");
        s.read("observation_cap", c.tools.observation_cap);
        s.read("suggestion_count", c.tools.suggestion_count);
        s.read_path("corpus", c.tools.corpus_path, base_dir);
        s.read("remote_corpus_endpoint", c.tools.remote_corpus_endpoint);
        s.read_path("search_fixtures", c.tools.search_fixtures_path, base_dir);
        s.read("remote_search_endpoint", c.tools.remote_search_endpoint);
        s.read("search_key_env", c.tools.search_key_env);
        auto code = s.child("code");
        code.read("enabled", c.tools.code_enabled);
        code.read("interpreter", c.tools.code_interpreter);
        code.read_ms("timeout_ms", c.tools.code_timeout);
        code.finish();
        s.finish();
    }
    {
        auto s = top.child("selfinstruct");
        s.read("few_shot_k", c.selfinstruct.few_shot_k);
        s.read("gen_per_round", c.selfinstruct.gen_per_round);
        s.read("target_size", c.selfinstruct.target_size);
        s.read("max_rounds", c.selfinstruct.max_rounds);
        s.finish();
    }
    {
        auto s = top.child("synthesis");
        s.read("select_count", c.synthesis.select_count);
        s.read("max_steps", c.synthesis.max_steps);
        s.read("target_kept", c.synthesis.target_kept);
        std::optional<std::string> kind;
        s.read("reward_kind", kind);
        if (kind) c.synthesis.reward_kind = reward_from(*kind, "synthesis.reward_kind");
        s.read("attempts_per_question", c.synthesis.attempts_per_question);
        s.read("max_malformed", c.synthesis.max_malformed);
        s.read("select_reprompts", c.select_reprompts);
        s.finish();
    }
    {
        auto s = top.child("differentiate");
        s.read("base_model_id", c.differentiate.base_model_id);
        std::string preset = "7b-13b";
        s.read("preset", preset);
        try {
            c.differentiate.hyperparameters = Hyperparameters::preset(preset);
        } catch (const InvalidRecord& e) {
            throw ConfigError(std::string("differentiate.preset: ") + e.what());
        }
        read_hyperparameters(s.child("hyperparameters"), c.differentiate.hyperparameters);
        s.read("reflect_negatives", c.differentiate.reflect_negatives);
        s.read("smoke_mode", c.differentiate.smoke_mode);
        auto t = s.child("training");
        t.read("command", c.differentiate.training.command);
        t.read_ms("timeout_ms", c.differentiate.training.timeout);
        t.finish();
        s.finish();
        c.differentiate.training.command =
            text::replace_all(c.differentiate.training.command, "{config_dir}", shell_quote(base_dir.string()));
        if (c.differentiate.base_model_id.empty()) c.differentiate.base_model_id = c.backends.meta.model_id;
    }
    {
        auto s = top.child("limits");
        s.read("max_steps", c.limits.max_steps);
        s.read("max_reflect_rounds", c.limits.max_reflect_rounds);
        s.read("max_malformed", c.limits.max_malformed);
        s.finish();
    }
    {
        auto s = top.child("eval");
        s.read_path("dataset", c.eval.dataset, base_dir);
        s.read("level_labels", c.eval.level_labels);
        std::optional<std::string> kind;
        s.read("reward_kind", kind);
        if (kind) c.eval.reward_kind = reward_from(*kind, "eval.reward_kind");
        s.finish();
    }
    {
        auto s = top.child("ablation");
        s.read("reflection", c.ablation.reflection);
        s.read("multi", c.ablation.multi);
        s.read("filtering", c.ablation.filtering);
        s.read("fine_tuning", c.ablation.fine_tuning);
        s.finish();
    }
    top.finish();
    c.finalize();
    return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    Json doc;
    try {
        doc = Json::parse(io::read_text(path));
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    auto base = std::filesystem::absolute(path).parent_path();
    return from_json(doc, base);
}

void PipelineConfig::finalize() {
    selfinstruct.rng_seed = rng_seed;
    synthesis.rng_seed = rng_seed;
    synthesis.workers = workers;
    synthesis.filtering = ablation.filtering;
    limits.reflection_enabled = ablation.reflection;
}

void PipelineConfig::validate() const {
    require_exists(task_card, "task card");
    require_exists(tool_library, "tool library");
    if (!tools.corpus_path.empty()) require_exists(tools.corpus_path, "corpus");
    if (!tools.search_fixtures_path.empty()) require_exists(tools.search_fixtures_path, "search fixtures");
    if (!eval.dataset.empty()) require_exists(eval.dataset, "eval dataset");
    if (workers < 1) throw ConfigError("workers must be at least 1");
    if (select_reprompts < 0) throw ConfigError("synthesis.select_reprompts must not be negative");
    check_backend(backends.meta, "backends.meta", base_dir);
    check_backend(backends.plan, "backends.plan", base_dir);
    check_backend(backends.tool, "backends.tool", base_dir);
    check_backend(backends.reflect, "backends.reflect", base_dir);
    check_backend(backends.single, "backends.single", base_dir);
    try {
        synthesis.validate();
        limits.validate();
        differentiate.hyperparameters.validate();
    } catch (const InvalidRecord& e) {
        throw ConfigError(e.what());
    }
    if (selfinstruct.few_shot_k < 1 || selfinstruct.gen_per_round < 1 || selfinstruct.max_rounds < 0) {
        throw ConfigError("selfinstruct: few_shot_k and gen_per_round must be positive, max_rounds non-negative");
    }
}

} // namespace selfplan
