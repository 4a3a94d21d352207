// SPDX-License-Identifier: Apache-2.0
#include "selfplan/selfinstruct/selfinstruct.hpp"

#include "selfplan/core/answer.hpp"
#include "selfplan/core/prompt.hpp"
#include "selfplan/core/records.hpp"
#include "selfplan/core/text.hpp"

#include <cctype>

namespace selfplan {

std::string question_key(const QAPair& pair) { return normalize_answer(pair.question); }

Database::Database(std::vector<QAPair> seeds) {
    if (seeds.empty()) throw InvalidRecord("database needs at least one seed example");
    for (auto& seed : seeds) {
        validate(seed);
        seed.provenance = Provenance::seed;
        if (!index_.insert(question_key(seed)).second) {
            throw InvalidRecord("duplicate seed question: '" + seed.question + "'");
        }
        entries_.push_back(std::move(seed));
    }
    seed_count_ = entries_.size();
}

Database Database::from_entries(std::vector<QAPair> entries) {
    Database db;
    bool generated_seen = false;
    for (auto& entry : entries) {
        validate(entry);
        if (entry.provenance == Provenance::seed) {
            if (generated_seen) throw InvalidRecord("seed entry after generated entries");
            ++db.seed_count_;
        } else {
            generated_seen = true;
        }
        if (!db.index_.insert(question_key(entry)).second) {
            throw InvalidRecord("duplicate question in database: '" + entry.question + "'");
        }
        db.entries_.push_back(std::move(entry));
    }
    if (db.seed_count_ == 0) throw InvalidRecord("database has no seed entries");
    return db;
}

bool Database::insert(QAPair pair) {
    if (!qa_pair_problem(pair).empty()) return false;
    if (!index_.insert(question_key(pair)).second) return false;
    pair.provenance = Provenance::generated;
    entries_.push_back(std::move(pair));
    return true;
}

void AugmentConfig::validate(std::size_t seed_count) const {
    if (few_shot_k < 1) throw InvalidRecord("few_shot_k must be at least 1");
    if (gen_per_round < 1) throw InvalidRecord("gen_per_round must be at least 1");
    if (max_rounds < 0) throw InvalidRecord("max_rounds must not be negative");
    if (target_size <= seed_count) {
        throw InvalidRecord("target_size " + std::to_string(target_size) + " must exceed the " +
                            std::to_string(seed_count) + " seed examples");
    }
}

std::string render_selfinstruct_prompt(const TaskInfo& task, const std::vector<QAPair>& examples, int gen_count,
                                       const QAPair& one_example) {
    std::string pairs;
    for (const auto& ex : examples) {
        if (!pairs.empty()) pairs += "\n\n";
        pairs += render_qa_block(ex);
    }
    std::string out =
        "I want you to be a QA pair generator to generate high-quality questions for use in Task described as "
        "follows:\n";
    out += "Task Name: " + task.name + "\n";
    out += "Task Description: " + task.description + "\n";
    out += "Here are some Q&A pair examples from the Task:\n";
    out += pairs + "\n";
    out += "Modeled on all the information and examples above, I want you to generate new different " +
           std::to_string(gen_count) +
           " Question-Answer pairs that cover a wide range of topics, some of which are difficult, some of which are "
           "easy, and require multiple steps of reasoning to get to the final answer. The format is like below:\n";
    out += render_qa_block(one_example) + "\n";
    return out;
}

namespace {

enum class Field { none, question, context, options, caption, answer };

// Strips list decorations such as "1.", "2)", "-", "*", "Q3:" and markdown bold.
std::string_view strip_decoration(std::string_view line) {
    line = text::trim(line);
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) line = text::trim(line.substr(i + 1));
    while (!line.empty() && (line[0] == '-' || line[0] == '*' || line[0] == ' ')) line.remove_prefix(1);
    return line;
}

std::pair<Field, std::string_view> classify(std::string_view raw) {
    auto line = strip_decoration(raw);
    static const std::pair<std::string_view, Field> labels[] = {{"question", Field::question},
                                                                {"context", Field::context},
                                                                {"options", Field::options},
                                                                {"caption", Field::caption},
                                                                {"answer", Field::answer}};
    for (const auto& [label, field] : labels) {
        if (!text::istarts_with(line, label)) continue;
        auto rest = line.substr(label.size());
        // tolerate "Question 3:" and "**Answer**:"
        std::size_t j = 0;
        while (j < rest.size() && (std::isdigit(static_cast<unsigned char>(rest[j])) || rest[j] == ' ' || rest[j] == '*')) ++j;
        if (j < rest.size() && rest[j] == ':') {
            rest = rest.substr(j + 1);
            while (!rest.empty() && rest.front() == '*') rest.remove_prefix(1);
            return {field, text::trim(rest)};
        }
    }
    return {Field::none, line};
}

struct Draft {
    std::string question;
    std::string context;
    std::string options;
    std::string caption;
    bool has_options = false;
    bool has_caption = false;
};

std::optional<QAPair> finish(const Draft& draft, std::string_view answer) {
    QAPair pair;
    pair.question = draft.question;
    if (!draft.context.empty()) pair.question += "\nContext: " + draft.context;
    pair.answer = std::string(text::trim(answer));
    if (draft.has_options) {
        pair.choices = parse_choices(draft.options);
        if (pair.choices.empty()) return std::nullopt;
    }
    if (draft.has_caption) {
        if (text::trim(draft.caption).empty()) return std::nullopt;
        pair.caption = draft.caption;
    }
    pair.provenance = Provenance::generated;
    if (text::trim(draft.question).empty() || !qa_pair_problem(pair).empty()) return std::nullopt;
    return pair;
}

} // namespace

std::vector<QAPair> parse_qa_pairs(std::string_view body) {
    std::vector<QAPair> out;
    std::optional<Draft> draft;
    Field last = Field::none;
    for (auto raw : text::split_lines(body)) {
        auto [field, value] = classify(raw);
        switch (field) {
        case Field::question:
            draft = Draft{std::string(value), {}, {}, {}, false, false};
            last = Field::question;
            break;
        case Field::context:
            if (draft) draft->context = std::string(value);
            last = Field::context;
            break;
        case Field::options:
            if (draft) {
                draft->options = std::string(value);
                draft->has_options = true;
            }
            last = Field::options;
            break;
        case Field::caption:
            if (draft) {
                draft->caption = std::string(value);
                draft->has_caption = true;
            }
            last = Field::caption;
            break;
        case Field::answer:
            if (draft) {
                if (auto pair = finish(*draft, value)) out.push_back(std::move(*pair));
            }
            draft.reset();
            last = Field::none;
            break;
        case Field::none:
            // wrapped continuation of the open field; prose outside blocks is ignored
            if (!draft || value.empty()) break;
            if (last == Field::question) draft->question += " " + std::string(value);
            if (last == Field::context) draft->context += " " + std::string(value);
            if (last == Field::options) draft->options += " " + std::string(value);
            if (last == Field::caption) draft->caption += " " + std::string(value);
            break;
        }
    }
    return out;
}

RoundLog augment_round(Database& db, const TaskInfo& task, const AugmentConfig& config, Backend& backend, Rng& rng,
                       int round_number) {
    if (db.size() == 0) throw InvalidRecord("database is empty");
    RoundLog log;
    log.round = round_number;
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(config.few_shot_k), db.size());
    log.example_indices = rng.sample_without_replacement(db.size(), k);
    std::vector<QAPair> examples;
    for (auto i : log.example_indices) examples.push_back(db.entries()[i]);

    const auto prompt = render_selfinstruct_prompt(task, examples, config.gen_per_round, db.entries().front());
    // the generator writes many blocks, so observation-style stops do not apply
    CompletionRequest request{prompt, {}};
    request.overrides.stop_sequences = std::vector<std::string>{};
    const auto completion = backend.complete(request);

    const auto pairs = parse_qa_pairs(completion);
    log.parsed = pairs.size();
    for (const auto& pair : pairs) {
        if (db.insert(pair)) {
            ++log.added;
        } else {
            ++log.duplicates;
        }
    }
    log.size_after = db.size();
    return log;
}

TargetUnreached::TargetUnreached(std::size_t final_size, std::size_t target, std::vector<RoundLog> log)
    : Error("database reached " + std::to_string(final_size) + " of " + std::to_string(target) + " entries after " +
            std::to_string(log.size()) + " rounds"),
      final_size_(final_size),
      log_(std::move(log)) {}

std::vector<RoundLog> run_until_target(Database& db, const TaskInfo& task, const AugmentConfig& config,
                                       Backend& backend) {
    config.validate(db.seed_count());
    Rng rng(Rng::derive(config.rng_seed, "selfinstruct"));
    std::vector<RoundLog> log;
    for (int round = 1; db.size() < config.target_size; ++round) {
        if (round > config.max_rounds) throw TargetUnreached(db.size(), config.target_size, std::move(log));
        log.push_back(augment_round(db, task, config, backend, rng, round));
    }
    return log;
}

void save_database(const Database& db, const std::filesystem::path& path) { io::write_records(path, db.entries()); }

Database load_database(const std::filesystem::path& path) {
    return Database::from_entries(io::read_records<QAPair>(path));
}

} // namespace selfplan
