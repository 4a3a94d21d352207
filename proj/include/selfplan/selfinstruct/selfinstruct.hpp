// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "selfplan/backend/backend.hpp"
#include "selfplan/core/error.hpp"
#include "selfplan/core/rng.hpp"
#include "selfplan/core/types.hpp"

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace selfplan {

/// Question key used for duplicate detection.
std::string question_key(const QAPair& pair);

/// Task database: seeds first, then accepted generations, no two entries
/// sharing a normalized question.
class Database {
public:
    /// Seeds become the first entries with provenance `seed`. Throws
    /// InvalidRecord on an empty, malformed or self-duplicating seed list.
    explicit Database(std::vector<QAPair> seeds);

    /// Reloads a persisted database; seeds are the entries marked `seed`.
    static Database from_entries(std::vector<QAPair> entries);

    /// Appends `pair` as a generated entry. False when it is malformed or its
    /// normalized question is already present.
    bool insert(QAPair pair);

    bool contains(const QAPair& pair) const { return index_.count(question_key(pair)) > 0; }
    const std::vector<QAPair>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    std::size_t seed_count() const noexcept { return seed_count_; }

private:
    Database() = default;
    std::vector<QAPair> entries_;
    std::set<std::string> index_;
    std::size_t seed_count_ = 0;
};

struct AugmentConfig {
    int few_shot_k = 3;
    int gen_per_round = 10;
    std::size_t target_size = 0;
    int max_rounds = 100;
    std::uint64_t rng_seed = 0;

    void validate(std::size_t seed_count) const;
};

/// Generation prompt for one round. `examples` fill the few-shot slot and
/// `one_example` shows the expected layout.
std::string render_selfinstruct_prompt(const TaskInfo& task, const std::vector<QAPair>& examples, int gen_count,
                                       const QAPair& one_example);

/// Scans `text` for Question/Answer blocks (with optional Options, Caption
/// and Context lines). Blocks lacking an answer, carrying unparseable
/// options, or failing QAPair validation are dropped.
std::vector<QAPair> parse_qa_pairs(std::string_view text);

struct RoundLog {
    int round = 0;
    std::vector<std::size_t> example_indices;
    std::size_t parsed = 0;
    std::size_t added = 0;
    std::size_t duplicates = 0;
    std::size_t size_after = 0;
};

/// One few-shot generation round. Samples `few_shot_k` entries without
/// replacement, asks `backend` for `gen_per_round` new pairs, and inserts
/// the well-formed, novel ones. BackendError propagates.
RoundLog augment_round(Database& db, const TaskInfo& task, const AugmentConfig& config, Backend& backend, Rng& rng,
                       int round_number = 1);

class TargetUnreached : public Error {
public:
    TargetUnreached(std::size_t final_size, std::size_t target, std::vector<RoundLog> log);
    std::size_t final_size() const noexcept { return final_size_; }
    const std::vector<RoundLog>& log() const noexcept { return log_; }

private:
    std::size_t final_size_;
    std::vector<RoundLog> log_;
};

/// Rounds until |D| reaches the target. Randomness is drawn from
/// `config.rng_seed` only. Throws TargetUnreached when max_rounds runs out;
/// `db` keeps whatever was added.
std::vector<RoundLog> run_until_target(Database& db, const TaskInfo& task, const AugmentConfig& config,
                                       Backend& backend);

void save_database(const Database& db, const std::filesystem::path& path);
Database load_database(const std::filesystem::path& path);

} // namespace selfplan
