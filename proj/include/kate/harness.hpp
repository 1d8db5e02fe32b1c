// Copyright 2026-present the kate project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kate/config.hpp"
#include "kate/dataset_store.hpp"
#include "kate/lm_client.hpp"
#include "kate/metrics.hpp"
#include "kate/token_counter.hpp"

namespace kate {

/// Records and vectors an experiment runs against. eval_store may be empty
/// for the random method.
struct ExperimentData {
    std::vector<ExampleRecord> train;
    EmbeddingStore train_store;
    std::vector<ExampleRecord> eval;
    EmbeddingStore eval_store;
};

/// Loads and cross-validates every file the config names.
ExperimentData
load_data(const ExperimentConfig& config);

/// The first `size` rows of a seeded permutation of the training set, kept
/// in their original order. Sizes drawn with one seed are nested.
ExperimentData
with_pool(const ExperimentData& data, std::size_t size, std::uint64_t seed);

/// Token counter and completion backend shared by every item of a run.
struct RunResources {
    std::shared_ptr<const TokenCounter> counter;
    std::shared_ptr<const CompletionBackend> backend;
};

RunResources
make_resources(const ExperimentConfig& config);

struct ItemRow {
    std::size_t trial = 0;
    std::string id;
    std::vector<std::string> selected;
    std::vector<std::string> golds;
    /// Hex SHA-256 of the prompt text; empty for the knn method.
    std::string prompt_hash;
    std::string completion;
    double score = 0.0;
    std::size_t truncated = 0;
};

struct TimingStats {
    double total_seconds = 0.0;
    double retrieval_seconds = 0.0;
    double prompt_seconds = 0.0;
    double completion_seconds = 0.0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::string token_counter_name;
    std::string backend_name;
    /// One outcome per trial.
    std::vector<EvalOutcome> trials;
    /// Trial metric: mean item score for em and accuracy, corpus BLEU for bleu.
    TrialSummary summary;
    std::vector<ItemRow> rows;
    TimingStats timing;
};

/// Receives each row as soon as it and every row before it are final.
using RowSink = std::function<void(const ItemRow&)>;

/// Select, render, complete and score every eval item. The first failing
/// item aborts the run with an Error naming it; rows before it have already
/// reached `sink`.
ExperimentReport
run(const ExperimentConfig& config,
    const ExperimentData& data,
    const RunResources& resources,
    const RowSink& sink = {});

ExperimentReport
run(const ExperimentConfig& config);

/// Trial score for one outcome's rows: mean for em/accuracy, corpus BLEU
/// over the rows' completions and golds for bleu.
double
trial_metric(ScoreKind score, std::span<const ItemRow> rows);

/// Per-item score in [0, 1]. For bleu this is smoothed sentence BLEU / 100,
/// kept only as a per-item diagnostic.
double
item_score(ScoreKind score, std::string_view completion, std::span<const std::string> golds);

struct SweepPoint {
    std::string axis;
    std::string value;
    Method method;
    ExperimentReport report;
};

/// One run per (method, sweep value). Pool sizes share config.pool_seed.
std::vector<SweepPoint>
run_sweep(const ExperimentConfig& config,
          const ExperimentData& data,
          const RunResources& resources,
          const std::function<void(const SweepPoint&)>& on_point = {});

struct StudyReport {
    ExperimentConfig config;
    std::vector<std::string> eval_ids;
    EvalOutcome closest;
    EvalOutcome farthest;
    std::vector<ItemRow> closest_rows;
    std::vector<ItemRow> farthest_rows;

    double
    gap() const {
        return closest.aggregate - farthest.aggregate;
    }
};

/// Prompts built from the study_k nearest and, separately, the study_k
/// farthest training rows for a seeded subset of study_eval_size eval items.
StudyReport
closest_farthest_study(const ExperimentConfig& config, const ExperimentData& data, const RunResources& resources);

/// Hex SHA-256.
std::string
sha256_hex(std::string_view text);

}  // namespace kate
