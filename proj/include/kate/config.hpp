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
#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kate/http.hpp"
#include "kate/lm_client.hpp"
#include "kate/prompt.hpp"
#include "kate/retriever.hpp"
#include "kate/similarity.hpp"

namespace kate {

enum class Method { Kate, Random, Knn };

std::string_view
to_string(Method method) noexcept;

Method
parse_method(std::string_view name);

enum class ScoreKind { Em, Accuracy, Bleu };

std::string_view
to_string(ScoreKind kind) noexcept;

ScoreKind
parse_score_kind(std::string_view name);

/// Task, k and score for a named dataset: sst2 (sentiment, 3, accuracy),
/// totto (table2text, 2, bleu), nq and wq (qa, 64, em), triviaqa (qa, 10, em).
struct Preset {
    TaskKind task;
    std::size_t k;
    ScoreKind score;
};

Preset
preset_for(std::string_view name);

/// Defaults when neither a preset nor the config says otherwise.
std::size_t
default_k(TaskKind task) noexcept;

ScoreKind
default_score(TaskKind task) noexcept;

struct SweepSpec {
    std::vector<std::size_t> k_values;
    std::vector<std::size_t> pool_sizes;
    std::vector<OrderMode> order_modes;
    /// Methods run at every point; empty means the config's method.
    std::vector<Method> methods;

    bool
    empty() const {
        return k_values.empty() && pool_sizes.empty() && order_modes.empty();
    }
};

/// A fully resolved experiment. Paths are as written in the config,
/// resolved against the config file's directory when relative.
struct ExperimentConfig {
    std::filesystem::path train_records;
    std::filesystem::path eval_records;
    std::filesystem::path train_embeddings;
    std::filesystem::path eval_embeddings;

    std::string preset;
    TaskKind task = TaskKind::Qa;
    Method method = Method::Kate;
    SimilarityMetric metric = SimilarityMetric::NegEuclidean;
    std::size_t k = 64;
    OrderMode order;
    std::size_t trials = 1;
    std::uint64_t master_seed = 0;

    std::filesystem::path template_path;
    PromptTemplate prompt_template;
    std::size_t budget = 2048;
    std::string token_counter = "whitespace";

    std::string backend = "mock_nearest_echo";
    HttpSettings http;
    std::size_t context_limit = 0;
    CompletionParams completion;
    std::size_t max_in_flight = 4;
    std::size_t workers = 1;

    ScoreKind score = ScoreKind::Em;

    /// Retrieval pool drawn from the training set; 0 means all of it.
    std::size_t pool_size = 0;
    std::uint64_t pool_seed = 0;

    SweepSpec sweep;

    std::size_t study_eval_size = 100;
    std::size_t study_k = 10;

    /// Throws Validation on k == 0, trials == 0, budget == 0 and other
    /// out-of-range values.
    void
    validate() const;

    /// Trials actually run: at least kDefaultRandomTrials for the random
    /// method, exactly one for kate and knn.
    std::size_t
    effective_trials() const;
};

/// Builds a config from defaults, then `file`, then `overrides` (same
/// schema, applied as a JSON merge patch). Relative paths resolve against
/// `base_dir`.
ExperimentConfig
config_from_json(const nlohmann::json& file,
                 const std::filesystem::path& base_dir = {},
                 const nlohmann::json& overrides = nlohmann::json::object());

ExperimentConfig
load_config(const std::filesystem::path& path, const nlohmann::json& overrides = nlohmann::json::object());

/// Resolved settings echoed into reports. Leaves out secrets and anything
/// that varies between otherwise identical runs.
nlohmann::json
config_to_json(const ExperimentConfig& config);

}  // namespace kate
