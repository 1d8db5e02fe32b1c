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
#include <span>
#include <string>
#include <vector>

#include "kate/dataset_store.hpp"
#include "kate/retriever.hpp"
#include "kate/similarity.hpp"

namespace kate {

/// In-context examples in prompt order plus the method that chose them:
/// "kate", "random(SEED)" or "knn".
struct SelectionResult {
    std::vector<ExampleRecord> chosen;
    std::string method_tag;

    std::vector<std::string>
    ids() const;
};

/// Number of random-baseline trials when a config does not say otherwise.
inline constexpr std::size_t kDefaultRandomTrials = 5;

/// Seed for one (trial, eval item) draw of the random baseline; every test
/// item is resampled independently in every trial.
std::uint64_t
random_trial_seed(std::uint64_t master_seed, std::size_t trial, std::size_t item);

/// k distinct records drawn uniformly without replacement, in draw order.
/// k >= pool size returns the whole pool shuffled.
SelectionResult
random_select(std::span<const ExampleRecord> pool, std::size_t k, std::uint64_t seed);

/// Records for the rows of `neighbors`, in list order.
SelectionResult
select_from_neighbors(const NeighborList& neighbors, std::span<const ExampleRecord> records);

/// Nearest-neighbor selection followed by the requested arrangement.
SelectionResult
kate_select(std::span<const float> query,
            const EmbeddingStore& store,
            std::span<const ExampleRecord> records,
            std::size_t k,
            SimilarityMetric metric,
            const OrderMode& order = OrderMode::default_order());

/// Target of the single nearest record.
std::string
knn_predict_generation(std::span<const float> query,
                       const EmbeddingStore& store,
                       std::span<const ExampleRecord> records,
                       SimilarityMetric metric = SimilarityMetric::NegEuclidean);

/// Majority label among the k nearest records. A tie between labels goes to
/// the label of the most similar neighbor carrying one of them; neighbors
/// with equal similarity are ranked by record id.
std::string
knn_predict_vote(std::span<const float> query,
                 const EmbeddingStore& store,
                 std::span<const ExampleRecord> records,
                 std::size_t k,
                 SimilarityMetric metric = SimilarityMetric::NegEuclidean);

/// The voting rule alone, over targets listed most similar first.
std::string
majority_vote(std::span<const std::string> ranked_targets);

}  // namespace kate
