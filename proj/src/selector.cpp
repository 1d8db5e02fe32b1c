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

#include "kate/selector.hpp"

#include <algorithm>
#include <unordered_map>

#include "kate/error.hpp"
#include "kate/rng.hpp"

namespace kate {

std::vector<std::string>
SelectionResult::ids() const {
    std::vector<std::string> out;
    out.reserve(chosen.size());
    for (const auto& r : chosen) {
        out.push_back(r.id);
    }
    return out;
}

std::uint64_t
random_trial_seed(std::uint64_t master_seed, std::size_t trial, std::size_t item) {
    return derive_seed(master_seed, trial, item);
}

SelectionResult
random_select(std::span<const ExampleRecord> pool, std::size_t k, std::uint64_t seed) {
    if (pool.empty()) {
        fail(ErrorKind::Domain, "random selection from an empty pool");
    }
    if (k == 0) {
        fail(ErrorKind::Domain, "k must be at least 1");
    }
    const std::size_t take = std::min(k, pool.size());
    SelectionResult out;
    out.method_tag = "random(" + std::to_string(seed) + ")";
    out.chosen.reserve(take);
    for (std::size_t i : sample_prefix(pool.size(), take, seed)) {
        out.chosen.push_back(pool[i]);
    }
    return out;
}

SelectionResult
select_from_neighbors(const NeighborList& neighbors, std::span<const ExampleRecord> records) {
    SelectionResult out;
    out.method_tag = "kate";
    out.chosen.reserve(neighbors.size());
    for (const auto& n : neighbors.entries) {
        if (n.row >= records.size()) {
            fail(ErrorKind::Validation, "neighbor row " + std::to_string(n.row) + " has no record");
        }
        out.chosen.push_back(records[n.row]);
    }
    return out;
}

SelectionResult
kate_select(std::span<const float> query,
            const EmbeddingStore& store,
            std::span<const ExampleRecord> records,
            std::size_t k,
            SimilarityMetric metric,
            const OrderMode& order) {
    check_alignment(store, records);
    return select_from_neighbors(apply_order(top_k(query, store, k, metric), order), records);
}

std::string
knn_predict_generation(std::span<const float> query,
                       const EmbeddingStore& store,
                       std::span<const ExampleRecord> records,
                       SimilarityMetric metric) {
    check_alignment(store, records);
    const auto nearest = top_k(query, store, 1, metric);
    return records[nearest.entries.front().row].target;
}

std::string
majority_vote(std::span<const std::string> ranked_targets) {
    if (ranked_targets.empty()) {
        fail(ErrorKind::Domain, "majority vote over no neighbors");
    }
    std::unordered_map<std::string_view, std::size_t> counts;
    std::size_t best = 0;
    for (const auto& t : ranked_targets) {
        best = std::max(best, ++counts[t]);
    }
    // First in similarity order among the labels sharing the top count.
    for (const auto& t : ranked_targets) {
        if (counts[t] == best) {
            return t;
        }
    }
    return ranked_targets.front();
}

std::string
knn_predict_vote(std::span<const float> query,
                 const EmbeddingStore& store,
                 std::span<const ExampleRecord> records,
                 std::size_t k,
                 SimilarityMetric metric) {
    check_alignment(store, records);
    const auto neighbors = top_k_by_key(query, store, k, metric, store.ids());
    std::vector<std::string> targets;
    targets.reserve(neighbors.size());
    for (const auto& n : neighbors.entries) {
        targets.push_back(records[n.row].target);
    }
    return majority_vote(targets);
}

}  // namespace kate
