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
#include <string_view>
#include <vector>

#include "kate/dataset_store.hpp"
#include "kate/similarity.hpp"

namespace kate {

struct Neighbor {
    std::size_t row = 0;
    double score = 0.0;

    bool
    operator==(const Neighbor&) const = default;
};

/// How neighbors are arranged in the prompt. Default is most similar first.
struct OrderMode {
    enum class Kind { Default, Reverse, Shuffled };

    Kind kind = Kind::Default;
    std::uint64_t seed = 0;

    static OrderMode
    default_order() {
        return {};
    }

    static OrderMode
    reverse() {
        return {Kind::Reverse, 0};
    }

    static OrderMode
    shuffled(std::uint64_t seed) {
        return {Kind::Shuffled, seed};
    }

    bool
    operator==(const OrderMode&) const = default;
};

/// "default", "reverse" or "shuffle:SEED".
OrderMode
parse_order_mode(std::string_view text);

std::string
to_string(const OrderMode& mode);

struct NeighborList {
    std::vector<Neighbor> entries;
    SimilarityMetric metric = SimilarityMetric::NegEuclidean;
    OrderMode order;

    std::size_t
    size() const noexcept {
        return entries.size();
    }

    std::vector<std::size_t>
    rows() const;
};

/// The k highest-scoring rows, most similar first. Equal scores go to the
/// smaller row index. k > rows returns every row.
NeighborList
top_k(std::span<const float> query, const EmbeddingStore& store, std::size_t k, SimilarityMetric metric);

/// The k lowest-scoring rows, least similar first, smaller row index first
/// on ties.
NeighborList
farthest_k(std::span<const float> query, const EmbeddingStore& store, std::size_t k, SimilarityMetric metric);

/// top_k with ties resolved by a caller-supplied key per row (smaller key
/// first) instead of the row index.
NeighborList
top_k_by_key(std::span<const float> query,
             const EmbeddingStore& store,
             std::size_t k,
             SimilarityMetric metric,
             std::span<const std::string> tie_keys);

/// top_k for many queries at once: the store is scanned in cache-sized row
/// blocks shared across a block of queries, fanned out over `workers`
/// threads. Result i is identical to top_k(queries.row(i), ...).
std::vector<NeighborList>
top_k_batch(const EmbeddingStore& queries,
            const EmbeddingStore& store,
            std::size_t k,
            SimilarityMetric metric,
            std::size_t workers = 1);

/// Rearranges a default-ordered list. The entry multiset never changes.
NeighborList
apply_order(const NeighborList& list, const OrderMode& mode);

}  // namespace kate
