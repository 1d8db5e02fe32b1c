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

#include "kate/retriever.hpp"

#include <algorithm>
#include <charconv>
#include <queue>

#include "kate/error.hpp"
#include "kate/parallel.hpp"
#include "kate/rng.hpp"

namespace kate {

namespace {

// Rows per scan block: about 256 KiB of f32 so a block stays in L2 while a
// group of queries is scored against it.
std::size_t
block_rows(std::size_t dim) {
    return std::max<std::size_t>(16, (256 * 1024) / (dim * sizeof(float)));
}

constexpr std::size_t kQueryBlock = 16;

// Bounded selection of the k best entries under a strict ordering `before`
// (before(a, b) means a ranks ahead of b).
template <typename Before>
class BoundedSelector {
public:
    BoundedSelector(std::size_t k, Before before) : k_(k), heap_(before), before_(before) {
    }

    void
    offer(const Neighbor& n) {
        if (heap_.size() < k_) {
            heap_.push(n);
        } else if (before_(n, heap_.top())) {
            heap_.pop();
            heap_.push(n);
        }
    }

    std::vector<Neighbor>
    take_sorted() {
        std::vector<Neighbor> out;
        out.reserve(heap_.size());
        while (!heap_.empty()) {
            out.push_back(heap_.top());
            heap_.pop();
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

private:
    std::size_t k_;
    // Top of the heap is the entry ranked last among those kept.
    std::priority_queue<Neighbor, std::vector<Neighbor>, Before> heap_;
    Before before_;
};

struct HigherFirst {
    bool
    operator()(const Neighbor& a, const Neighbor& b) const noexcept {
        return a.score > b.score || (a.score == b.score && a.row < b.row);
    }
};

struct LowerFirst {
    bool
    operator()(const Neighbor& a, const Neighbor& b) const noexcept {
        return a.score < b.score || (a.score == b.score && a.row < b.row);
    }
};

struct HigherFirstByKey {
    std::span<const std::string> keys;

    bool
    operator()(const Neighbor& a, const Neighbor& b) const noexcept {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        if (keys[a.row] != keys[b.row]) {
            return keys[a.row] < keys[b.row];
        }
        return a.row < b.row;
    }
};

void
check_query(std::span<const float> query, const EmbeddingStore& store, std::size_t k) {
    if (store.empty()) {
        fail(ErrorKind::Domain, "retrieval over an empty store");
    }
    if (query.size() != store.dim()) {
        fail(ErrorKind::Domain,
             "query dim " + std::to_string(query.size()) + " does not match store dim " + std::to_string(store.dim()));
    }
    if (k == 0) {
        fail(ErrorKind::Domain, "k must be at least 1");
    }
}

template <typename Before>
std::vector<Neighbor>
scan(std::span<const float> query, const EmbeddingStore& store, std::size_t k, SimilarityMetric metric, Before before) {
    check_query(query, store, k);
    const PreparedQuery prepared(query);
    const std::size_t dim = store.dim();
    const std::size_t step = block_rows(dim);
    const bool cosine = metric == SimilarityMetric::Cosine;
    std::vector<double> scores(std::min(step, store.rows()));
    BoundedSelector<Before> selector(std::min(k, store.rows()), before);
    for (std::size_t begin = 0; begin < store.rows(); begin += step) {
        const std::size_t n = std::min(step, store.rows() - begin);
        score_rows(metric,
                   prepared,
                   store.values().subspan(begin * dim, n * dim),
                   cosine ? store.squared_norms().subspan(begin, n) : std::span<const double>{},
                   std::span<double>(scores.data(), n));
        for (std::size_t i = 0; i < n; ++i) {
            selector.offer(Neighbor{begin + i, scores[i]});
        }
    }
    return selector.take_sorted();
}

}  // namespace

OrderMode
parse_order_mode(std::string_view text) {
    if (text == "default") {
        return OrderMode::default_order();
    }
    if (text == "reverse") {
        return OrderMode::reverse();
    }
    constexpr std::string_view prefix = "shuffle:";
    if (text.substr(0, prefix.size()) == prefix) {
        const auto digits = text.substr(prefix.size());
        std::uint64_t seed = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), seed);
        if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty()) {
            return OrderMode::shuffled(seed);
        }
    }
    fail(ErrorKind::Validation,
         "unknown order mode '" + std::string(text) + "' (expected default, reverse or shuffle:SEED)");
}

std::string
to_string(const OrderMode& mode) {
    switch (mode.kind) {
        case OrderMode::Kind::Default:
            return "default";
        case OrderMode::Kind::Reverse:
            return "reverse";
        case OrderMode::Kind::Shuffled:
            return "shuffle:" + std::to_string(mode.seed);
    }
    return "default";
}

std::vector<std::size_t>
NeighborList::rows() const {
    std::vector<std::size_t> out;
    out.reserve(entries.size());
    for (const auto& e : entries) {
        out.push_back(e.row);
    }
    return out;
}

NeighborList
top_k(std::span<const float> query, const EmbeddingStore& store, std::size_t k, SimilarityMetric metric) {
    return NeighborList{scan(query, store, k, metric, HigherFirst{}), metric, OrderMode::default_order()};
}

NeighborList
farthest_k(std::span<const float> query, const EmbeddingStore& store, std::size_t k, SimilarityMetric metric) {
    return NeighborList{scan(query, store, k, metric, LowerFirst{}), metric, OrderMode::default_order()};
}

NeighborList
top_k_by_key(std::span<const float> query,
             const EmbeddingStore& store,
             std::size_t k,
             SimilarityMetric metric,
             std::span<const std::string> tie_keys) {
    if (tie_keys.size() != store.rows()) {
        fail(ErrorKind::Domain, "top_k_by_key: one tie key per store row is required");
    }
    return NeighborList{scan(query, store, k, metric, HigherFirstByKey{tie_keys}), metric, OrderMode::default_order()};
}

std::vector<NeighborList>
top_k_batch(const EmbeddingStore& queries,
            const EmbeddingStore& store,
            std::size_t k,
            SimilarityMetric metric,
            std::size_t workers) {
    std::vector<NeighborList> results(queries.rows());
    if (queries.rows() == 0) {
        return results;
    }
    check_query(queries.row(0), store, k);

    const std::size_t dim = store.dim();
    const std::size_t step = block_rows(dim);
    const std::size_t keep = std::min(k, store.rows());
    const bool cosine = metric == SimilarityMetric::Cosine;
    const std::size_t query_blocks = (queries.rows() + kQueryBlock - 1) / kQueryBlock;

    parallel_for(query_blocks, workers, [&](std::size_t qb) {
        std::vector<double> scores(std::min(step, store.rows()));
        const std::size_t q_begin = qb * kQueryBlock;
        const std::size_t q_end = std::min(queries.rows(), q_begin + kQueryBlock);
        std::vector<PreparedQuery> prepared;
        std::vector<BoundedSelector<HigherFirst>> selectors;
        prepared.reserve(q_end - q_begin);
        selectors.reserve(q_end - q_begin);
        for (std::size_t q = q_begin; q < q_end; ++q) {
            prepared.emplace_back(queries.row(q));
            selectors.emplace_back(keep, HigherFirst{});
        }
        for (std::size_t begin = 0; begin < store.rows(); begin += step) {
            const std::size_t n = std::min(step, store.rows() - begin);
            const auto block = store.values().subspan(begin * dim, n * dim);
            const auto norms = cosine ? store.squared_norms().subspan(begin, n) : std::span<const double>{};
            for (std::size_t j = 0; j < prepared.size(); ++j) {
                score_rows(metric, prepared[j], block, norms, std::span<double>(scores.data(), n));
                for (std::size_t i = 0; i < n; ++i) {
                    selectors[j].offer(Neighbor{begin + i, scores[i]});
                }
            }
        }
        for (std::size_t j = 0; j < prepared.size(); ++j) {
            results[q_begin + j] =
                NeighborList{selectors[j].take_sorted(), metric, OrderMode::default_order()};
        }
    });
    return results;
}

NeighborList
apply_order(const NeighborList& list, const OrderMode& mode) {
    NeighborList out = list;
    out.order = mode;
    switch (mode.kind) {
        case OrderMode::Kind::Default:
            break;
        case OrderMode::Kind::Reverse:
            std::reverse(out.entries.begin(), out.entries.end());
            break;
        case OrderMode::Kind::Shuffled: {
            Rng rng(mode.seed);
            auto& e = out.entries;
            for (std::size_t i = 0; i + 1 < e.size(); ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(e.size() - i));
                std::swap(e[i], e[j]);
            }
            break;
        }
    }
    return out;
}

}  // namespace kate
