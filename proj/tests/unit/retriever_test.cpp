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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "kate/error.hpp"
#include "synthetic.hpp"

namespace kate {
namespace {

using testing::oracle_top_k;
using testing::random_matrix;
using testing::random_store;

constexpr SimilarityMetric kMetrics[] = {SimilarityMetric::NegEuclidean, SimilarityMetric::Cosine};

std::multiset<std::pair<std::size_t, double>>
as_multiset(const NeighborList& l) {
    std::multiset<std::pair<std::size_t, double>> s;
    for (const auto& n : l.entries) {
        s.emplace(n.row, n.score);
    }
    return s;
}

TEST(TopK, MatchesFullSortOracle) {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const std::size_t rows = 1 + seed * 83;
        const std::size_t dim = seed % 3 == 0 ? 8 : (seed % 3 == 1 ? 64 : 33);
        const auto store = random_store(rows, dim, seed);
        const auto q = random_matrix(1, dim, 1000 + seed);
        for (auto m : kMetrics) {
            for (std::size_t k : {1u, 10u, 64u}) {
                EXPECT_EQ(top_k(q, store, k, m).rows(), oracle_top_k(q, store, k, m))
                    << "seed " << seed << " k " << k;
            }
        }
    }
}

TEST(TopK, ThousandBySixtyFourBothMetrics) {
    const auto store = random_store(1000, 64, 77);
    const auto q = random_matrix(1, 64, 78);
    for (auto m : kMetrics) {
        EXPECT_EQ(top_k(q, store, 64, m).rows(), oracle_top_k(q, store, 64, m));
    }
}

TEST(TopK, TiesGoToSmallerRow) {
    const auto store = EmbeddingStore::from_values({1, 0, 0, 1, 1, 0, 0, 1, 1, 0}, 2, {"a", "b", "c", "d", "e"});
    const std::vector<float> q{1, 0};
    const auto l = top_k(q, store, 3, SimilarityMetric::NegEuclidean);
    EXPECT_EQ(l.rows(), (std::vector<std::size_t>{0, 2, 4}));
    EXPECT_EQ(top_k(q, store, 5, SimilarityMetric::Cosine).rows(), (std::vector<std::size_t>{0, 2, 4, 1, 3}));
}

TEST(TopK, KLargerThanStoreReturnsAll) {
    const auto store = random_store(5, 4, 1);
    const auto q = random_matrix(1, 4, 2);
    EXPECT_EQ(top_k(q, store, 100, SimilarityMetric::NegEuclidean).size(), 5u);
}

TEST(TopK, SelfMatchComesFirst) {
    const auto store = random_store(200, 16, 4);
    for (std::size_t r : {0u, 17u, 199u}) {
        const auto l = top_k(store.row(r), store, 3, SimilarityMetric::NegEuclidean);
        EXPECT_EQ(l.entries.front().row, r);
        EXPECT_EQ(l.entries.front().score, 0.0);
    }
}

TEST(TopK, Errors) {
    const auto store = random_store(5, 4, 1);
    const auto q = random_matrix(1, 4, 2);
    EXPECT_THROW(top_k(q, store, 0, SimilarityMetric::NegEuclidean), Error);
    EXPECT_THROW(top_k(random_matrix(1, 3, 2), store, 1, SimilarityMetric::NegEuclidean), Error);
    EXPECT_THROW(top_k(q, EmbeddingStore{}, 1, SimilarityMetric::NegEuclidean), Error);
    EXPECT_THROW(top_k(std::vector<float>(4, 0.0f), store, 1, SimilarityMetric::Cosine), Error);
}

TEST(TopK, BatchEqualsSingleQueries) {
    const auto store = random_store(700, 40, 8);
    const auto queries = random_store(37, 40, 9, "q");
    for (auto m : kMetrics) {
        for (std::size_t workers : {1u, 3u}) {
            const auto batch = top_k_batch(queries, store, 10, m, workers);
            ASSERT_EQ(batch.size(), queries.rows());
            for (std::size_t i = 0; i < queries.rows(); ++i) {
                EXPECT_EQ(batch[i].entries, top_k(queries.row(i), store, 10, m).entries);
            }
        }
    }
}

TEST(FarthestK, LeastSimilarFirst) {
    const auto store = random_store(300, 8, 10);
    const auto q = random_matrix(1, 8, 11);
    const auto far = farthest_k(q, store, 10, SimilarityMetric::NegEuclidean);
    auto all = oracle_top_k(q, store, store.rows(), SimilarityMetric::NegEuclidean);
    ASSERT_EQ(far.size(), 10u);
    for (std::size_t i = 0; i + 1 < far.size(); ++i) {
        EXPECT_LE(far.entries[i].score, far.entries[i + 1].score);
    }
    std::set<std::size_t> expected(all.end() - 10, all.end());
    const auto rows = far.rows();
    EXPECT_EQ(std::set<std::size_t>(rows.begin(), rows.end()), expected);
}

TEST(TopKByKey, TiesResolveByKeyIndependentOfRowOrder) {
    const auto store = EmbeddingStore::from_values({1, 0, 1, 0, 1, 0, 0, 1}, 2, {"z", "m", "a", "q"});
    const std::vector<float> q{1, 0};
    const auto l = top_k_by_key(q, store, 2, SimilarityMetric::NegEuclidean, store.ids());
    EXPECT_EQ(l.rows(), (std::vector<std::size_t>{2, 1}));
}

TEST(OrderMode, ParseAndPrint) {
    EXPECT_EQ(parse_order_mode("default"), OrderMode::default_order());
    EXPECT_EQ(parse_order_mode("reverse"), OrderMode::reverse());
    EXPECT_EQ(parse_order_mode("shuffle:17"), OrderMode::shuffled(17));
    EXPECT_EQ(to_string(OrderMode::shuffled(17)), "shuffle:17");
    EXPECT_THROW(parse_order_mode("shuffle:"), Error);
    EXPECT_THROW(parse_order_mode("sideways"), Error);
}

TEST(OrderMode, ReverseAndShuffleProperties) {
    const auto store = random_store(100, 8, 12);
    const auto q = random_matrix(1, 8, 13);
    const auto l = top_k(q, store, 10, SimilarityMetric::NegEuclidean);

    const auto rev = apply_order(l, OrderMode::reverse());
    EXPECT_EQ(rev.entries.front(), l.entries.back());
    EXPECT_EQ(rev.entries.back(), l.entries.front());
    for (std::size_t i = 0; i + 1 < rev.size(); ++i) {
        EXPECT_LE(rev.entries[i].score, rev.entries[i + 1].score);
    }

    const auto s1 = apply_order(l, OrderMode::shuffled(5));
    EXPECT_EQ(s1.entries, apply_order(l, OrderMode::shuffled(5)).entries);
    EXPECT_EQ(as_multiset(s1), as_multiset(l));
    EXPECT_EQ(apply_order(l, OrderMode::default_order()).entries, l.entries);
}

}  // namespace
}  // namespace kate
