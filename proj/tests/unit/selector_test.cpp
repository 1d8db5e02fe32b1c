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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "kate/error.hpp"
#include "synthetic.hpp"

namespace kate {
namespace {

std::vector<ExampleRecord>
pool_of(std::size_t n, const std::string& prefix = "p") {
    std::vector<ExampleRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({prefix + std::to_string(i), "source " + std::to_string(i), "t" + std::to_string(i), {}});
    }
    return out;
}

std::vector<ExampleRecord>
records_for(const EmbeddingStore& store, const std::vector<std::string>& targets) {
    std::vector<ExampleRecord> out;
    for (std::size_t i = 0; i < store.rows(); ++i) {
        out.push_back({store.ids()[i], "s" + std::to_string(i), targets[i % targets.size()], {}});
    }
    return out;
}

TEST(RandomSelect, PoolOfExactlyKTakesEverything) {
    const auto pool = pool_of(5);
    const auto sel = random_select(pool, 5, 3);
    auto ids = sel.ids();
    std::sort(ids.begin(), ids.end());
    EXPECT_EQ(ids, (std::vector<std::string>{"p0", "p1", "p2", "p3", "p4"}));
    EXPECT_EQ(sel.method_tag, "random(3)");
}

TEST(RandomSelect, DeterministicDistinctAndSized) {
    const auto pool = pool_of(50);
    const auto a = random_select(pool, 8, 11);
    EXPECT_EQ(a.ids(), random_select(pool, 8, 11).ids());
    EXPECT_NE(a.ids(), random_select(pool, 8, 12).ids());
    const auto ids = a.ids();
    EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), 8u);
    EXPECT_EQ(random_select(pool, 80, 1).chosen.size(), 50u);
}

TEST(RandomSelect, Errors) {
    EXPECT_THROW(random_select({}, 3, 1), Error);
    EXPECT_THROW(random_select(pool_of(3), 0, 1), Error);
}

TEST(RandomSelect, UniformOverTwentyThousandDraws) {
    const auto pool = pool_of(8);
    std::map<std::string, int> freq;
    const int draws = 20000;
    for (int s = 0; s < draws; ++s) {
        ++freq[random_select(pool, 1, random_trial_seed(7, 0, static_cast<std::size_t>(s))).chosen[0].id];
    }
    ASSERT_EQ(freq.size(), 8u);
    const double expected = draws / 8.0;
    const double sd = std::sqrt(draws * (1.0 / 8) * (7.0 / 8));
    double chi2 = 0;
    for (const auto& [id, n] : freq) {
        EXPECT_NEAR(n, expected, 3 * sd) << id;
        chi2 += (n - expected) * (n - expected) / expected;
    }
    // 7 degrees of freedom, 99.9th percentile.
    EXPECT_LT(chi2, 24.32);
}

TEST(RandomSelect, DependsOnlyOnIdsKAndSeed) {
    auto pool = pool_of(30);
    const auto before = random_select(pool, 4, 9).ids();
    for (auto& r : pool) {
        r.target = "changed";
    }
    EXPECT_EQ(random_select(pool, 4, 9).ids(), before);
}

TEST(KnnGeneration, SelfMatchAndTwoRows) {
    const auto store = testing::random_store(40, 8, 21);
    const auto recs = records_for(store, {"x", "y", "z", "w", "v"});
    for (std::size_t r : {0u, 13u, 39u}) {
        EXPECT_EQ(knn_predict_generation(store.row(r), store, recs), recs[r].target);
    }
    const auto two = EmbeddingStore::from_values({0, 0, 10, 10}, 2, {"r0", "r1"});
    const auto two_recs = records_for(two, {"zero", "one"});
    EXPECT_EQ(knn_predict_generation(std::vector<float>{1, 1}, two, two_recs), "zero");
}

TEST(KnnGeneration, EqualsTopOneThenLookup) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto store = testing::random_store(120, 16, seed);
        const auto recs = records_for(store, {"a", "b", "c", "d", "e", "f", "g"});
        const auto q = testing::random_matrix(1, 16, seed + 500);
        for (auto m : {SimilarityMetric::NegEuclidean, SimilarityMetric::Cosine}) {
            EXPECT_EQ(knn_predict_generation(q, store, recs, m),
                      recs[top_k(q, store, 1, m).entries[0].row].target);
        }
    }
}

TEST(KnnGeneration, EmptyStoreFails) {
    EXPECT_THROW(knn_predict_generation(std::vector<float>{1}, EmbeddingStore{}, {}), Error);
}

TEST(MajorityVote, ClearMajorityAndTieRule) {
    const std::vector<std::string> a{"pos", "pos", "neg"};
    EXPECT_EQ(majority_vote(a), "pos");
    const std::vector<std::string> b{"pos", "neg"};
    EXPECT_EQ(majority_vote(b), "pos");
    const std::vector<std::string> c{"neg", "pos", "pos", "neg"};
    EXPECT_EQ(majority_vote(c), "neg");
    EXPECT_THROW(majority_vote(std::vector<std::string>{}), Error);
}

TEST(KnnVote, TieGoesToMoreSimilar) {
    const auto store = EmbeddingStore::from_values({0, 0, 3, 0}, 2, {"near", "far"});
    std::vector<ExampleRecord> recs{{"near", "s", "pos", {}}, {"far", "s", "neg", {}}};
    EXPECT_EQ(knn_predict_vote(std::vector<float>{1, 0}, store, recs, 2), "pos");
}

// Brute force: score all rows, sort by (score desc, id asc), count labels of
// the first k, and take the first label in that order with the top count.
std::string
vote_oracle(std::span<const float> q, const EmbeddingStore& store, const std::vector<ExampleRecord>& recs, std::size_t k) {
    std::vector<std::size_t> rows(store.rows());
    std::iota(rows.begin(), rows.end(), 0);
    std::vector<double> score(store.rows());
    for (std::size_t r = 0; r < store.rows(); ++r) {
        score[r] = similarity(SimilarityMetric::NegEuclidean, q, store.row(r));
    }
    std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
        return score[a] != score[b] ? score[a] > score[b] : recs[a].id < recs[b].id;
    });
    rows.resize(std::min(k, rows.size()));
    std::map<std::string, int> counts;
    int best = 0;
    for (auto r : rows) {
        best = std::max(best, ++counts[recs[r].target]);
    }
    for (auto r : rows) {
        if (counts[recs[r].target] == best) {
            return recs[r].target;
        }
    }
    return {};
}

TEST(KnnVote, MatchesExhaustiveOracle) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        // Few distinct coordinates so exact score ties occur.
        std::vector<float> values;
        std::mt19937_64 gen(seed);
        for (int i = 0; i < 60 * 3; ++i) {
            values.push_back(static_cast<float>(gen() % 3));
        }
        std::vector<std::string> ids;
        for (int i = 0; i < 60; ++i) {
            ids.push_back("id" + std::to_string((i * 37) % 60));
        }
        const auto store = EmbeddingStore::from_values(values, 3, ids);
        const auto recs = records_for(store, {"pos", "neg", "neu"});
        const std::vector<float> q{1, 1, 0};
        for (std::size_t k = 1; k <= 9; ++k) {
            EXPECT_EQ(knn_predict_vote(q, store, recs, k), vote_oracle(q, store, recs, k)) << seed << " " << k;
        }
    }
}

TEST(KnnVote, InvariantUnderRowPermutation) {
    std::vector<float> values{1, 0, 1, 0, 0, 1, 2, 0};
    const auto store = EmbeddingStore::from_values(values, 2, {"b", "a", "c", "d"});
    std::vector<ExampleRecord> recs{{"b", "s", "neg", {}}, {"a", "s", "pos", {}}, {"c", "s", "neg", {}},
                                    {"d", "s", "pos", {}}};
    const auto flipped = EmbeddingStore::from_values({1, 0, 1, 0, 2, 0, 0, 1}, 2, {"a", "b", "d", "c"});
    std::vector<ExampleRecord> flipped_recs{recs[1], recs[0], recs[3], recs[2]};
    const std::vector<float> q{1, 0};
    for (std::size_t k = 1; k <= 4; ++k) {
        EXPECT_EQ(knn_predict_vote(q, store, recs, k), knn_predict_vote(q, flipped, flipped_recs, k));
    }
    EXPECT_EQ(knn_predict_vote(q, store, recs, 1), "pos");
}

TEST(KnnVote, KOneEqualsGenerationWithoutTies) {
    const auto store = testing::random_store(80, 8, 3);
    const auto recs = records_for(store, {"pos", "neg"});
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto q = testing::random_matrix(1, 8, 100 + s);
        EXPECT_EQ(knn_predict_vote(q, store, recs, 1), knn_predict_generation(q, store, recs));
    }
}

TEST(KateSelect, NearestFirstThenOrdered) {
    const auto store = testing::random_store(60, 8, 30);
    const auto recs = records_for(store, {"a"});
    const auto q = testing::random_matrix(1, 8, 31);
    const auto sel = kate_select(q, store, recs, 5, SimilarityMetric::NegEuclidean, OrderMode::default_order());
    const auto rows = top_k(q, store, 5, SimilarityMetric::NegEuclidean).rows();
    ASSERT_EQ(sel.chosen.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(sel.chosen[i].id, recs[rows[i]].id);
    }
    const auto rev = kate_select(q, store, recs, 5, SimilarityMetric::NegEuclidean, OrderMode::reverse());
    EXPECT_EQ(rev.chosen.front().id, sel.chosen.back().id);
    EXPECT_EQ(sel.method_tag, "kate");
}

}  // namespace
}  // namespace kate
