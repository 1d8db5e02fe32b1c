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

#include "kate/similarity.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "kate/error.hpp"
#include "synthetic.hpp"

namespace kate {
namespace {

TEST(Similarity, NegEuclideanAndCosineValues) {
    const std::vector<float> u{3, 0, 0};
    const std::vector<float> v{0, 4, 0};
    EXPECT_DOUBLE_EQ(neg_euclidean(u, v), -5.0);
    EXPECT_DOUBLE_EQ(neg_euclidean(u, u), 0.0);
    EXPECT_DOUBLE_EQ(cosine(u, v), 0.0);
    EXPECT_DOUBLE_EQ(cosine(u, std::vector<float>{6, 0, 0}), 1.0);
    EXPECT_DOUBLE_EQ(cosine(u, std::vector<float>{-1, 0, 0}), -1.0);
    EXPECT_DOUBLE_EQ(dot(u, std::vector<float>{2, 5, 7}), 6.0);
    EXPECT_DOUBLE_EQ(squared_norm(v), 16.0);
}

TEST(Similarity, ErrorsOnZeroVectorAndMismatch) {
    const std::vector<float> z{0, 0};
    const std::vector<float> a{1, 2};
    EXPECT_THROW(cosine(z, a), Error);
    EXPECT_THROW(neg_euclidean(a, std::vector<float>{1, 2, 3}), Error);
    EXPECT_THROW(parse_similarity_metric("l1"), Error);
    EXPECT_EQ(parse_similarity_metric("cosine"), SimilarityMetric::Cosine);
    EXPECT_EQ(to_string(SimilarityMetric::NegEuclidean), "neg_euclidean");
}

TEST(Similarity, HigherMeansCloser) {
    const std::vector<float> q{1, 1};
    const std::vector<float> near{1.1f, 0.9f};
    const std::vector<float> far{5, -3};
    for (auto m : {SimilarityMetric::NegEuclidean, SimilarityMetric::Cosine}) {
        EXPECT_GT(similarity(m, q, near), similarity(m, q, far));
    }
}

TEST(Similarity, BatchedScoresAreBitIdenticalToScalar) {
    for (std::size_t dim : {1u, 7u, 16u, 33u, 1024u}) {
        const auto store = testing::random_store(50, dim, dim);
        const auto q = testing::random_matrix(1, dim, 99 + dim);
        for (auto m : {SimilarityMetric::NegEuclidean, SimilarityMetric::Cosine}) {
            std::vector<double> out(store.rows());
            score_rows(m, PreparedQuery(q), store.values(), store.squared_norms(), out);
            for (std::size_t r = 0; r < store.rows(); ++r) {
                EXPECT_EQ(out[r], similarity(m, q, store.row(r))) << "dim " << dim << " row " << r;
            }
        }
    }
}

TEST(Similarity, ZeroRowsScoreMinusInfinityUnderCosine) {
    const auto store = EmbeddingStore::from_values({0, 0, 1, 1}, 2, {"zero", "one"});
    const std::vector<float> q{1, 0};
    std::vector<double> out(2);
    score_rows(SimilarityMetric::Cosine, PreparedQuery(q), store.values(), store.squared_norms(), out);
    EXPECT_EQ(out[0], -std::numeric_limits<double>::infinity());
    EXPECT_NEAR(out[1], std::sqrt(0.5), 1e-12);
}

TEST(Similarity, MatchesLongDoubleReference) {
    const auto m = testing::random_matrix(2, 1024, 5);
    std::span<const float> u(m.data(), 1024);
    std::span<const float> v(m.data() + 1024, 1024);
    long double ss = 0;
    for (std::size_t i = 0; i < 1024; ++i) {
        const long double d = static_cast<long double>(u[i]) - v[i];
        ss += d * d;
    }
    EXPECT_NEAR(neg_euclidean(u, v), -std::sqrt(static_cast<double>(ss)), 1e-10);
}

}  // namespace
}  // namespace kate
