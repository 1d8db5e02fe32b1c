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

#include <cmath>
#include <limits>
#include <string>

#include "kate/error.hpp"

namespace kate {

namespace {

constexpr std::size_t kLanes = 16;

// Lane-wise partial sums reduced in a fixed pairwise tree. Every score in
// the project goes through the two loops below, with the first operand
// widened to double up front (exact), so scalar and batched calls agree
// bit for bit.
double
reduce(const double (&acc)[kLanes]) noexcept {
    double level[kLanes];
    for (std::size_t i = 0; i < kLanes; ++i) {
        level[i] = acc[i];
    }
    for (std::size_t width = kLanes / 2; width > 0; width /= 2) {
        for (std::size_t i = 0; i < width; ++i) {
            level[i] = level[i] + level[i + width];
        }
    }
    return level[0];
}

double
squared_l2_raw(const double* q, const float* r, std::size_t n) noexcept {
    double acc[kLanes] = {};
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        for (std::size_t j = 0; j < kLanes; ++j) {
            const double d = q[i + j] - static_cast<double>(r[i + j]);
            acc[j] += d * d;
        }
    }
    for (std::size_t j = 0; i < n; ++i, ++j) {
        const double d = q[i] - static_cast<double>(r[i]);
        acc[j] += d * d;
    }
    return reduce(acc);
}

double
dot_raw(const double* q, const float* r, std::size_t n) noexcept {
    double acc[kLanes] = {};
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        for (std::size_t j = 0; j < kLanes; ++j) {
            acc[j] += q[i + j] * static_cast<double>(r[i + j]);
        }
    }
    for (std::size_t j = 0; i < n; ++i, ++j) {
        acc[j] += q[i] * static_cast<double>(r[i]);
    }
    return reduce(acc);
}

void
check_dims(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) {
        fail(ErrorKind::Domain,
             "dimension mismatch: " + std::to_string(u.size()) + " vs " + std::to_string(v.size()));
    }
}

}  // namespace

std::string_view
to_string(SimilarityMetric metric) noexcept {
    switch (metric) {
        case SimilarityMetric::NegEuclidean:
            return "neg_euclidean";
        case SimilarityMetric::Cosine:
            return "cosine";
    }
    return "unknown";
}

SimilarityMetric
parse_similarity_metric(std::string_view name) {
    if (name == "neg_euclidean") {
        return SimilarityMetric::NegEuclidean;
    }
    if (name == "cosine") {
        return SimilarityMetric::Cosine;
    }
    fail(ErrorKind::Validation, "unknown similarity metric '" + std::string(name) + "'");
}

PreparedQuery::PreparedQuery(std::span<const float> query)
    : values_(query.begin(), query.end()), squared_norm_(dot_raw(values_.data(), query.data(), query.size())) {
}

double
squared_l2(std::span<const float> u, std::span<const float> v) {
    check_dims(u, v);
    const PreparedQuery q(u);
    return squared_l2_raw(q.data(), v.data(), v.size());
}

double
dot(std::span<const float> u, std::span<const float> v) {
    check_dims(u, v);
    const PreparedQuery q(u);
    return dot_raw(q.data(), v.data(), v.size());
}

double
squared_norm(std::span<const float> u) {
    return PreparedQuery(u).squared_norm();
}

double
cosine_from_parts(double dot_uv, double squared_norm_u, double squared_norm_v) noexcept {
    return dot_uv / (std::sqrt(squared_norm_u) * std::sqrt(squared_norm_v));
}

double
neg_euclidean(std::span<const float> u, std::span<const float> v) {
    return 0.0 - std::sqrt(squared_l2(u, v));
}

double
cosine(std::span<const float> u, std::span<const float> v) {
    check_dims(u, v);
    const PreparedQuery q(u);
    const double nv = squared_norm(v);
    if (q.squared_norm() == 0.0 || nv == 0.0) {
        fail(ErrorKind::Domain, "cosine similarity of a zero vector is undefined");
    }
    return cosine_from_parts(dot_raw(q.data(), v.data(), v.size()), q.squared_norm(), nv);
}

double
similarity(SimilarityMetric metric, std::span<const float> u, std::span<const float> v) {
    return metric == SimilarityMetric::Cosine ? cosine(u, v) : neg_euclidean(u, v);
}

void
score_rows(SimilarityMetric metric,
           const PreparedQuery& query,
           std::span<const float> matrix,
           std::span<const double> row_squared_norms,
           std::span<double> out) {
    const std::size_t dim = query.dim();
    const std::size_t rows = out.size();
    if (dim == 0 || matrix.size() != rows * dim) {
        fail(ErrorKind::Domain, "score_rows: matrix shape does not match query and output");
    }
    const double* q = query.data();
    const float* m = matrix.data();
    if (metric == SimilarityMetric::NegEuclidean) {
        for (std::size_t r = 0; r < rows; ++r) {
            out[r] = 0.0 - std::sqrt(squared_l2_raw(q, m + r * dim, dim));
        }
        return;
    }
    if (row_squared_norms.size() != rows) {
        fail(ErrorKind::Domain, "score_rows: missing row norms for cosine");
    }
    const double qn = query.squared_norm();
    if (qn == 0.0) {
        fail(ErrorKind::Domain, "cosine similarity of a zero query vector is undefined");
    }
    for (std::size_t r = 0; r < rows; ++r) {
        const double rn = row_squared_norms[r];
        out[r] = rn == 0.0 ? -std::numeric_limits<double>::infinity()
                           : cosine_from_parts(dot_raw(q, m + r * dim, dim), qn, rn);
    }
}

void
score_rows(SimilarityMetric metric,
           std::span<const float> query,
           std::span<const float> matrix,
           std::span<const double> row_squared_norms,
           std::span<double> out) {
    score_rows(metric, PreparedQuery(query), matrix, row_squared_norms, out);
}

}  // namespace kate
