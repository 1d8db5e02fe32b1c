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
#include <span>
#include <string_view>
#include <vector>

namespace kate {

/// Higher score always means more similar.
enum class SimilarityMetric {
    NegEuclidean,
    Cosine,
};

std::string_view
to_string(SimilarityMetric metric) noexcept;

/// Accepts "neg_euclidean" and "cosine".
SimilarityMetric
parse_similarity_metric(std::string_view name);

/// A query widened to double once, with its squared norm, for repeated
/// scoring against many rows.
class PreparedQuery {
public:
    explicit PreparedQuery(std::span<const float> query);

    std::size_t
    dim() const noexcept {
        return values_.size();
    }

    const double*
    data() const noexcept {
        return values_.data();
    }

    double
    squared_norm() const noexcept {
        return squared_norm_;
    }

private:
    std::vector<double> values_;
    double squared_norm_;
};

// Kernels. f32 inputs, double accumulation with a fixed lane layout, so the
// scalar and batched entry points produce bit-identical scores.

double
squared_l2(std::span<const float> u, std::span<const float> v);

double
dot(std::span<const float> u, std::span<const float> v);

double
squared_norm(std::span<const float> u);

double
cosine_from_parts(double dot_uv, double squared_norm_u, double squared_norm_v) noexcept;

/// -||u - v||_2. Throws on dimension mismatch.
double
neg_euclidean(std::span<const float> u, std::span<const float> v);

/// (u . v) / (||u|| ||v||). Throws on dimension mismatch or a zero vector.
double
cosine(std::span<const float> u, std::span<const float> v);

double
similarity(SimilarityMetric metric, std::span<const float> u, std::span<const float> v);

/// Scores one query against every row of a row-major matrix. row_squared_norms
/// is only read for cosine and must hold squared_norm of each row. Rows with a
/// zero norm score -inf under cosine.
void
score_rows(SimilarityMetric metric,
           const PreparedQuery& query,
           std::span<const float> matrix,
           std::span<const double> row_squared_norms,
           std::span<double> out);

void
score_rows(SimilarityMetric metric,
           std::span<const float> query,
           std::span<const float> matrix,
           std::span<const double> row_squared_norms,
           std::span<double> out);

}  // namespace kate
