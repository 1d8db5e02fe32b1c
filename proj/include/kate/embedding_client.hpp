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
#include <string>
#include <vector>

#include "kate/http.hpp"

namespace kate {

/// Vectors returned by an embedding endpoint, row-major.
struct EmbeddingBatch {
    std::size_t dim = 0;
    std::vector<float> values;

    std::size_t
    rows() const {
        return dim == 0 ? 0 : values.size() / dim;
    }
};

/// Client for an encoder endpoint that accepts {"texts":[...]} and replies
/// {"dim":D,"vectors":[[...],...]}.
class EmbeddingClient {
public:
    explicit EmbeddingClient(HttpSettings settings);

    /// One vector per text. Throws Backend on transport or shape errors.
    EmbeddingBatch
    embed(std::span<const std::string> texts) const;

    static std::string
    request_body(std::span<const std::string> texts);

    /// Validates that the reply holds `expected_rows` finite vectors of
    /// length dim.
    static EmbeddingBatch
    parse_response(const std::string& body, std::size_t expected_rows);

private:
    HttpSettings settings_;
};

}  // namespace kate
