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

#include "kate/embedding_client.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "kate/error.hpp"

namespace kate {

using json = nlohmann::json;

EmbeddingClient::EmbeddingClient(HttpSettings settings) : settings_(std::move(settings)) {
    if (settings_.endpoint.empty()) {
        fail(ErrorKind::Validation, "embedding client needs an endpoint");
    }
}

std::string
EmbeddingClient::request_body(std::span<const std::string> texts) {
    json body = {{"texts", json::array()}};
    for (const auto& t : texts) {
        body["texts"].push_back(t);
    }
    return body.dump();
}

EmbeddingBatch
EmbeddingClient::parse_response(const std::string& body, std::size_t expected_rows) {
    json reply;
    try {
        reply = json::parse(body);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Backend, std::string("embedding reply is not JSON: ") + e.what());
    }
    if (!reply.is_object() || !reply.contains("dim") || !reply["dim"].is_number_unsigned() ||
        !reply.contains("vectors") || !reply["vectors"].is_array()) {
        fail(ErrorKind::Backend, "embedding reply must be {\"dim\":D,\"vectors\":[...]}");
    }
    EmbeddingBatch batch;
    batch.dim = reply["dim"].get<std::size_t>();
    const auto& vectors = reply["vectors"];
    if (batch.dim == 0) {
        fail(ErrorKind::Backend, "embedding reply has dim 0");
    }
    if (vectors.size() != expected_rows) {
        fail(ErrorKind::Backend,
             "embedding reply has " + std::to_string(vectors.size()) + " vectors for " +
                 std::to_string(expected_rows) + " texts");
    }
    batch.values.reserve(expected_rows * batch.dim);
    for (std::size_t r = 0; r < vectors.size(); ++r) {
        const auto& v = vectors[r];
        if (!v.is_array() || v.size() != batch.dim) {
            fail(ErrorKind::Backend, "embedding vector " + std::to_string(r) + " does not have length dim");
        }
        for (const auto& x : v) {
            if (!x.is_number()) {
                fail(ErrorKind::Backend, "embedding vector " + std::to_string(r) + " holds a non-number");
            }
            const auto f = static_cast<float>(x.get<double>());
            if (!std::isfinite(f)) {
                fail(ErrorKind::Backend, "embedding vector " + std::to_string(r) + " holds a non-finite value");
            }
            batch.values.push_back(f);
        }
    }
    return batch;
}

EmbeddingBatch
EmbeddingClient::embed(std::span<const std::string> texts) const {
    return parse_response(post_json(settings_, request_body(texts)), texts.size());
}

}  // namespace kate
