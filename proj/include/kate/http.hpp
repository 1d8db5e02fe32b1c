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

#include <chrono>
#include <cstddef>
#include <string>

namespace kate {

/// Connection settings shared by the completion and embedding clients.
struct HttpSettings {
    /// Full URL including the path, e.g. "http://127.0.0.1:8000/v1/completions".
    std::string endpoint;
    /// Name of the environment variable holding a bearer token; empty or
    /// unset means no Authorization header.
    std::string api_key_env;
    double timeout_seconds = 60.0;
    /// Retries after the first attempt, on transport errors and 429/5xx only.
    std::size_t max_retries = 3;
    /// Wait before retry i is backoff_base * 2^i.
    std::chrono::milliseconds backoff_base{1000};
    /// Log request and response bodies to stderr, with the token redacted.
    bool debug = false;
};

std::chrono::milliseconds
backoff_delay(std::chrono::milliseconds base, std::size_t retry);

/// POSTs a JSON body and returns the response body of a 2xx reply. Throws
/// Error(Backend) once retries are exhausted or on any other status, with
/// the status and body in the message.
std::string
post_json(const HttpSettings& settings, const std::string& body);

}  // namespace kate
