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

#include "kate/http.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "kate/error.hpp"

namespace kate {

namespace {

struct Endpoint {
    std::string base;
    std::string path;
};

Endpoint
split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        fail(ErrorKind::Validation, "endpoint '" + url + "' must start with http:// or https://");
    }
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        fail(ErrorKind::Validation, "unsupported endpoint scheme '" + scheme + "'");
    }
    const auto slash = url.find('/', scheme_end + 3);
    if (slash == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, slash), url.substr(slash)};
}

void
debug_log(const std::string& line) {
    static std::mutex mutex;
    std::lock_guard lock(mutex);
    std::cerr << "[kate http] " << line << '\n';
}

bool
is_transient(int status) {
    return status == 429 || status >= 500;
}

std::string
clip(const std::string& body) {
    constexpr std::size_t kMax = 2000;
    return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

}  // namespace

std::chrono::milliseconds
backoff_delay(std::chrono::milliseconds base, std::size_t retry) {
    return base * (std::int64_t{1} << std::min<std::size_t>(retry, 20));
}

std::string
post_json(const HttpSettings& settings, const std::string& body) {
    const Endpoint ep = split_endpoint(settings.endpoint);
    std::string token;
    if (!settings.api_key_env.empty()) {
        if (const char* v = std::getenv(settings.api_key_env.c_str())) {
            token = v;
        }
    }

    httplib::Client client(ep.base);
    const auto sec = static_cast<time_t>(settings.timeout_seconds);
    const auto usec = static_cast<time_t>((settings.timeout_seconds - static_cast<double>(sec)) * 1e6);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    httplib::Headers headers;
    if (!token.empty()) {
        headers.emplace("Authorization", "Bearer " + token);
    }

    std::string last_error;
    for (std::size_t attempt = 0; attempt <= settings.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff_delay(settings.backoff_base, attempt - 1));
        }
        if (settings.debug) {
            debug_log("POST " + settings.endpoint + (token.empty() ? "" : " authorization=Bearer <redacted>") +
                      " attempt=" + std::to_string(attempt + 1) + " body=" + body);
        }
        auto res = client.Post(ep.path, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            if (settings.debug) {
                debug_log(last_error);
            }
            continue;
        }
        if (settings.debug) {
            debug_log("status=" + std::to_string(res->status) + " body=" + res->body);
        }
        if (res->status >= 200 && res->status < 300) {
            return res->body;
        }
        last_error = "HTTP " + std::to_string(res->status) + ": " + clip(res->body);
        if (!is_transient(res->status)) {
            fail(ErrorKind::Backend, settings.endpoint + ": " + last_error);
        }
    }
    fail(ErrorKind::Backend,
         settings.endpoint + ": giving up after " + std::to_string(settings.max_retries + 1) +
             " attempts, last error: " + last_error);
}

}  // namespace kate
