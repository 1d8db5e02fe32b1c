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

#include "kate/lm_client.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "kate/parallel.hpp"

namespace kate {

using json = nlohmann::json;

void
CompletionParams::validate() const {
    if (!(temperature >= 0.0)) {
        fail(ErrorKind::Validation, "temperature must be >= 0");
    }
    if (stop_sequence.empty()) {
        fail(ErrorKind::Validation, "stop sequence must be non-empty");
    }
    if (max_tokens == 0) {
        fail(ErrorKind::Validation, "max_tokens must be >= 1");
    }
}

std::size_t
default_max_tokens(TaskKind kind) noexcept {
    switch (kind) {
        case TaskKind::Sentiment:
            return 4;
        case TaskKind::Table2Text:
            return 128;
        case TaskKind::Qa:
            return 32;
    }
    return 32;
}

std::string
strip_at_stop(std::string_view text, std::string_view stop) {
    if (stop.empty()) {
        return std::string(text);
    }
    return std::string(text.substr(0, text.find(stop)));
}

HttpBackend::HttpBackend(HttpSettings settings, std::size_t context_limit, std::shared_ptr<const TokenCounter> counter)
    : settings_(std::move(settings)), context_limit_(context_limit), counter_(std::move(counter)) {
    if (settings_.endpoint.empty()) {
        fail(ErrorKind::Validation, "http backend needs an endpoint");
    }
}

std::string
HttpBackend::request_body(const std::string& prompt, const CompletionParams& params) {
    json body = {
        {"model", params.model_name},
        {"prompt", prompt},
        {"temperature", params.temperature},
        {"max_tokens", params.max_tokens},
        {"stop", json::array({params.stop_sequence})},
    };
    return body.dump();
}

std::string
HttpBackend::parse_response(const std::string& body) {
    json reply;
    try {
        reply = json::parse(body);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Backend, std::string("completion reply is not JSON: ") + e.what());
    }
    if (!reply.is_object() || !reply.contains("choices") || !reply["choices"].is_array() ||
        reply["choices"].empty() || !reply["choices"][0].is_object() ||
        !reply["choices"][0].contains("text") || !reply["choices"][0]["text"].is_string()) {
        fail(ErrorKind::Backend, "completion reply lacks choices[0].text: " + body.substr(0, 500));
    }
    return reply["choices"][0]["text"].get<std::string>();
}

std::string
HttpBackend::generate(const PromptContext& prompt, const CompletionParams& params) const {
    if (context_limit_ > 0 && counter_) {
        const std::size_t need = counter_->count(prompt.text) + params.max_tokens;
        if (need > context_limit_) {
            fail(ErrorKind::Backend,
                 "prompt for '" + prompt.test_id + "' needs " + std::to_string(need) +
                     " tokens including the completion, over the backend limit of " +
                     std::to_string(context_limit_));
        }
    }
    return parse_response(post_json(settings_, request_body(prompt.text, params)));
}

std::string
MockNearestEcho::generate(const PromptContext& prompt, const CompletionParams&) const {
    return prompt.included_targets.empty() ? std::string() : prompt.included_targets.front();
}

MockTable
MockTable::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::Io, "cannot open completion table " + path.string());
    }
    json obj;
    try {
        obj = json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Validation, path.string() + ": " + e.what());
    }
    if (!obj.is_object()) {
        fail(ErrorKind::Validation, path.string() + ": expected an object of prompt -> completion");
    }
    std::map<std::string, std::string> table;
    for (const auto& [k, v] : obj.items()) {
        if (!v.is_string()) {
            fail(ErrorKind::Validation, path.string() + ": completion for a prompt must be a string");
        }
        table.emplace(k, v.get<std::string>());
    }
    return MockTable(std::move(table));
}

std::string
MockTable::generate(const PromptContext& prompt, const CompletionParams&) const {
    auto it = table_.find(prompt.text);
    if (it == table_.end()) {
        fail(ErrorKind::Backend, "mock_table has no entry for the prompt of '" + prompt.test_id + "'");
    }
    return it->second;
}

MockClusterAware::MockClusterAware(std::string label_pattern, std::string wrong_answer)
    : pattern_text_(std::move(label_pattern)), wrong_answer_(std::move(wrong_answer)) {
    try {
        pattern_ = std::regex(pattern_text_, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
        fail(ErrorKind::Validation, "bad cluster label pattern '" + pattern_text_ + "': " + e.what());
    }
    if (pattern_.mark_count() < 1) {
        fail(ErrorKind::Validation, "cluster label pattern needs a capture group");
    }
}

std::optional<std::string>
MockClusterAware::label_of(std::string_view id) const {
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_search(id.begin(), id.end(), m, pattern_) || !m[1].matched) {
        return std::nullopt;
    }
    return m[1].str();
}

std::string
MockClusterAware::generate(const PromptContext& prompt, const CompletionParams&) const {
    const auto label = label_of(prompt.test_id);
    if (!label) {
        fail(ErrorKind::Backend, "test id '" + prompt.test_id + "' carries no cluster label");
    }
    for (const auto& id : prompt.included) {
        if (label_of(id) == label) {
            return *label;
        }
    }
    return wrong_answer_;
}

std::shared_ptr<const CompletionBackend>
make_backend(std::string_view spec,
             const HttpSettings& http,
             std::size_t context_limit,
             std::shared_ptr<const TokenCounter> counter) {
    const auto colon = spec.find(':');
    const std::string_view kind = spec.substr(0, colon);
    const std::string arg = colon == std::string_view::npos ? std::string() : std::string(spec.substr(colon + 1));
    if (kind == "http") {
        return std::make_shared<HttpBackend>(http, context_limit, std::move(counter));
    }
    if (kind == "mock_nearest_echo") {
        return std::make_shared<MockNearestEcho>();
    }
    if (kind == "mock_table" && !arg.empty()) {
        return std::make_shared<MockTable>(MockTable::from_file(arg));
    }
    if (kind == "mock_cluster_aware") {
        return arg.empty() ? std::make_shared<MockClusterAware>() : std::make_shared<MockClusterAware>(arg);
    }
    if (kind == "mock_constant") {
        return std::make_shared<MockConstant>(arg);
    }
    fail(ErrorKind::Validation, "unknown backend '" + std::string(spec) + "'");
}

std::string
complete(const CompletionBackend& backend, const PromptContext& prompt, const CompletionParams& params) {
    params.validate();
    return strip_at_stop(backend.generate(prompt, params), params.stop_sequence);
}

std::vector<CompletionOutcome>
batch_complete(const CompletionBackend& backend,
               std::span<const PromptContext> prompts,
               const CompletionParams& params,
               std::size_t max_in_flight) {
    if (max_in_flight == 0) {
        fail(ErrorKind::Validation, "max_in_flight must be >= 1");
    }
    std::vector<CompletionOutcome> out(prompts.size());
    parallel_for(prompts.size(), max_in_flight, [&](std::size_t i) {
        try {
            out[i] = complete(backend, prompts[i], params);
        } catch (const Error& e) {
            out[i] = e;
        } catch (const std::exception& e) {
            out[i] = Error(ErrorKind::Backend, e.what());
        }
    });
    return out;
}

}  // namespace kate
