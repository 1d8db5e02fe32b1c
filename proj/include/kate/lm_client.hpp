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
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kate/error.hpp"
#include "kate/http.hpp"
#include "kate/prompt.hpp"
#include "kate/token_counter.hpp"

namespace kate {

struct CompletionParams {
    double temperature = 0.0;
    std::string stop_sequence = "\n";
    std::size_t max_tokens = 32;
    std::string model_name;

    /// Throws Validation unless temperature >= 0, the stop sequence is
    /// non-empty and max_tokens >= 1.
    void
    validate() const;
};

/// Default completion length per task: sentiment 4, qa 32, table2text 128.
std::size_t
default_max_tokens(TaskKind kind) noexcept;

/// `text` up to (not including) the first occurrence of `stop`.
std::string
strip_at_stop(std::string_view text, std::string_view stop);

/// Maps a prompt to raw completion text. Implementations are shareable
/// across threads.
class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;

    /// Raw text before stop stripping. Throws Error on failure.
    virtual std::string
    generate(const PromptContext& prompt, const CompletionParams& params) const = 0;

    virtual std::string
    name() const = 0;
};

/// OpenAI-compatible completions endpoint. Request body
/// {"model","prompt","temperature","max_tokens","stop":[...]}, reply text
/// taken from choices[0].text.
class HttpBackend final : public CompletionBackend {
public:
    /// With a counter and a positive context_limit, prompts whose token count
    /// plus max_tokens exceeds the limit are rejected without a request.
    explicit HttpBackend(HttpSettings settings,
                         std::size_t context_limit = 0,
                         std::shared_ptr<const TokenCounter> counter = nullptr);

    std::string
    generate(const PromptContext& prompt, const CompletionParams& params) const override;

    std::string
    name() const override {
        return "http:" + settings_.endpoint;
    }

    static std::string
    request_body(const std::string& prompt, const CompletionParams& params);

    static std::string
    parse_response(const std::string& body);

private:
    HttpSettings settings_;
    std::size_t context_limit_;
    std::shared_ptr<const TokenCounter> counter_;
};

/// Answers with the target of the first in-context example (empty when the
/// prompt has none).
class MockNearestEcho final : public CompletionBackend {
public:
    std::string
    generate(const PromptContext& prompt, const CompletionParams& params) const override;

    std::string
    name() const override {
        return "mock_nearest_echo";
    }
};

/// Exact prompt text lookup. Unknown prompts fail with Error(Backend).
class MockTable final : public CompletionBackend {
public:
    explicit MockTable(std::map<std::string, std::string> table) : table_(std::move(table)) {
    }

    /// JSON object {"prompt": "completion", ...}.
    static MockTable
    from_file(const std::filesystem::path& path);

    std::string
    generate(const PromptContext& prompt, const CompletionParams& params) const override;

    std::string
    name() const override {
        return "mock_table";
    }

private:
    std::map<std::string, std::string> table_;
};

/// Synthetic cluster oracle. The cluster of a record is capture group 1 of
/// `label_pattern` applied to its id. Answers the test item's cluster name
/// if any in-context example shares it, otherwise `wrong_answer`.
class MockClusterAware final : public CompletionBackend {
public:
    static constexpr std::string_view kDefaultPattern = "^([^-]+)-";
    static constexpr std::string_view kDefaultWrongAnswer = "unknown";

    explicit MockClusterAware(std::string label_pattern = std::string(kDefaultPattern),
                              std::string wrong_answer = std::string(kDefaultWrongAnswer));

    std::string
    generate(const PromptContext& prompt, const CompletionParams& params) const override;

    std::string
    name() const override {
        return "mock_cluster_aware:" + pattern_text_;
    }

    std::optional<std::string>
    label_of(std::string_view id) const;

private:
    std::string pattern_text_;
    std::regex pattern_;
    std::string wrong_answer_;
};

/// Ignores the prompt and always answers `text`.
class MockConstant final : public CompletionBackend {
public:
    explicit MockConstant(std::string text) : text_(std::move(text)) {
    }

    std::string
    generate(const PromptContext&, const CompletionParams&) const override {
        return text_;
    }

    std::string
    name() const override {
        return "mock_constant";
    }

private:
    std::string text_;
};

/// Backend from a spec string: "http" (uses `http`), "mock_nearest_echo",
/// "mock_table:PATH", "mock_cluster_aware[:REGEX]" or "mock_constant:TEXT".
std::shared_ptr<const CompletionBackend>
make_backend(std::string_view spec,
             const HttpSettings& http = {},
             std::size_t context_limit = 0,
             std::shared_ptr<const TokenCounter> counter = nullptr);

/// Generation followed by stop stripping.
std::string
complete(const CompletionBackend& backend, const PromptContext& prompt, const CompletionParams& params);

using CompletionOutcome = std::variant<std::string, Error>;

/// complete() over every prompt with at most max_in_flight calls running at
/// once. Results line up with `prompts`; a failing item yields its Error
/// without affecting the others.
std::vector<CompletionOutcome>
batch_complete(const CompletionBackend& backend,
               std::span<const PromptContext> prompts,
               const CompletionParams& params,
               std::size_t max_in_flight);

}  // namespace kate
