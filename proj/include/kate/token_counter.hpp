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
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kate {

/// Counts prompt tokens for budget enforcement. Reports record name().
class TokenCounter {
public:
    virtual ~TokenCounter() = default;

    virtual std::size_t
    count(std::string_view text) const = 0;

    virtual std::string
    name() const = 0;
};

/// One token per maximal run of non-whitespace bytes.
class WhitespaceCounter final : public TokenCounter {
public:
    std::size_t
    count(std::string_view text) const override;

    std::string
    name() const override {
        return "whitespace";
    }
};

/// Byte-level BPE in the GPT-2 style: text is pre-split into word-like
/// pieces, each piece is mapped byte-by-byte onto printable symbols and
/// merged greedily by merge rank. The merge table is a GPT-2 merges.txt
/// ("a b" per line, optional "#version" header).
class BpeCounter final : public TokenCounter {
public:
    static BpeCounter
    from_file(const std::filesystem::path& merges_path);

    static BpeCounter
    from_merges(std::vector<std::pair<std::string, std::string>> merges, std::string label = "inline");

    std::size_t
    count(std::string_view text) const override;

    std::string
    name() const override {
        return "bpe:" + label_;
    }

    /// BPE symbols of one pre-tokenized piece, exposed for tests.
    std::vector<std::string>
    encode_piece(std::string_view piece) const;

    /// GPT-2-style pre-tokenization (ASCII classes; bytes >= 0x80 count as
    /// letters).
    static std::vector<std::string_view>
    pre_tokenize(std::string_view text);

private:
    std::map<std::pair<std::string, std::string>, std::size_t> ranks_;
    std::string label_;
};

/// "whitespace" or "bpe:PATH".
std::unique_ptr<TokenCounter>
make_token_counter(std::string_view spec);

inline std::size_t
count_tokens(std::string_view text, const TokenCounter& counter) {
    return counter.count(text);
}

}  // namespace kate
