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

#include "kate/token_counter.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "kate/error.hpp"
#include "synthetic.hpp"

namespace kate {
namespace {

const std::filesystem::path kFixtures = KATE_FIXTURE_DIR;

TEST(Whitespace, Counts) {
    const WhitespaceCounter wc;
    EXPECT_EQ(count_tokens("", wc), 0u);
    EXPECT_EQ(count_tokens("a b c", wc), 3u);
    EXPECT_EQ(count_tokens("  a\n\tb  ", wc), 2u);
    EXPECT_EQ(wc.name(), "whitespace");
}

TEST(Bpe, PreTokenizeLikeGpt2) {
    const auto pieces = BpeCounter::pre_tokenize("Hello world's 42!  ok");
    const std::vector<std::string_view> expected{"Hello", " world", "'s", " 42", "!", " ", " ok"};
    EXPECT_EQ(pieces, expected);
}

TEST(Bpe, MergesByRank) {
    const auto bpe = BpeCounter::from_file(kFixtures / "tiny_merges.txt");
    EXPECT_EQ(bpe.name(), "bpe:tiny_merges.txt");
    EXPECT_EQ(bpe.encode_piece(" the"), (std::vector<std::string>{"\xc4\xa0the"}));
    EXPECT_EQ(bpe.encode_piece("the"), (std::vector<std::string>{"t", "he"}));
    EXPECT_EQ(bpe.count(""), 0u);
    EXPECT_EQ(bpe.count(" the"), 1u);
    EXPECT_EQ(bpe.count("in the"), 2u);
    EXPECT_EQ(bpe.count("xyz"), 3u);
}

TEST(Bpe, NonEmptyTextCountsAtLeastOneAndAtMostBytes) {
    const auto bpe = BpeCounter::from_file(kFixtures / "tiny_merges.txt");
    std::mt19937_64 gen(1);
    for (int i = 0; i < 500; ++i) {
        std::string s;
        for (std::size_t n = 1 + gen() % 40; n > 0; --n) {
            s.push_back(static_cast<char>(gen() % 256));
        }
        const auto c = bpe.count(s);
        EXPECT_GE(c, 1u);
        EXPECT_LE(c, s.size());
        EXPECT_EQ(c, bpe.count(s));
    }
}

TEST(Bpe, MalformedMergesFile) {
    testing::TempDir dir;
    std::ofstream(dir.path() / "bad.txt") << "#version: 0.2\na b c\n";
    EXPECT_THROW(BpeCounter::from_file(dir.path() / "bad.txt"), Error);
    EXPECT_THROW(BpeCounter::from_file(dir.path() / "missing.txt"), Error);
}

TEST(Factory, BuildsCounters) {
    EXPECT_EQ(make_token_counter("whitespace")->name(), "whitespace");
    EXPECT_EQ(make_token_counter("bpe:" + (kFixtures / "tiny_merges.txt").string())->name(), "bpe:tiny_merges.txt");
    EXPECT_THROW(make_token_counter("sentencepiece"), Error);
}

}  // namespace
}  // namespace kate
