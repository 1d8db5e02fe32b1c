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

#include "kate/prompt.hpp"

#include <gtest/gtest.h>

#include <random>

#include "kate/error.hpp"
#include "synthetic.hpp"

namespace kate {
namespace {

const std::filesystem::path kFixtures = KATE_FIXTURE_DIR;
const std::filesystem::path kData = KATE_DATA_DIR;

SelectionResult
selection(std::vector<ExampleRecord> chosen) {
    return {std::move(chosen), "kate"};
}

PromptTemplate
qa_template() {
    PromptTemplate t;
    t.source_prefix = "Q: ";
    t.target_prefix = "A: ";
    return t;
}

TEST(Render, ZeroExamplesIsJustTheQuery) {
    const WhitespaceCounter wc;
    const auto ctx = render(selection({}), "test", qa_template(), 100, wc, "t1");
    EXPECT_EQ(ctx.text, "Q: test\nA:");
    EXPECT_TRUE(ctx.included.empty());
    EXPECT_EQ(ctx.truncated_count, 0u);
    EXPECT_EQ(ctx.test_id, "t1");
}

TEST(Render, TwoExamplesFigureOneShape) {
    const WhitespaceCounter wc;
    const auto ctx =
        render(selection({{"A", "a", "ta", {}}, {"B", "b", "tb", {}}}), "test", qa_template(), 100, wc);
    EXPECT_EQ(ctx.text, "Q: a\nA: ta\nQ: b\nA: tb\nQ: test\nA:");
    EXPECT_EQ(ctx.included, (std::vector<std::string>{"A", "B"}));
    EXPECT_EQ(ctx.included_targets, (std::vector<std::string>{"ta", "tb"}));
}

TEST(Render, BudgetDropsFromTheEnd) {
    const WhitespaceCounter wc;
    // Each example costs 4 whitespace tokens, the query 3.
    const auto sel = selection({{"A", "a", "ta", {}}, {"B", "b", "tb", {}}, {"C", "c", "tc", {}}});
    const auto full = render(sel, "test", qa_template(), 15, wc);
    EXPECT_EQ(full.included.size(), 3u);
    EXPECT_EQ(wc.count(full.text), 15u);

    const auto cut = render(sel, "test", qa_template(), 14, wc);
    EXPECT_EQ(cut.included, (std::vector<std::string>{"A", "B"}));
    EXPECT_EQ(cut.truncated_count, 1u);
    EXPECT_LE(wc.count(cut.text), 14u);

    const auto bare = render(sel, "test", qa_template(), 3, wc);
    EXPECT_TRUE(bare.included.empty());
    EXPECT_EQ(bare.truncated_count, 3u);
}

TEST(Render, QueryAloneOverBudgetIsUnpromptable) {
    const WhitespaceCounter wc;
    try {
        render(selection({}), "a b c d e", qa_template(), 5, wc, "long-one");
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Unpromptable);
        EXPECT_NE(std::string(e.what()).find("long-one"), std::string::npos);
    }
}

TEST(Render, PropertiesOverRandomSelections) {
    const WhitespaceCounter wc;
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<ExampleRecord> chosen;
        const std::size_t n = gen() % 8;
        for (std::size_t i = 0; i < n; ++i) {
            std::string src;
            for (std::size_t w = 0, words = 1 + gen() % 6; w < words; ++w) {
                src += "w" + std::to_string(gen() % 100) + " ";
            }
            chosen.push_back({"id" + std::to_string(i), src, "t" + std::to_string(i), {}});
        }
        const std::size_t budget = 5 + gen() % 40;
        const auto ctx = render(selection(chosen), "the test item", qa_template(), budget, wc);
        EXPECT_LE(wc.count(ctx.text), budget);
        ASSERT_LE(ctx.included.size(), chosen.size());
        for (std::size_t i = 0; i < ctx.included.size(); ++i) {
            EXPECT_EQ(ctx.included[i], chosen[i].id);
        }
        EXPECT_EQ(ctx.included.size() + ctx.truncated_count, chosen.size());
        EXPECT_TRUE(ctx.text.ends_with(render_query("the test item", qa_template())));
        EXPECT_EQ(ctx.text, render(selection(chosen), "the test item", qa_template(), budget, wc).text);
    }
}

TEST(Render, InjectiveInOrder) {
    const WhitespaceCounter wc;
    const ExampleRecord a{"A", "a", "ta", {}};
    const ExampleRecord b{"B", "b", "tb", {}};
    EXPECT_NE(render(selection({a, b}), "x", qa_template(), 100, wc).text,
              render(selection({b, a}), "x", qa_template(), 100, wc).text);
    EXPECT_NE(render(selection({a}), "x", qa_template(), 100, wc).text,
              render(selection({a}), "y", qa_template(), 100, wc).text);
}

TEST(Golden, QaPrompt) {
    const auto train = load_records(kFixtures / "qa_train.jsonl");
    const WhitespaceCounter wc;
    const auto ctx = render(selection({train[0], train[1]}), "which desert is the largest hot desert?",
                            load_template(kData / "templates" / "qa.json"), 2048, wc);
    EXPECT_EQ(ctx.text, testing::read_file(kFixtures / "golden" / "qa_two_examples.txt"));
}

TEST(Golden, SentimentPrompt) {
    const auto train = load_records(kFixtures / "sentiment_train.jsonl");
    const WhitespaceCounter wc;
    const auto ctx = render(selection({train[0], train[1]}), train[4].source,
                            load_template(kData / "templates" / "sentiment.json"), 2048, wc);
    EXPECT_EQ(ctx.text, testing::read_file(kFixtures / "golden" / "sentiment_two_examples.txt"));
}

TEST(Golden, TablePromptStripsClosingTags) {
    const auto train = load_records(kFixtures / "table_train.jsonl");
    const WhitespaceCounter wc;
    const auto ctx = render(selection({train[0]}), train[4].source,
                            load_template(kData / "templates" / "table2text.json"), 2048, wc);
    EXPECT_EQ(ctx.text, testing::read_file(kFixtures / "golden" / "table_one_example.txt"));
}

TEST(Templates, ShippedFilesMatchDefaults) {
    for (auto kind : {TaskKind::Qa, TaskKind::Sentiment, TaskKind::Table2Text}) {
        const auto file = load_template(kData / "templates" / (std::string(to_string(kind)) + ".json"));
        const auto def = default_template(kind);
        EXPECT_EQ(file.source_prefix, def.source_prefix);
        EXPECT_EQ(file.target_prefix, def.target_prefix);
        EXPECT_EQ(file.example_separator, def.example_separator);
        EXPECT_EQ(file.field_separator, def.field_separator);
        EXPECT_EQ(file.task_kind, def.task_kind);
        EXPECT_EQ(file.strip_closing_tags, def.strip_closing_tags);
    }
}

TEST(Templates, ParseErrors) {
    EXPECT_THROW(parse_template("{"), Error);
    EXPECT_THROW(parse_template(R"({"target_prefix":"A:","task_kind":"qa"})"), Error);
    EXPECT_THROW(parse_template(R"({"source_prefix":"","target_prefix":"A:","task_kind":"poetry"})"), Error);
    EXPECT_THROW(parse_template(R"({"source_prefix":"","target_prefix":"A:","task_kind":"qa","example_separator":""})"),
                 Error);
    const auto t = parse_template(R"({"source_prefix":"In: ","target_prefix":"Out: ","task_kind":"qa",
                                     "example_separator":"\n\n"})");
    EXPECT_EQ(t.example_separator, "\n\n");
    EXPECT_EQ(t.field_separator, "\n");
}

TEST(Totto, RemovesClosingTags) {
    EXPECT_EQ(totto_preprocess("<cell> 32 </cell>"), "<cell> 32 ");
    EXPECT_EQ(totto_preprocess("<table><cell>a</cell></table>"), "<table><cell>a");
    EXPECT_EQ(totto_preprocess("no tags here, 3 < 4 > 2"), "no tags here, 3 < 4 > 2");
    EXPECT_EQ(totto_preprocess("</ x> and </>"), "</ x> and </>");
    EXPECT_EQ(totto_preprocess("<</a>/b>"), "");
}

TEST(Totto, IdempotentAndNeverLonger) {
    std::mt19937_64 gen(3);
    const std::string alphabet = "<>/ab c";
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        for (std::size_t n = gen() % 30; n > 0; --n) {
            s.push_back(alphabet[gen() % alphabet.size()]);
        }
        const std::string once = totto_preprocess(s);
        EXPECT_EQ(totto_preprocess(once), once) << s;
        EXPECT_LE(once.size(), s.size());
    }
}

}  // namespace
}  // namespace kate
