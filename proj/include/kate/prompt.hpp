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
#include <string>
#include <string_view>
#include <vector>

#include "kate/selector.hpp"
#include "kate/token_counter.hpp"

namespace kate {

enum class TaskKind {
    Sentiment,
    Table2Text,
    Qa,
};

std::string_view
to_string(TaskKind kind) noexcept;

/// "sentiment", "table2text" or "qa".
TaskKind
parse_task_kind(std::string_view name);

/// How one example is laid out:
///     source_prefix + source + field_separator + target_prefix + target
/// with examples joined by example_separator, and the test item rendered as
///     source_prefix + source + field_separator + rtrim(target_prefix)
///
/// JSON keys: source_prefix, target_prefix, example_separator, task_kind and
/// the optional field_separator (default "\n") and strip_closing_tags
/// (default false; applies totto_preprocess to every source).
struct PromptTemplate {
    std::string source_prefix;
    std::string target_prefix;
    std::string example_separator = "\n";
    std::string field_separator = "\n";
    TaskKind task_kind = TaskKind::Qa;
    bool strip_closing_tags = false;
};

PromptTemplate
parse_template(std::string_view json_text);

PromptTemplate
load_template(const std::filesystem::path& path);

/// Built-in template for a task, identical to the file shipped under
/// data/templates/.
PromptTemplate
default_template(TaskKind kind);

/// The assembled prompt plus what went into it. The structured fields let
/// offline backends answer without parsing text.
struct PromptContext {
    std::string text;
    std::vector<std::string> included;
    std::vector<std::string> included_targets;
    std::string test_id;
    std::size_t truncated_count = 0;
};

std::string
render_example(const ExampleRecord& record, const PromptTemplate& tmpl);

std::string
render_query(std::string_view test_source, const PromptTemplate& tmpl);

/// Joins the selected examples in the given order, then the test source.
/// While the prompt exceeds `budget` tokens, drops examples from the end of
/// the list. Throws Unpromptable if the test source alone does not fit.
PromptContext
render(const SelectionResult& selected,
       std::string_view test_source,
       const PromptTemplate& tmpl,
       std::size_t budget,
       const TokenCounter& counter,
       std::string_view test_id = {});

/// Removes every closing tag of the form </name>; all other text is kept
/// byte for byte. Idempotent.
std::string
totto_preprocess(std::string_view table_linearization);

}  // namespace kate
