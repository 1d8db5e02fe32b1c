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

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "kate/error.hpp"

namespace kate {

using json = nlohmann::json;

namespace {

bool
is_tag_name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
           c == ':' || c == '.';
}

// Length of a "</name>" suffix of `s`, or 0.
std::size_t
closing_tag_suffix(const std::string& s) {
    if (s.size() < 4 || s.back() != '>') {
        return 0;
    }
    std::size_t i = s.size() - 1;
    std::size_t name_len = 0;
    while (i > 0 && is_tag_name_char(s[i - 1])) {
        --i;
        ++name_len;
    }
    if (name_len == 0 || i < 2 || s[i - 1] != '/' || s[i - 2] != '<') {
        return 0;
    }
    return name_len + 3;
}

std::string_view
rtrim(std::string_view s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    return s;
}

std::string
prepared_source(std::string_view source, const PromptTemplate& tmpl) {
    return tmpl.strip_closing_tags ? totto_preprocess(source) : std::string(source);
}

}  // namespace

std::string_view
to_string(TaskKind kind) noexcept {
    switch (kind) {
        case TaskKind::Sentiment:
            return "sentiment";
        case TaskKind::Table2Text:
            return "table2text";
        case TaskKind::Qa:
            return "qa";
    }
    return "qa";
}

TaskKind
parse_task_kind(std::string_view name) {
    if (name == "sentiment") {
        return TaskKind::Sentiment;
    }
    if (name == "table2text") {
        return TaskKind::Table2Text;
    }
    if (name == "qa") {
        return TaskKind::Qa;
    }
    fail(ErrorKind::Validation, "unknown task kind '" + std::string(name) + "'");
}

PromptTemplate
parse_template(std::string_view json_text) {
    json obj;
    try {
        obj = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Validation, std::string("malformed template JSON: ") + e.what());
    }
    if (!obj.is_object()) {
        fail(ErrorKind::Validation, "template must be a JSON object");
    }
    auto str = [&](const char* key, bool required, std::string fallback) {
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) {
                fail(ErrorKind::Validation, std::string("template is missing \"") + key + "\"");
            }
            return fallback;
        }
        if (!it->is_string()) {
            fail(ErrorKind::Validation, std::string("template key \"") + key + "\" must be a string");
        }
        return it->get<std::string>();
    };
    PromptTemplate t;
    t.source_prefix = str("source_prefix", true, "");
    t.target_prefix = str("target_prefix", true, "");
    t.example_separator = str("example_separator", false, "\n");
    t.field_separator = str("field_separator", false, "\n");
    t.task_kind = parse_task_kind(str("task_kind", true, ""));
    if (auto it = obj.find("strip_closing_tags"); it != obj.end()) {
        if (!it->is_boolean()) {
            fail(ErrorKind::Validation, "template key \"strip_closing_tags\" must be a boolean");
        }
        t.strip_closing_tags = it->get<bool>();
    }
    if (t.example_separator.empty()) {
        fail(ErrorKind::Validation, "template example_separator must be non-empty");
    }
    return t;
}

PromptTemplate
load_template(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::Io, "cannot open template " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_template(buf.str());
}

PromptTemplate
default_template(TaskKind kind) {
    PromptTemplate t;
    t.task_kind = kind;
    switch (kind) {
        case TaskKind::Qa:
            t.source_prefix = "Q: ";
            t.target_prefix = "A: ";
            break;
        case TaskKind::Sentiment:
            t.source_prefix = "";
            t.target_prefix = "Sentiment: ";
            break;
        case TaskKind::Table2Text:
            t.source_prefix = "Table: ";
            t.target_prefix = "Sentence: ";
            t.strip_closing_tags = true;
            break;
    }
    return t;
}

std::string
render_example(const ExampleRecord& record, const PromptTemplate& tmpl) {
    std::string out = tmpl.source_prefix;
    out += prepared_source(record.source, tmpl);
    out += tmpl.field_separator;
    out += tmpl.target_prefix;
    out += record.target;
    return out;
}

std::string
render_query(std::string_view test_source, const PromptTemplate& tmpl) {
    std::string out = tmpl.source_prefix;
    out += prepared_source(test_source, tmpl);
    out += tmpl.field_separator;
    out += rtrim(tmpl.target_prefix);
    return out;
}

PromptContext
render(const SelectionResult& selected,
       std::string_view test_source,
       const PromptTemplate& tmpl,
       std::size_t budget,
       const TokenCounter& counter,
       std::string_view test_id) {
    const std::string query = render_query(test_source, tmpl);
    if (counter.count(query) > budget) {
        fail(ErrorKind::Unpromptable,
             "test item '" + std::string(test_id) + "' needs " + std::to_string(counter.count(query)) +
                 " tokens on its own, over the budget of " + std::to_string(budget));
    }

    std::vector<std::string> rendered;
    rendered.reserve(selected.chosen.size());
    for (const auto& r : selected.chosen) {
        rendered.push_back(render_example(r, tmpl));
    }

    auto assemble = [&](std::size_t n) {
        std::string text;
        for (std::size_t i = 0; i < n; ++i) {
            text += rendered[i];
            text += tmpl.example_separator;
        }
        text += query;
        return text;
    };

    std::size_t keep = rendered.size();
    std::string text = assemble(keep);
    while (keep > 0 && counter.count(text) > budget) {
        --keep;
        text = assemble(keep);
    }

    PromptContext ctx;
    ctx.text = std::move(text);
    ctx.test_id = std::string(test_id);
    ctx.truncated_count = rendered.size() - keep;
    ctx.included.reserve(keep);
    ctx.included_targets.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        ctx.included.push_back(selected.chosen[i].id);
        ctx.included_targets.push_back(selected.chosen[i].target);
    }
    return ctx;
}

std::string
totto_preprocess(std::string_view table_linearization) {
    // Erasing a closing tag as soon as its '>' arrives leaves no closing tag
    // behind, including ones that only form after an inner tag is removed.
    std::string out;
    out.reserve(table_linearization.size());
    for (char c : table_linearization) {
        out.push_back(c);
        if (c == '>') {
            if (std::size_t n = closing_tag_suffix(out); n > 0) {
                out.resize(out.size() - n);
            }
        }
    }
    return out;
}

}  // namespace kate
