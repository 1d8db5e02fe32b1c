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

#include "kate/config.hpp"

#include <fstream>
#include <set>

#include "kate/error.hpp"
#include "kate/selector.hpp"

namespace kate {

using json = nlohmann::json;

namespace {

const std::set<std::string>&
known_keys() {
    static const std::set<std::string> keys = {
        "train_records", "eval_records", "train_embeddings", "eval_embeddings", "preset", "task", "method",
        "metric", "k", "order", "trials", "master_seed", "template", "budget", "token_counter", "backend", "http",
        "completion", "max_in_flight", "workers", "score", "pool_size", "pool_seed", "sweep", "study",
    };
    return keys;
}

void
check_keys(const json& obj, const std::set<std::string>& allowed, std::string_view where) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) {
            fail(ErrorKind::Validation, "unknown config key '" + std::string(where) + key + "'");
        }
    }
}

std::string
get_string(const json& obj, const char* key, std::string_view where) {
    const auto& v = obj.at(key);
    if (!v.is_string()) {
        fail(ErrorKind::Validation, "config key '" + std::string(where) + key + "' must be a string");
    }
    return v.get<std::string>();
}

bool
is_count(const json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

std::uint64_t
get_uint(const json& obj, const char* key, std::string_view where) {
    const auto& v = obj.at(key);
    if (!is_count(v)) {
        fail(ErrorKind::Validation, "config key '" + std::string(where) + key + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

double
get_number(const json& obj, const char* key, std::string_view where) {
    const auto& v = obj.at(key);
    if (!v.is_number()) {
        fail(ErrorKind::Validation, "config key '" + std::string(where) + key + "' must be a number");
    }
    return v.get<double>();
}

bool
get_bool(const json& obj, const char* key, std::string_view where) {
    const auto& v = obj.at(key);
    if (!v.is_boolean()) {
        fail(ErrorKind::Validation, "config key '" + std::string(where) + key + "' must be true or false");
    }
    return v.get<bool>();
}

const json&
get_object(const json& obj, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_object()) {
        fail(ErrorKind::Validation, std::string("config key '") + key + "' must be an object");
    }
    return v;
}

template <typename T, typename Fn>
std::vector<T>
get_list(const json& obj, const char* key, std::string_view where, Fn&& convert) {
    const auto& v = obj.at(key);
    if (!v.is_array()) {
        fail(ErrorKind::Validation, "config key '" + std::string(where) + key + "' must be a list");
    }
    std::vector<T> out;
    for (const auto& item : v) {
        out.push_back(convert(item));
    }
    return out;
}

std::filesystem::path
resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.empty() || path.is_absolute() || base.empty()) {
        return path;
    }
    return (base / path).lexically_normal();
}

}  // namespace

std::string_view
to_string(Method method) noexcept {
    switch (method) {
        case Method::Kate:
            return "kate";
        case Method::Random:
            return "random";
        case Method::Knn:
            return "knn";
    }
    return "kate";
}

Method
parse_method(std::string_view name) {
    if (name == "kate") {
        return Method::Kate;
    }
    if (name == "random") {
        return Method::Random;
    }
    if (name == "knn") {
        return Method::Knn;
    }
    fail(ErrorKind::Validation, "unknown method '" + std::string(name) + "' (expected kate, random or knn)");
}

std::string_view
to_string(ScoreKind kind) noexcept {
    switch (kind) {
        case ScoreKind::Em:
            return "em";
        case ScoreKind::Accuracy:
            return "accuracy";
        case ScoreKind::Bleu:
            return "bleu";
    }
    return "em";
}

ScoreKind
parse_score_kind(std::string_view name) {
    if (name == "em") {
        return ScoreKind::Em;
    }
    if (name == "accuracy") {
        return ScoreKind::Accuracy;
    }
    if (name == "bleu") {
        return ScoreKind::Bleu;
    }
    fail(ErrorKind::Validation, "unknown score '" + std::string(name) + "' (expected em, accuracy or bleu)");
}

Preset
preset_for(std::string_view name) {
    if (name == "sst2") {
        return {TaskKind::Sentiment, 3, ScoreKind::Accuracy};
    }
    if (name == "totto") {
        return {TaskKind::Table2Text, 2, ScoreKind::Bleu};
    }
    if (name == "nq" || name == "wq") {
        return {TaskKind::Qa, 64, ScoreKind::Em};
    }
    if (name == "triviaqa") {
        return {TaskKind::Qa, 10, ScoreKind::Em};
    }
    fail(ErrorKind::Validation,
         "unknown preset '" + std::string(name) + "' (expected sst2, totto, nq, wq or triviaqa)");
}

std::size_t
default_k(TaskKind task) noexcept {
    switch (task) {
        case TaskKind::Sentiment:
            return 3;
        case TaskKind::Table2Text:
            return 2;
        case TaskKind::Qa:
            return 64;
    }
    return 64;
}

ScoreKind
default_score(TaskKind task) noexcept {
    switch (task) {
        case TaskKind::Sentiment:
            return ScoreKind::Accuracy;
        case TaskKind::Table2Text:
            return ScoreKind::Bleu;
        case TaskKind::Qa:
            return ScoreKind::Em;
    }
    return ScoreKind::Em;
}

void
ExperimentConfig::validate() const {
    if (k == 0) {
        fail(ErrorKind::Validation, "k must be at least 1");
    }
    if (trials == 0) {
        fail(ErrorKind::Validation, "trials must be at least 1");
    }
    if (budget == 0) {
        fail(ErrorKind::Validation, "budget must be positive");
    }
    if (max_in_flight == 0 || workers == 0) {
        fail(ErrorKind::Validation, "max_in_flight and workers must be at least 1");
    }
    if (study_eval_size == 0 || study_k == 0) {
        fail(ErrorKind::Validation, "study eval_size and k must be at least 1");
    }
    if (prompt_template.example_separator.empty()) {
        fail(ErrorKind::Validation, "template example_separator must be non-empty");
    }
    completion.validate();
    for (std::size_t v : sweep.k_values) {
        if (v == 0) {
            fail(ErrorKind::Validation, "sweep k_values must be at least 1");
        }
    }
    for (std::size_t v : sweep.pool_sizes) {
        if (v == 0) {
            fail(ErrorKind::Validation, "sweep pool_sizes must be at least 1");
        }
    }
    const int axes = !sweep.k_values.empty() + !sweep.pool_sizes.empty() + !sweep.order_modes.empty();
    if (axes > 1) {
        fail(ErrorKind::Validation, "a sweep varies one of k_values, pool_sizes or order_modes");
    }
}

std::size_t
ExperimentConfig::effective_trials() const {
    if (method == Method::Random) {
        return std::max(trials, kDefaultRandomTrials);
    }
    return 1;
}

ExperimentConfig
config_from_json(const json& file, const std::filesystem::path& base_dir, const json& overrides) {
    if (!file.is_object() || !overrides.is_object()) {
        fail(ErrorKind::Validation, "config must be a JSON object");
    }
    json j = file;
    j.merge_patch(overrides);
    check_keys(j, known_keys(), "");

    ExperimentConfig c;
    auto path_key = [&](const char* key, std::filesystem::path& out) {
        if (j.contains(key)) {
            out = resolve(base_dir, get_string(j, key, ""));
        }
    };
    path_key("train_records", c.train_records);
    path_key("eval_records", c.eval_records);
    path_key("train_embeddings", c.train_embeddings);
    path_key("eval_embeddings", c.eval_embeddings);

    std::optional<Preset> preset;
    if (j.contains("preset")) {
        c.preset = get_string(j, "preset", "");
        preset = preset_for(c.preset);
        c.task = preset->task;
    }
    if (j.contains("task")) {
        c.task = parse_task_kind(get_string(j, "task", ""));
    }
    c.k = preset && preset->task == c.task ? preset->k : default_k(c.task);
    c.score = preset && preset->task == c.task ? preset->score : default_score(c.task);
    c.completion.max_tokens = default_max_tokens(c.task);

    if (j.contains("method")) {
        c.method = parse_method(get_string(j, "method", ""));
    }
    if (j.contains("metric")) {
        c.metric = parse_similarity_metric(get_string(j, "metric", ""));
    }
    if (j.contains("k")) {
        c.k = get_uint(j, "k", "");
    }
    if (j.contains("order")) {
        c.order = parse_order_mode(get_string(j, "order", ""));
    }
    if (j.contains("trials")) {
        c.trials = get_uint(j, "trials", "");
    } else if (c.method == Method::Random) {
        c.trials = kDefaultRandomTrials;
    }
    if (j.contains("master_seed")) {
        c.master_seed = get_uint(j, "master_seed", "");
    }
    if (j.contains("template")) {
        c.template_path = resolve(base_dir, get_string(j, "template", ""));
        c.prompt_template = load_template(c.template_path);
    } else {
        c.prompt_template = default_template(c.task);
    }
    if (j.contains("budget")) {
        c.budget = get_uint(j, "budget", "");
    }
    if (j.contains("token_counter")) {
        c.token_counter = get_string(j, "token_counter", "");
        if (c.token_counter.rfind("bpe:", 0) == 0) {
            c.token_counter = "bpe:" + resolve(base_dir, c.token_counter.substr(4)).string();
        }
    }
    if (j.contains("backend")) {
        c.backend = get_string(j, "backend", "");
        if (c.backend.rfind("mock_table:", 0) == 0) {
            c.backend = "mock_table:" + resolve(base_dir, c.backend.substr(11)).string();
        }
    }
    if (j.contains("http")) {
        const json& h = get_object(j, "http");
        check_keys(h,
                   {"endpoint", "api_key_env", "timeout_seconds", "max_retries", "backoff_ms", "debug",
                    "context_limit"},
                   "http.");
        if (h.contains("endpoint")) {
            c.http.endpoint = get_string(h, "endpoint", "http.");
        }
        if (h.contains("api_key_env")) {
            c.http.api_key_env = get_string(h, "api_key_env", "http.");
        }
        if (h.contains("timeout_seconds")) {
            c.http.timeout_seconds = get_number(h, "timeout_seconds", "http.");
        }
        if (h.contains("max_retries")) {
            c.http.max_retries = get_uint(h, "max_retries", "http.");
        }
        if (h.contains("backoff_ms")) {
            c.http.backoff_base = std::chrono::milliseconds(get_uint(h, "backoff_ms", "http."));
        }
        if (h.contains("debug")) {
            c.http.debug = get_bool(h, "debug", "http.");
        }
        if (h.contains("context_limit")) {
            c.context_limit = get_uint(h, "context_limit", "http.");
        }
    }
    if (j.contains("completion")) {
        const json& p = get_object(j, "completion");
        check_keys(p, {"temperature", "stop", "max_tokens", "model"}, "completion.");
        if (p.contains("temperature")) {
            c.completion.temperature = get_number(p, "temperature", "completion.");
        }
        if (p.contains("stop")) {
            c.completion.stop_sequence = get_string(p, "stop", "completion.");
        }
        if (p.contains("max_tokens")) {
            c.completion.max_tokens = get_uint(p, "max_tokens", "completion.");
        }
        if (p.contains("model")) {
            c.completion.model_name = get_string(p, "model", "completion.");
        }
    }
    if (j.contains("max_in_flight")) {
        c.max_in_flight = get_uint(j, "max_in_flight", "");
    }
    if (j.contains("workers")) {
        c.workers = get_uint(j, "workers", "");
    }
    if (j.contains("score")) {
        c.score = parse_score_kind(get_string(j, "score", ""));
    }
    if (j.contains("pool_size")) {
        c.pool_size = get_uint(j, "pool_size", "");
    }
    if (j.contains("pool_seed")) {
        c.pool_seed = get_uint(j, "pool_seed", "");
    }
    if (j.contains("sweep")) {
        const json& s = get_object(j, "sweep");
        check_keys(s, {"k_values", "pool_sizes", "order_modes", "methods"}, "sweep.");
        auto as_count = [](const json& v) {
            if (!is_count(v)) {
                fail(ErrorKind::Validation, "sweep sizes must be non-negative integers");
            }
            return v.get<std::size_t>();
        };
        auto as_text = [](const json& v) {
            if (!v.is_string()) {
                fail(ErrorKind::Validation, "sweep order_modes and methods must be strings");
            }
            return v.get<std::string>();
        };
        if (s.contains("k_values")) {
            c.sweep.k_values = get_list<std::size_t>(s, "k_values", "sweep.", as_count);
        }
        if (s.contains("pool_sizes")) {
            c.sweep.pool_sizes = get_list<std::size_t>(s, "pool_sizes", "sweep.", as_count);
        }
        if (s.contains("order_modes")) {
            c.sweep.order_modes = get_list<OrderMode>(
                s, "order_modes", "sweep.", [&](const json& v) { return parse_order_mode(as_text(v)); });
        }
        if (s.contains("methods")) {
            c.sweep.methods =
                get_list<Method>(s, "methods", "sweep.", [&](const json& v) { return parse_method(as_text(v)); });
        }
    }
    if (j.contains("study")) {
        const json& s = get_object(j, "study");
        check_keys(s, {"eval_size", "k"}, "study.");
        if (s.contains("eval_size")) {
            c.study_eval_size = get_uint(s, "eval_size", "study.");
        }
        if (s.contains("k")) {
            c.study_k = get_uint(s, "k", "study.");
        }
    }
    c.validate();
    return c;
}

ExperimentConfig
load_config(const std::filesystem::path& path, const json& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::Io, "cannot open config " + path.string());
    }
    json file;
    try {
        file = json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Validation, path.string() + ": " + e.what());
    }
    return config_from_json(file, path.parent_path(), overrides);
}

json
config_to_json(const ExperimentConfig& c) {
    json tmpl = {
        {"source_prefix", c.prompt_template.source_prefix},
        {"target_prefix", c.prompt_template.target_prefix},
        {"example_separator", c.prompt_template.example_separator},
        {"field_separator", c.prompt_template.field_separator},
        {"task_kind", to_string(c.prompt_template.task_kind)},
        {"strip_closing_tags", c.prompt_template.strip_closing_tags},
    };
    json out = {
        {"train_records", c.train_records.string()},
        {"eval_records", c.eval_records.string()},
        {"train_embeddings", c.train_embeddings.string()},
        {"eval_embeddings", c.eval_embeddings.string()},
        {"preset", c.preset},
        {"task", to_string(c.task)},
        {"method", to_string(c.method)},
        {"metric", to_string(c.metric)},
        {"k", c.k},
        {"order", to_string(c.order)},
        {"trials", c.effective_trials()},
        {"master_seed", c.master_seed},
        {"template", tmpl},
        {"budget", c.budget},
        {"token_counter", c.token_counter},
        {"backend", c.backend},
        {"completion",
         {{"temperature", c.completion.temperature},
          {"stop", c.completion.stop_sequence},
          {"max_tokens", c.completion.max_tokens},
          {"model", c.completion.model_name}}},
        {"score", to_string(c.score)},
        {"pool_size", c.pool_size},
        {"pool_seed", c.pool_seed},
    };
    if (c.backend == "http") {
        out["http"] = {{"endpoint", c.http.endpoint}, {"context_limit", c.context_limit}};
    }
    return out;
}

}  // namespace kate
