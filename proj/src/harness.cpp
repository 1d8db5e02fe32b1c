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

#include "kate/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <variant>

#include "kate/error.hpp"
#include "kate/parallel.hpp"
#include "kate/prompt.hpp"
#include "kate/retriever.hpp"
#include "kate/selector.hpp"

namespace kate {

namespace {

using Clock = std::chrono::steady_clock;

double
seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string_view
trim(std::string_view s) {
    auto space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
    while (!s.empty() && space(s.front())) {
        s.remove_prefix(1);
    }
    while (!s.empty() && space(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

[[noreturn]] void
fail_item(const Error& e, const std::string& id) {
    throw Error(e.kind(), "item '" + id + "': " + e.what());
}

void
require_vectors(const ExperimentData& data) {
    if (data.train_store.empty()) {
        fail(ErrorKind::Validation, "this method needs training embeddings");
    }
    if (data.eval_store.empty()) {
        fail(ErrorKind::Validation, "this method needs eval embeddings");
    }
    check_alignment(data.train_store, data.train);
    check_alignment(data.eval_store, data.eval);
    if (data.train_store.dim() != data.eval_store.dim()) {
        fail(ErrorKind::Validation,
             "train embeddings have dim " + std::to_string(data.train_store.dim()) + " but eval embeddings have " +
                 std::to_string(data.eval_store.dim()));
    }
}

struct Rendered {
    std::optional<PromptContext> prompt;
    std::optional<Error> error;
};

std::vector<Rendered>
render_all(const std::vector<SelectionResult>& selections,
           std::span<const ExampleRecord> items,
           const ExperimentConfig& config,
           const TokenCounter& counter) {
    std::vector<Rendered> out(items.size());
    parallel_for(items.size(), config.workers, [&](std::size_t i) {
        try {
            out[i].prompt = render(selections[i], items[i].source, config.prompt_template, config.budget, counter,
                                   items[i].id);
        } catch (const Error& e) {
            out[i].error = e;
        }
    });
    return out;
}

// Renders, completes and scores one batch of items, appending rows in item
// order. Throws on the first failing item after sinking the rows before it.
void
prompt_and_score(const std::vector<SelectionResult>& selections,
                 std::span<const ExampleRecord> items,
                 std::size_t trial,
                 const ExperimentConfig& config,
                 const RunResources& resources,
                 std::vector<ItemRow>& rows,
                 const RowSink& sink,
                 TimingStats& timing) {
    auto t0 = Clock::now();
    std::vector<Rendered> rendered = render_all(selections, items, config, *resources.counter);
    timing.prompt_seconds += seconds_since(t0);

    // Only the prefix before the first render failure is sent to the backend.
    std::size_t usable = 0;
    while (usable < rendered.size() && rendered[usable].prompt) {
        ++usable;
    }
    std::vector<PromptContext> prompts;
    prompts.reserve(usable);
    for (std::size_t i = 0; i < usable; ++i) {
        prompts.push_back(std::move(*rendered[i].prompt));
    }
    t0 = Clock::now();
    const auto completions = batch_complete(*resources.backend, prompts, config.completion, config.max_in_flight);
    timing.completion_seconds += seconds_since(t0);

    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i == usable) {
            fail_item(*rendered[i].error, items[i].id);
        }
        if (const auto* err = std::get_if<Error>(&completions[i])) {
            fail_item(*err, items[i].id);
        }
        ItemRow row;
        row.trial = trial;
        row.id = items[i].id;
        row.selected = prompts[i].included;
        row.golds = items[i].golds();
        row.prompt_hash = sha256_hex(prompts[i].text);
        row.completion = std::get<std::string>(completions[i]);
        row.score = item_score(config.score, row.completion, row.golds);
        row.truncated = prompts[i].truncated_count;
        if (sink) {
            sink(row);
        }
        rows.push_back(std::move(row));
    }
}

std::vector<ItemRow>
run_knn(const ExperimentConfig& config,
        const ExperimentData& data,
        const RowSink& sink,
        TimingStats& timing) {
    const bool vote = config.task == TaskKind::Sentiment;
    const auto t0 = Clock::now();
    std::vector<NeighborList> neighbors(data.eval.size());
    if (vote) {
        parallel_for(data.eval.size(), config.workers, [&](std::size_t i) {
            neighbors[i] = top_k_by_key(data.eval_store.row(i), data.train_store, config.k, config.metric,
                                        data.train_store.ids());
        });
    } else {
        neighbors = top_k_batch(data.eval_store, data.train_store, 1, config.metric, config.workers);
    }
    timing.retrieval_seconds += seconds_since(t0);

    std::vector<ItemRow> rows;
    rows.reserve(data.eval.size());
    for (std::size_t i = 0; i < data.eval.size(); ++i) {
        ItemRow row;
        row.id = data.eval[i].id;
        row.golds = data.eval[i].golds();
        std::vector<std::string> targets;
        for (const auto& n : neighbors[i].entries) {
            row.selected.push_back(data.train[n.row].id);
            targets.push_back(data.train[n.row].target);
        }
        row.completion = vote ? majority_vote(targets) : targets.front();
        row.score = item_score(config.score, row.completion, row.golds);
        if (sink) {
            sink(row);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::string
sha256_hex(std::string_view text) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        fail(ErrorKind::Io, "SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xf]);
    }
    return out;
}

ExperimentData
load_data(const ExperimentConfig& config) {
    if (config.train_records.empty() || config.eval_records.empty()) {
        fail(ErrorKind::Validation, "config needs train_records and eval_records");
    }
    auto split = make_split(load_records(config.train_records), load_records(config.eval_records));
    if (split.eval.empty()) {
        fail(ErrorKind::Validation, "no eval records in " + config.eval_records.string());
    }
    if (split.train.empty()) {
        fail(ErrorKind::Validation, "no training records in " + config.train_records.string());
    }
    ExperimentData data;
    data.train = std::move(split.train);
    data.eval = std::move(split.eval);
    if (!config.train_embeddings.empty()) {
        data.train_store = load_embeddings(config.train_embeddings, data.train);
    }
    if (!config.eval_embeddings.empty()) {
        data.eval_store = load_embeddings(config.eval_embeddings, data.eval);
    }
    return data;
}

ExperimentData
with_pool(const ExperimentData& data, std::size_t size, std::uint64_t seed) {
    if (size == 0 || size == data.train.size()) {
        return data;
    }
    const auto idx = subsample_indices(data.train.size(), size, seed);
    ExperimentData out;
    out.eval = data.eval;
    out.eval_store = data.eval_store;
    out.train.reserve(idx.size());
    for (std::size_t i : idx) {
        out.train.push_back(data.train[i]);
    }
    if (!data.train_store.empty()) {
        out.train_store = data.train_store.select_rows(idx);
    }
    return out;
}

RunResources
make_resources(const ExperimentConfig& config) {
    RunResources r;
    r.counter = make_token_counter(config.token_counter);
    r.backend = make_backend(config.backend, config.http, config.context_limit, r.counter);
    return r;
}

double
item_score(ScoreKind score, std::string_view completion, std::span<const std::string> golds) {
    if (golds.empty()) {
        fail(ErrorKind::Domain, "scoring needs at least one gold answer");
    }
    switch (score) {
        case ScoreKind::Em:
            return exact_match(completion, golds);
        case ScoreKind::Accuracy:
            return trim(completion) == golds.front() ? 1.0 : 0.0;
        case ScoreKind::Bleu: {
            const std::string cand(trim(completion));
            const std::vector<std::string> refs(golds.begin(), golds.end());
            return corpus_bleu(std::span<const std::string>(&cand, 1), std::span<const std::vector<std::string>>(&refs, 1),
                               BleuSmoothing::AddOne) /
                   100.0;
        }
    }
    return 0.0;
}

double
trial_metric(ScoreKind score, std::span<const ItemRow> rows) {
    if (rows.empty()) {
        fail(ErrorKind::Domain, "trial with no rows");
    }
    if (score != ScoreKind::Bleu) {
        double sum = 0.0;
        for (const auto& r : rows) {
            sum += r.score;
        }
        return sum / static_cast<double>(rows.size());
    }
    std::vector<std::string> cands;
    std::vector<std::vector<std::string>> refs;
    for (const auto& r : rows) {
        cands.emplace_back(trim(r.completion));
        refs.push_back(r.golds);
    }
    return corpus_bleu(cands, refs);
}

ExperimentReport
run(const ExperimentConfig& config, const ExperimentData& data, const RunResources& resources, const RowSink& sink) {
    config.validate();
    const auto start = Clock::now();
    ExperimentReport report;
    report.config = config;
    report.token_counter_name = resources.counter->name();
    report.backend_name = config.method == Method::Knn ? "none" : resources.backend->name();
    if (data.eval.empty()) {
        fail(ErrorKind::Validation, "no eval records");
    }

    const std::size_t trials = config.effective_trials();
    if (config.method == Method::Knn) {
        require_vectors(data);
        report.rows = run_knn(config, data, sink, report.timing);
    } else if (config.method == Method::Kate) {
        require_vectors(data);
        const auto t0 = Clock::now();
        const auto neighbors = top_k_batch(data.eval_store, data.train_store, config.k, config.metric, config.workers);
        std::vector<SelectionResult> selections;
        selections.reserve(neighbors.size());
        for (const auto& n : neighbors) {
            selections.push_back(select_from_neighbors(apply_order(n, config.order), data.train));
        }
        report.timing.retrieval_seconds += seconds_since(t0);
        prompt_and_score(selections, data.eval, 0, config, resources, report.rows, sink, report.timing);
    } else {
        if (data.train.empty()) {
            fail(ErrorKind::Validation, "random selection needs training records");
        }
        for (std::size_t t = 0; t < trials; ++t) {
            const auto t0 = Clock::now();
            std::vector<SelectionResult> selections;
            selections.reserve(data.eval.size());
            for (std::size_t i = 0; i < data.eval.size(); ++i) {
                selections.push_back(random_select(data.train, config.k, random_trial_seed(config.master_seed, t, i)));
            }
            report.timing.retrieval_seconds += seconds_since(t0);
            prompt_and_score(selections, data.eval, t, config, resources, report.rows, sink, report.timing);
        }
    }

    std::vector<double> metrics;
    const std::size_t per_trial = data.eval.size();
    for (std::size_t t = 0; t < trials; ++t) {
        std::span<const ItemRow> rows(report.rows.data() + t * per_trial, per_trial);
        std::vector<std::pair<std::string, double>> per_item;
        per_item.reserve(per_trial);
        for (const auto& r : rows) {
            per_item.emplace_back(r.id, r.score);
        }
        report.trials.push_back(make_outcome(std::move(per_item)));
        metrics.push_back(trial_metric(config.score, rows));
    }
    report.summary = summarize(metrics);
    report.timing.total_seconds = seconds_since(start);
    return report;
}

ExperimentReport
run(const ExperimentConfig& config) {
    const ExperimentData data = with_pool(load_data(config), config.pool_size, config.pool_seed);
    return run(config, data, make_resources(config));
}

std::vector<SweepPoint>
run_sweep(const ExperimentConfig& config,
          const ExperimentData& data,
          const RunResources& resources,
          const std::function<void(const SweepPoint&)>& on_point) {
    config.validate();
    if (config.sweep.empty()) {
        fail(ErrorKind::Validation, "config has no sweep values");
    }
    const std::vector<Method> methods =
        config.sweep.methods.empty() ? std::vector<Method>{config.method} : config.sweep.methods;

    std::vector<SweepPoint> points;
    auto run_point = [&](const std::string& axis, const std::string& value, ExperimentConfig cfg,
                         const ExperimentData& pool) {
        for (Method m : methods) {
            ExperimentConfig c = cfg;
            c.method = m;
            c.sweep = {};
            SweepPoint p{axis, value, m, run(c, pool, resources)};
            if (on_point) {
                on_point(p);
            }
            points.push_back(std::move(p));
        }
    };

    if (!config.sweep.pool_sizes.empty()) {
        for (std::size_t size : config.sweep.pool_sizes) {
            if (size > data.train.size()) {
                fail(ErrorKind::Validation,
                     "pool size " + std::to_string(size) + " exceeds the " + std::to_string(data.train.size()) +
                         " training records");
            }
            ExperimentConfig c = config;
            c.pool_size = size;
            run_point("pool_size", std::to_string(size), c, with_pool(data, size, config.pool_seed));
        }
        return points;
    }

    const ExperimentData pool = with_pool(data, config.pool_size, config.pool_seed);
    for (std::size_t k : config.sweep.k_values) {
        ExperimentConfig c = config;
        c.k = k;
        run_point("k", std::to_string(k), c, pool);
    }
    for (const auto& order : config.sweep.order_modes) {
        ExperimentConfig c = config;
        c.order = order;
        run_point("order", to_string(order), c, pool);
    }
    return points;
}

StudyReport
closest_farthest_study(const ExperimentConfig& config, const ExperimentData& data, const RunResources& resources) {
    config.validate();
    require_vectors(data);
    const std::size_t size = std::min(config.study_eval_size, data.eval.size());
    const auto idx = subsample_indices(data.eval.size(), size, config.master_seed);

    std::vector<ExampleRecord> items;
    std::vector<SelectionResult> closest;
    std::vector<SelectionResult> farthest;
    for (std::size_t i : idx) {
        items.push_back(data.eval[i]);
        const auto q = data.eval_store.row(i);
        closest.push_back(select_from_neighbors(top_k(q, data.train_store, config.study_k, config.metric), data.train));
        farthest.push_back(
            select_from_neighbors(farthest_k(q, data.train_store, config.study_k, config.metric), data.train));
    }

    StudyReport report;
    report.config = config;
    TimingStats timing;
    prompt_and_score(closest, items, 0, config, resources, report.closest_rows, {}, timing);
    prompt_and_score(farthest, items, 0, config, resources, report.farthest_rows, {}, timing);
    auto outcome = [](const std::vector<ItemRow>& rows) {
        std::vector<std::pair<std::string, double>> per_item;
        for (const auto& r : rows) {
            per_item.emplace_back(r.id, r.score);
        }
        return make_outcome(std::move(per_item));
    };
    report.closest = outcome(report.closest_rows);
    report.farthest = outcome(report.farthest_rows);
    for (const auto& it : items) {
        report.eval_ids.push_back(it.id);
    }
    return report;
}

}  // namespace kate
