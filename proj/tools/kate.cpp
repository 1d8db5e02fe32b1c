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

// kate: retrieval of nearest-neighbor in-context examples for few-shot
// prompting, plus the experiment harness around it.

#include <charconv>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "kate/config.hpp"
#include "kate/dataset_store.hpp"
#include "kate/embedding_client.hpp"
#include "kate/error.hpp"
#include "kate/harness.hpp"
#include "kate/report.hpp"
#include "kate/retriever.hpp"

namespace {

using json = nlohmann::json;

constexpr int kExitValidation = 1;
constexpr int kExitBackend = 2;

std::string
format_score(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

// Overrides collected from flags, applied on top of the config file.
struct Overrides {
    std::optional<std::string> preset, task, method, metric, order, backend, template_path, token_counter, score;
    std::optional<std::size_t> k, trials, budget, pool_size, workers, max_in_flight;
    std::optional<std::uint64_t> seed, pool_seed;
    std::vector<std::string> sets;

    void
    attach(CLI::App* app) {
        app->add_option("--preset", preset, "sst2, totto, nq, wq or triviaqa");
        app->add_option("--task", task, "sentiment, table2text or qa");
        app->add_option("--method", method, "kate, random or knn");
        app->add_option("--metric", metric, "neg_euclidean or cosine");
        app->add_option("--order", order, "default, reverse or shuffle:SEED");
        app->add_option("--backend", backend, "http, mock_nearest_echo, mock_table:PATH, ...");
        app->add_option("--template", template_path, "prompt template JSON");
        app->add_option("--token-counter", token_counter, "whitespace or bpe:MERGES");
        app->add_option("--score", score, "em, accuracy or bleu");
        app->add_option("--k", k, "in-context examples per prompt");
        app->add_option("--trials", trials, "trials (random method runs at least 5)");
        app->add_option("--budget", budget, "prompt token budget");
        app->add_option("--pool-size", pool_size, "retrieval pool size drawn from the training set");
        app->add_option("--workers", workers, "retrieval and rendering threads");
        app->add_option("--max-in-flight", max_in_flight, "concurrent completion requests");
        app->add_option("--seed", seed, "master seed");
        app->add_option("--pool-seed", pool_seed, "seed for pool subsampling");
        app->add_option("--set", sets, "KEY=JSON override, e.g. --set 'http={\"endpoint\":\"...\"}'");
    }

    json
    to_json() const {
        json j = json::object();
        auto put = [&](const char* key, const auto& v) {
            if (v) {
                j[key] = *v;
            }
        };
        put("preset", preset);
        put("task", task);
        put("method", method);
        put("metric", metric);
        put("order", order);
        put("backend", backend);
        put("template", template_path);
        put("token_counter", token_counter);
        put("score", score);
        put("k", k);
        put("trials", trials);
        put("budget", budget);
        put("pool_size", pool_size);
        put("workers", workers);
        put("max_in_flight", max_in_flight);
        put("master_seed", seed);
        put("pool_seed", pool_seed);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos || eq == 0) {
                kate::fail(kate::ErrorKind::Validation, "--set expects KEY=JSON, got '" + s + "'");
            }
            try {
                j[s.substr(0, eq)] = json::parse(s.substr(eq + 1));
            } catch (const json::parse_error&) {
                j[s.substr(0, eq)] = s.substr(eq + 1);
            }
        }
        return j;
    }
};

int
cmd_ingest(const std::string& records_path, const std::string& embeddings_path) {
    const auto records = kate::load_records(records_path);
    std::cout << "records: " << records.size() << " from " << records_path << '\n';
    if (!embeddings_path.empty()) {
        const auto store = kate::load_embeddings(embeddings_path, records);
        std::cout << "embeddings: " << store.rows() << " x " << store.dim() << " encoder_tag=" << store.encoder_tag()
                  << (store.is_memory_mapped() ? " (memory-mapped)" : "") << '\n';
    }
    std::cout << "ok\n";
    return 0;
}

struct RetrieveArgs {
    std::string store;
    std::string records;
    std::optional<std::string> query_text;
    std::optional<std::string> query_id;
    std::size_t k = 10;
    std::string metric = "neg_euclidean";
    std::string order = "default";
    std::string endpoint;
    std::string api_key_env;
    double timeout = 30.0;
};

int
cmd_retrieve(const RetrieveArgs& a) {
    const auto metric = kate::parse_similarity_metric(a.metric);
    const auto order = kate::parse_order_mode(a.order);
    const auto records = kate::load_records(a.records);
    const auto store = kate::load_embeddings(a.store, records);

    std::vector<float> query;
    if (a.query_id) {
        const auto row = store.find(*a.query_id);
        if (!row) {
            kate::fail(kate::ErrorKind::Validation, "query id '" + *a.query_id + "' is not in the store");
        }
        const auto v = store.row(*row);
        query.assign(v.begin(), v.end());
    } else {
        if (a.endpoint.empty()) {
            kate::fail(kate::ErrorKind::Validation, "--query-text needs --endpoint of an embedding service");
        }
        kate::HttpSettings http;
        http.endpoint = a.endpoint;
        http.api_key_env = a.api_key_env;
        http.timeout_seconds = a.timeout;
        const std::vector<std::string> texts{*a.query_text};
        const auto batch = kate::EmbeddingClient(http).embed(texts);
        query = std::move(batch.values);
    }

    const auto list = kate::apply_order(kate::top_k(query, store, a.k, metric), order);
    for (const auto& n : list.entries) {
        std::cout << n.row << '\t' << store.ids()[n.row] << '\t' << format_score(n.score) << '\n';
    }
    return 0;
}

int
cmd_run(const std::string& config_path, const Overrides& o, const std::string& out_dir) {
    const auto config = kate::load_config(config_path, o.to_json());
    const auto data = kate::with_pool(kate::load_data(config), config.pool_size, config.pool_seed);
    const auto report = kate::run_to_directory(config, data, kate::make_resources(config), out_dir);
    std::cout << kate::to_string(config.method) << ' ' << kate::to_string(config.score) << " mean=" << format_score(report.summary.mean)
              << " std=" << format_score(report.summary.stddev) << " trials=" << report.summary.trial_scores.size()
              << " n=" << data.eval.size() << '\n';
    return 0;
}

int
cmd_sweep(const std::string& config_path, const Overrides& o, const std::string& out_dir) {
    const auto config = kate::load_config(config_path, o.to_json());
    const auto data = kate::load_data(config);
    const auto points = kate::sweep_to_directory(config, data, kate::make_resources(config), out_dir);
    std::cout << kate::curves_csv(points);
    return 0;
}

int
cmd_study(const std::string& config_path, const Overrides& o, const std::string& out_dir) {
    const auto config = kate::load_config(config_path, o.to_json());
    const auto data = kate::with_pool(kate::load_data(config), config.pool_size, config.pool_seed);
    const auto report = kate::closest_farthest_study(config, data, kate::make_resources(config));
    kate::write_study(out_dir, report);
    std::cout << "closest=" << format_score(report.closest.aggregate)
              << " farthest=" << format_score(report.farthest.aggregate) << " gap=" << format_score(report.gap())
              << " n=" << report.eval_ids.size() << '\n';
    return 0;
}

int
cmd_report(const std::string& dir) {
    const auto result = kate::recompute_report(dir);
    std::cout << result.dump(2) << '\n';
    return result.value("matches_stored", true) ? 0 : kExitValidation;
}

}  // namespace

int
main(int argc, char** argv) {
    CLI::App app{"kate: nearest-neighbor in-context example selection"};
    app.require_subcommand(1);

    std::string records_path, embeddings_path;
    auto* ingest = app.add_subcommand("ingest", "validate a records file and its embeddings");
    ingest->add_option("--records", records_path, "JSON-Lines records")->required();
    ingest->add_option("--embeddings", embeddings_path, "binary embedding file");

    RetrieveArgs ra;
    auto* retrieve = app.add_subcommand("retrieve", "print the nearest neighbors of one query");
    retrieve->add_option("--store", ra.store, "binary embedding file")->required();
    retrieve->add_option("--records", ra.records, "JSON-Lines records")->required();
    auto* qt = retrieve->add_option("--query-text", ra.query_text, "text embedded by --endpoint");
    auto* qi = retrieve->add_option("--query-id", ra.query_id, "id of a row in the store");
    qt->excludes(qi);
    retrieve->add_option("--k", ra.k, "neighbors")->check(CLI::PositiveNumber);
    retrieve->add_option("--metric", ra.metric, "neg_euclidean or cosine");
    retrieve->add_option("--order", ra.order, "default, reverse or shuffle:SEED");
    retrieve->add_option("--endpoint", ra.endpoint, "embedding service URL for --query-text");
    retrieve->add_option("--api-key-env", ra.api_key_env, "env var holding a bearer token");
    retrieve->add_option("--timeout", ra.timeout, "request timeout in seconds");

    std::string config_path, out_dir, report_dir;
    Overrides overrides;
    auto add_experiment = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "experiment config JSON")->required();
        sub->add_option("--out", out_dir, "output directory")->required();
        overrides.attach(sub);
        return sub;
    };
    auto* run = add_experiment("run", "run one experiment");
    auto* sweep = add_experiment("sweep", "run every point of the config's sweep");
    auto* study = add_experiment("study-distance", "compare closest and farthest neighbors as examples");

    auto* report = app.add_subcommand("report", "recompute metrics from a stored run directory");
    report->add_option("--dir", report_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (ingest->parsed()) {
            return cmd_ingest(records_path, embeddings_path);
        }
        if (retrieve->parsed()) {
            if (!ra.query_text && !ra.query_id) {
                kate::fail(kate::ErrorKind::Validation, "retrieve needs --query-text or --query-id");
            }
            return cmd_retrieve(ra);
        }
        if (run->parsed()) {
            return cmd_run(config_path, overrides, out_dir);
        }
        if (sweep->parsed()) {
            return cmd_sweep(config_path, overrides, out_dir);
        }
        if (study->parsed()) {
            return cmd_study(config_path, overrides, out_dir);
        }
        if (report->parsed()) {
            return cmd_report(report_dir);
        }
    } catch (const kate::Error& e) {
        std::cerr << "kate: " << e.what() << '\n';
        return e.kind() == kate::ErrorKind::Backend ? kExitBackend : kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "kate: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitValidation;
}
