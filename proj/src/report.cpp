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

#include "kate/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "kate/error.hpp"

namespace kate {

using json = nlohmann::json;

namespace {

void
write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorKind::Io, "cannot write " + path.string());
    }
    out << text;
    if (!out) {
        fail(ErrorKind::Io, "write failed for " + path.string());
    }
}

json
read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::Io, "cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Validation, path.string() + ": " + e.what());
    }
}

std::string
format_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

std::size_t
total_truncated(const std::vector<ItemRow>& rows) {
    std::size_t n = 0;
    for (const auto& r : rows) {
        n += r.truncated;
    }
    return n;
}

void
ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        fail(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
    }
}

void
write_rows(const std::filesystem::path& path, const std::vector<ItemRow>& rows) {
    std::string text;
    for (const auto& r : rows) {
        text += row_to_json(r).dump();
        text += '\n';
    }
    write_text(path, text);
}

}  // namespace

json
row_to_json(const ItemRow& row) {
    return {
        {"trial", row.trial},
        {"id", row.id},
        {"selected", row.selected},
        {"golds", row.golds},
        {"prompt_sha256", row.prompt_hash},
        {"completion", row.completion},
        {"score", row.score},
        {"truncated", row.truncated},
    };
}

ItemRow
row_from_json(const json& j) {
    try {
        ItemRow row;
        row.trial = j.at("trial").get<std::size_t>();
        row.id = j.at("id").get<std::string>();
        row.selected = j.at("selected").get<std::vector<std::string>>();
        row.golds = j.at("golds").get<std::vector<std::string>>();
        row.prompt_hash = j.at("prompt_sha256").get<std::string>();
        row.completion = j.at("completion").get<std::string>();
        row.score = j.at("score").get<double>();
        row.truncated = j.at("truncated").get<std::size_t>();
        return row;
    } catch (const json::exception& e) {
        fail(ErrorKind::Validation, std::string("malformed report row: ") + e.what());
    }
}

json
summary_json(const ExperimentReport& report) {
    json item_means = json::array();
    for (const auto& t : report.trials) {
        item_means.push_back(t.aggregate);
    }
    return {
        {"status", "complete"},
        {"config", config_to_json(report.config)},
        {"method", to_string(report.config.method)},
        {"score", to_string(report.config.score)},
        {"token_counter", report.token_counter_name},
        {"backend", report.backend_name},
        {"n_eval", report.trials.empty() ? 0 : report.trials.front().n},
        {"trials", report.summary.trial_scores.size()},
        {"trial_scores", report.summary.trial_scores},
        {"item_mean_per_trial", item_means},
        {"mean", report.summary.mean},
        {"std", report.summary.stddev},
        {"std_kind", "sample"},
        {"truncated_examples", total_truncated(report.rows)},
        {"parent", "unavailable"},
    };
}

json
timing_json(const TimingStats& timing) {
    return {
        {"total_seconds", timing.total_seconds},
        {"retrieval_seconds", timing.retrieval_seconds},
        {"prompt_seconds", timing.prompt_seconds},
        {"completion_seconds", timing.completion_seconds},
    };
}

ExperimentReport
run_to_directory(const ExperimentConfig& config,
                 const ExperimentData& data,
                 const RunResources& resources,
                 const std::filesystem::path& dir) {
    ensure_dir(dir);
    const auto items_path = dir / "items.jsonl";
    std::ofstream items(items_path, std::ios::binary | std::ios::trunc);
    if (!items) {
        fail(ErrorKind::Io, "cannot write " + items_path.string());
    }
    auto sink = [&](const ItemRow& row) {
        items << row_to_json(row).dump() << '\n';
        items.flush();
    };
    ExperimentReport report;
    try {
        report = run(config, data, resources, sink);
    } catch (const Error& e) {
        items.close();
        json aborted = {
            {"status", "aborted"},
            {"error", e.what()},
            {"config", config_to_json(config)},
        };
        write_text(dir / "summary.json", aborted.dump(2) + "\n");
        throw;
    }
    items.close();
    write_text(dir / "summary.json", summary_json(report).dump(2) + "\n");
    write_text(dir / "timing.json", timing_json(report.timing).dump(2) + "\n");
    return report;
}

std::string
curves_csv(const std::vector<SweepPoint>& points) {
    std::ostringstream out;
    out << "method,axis,value,k,pool_size,order,trials,mean,std\n";
    for (const auto& p : points) {
        const auto& c = p.report.config;
        out << to_string(p.method) << ',' << p.axis << ',' << p.value << ',' << c.k << ',' << c.pool_size << ','
            << to_string(c.order) << ',' << p.report.summary.trial_scores.size() << ','
            << format_number(p.report.summary.mean) << ',' << format_number(p.report.summary.stddev) << '\n';
    }
    return out.str();
}

std::vector<SweepPoint>
sweep_to_directory(const ExperimentConfig& config,
                   const ExperimentData& data,
                   const RunResources& resources,
                   const std::filesystem::path& dir) {
    ensure_dir(dir);
    std::vector<SweepPoint> done;
    auto on_point = [&](const SweepPoint& p) {
        const auto sub = dir / (std::string(to_string(p.method)) + "_" + p.axis + "=" + p.value);
        ensure_dir(sub);
        write_rows(sub / "items.jsonl", p.report.rows);
        write_text(sub / "summary.json", summary_json(p.report).dump(2) + "\n");
        write_text(sub / "timing.json", timing_json(p.report.timing).dump(2) + "\n");
        done.push_back(p);
        write_text(dir / "curves.csv", curves_csv(done));
    };
    return run_sweep(config, data, resources, on_point);
}

json
study_json(const StudyReport& report) {
    return {
        {"config", config_to_json(report.config)},
        {"k", report.config.study_k},
        {"eval_size", report.eval_ids.size()},
        {"eval_ids", report.eval_ids},
        {"score", to_string(report.config.score)},
        {"closest", report.closest.aggregate},
        {"farthest", report.farthest.aggregate},
        {"gap", report.gap()},
    };
}

void
write_study(const std::filesystem::path& dir, const StudyReport& report) {
    ensure_dir(dir);
    write_rows(dir / "closest_items.jsonl", report.closest_rows);
    write_rows(dir / "farthest_items.jsonl", report.farthest_rows);
    write_text(dir / "study.json", study_json(report).dump(2) + "\n");
}

json
recompute_report(const std::filesystem::path& dir) {
    const json summary = read_json(dir / "summary.json");
    if (!summary.contains("score") || !summary["score"].is_string()) {
        fail(ErrorKind::Validation, (dir / "summary.json").string() + " has no score kind");
    }
    const ScoreKind score = parse_score_kind(summary["score"].get<std::string>());

    std::ifstream in(dir / "items.jsonl", std::ios::binary);
    if (!in) {
        fail(ErrorKind::Io, "cannot open " + (dir / "items.jsonl").string());
    }
    std::map<std::size_t, std::vector<ItemRow>> by_trial;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(ErrorKind::Validation, "items.jsonl:" + std::to_string(line_no) + ": " + e.what());
        }
        ItemRow row = row_from_json(j);
        row.score = item_score(score, row.completion, row.golds);
        by_trial[row.trial].push_back(std::move(row));
    }
    if (by_trial.empty()) {
        fail(ErrorKind::Validation, (dir / "items.jsonl").string() + " has no rows");
    }
    std::vector<double> metrics;
    for (const auto& [trial, rows] : by_trial) {
        metrics.push_back(trial_metric(score, rows));
    }
    const TrialSummary s = summarize(metrics);

    json out = {
        {"score", to_string(score)},
        {"trials", s.trial_scores.size()},
        {"trial_scores", s.trial_scores},
        {"mean", s.mean},
        {"std", s.stddev},
        {"std_kind", "sample"},
    };
    if (summary.contains("trial_scores")) {
        const auto stored = summary["trial_scores"].get<std::vector<double>>();
        bool agree = stored.size() == metrics.size();
        for (std::size_t i = 0; agree && i < stored.size(); ++i) {
            agree = std::fabs(stored[i] - metrics[i]) <= 1e-9 * std::max(1.0, std::fabs(stored[i]));
        }
        out["stored_trial_scores"] = stored;
        out["matches_stored"] = agree;
    }
    return out;
}

}  // namespace kate
