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

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "kate/harness.hpp"

namespace kate {

// A run directory holds:
//   items.jsonl   one row per (trial, eval item), in trial then item order
//   summary.json  config echo, per-trial metric, mean and sample std
//   timing.json   wall-clock phases (the only file that differs between
//                 reruns of the same config)
// A sweep directory holds one run directory per point plus curves.csv.

nlohmann::json
row_to_json(const ItemRow& row);

ItemRow
row_from_json(const nlohmann::json& j);

nlohmann::json
summary_json(const ExperimentReport& report);

nlohmann::json
timing_json(const TimingStats& timing);

/// Runs the experiment, streaming rows into `dir`/items.jsonl. On failure
/// the rows written so far stay on disk, summary.json records the error
/// and the exception propagates.
ExperimentReport
run_to_directory(const ExperimentConfig& config,
                 const ExperimentData& data,
                 const RunResources& resources,
                 const std::filesystem::path& dir);

/// One subdirectory per point, named "<method>_<axis>=<value>", plus
/// curves.csv with one line per point.
std::vector<SweepPoint>
sweep_to_directory(const ExperimentConfig& config,
                   const ExperimentData& data,
                   const RunResources& resources,
                   const std::filesystem::path& dir);

std::string
curves_csv(const std::vector<SweepPoint>& points);

/// study.json plus closest_items.jsonl and farthest_items.jsonl.
void
write_study(const std::filesystem::path& dir, const StudyReport& report);

nlohmann::json
study_json(const StudyReport& report);

/// Rescores a stored run directory from its items.jsonl and the score kind
/// in summary.json. The result has the stored and recomputed trial metrics
/// and whether they agree.
nlohmann::json
recompute_report(const std::filesystem::path& dir);

}  // namespace kate
