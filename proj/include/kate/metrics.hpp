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
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kate {

/// Lowercase, drop punctuation (Unicode P* plus the ASCII punctuation
/// characters), drop the whole words a/an/the, collapse whitespace.
std::string
normalize_answer(std::string_view text);

/// 1 if the normalized prediction equals some normalized gold, else 0.
/// Throws Domain on empty golds.
int
exact_match(std::string_view prediction, std::span<const std::string> golds);

/// Fraction of positions with identical labels, compared verbatim.
double
accuracy(std::span<const std::string> predictions, std::span<const std::string> golds);

enum class BleuSmoothing {
    None,
    /// Adds one to matches and totals for n >= 2.
    AddOne,
};

/// Corpus BLEU-4 on whitespace tokens, scaled to [0, 100]: clipped n-gram
/// precisions for n = 1..4 summed over the corpus, geometric mean, times
/// the brevity penalty using the reference length closest to each
/// candidate (shorter on ties).
double
corpus_bleu(std::span<const std::string> candidates,
            std::span<const std::vector<std::string>> references,
            BleuSmoothing smoothing = BleuSmoothing::None);

/// Per-item scores and their mean.
struct EvalOutcome {
    std::vector<std::pair<std::string, double>> per_item;
    double aggregate = 0.0;
    std::size_t n = 0;
};

/// Throws Domain if `per_item` is empty or a score lies outside [0, 1].
EvalOutcome
make_outcome(std::vector<std::pair<std::string, double>> per_item);

/// Mean and sample standard deviation (n - 1 denominator; 0 for one trial).
struct TrialSummary {
    std::vector<double> trial_scores;
    double mean = 0.0;
    double stddev = 0.0;
};

TrialSummary
summarize(std::span<const double> trial_scores);

}  // namespace kate
