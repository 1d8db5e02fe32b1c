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

#include "kate/metrics.hpp"

#include <unicode/locid.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>

#include "kate/error.hpp"

namespace kate {

namespace {

constexpr std::string_view kAsciiPunctuation = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

bool
is_punctuation(UChar32 c) {
    if (c < 0x80) {
        return kAsciiPunctuation.find(static_cast<char>(c)) != std::string_view::npos;
    }
    return u_ispunct(c) != 0;
}

bool
is_word_char(UChar32 c) {
    return c == '_' || u_isalnum(c) != 0;
}

bool
is_article(const icu::UnicodeString& s, int32_t start, int32_t end) {
    const icu::UnicodeString word = s.tempSubStringBetween(start, end);
    return word == icu::UnicodeString(u"a") || word == icu::UnicodeString(u"an") ||
           word == icu::UnicodeString(u"the");
}

std::vector<std::string_view>
split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
        }
        const std::size_t start = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
        }
        if (i > start) {
            out.push_back(s.substr(start, i - start));
        }
    }
    return out;
}

using NgramCounts = std::map<std::vector<std::string_view>, std::size_t>;

NgramCounts
ngrams(const std::vector<std::string_view>& tokens, std::size_t n) {
    NgramCounts counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        ++counts[std::vector<std::string_view>(tokens.begin() + i, tokens.begin() + i + n)];
    }
    return counts;
}

}  // namespace

std::string
normalize_answer(std::string_view text) {
    icu::UnicodeString s = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    s.toLower(icu::Locale::getRoot());

    icu::UnicodeString kept;
    for (int32_t i = 0; i < s.length();) {
        const UChar32 c = s.char32At(i);
        if (!is_punctuation(c)) {
            kept.append(c);
        }
        i += U16_LENGTH(c);
    }

    // Articles as whole words, where words are runs of letters, digits and '_'.
    icu::UnicodeString no_articles;
    for (int32_t i = 0; i < kept.length();) {
        UChar32 c = kept.char32At(i);
        if (!is_word_char(c)) {
            no_articles.append(c);
            i += U16_LENGTH(c);
            continue;
        }
        const int32_t start = i;
        while (i < kept.length() && is_word_char(kept.char32At(i))) {
            i += U16_LENGTH(kept.char32At(i));
        }
        if (is_article(kept, start, i)) {
            no_articles.append(UChar32{' '});
        } else {
            no_articles.append(kept, start, i - start);
        }
    }

    std::string out;
    std::string word;
    for (int32_t i = 0; i < no_articles.length();) {
        const UChar32 c = no_articles.char32At(i);
        i += U16_LENGTH(c);
        if (u_isUWhiteSpace(c)) {
            if (!word.empty()) {
                if (!out.empty()) {
                    out.push_back(' ');
                }
                out += word;
                word.clear();
            }
        } else {
            icu::UnicodeString(c).toUTF8String(word);
        }
    }
    if (!word.empty()) {
        if (!out.empty()) {
            out.push_back(' ');
        }
        out += word;
    }
    return out;
}

int
exact_match(std::string_view prediction, std::span<const std::string> golds) {
    if (golds.empty()) {
        fail(ErrorKind::Domain, "exact match needs at least one gold answer");
    }
    const std::string p = normalize_answer(prediction);
    for (const auto& g : golds) {
        if (normalize_answer(g) == p) {
            return 1;
        }
    }
    return 0;
}

double
accuracy(std::span<const std::string> predictions, std::span<const std::string> golds) {
    if (predictions.size() != golds.size()) {
        fail(ErrorKind::Domain,
             "accuracy over " + std::to_string(predictions.size()) + " predictions and " +
                 std::to_string(golds.size()) + " golds");
    }
    if (predictions.empty()) {
        fail(ErrorKind::Domain, "accuracy over an empty list");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        hits += predictions[i] == golds[i] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double
corpus_bleu(std::span<const std::string> candidates,
            std::span<const std::vector<std::string>> references,
            BleuSmoothing smoothing) {
    constexpr std::size_t kMaxOrder = 4;
    if (candidates.size() != references.size()) {
        fail(ErrorKind::Domain,
             "BLEU over " + std::to_string(candidates.size()) + " candidates and " +
                 std::to_string(references.size()) + " reference lists");
    }
    if (candidates.empty()) {
        fail(ErrorKind::Domain, "BLEU over an empty corpus");
    }

    std::array<std::size_t, kMaxOrder> matches{};
    std::array<std::size_t, kMaxOrder> totals{};
    std::size_t cand_len = 0;
    std::size_t ref_len = 0;

    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (references[i].empty()) {
            fail(ErrorKind::Domain, "BLEU item " + std::to_string(i) + " has no reference");
        }
        const auto cand = split_ws(candidates[i]);
        std::vector<std::vector<std::string_view>> refs;
        refs.reserve(references[i].size());
        for (const auto& r : references[i]) {
            refs.push_back(split_ws(r));
        }

        cand_len += cand.size();
        std::size_t best = refs.front().size();
        for (const auto& r : refs) {
            const auto d = [&](std::size_t len) {
                return len > cand.size() ? len - cand.size() : cand.size() - len;
            };
            if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) {
                best = r.size();
            }
        }
        ref_len += best;

        for (std::size_t n = 1; n <= kMaxOrder; ++n) {
            const NgramCounts cand_counts = ngrams(cand, n);
            NgramCounts max_ref;
            for (const auto& r : refs) {
                for (const auto& [g, c] : ngrams(r, n)) {
                    auto& slot = max_ref[g];
                    slot = std::max(slot, c);
                }
            }
            for (const auto& [g, c] : cand_counts) {
                auto it = max_ref.find(g);
                matches[n - 1] += it == max_ref.end() ? 0 : std::min(c, it->second);
                totals[n - 1] += c;
            }
        }
    }

    if (cand_len == 0) {
        return 0.0;
    }
    double log_sum = 0.0;
    for (std::size_t n = 0; n < kMaxOrder; ++n) {
        double m = static_cast<double>(matches[n]);
        double t = static_cast<double>(totals[n]);
        if (smoothing == BleuSmoothing::AddOne && n > 0) {
            m += 1.0;
            t += 1.0;
        }
        if (m == 0.0 || t == 0.0) {
            return 0.0;
        }
        log_sum += std::log(m / t);
    }
    const double c = static_cast<double>(cand_len);
    const double r = static_cast<double>(ref_len);
    const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
    return 100.0 * bp * std::exp(log_sum / static_cast<double>(kMaxOrder));
}

EvalOutcome
make_outcome(std::vector<std::pair<std::string, double>> per_item) {
    if (per_item.empty()) {
        fail(ErrorKind::Domain, "evaluation over no items");
    }
    double sum = 0.0;
    for (const auto& [id, score] : per_item) {
        if (!(score >= 0.0 && score <= 1.0)) {
            fail(ErrorKind::Domain, "score for '" + id + "' is outside [0, 1]");
        }
        sum += score;
    }
    EvalOutcome out;
    out.n = per_item.size();
    out.aggregate = sum / static_cast<double>(out.n);
    out.per_item = std::move(per_item);
    return out;
}

TrialSummary
summarize(std::span<const double> trial_scores) {
    if (trial_scores.empty()) {
        fail(ErrorKind::Domain, "summary of no trials");
    }
    TrialSummary s;
    s.trial_scores.assign(trial_scores.begin(), trial_scores.end());
    const double n = static_cast<double>(trial_scores.size());
    double sum = 0.0;
    for (double x : trial_scores) {
        sum += x;
    }
    s.mean = sum / n;
    if (trial_scores.size() > 1) {
        double ss = 0.0;
        for (double x : trial_scores) {
            ss += (x - s.mean) * (x - s.mean);
        }
        s.stddev = std::sqrt(ss / (n - 1.0));
    }
    return s;
}

}  // namespace kate
