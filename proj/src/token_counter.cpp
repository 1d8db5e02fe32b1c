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

#include "kate/token_counter.hpp"

#include <array>
#include <fstream>
#include <limits>

#include "kate/error.hpp"

namespace kate {

namespace {

bool
is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

enum class CharClass { Space, Letter, Digit, Other };

CharClass
classify(unsigned char c) {
    if (is_space(c)) {
        return CharClass::Space;
    }
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80) {
        return CharClass::Letter;
    }
    if (c >= '0' && c <= '9') {
        return CharClass::Digit;
    }
    return CharClass::Other;
}

void
append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

// GPT-2's reversible byte -> printable code point table.
const std::array<std::string, 256>&
byte_symbols() {
    static const std::array<std::string, 256> table = [] {
        std::array<char32_t, 256> cps{};
        std::array<bool, 256> direct{};
        auto keep = [&](int lo, int hi) {
            for (int b = lo; b <= hi; ++b) {
                direct[b] = true;
                cps[b] = static_cast<char32_t>(b);
            }
        };
        keep('!', '~');
        keep(0xa1, 0xac);
        keep(0xae, 0xff);
        char32_t next = 256;
        for (int b = 0; b < 256; ++b) {
            if (!direct[b]) {
                cps[b] = next++;
            }
        }
        std::array<std::string, 256> out;
        for (int b = 0; b < 256; ++b) {
            append_utf8(out[b], cps[b]);
        }
        return out;
    }();
    return table;
}

std::size_t
contraction_length(std::string_view text, std::size_t i) {
    if (text[i] != '\'') {
        return 0;
    }
    for (std::string_view suffix : {"ll", "re", "ve", "s", "t", "m", "d"}) {
        if (text.substr(i + 1, suffix.size()) == suffix) {
            return 1 + suffix.size();
        }
    }
    return 0;
}

}  // namespace

std::size_t
WhitespaceCounter::count(std::string_view text) const {
    std::size_t n = 0;
    bool in_token = false;
    for (unsigned char c : text) {
        if (is_space(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++n;
        }
    }
    return n;
}

std::vector<std::string_view>
BpeCounter::pre_tokenize(std::string_view text) {
    std::vector<std::string_view> pieces;
    const std::size_t n = text.size();
    auto cls = [&](std::size_t i) { return classify(static_cast<unsigned char>(text[i])); };
    auto run_end = [&](std::size_t i, CharClass c) {
        while (i < n && cls(i) == c) {
            ++i;
        }
        return i;
    };

    std::size_t i = 0;
    while (i < n) {
        if (std::size_t len = contraction_length(text, i); len > 0) {
            pieces.push_back(text.substr(i, len));
            i += len;
            continue;
        }
        const std::size_t start = i;
        std::size_t body = i;
        if (text[i] == ' ' && i + 1 < n && cls(i + 1) != CharClass::Space) {
            body = i + 1;
        }
        const CharClass c = cls(body);
        if (c != CharClass::Space) {
            i = run_end(body, c);
            pieces.push_back(text.substr(start, i - start));
            continue;
        }
        // Whitespace: leave the last character of a run for the next piece
        // when a non-space follows.
        std::size_t end = run_end(i, CharClass::Space);
        if (end < n && end - i > 1) {
            end -= 1;
        } else if (end < n) {
            end = i + 1;
        }
        pieces.push_back(text.substr(i, end - i));
        i = end;
    }
    return pieces;
}

BpeCounter
BpeCounter::from_merges(std::vector<std::pair<std::string, std::string>> merges, std::string label) {
    BpeCounter counter;
    counter.label_ = std::move(label);
    for (std::size_t r = 0; r < merges.size(); ++r) {
        counter.ranks_.emplace(std::move(merges[r]), r);
    }
    return counter;
}

BpeCounter
BpeCounter::from_file(const std::filesystem::path& merges_path) {
    std::ifstream in(merges_path);
    if (!in) {
        fail(ErrorKind::Io, "cannot open BPE merges file " + merges_path.string());
    }
    std::vector<std::pair<std::string, std::string>> merges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.rfind("#version", 0) == 0) {
            continue;
        }
        const auto space = line.find(' ');
        if (space == std::string::npos || space == 0 || space + 1 == line.size() ||
            line.find(' ', space + 1) != std::string::npos) {
            fail(ErrorKind::Validation,
                 merges_path.string() + ":" + std::to_string(line_no) + ": expected two space-separated symbols");
        }
        merges.emplace_back(line.substr(0, space), line.substr(space + 1));
    }
    return from_merges(std::move(merges), merges_path.filename().string());
}

std::vector<std::string>
BpeCounter::encode_piece(std::string_view piece) const {
    const auto& table = byte_symbols();
    std::vector<std::string> symbols;
    symbols.reserve(piece.size());
    for (unsigned char c : piece) {
        symbols.push_back(table[c]);
    }
    for (;;) {
        std::size_t best_rank = std::numeric_limits<std::size_t>::max();
        std::size_t best_at = 0;
        for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
            auto it = ranks_.find({symbols[i], symbols[i + 1]});
            if (it != ranks_.end() && it->second < best_rank) {
                best_rank = it->second;
                best_at = i;
            }
        }
        if (best_rank == std::numeric_limits<std::size_t>::max()) {
            break;
        }
        const std::string first = symbols[best_at];
        const std::string second = symbols[best_at + 1];
        std::vector<std::string> merged;
        merged.reserve(symbols.size());
        for (std::size_t i = 0; i < symbols.size();) {
            if (i + 1 < symbols.size() && symbols[i] == first && symbols[i + 1] == second) {
                merged.push_back(first + second);
                i += 2;
            } else {
                merged.push_back(std::move(symbols[i]));
                i += 1;
            }
        }
        symbols = std::move(merged);
    }
    return symbols;
}

std::size_t
BpeCounter::count(std::string_view text) const {
    std::size_t n = 0;
    for (auto piece : pre_tokenize(text)) {
        n += encode_piece(piece).size();
    }
    return n;
}

std::unique_ptr<TokenCounter>
make_token_counter(std::string_view spec) {
    if (spec == "whitespace") {
        return std::make_unique<WhitespaceCounter>();
    }
    if (spec.rfind("bpe:", 0) == 0 && spec.size() > 4) {
        return std::make_unique<BpeCounter>(BpeCounter::from_file(std::string(spec.substr(4))));
    }
    fail(ErrorKind::Validation, "unknown token counter '" + std::string(spec) + "' (expected whitespace or bpe:PATH)");
}

}  // namespace kate
