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
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kate {

/// One (source, target) instance. targets_alt carries extra gold answers for
/// multi-reference exact match.
struct ExampleRecord {
    std::string id;
    std::string source;
    std::string target;
    std::vector<std::string> targets_alt;

    /// target followed by targets_alt.
    std::vector<std::string>
    golds() const;

    bool
    operator==(const ExampleRecord&) const = default;
};

struct DatasetSplit {
    std::vector<ExampleRecord> train;
    std::vector<ExampleRecord> eval;
};

/// Throws a validation error if the two id sets intersect.
DatasetSplit
make_split(std::vector<ExampleRecord> train, std::vector<ExampleRecord> eval);

/// Reads a JSON-Lines record file. Blank lines are skipped. Errors carry
/// the 1-based line number; duplicate ids are reported by name.
std::vector<ExampleRecord>
load_records(const std::filesystem::path& path);

std::vector<ExampleRecord>
parse_records(std::string_view jsonl, std::string_view origin = "<memory>");

void
write_records(const std::filesystem::path& path, std::span<const ExampleRecord> records);

// Binary layout (all little-endian):
//   0  char[4] "KATE"
//   4  u32     version = 1
//   8  u64     rows
//  16  u32     dim
//  20  u32     reserved = 0
//  24  f32     rows * dim values, row-major
//   .  u64     trailer byte length
//   .  utf-8   {"ids": [...], "encoder_tag": "..."}
inline constexpr char kEmbeddingMagic[4] = {'K', 'A', 'T', 'E'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;
inline constexpr std::size_t kEmbeddingHeaderBytes = 24;

/// Dense row-major f32 matrix aligned by position with a manifest of record
/// ids. Immutable; copies share the underlying buffer (heap or mmap).
class EmbeddingStore {
public:
    EmbeddingStore() = default;

    /// Validates shape, finiteness and id uniqueness.
    static EmbeddingStore
    from_values(std::vector<float> values,
                std::size_t dim,
                std::vector<std::string> ids,
                std::string encoder_tag = {});

    std::size_t
    dim() const noexcept {
        return dim_;
    }

    std::size_t
    rows() const noexcept {
        return rows_;
    }

    bool
    empty() const noexcept {
        return rows_ == 0;
    }

    std::span<const float>
    row(std::size_t i) const noexcept {
        return values_.subspan(i * dim_, dim_);
    }

    std::span<const float>
    values() const noexcept {
        return values_;
    }

    /// Squared L2 norm of each row, computed with the same kernel as
    /// similarity::squared_norm.
    std::span<const double>
    squared_norms() const noexcept {
        return *norms_;
    }

    const std::vector<std::string>&
    ids() const noexcept {
        return *ids_;
    }

    const std::string&
    encoder_tag() const noexcept {
        return encoder_tag_;
    }

    std::optional<std::size_t>
    find(std::string_view id) const;

    /// New heap-backed store holding the given rows in the given order.
    EmbeddingStore
    select_rows(std::span<const std::size_t> rows) const;

    bool
    is_memory_mapped() const noexcept {
        return mapped_;
    }

private:
    friend EmbeddingStore
    load_embeddings(const std::filesystem::path& path);

    void
    finish_construction();

    std::shared_ptr<const void> backing_;
    std::span<const float> values_;
    std::size_t rows_ = 0;
    std::size_t dim_ = 0;
    std::shared_ptr<const std::vector<std::string>> ids_ =
        std::make_shared<const std::vector<std::string>>();
    std::shared_ptr<const std::vector<double>> norms_ =
        std::make_shared<const std::vector<double>>();
    std::shared_ptr<const std::unordered_map<std::string, std::size_t>> index_;
    std::string encoder_tag_;
    bool mapped_ = false;
};

/// Loads and validates an embedding file. Memory-maps the matrix on
/// little-endian POSIX hosts; otherwise reads it into memory.
EmbeddingStore
load_embeddings(const std::filesystem::path& path);

/// As above, additionally requiring manifest ids to equal the record ids
/// position by position.
EmbeddingStore
load_embeddings(const std::filesystem::path& path, std::span<const ExampleRecord> records);

void
check_alignment(const EmbeddingStore& store, std::span<const ExampleRecord> records);

void
write_embeddings(const std::filesystem::path& path, const EmbeddingStore& store);

/// Uniform subset without replacement, deterministic in seed, relative
/// order preserved. Subsets drawn with one seed are nested: for m <= n,
/// subsample(r, m, s) is a subsequence of subsample(r, n, s).
std::vector<ExampleRecord>
subsample(std::span<const ExampleRecord> records, std::size_t size, std::uint64_t seed);

/// Row positions chosen by subsample, ascending.
std::vector<std::size_t>
subsample_indices(std::size_t population, std::size_t size, std::uint64_t seed);

}  // namespace kate
