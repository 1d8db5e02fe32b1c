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

#include "kate/dataset_store.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_set>

#include "kate/error.hpp"
#include "kate/rng.hpp"
#include "kate/similarity.hpp"

namespace kate {

using json = nlohmann::json;

namespace {

constexpr bool kLittleEndianHost = std::endian::native == std::endian::little;

template <typename T>
T
read_le(const unsigned char* p) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        v |= static_cast<T>(p[i]) << (8 * i);
    }
    return v;
}

template <typename T>
void
append_le(std::string& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

float
read_f32_le(const unsigned char* p) {
    return std::bit_cast<float>(read_le<std::uint32_t>(p));
}

class MappedFile {
public:
    explicit MappedFile(const std::filesystem::path& path) {
        fd_ = ::open(path.c_str(), O_RDONLY);
        if (fd_ < 0) {
            fail(ErrorKind::Io, "cannot open " + path.string() + ": " + std::strerror(errno));
        }
        struct stat st {};
        if (::fstat(fd_, &st) != 0) {
            ::close(fd_);
            fail(ErrorKind::Io, "cannot stat " + path.string());
        }
        size_ = static_cast<std::size_t>(st.st_size);
        if (size_ > 0) {
            void* addr = ::mmap(nullptr, size_, PROT_READ, MAP_PRIVATE, fd_, 0);
            if (addr == MAP_FAILED) {
                ::close(fd_);
                fail(ErrorKind::Io, "cannot mmap " + path.string());
            }
            data_ = static_cast<const unsigned char*>(addr);
        }
    }

    ~MappedFile() {
        if (data_ != nullptr) {
            ::munmap(const_cast<unsigned char*>(data_), size_);
        }
        if (fd_ >= 0) {
            ::close(fd_);
        }
    }

    MappedFile(const MappedFile&) = delete;
    MappedFile&
    operator=(const MappedFile&) = delete;

    const unsigned char*
    data() const noexcept {
        return data_;
    }

    std::size_t
    size() const noexcept {
        return size_;
    }

private:
    int fd_ = -1;
    const unsigned char* data_ = nullptr;
    std::size_t size_ = 0;
};

ExampleRecord
parse_record(const std::string& line, std::size_t line_no, std::string_view origin) {
    auto where = [&] { return std::string(origin) + ":" + std::to_string(line_no) + ": "; };
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Validation, where() + "malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) {
        fail(ErrorKind::Validation, where() + "expected a JSON object");
    }
    auto string_field = [&](const char* key) -> std::string {
        auto it = obj.find(key);
        if (it == obj.end() || !it->is_string()) {
            fail(ErrorKind::Validation, where() + "missing or non-string \"" + key + "\"");
        }
        return it->get<std::string>();
    };
    ExampleRecord rec;
    rec.id = string_field("id");
    rec.source = string_field("source");
    rec.target = string_field("target");
    if (rec.id.empty()) {
        fail(ErrorKind::Validation, where() + "empty id");
    }
    if (rec.source.empty()) {
        fail(ErrorKind::Validation, where() + "empty source for id '" + rec.id + "'");
    }
    if (auto it = obj.find("targets_alt"); it != obj.end() && !it->is_null()) {
        if (!it->is_array()) {
            fail(ErrorKind::Validation, where() + "\"targets_alt\" must be an array of strings");
        }
        for (const auto& alt : *it) {
            if (!alt.is_string()) {
                fail(ErrorKind::Validation, where() + "\"targets_alt\" must be an array of strings");
            }
            rec.targets_alt.push_back(alt.get<std::string>());
        }
    }
    return rec;
}

void
check_finite(std::span<const float> values, std::size_t dim) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            fail(ErrorKind::Validation,
                 "non-finite embedding value at row " + std::to_string(i / dim) + ", column " +
                     std::to_string(i % dim));
        }
    }
}

}  // namespace

std::vector<std::string>
ExampleRecord::golds() const {
    std::vector<std::string> out;
    out.reserve(1 + targets_alt.size());
    out.push_back(target);
    out.insert(out.end(), targets_alt.begin(), targets_alt.end());
    return out;
}

DatasetSplit
make_split(std::vector<ExampleRecord> train, std::vector<ExampleRecord> eval) {
    std::unordered_set<std::string_view> ids;
    for (const auto& r : train) {
        ids.insert(r.id);
    }
    for (const auto& r : eval) {
        if (ids.count(r.id) != 0) {
            fail(ErrorKind::Validation, "id '" + r.id + "' appears in both train and eval");
        }
    }
    return DatasetSplit{std::move(train), std::move(eval)};
}

std::vector<ExampleRecord>
parse_records(std::string_view jsonl, std::string_view origin) {
    std::vector<ExampleRecord> out;
    std::unordered_set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < jsonl.size()) {
        std::size_t end = jsonl.find('\n', pos);
        if (end == std::string_view::npos) {
            end = jsonl.size();
        }
        std::string line(jsonl.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) {
            continue;
        }
        ExampleRecord rec = parse_record(line, line_no, origin);
        if (!seen.insert(rec.id).second) {
            fail(ErrorKind::Validation,
                 std::string(origin) + ":" + std::to_string(line_no) + ": duplicate id '" + rec.id + "'");
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<ExampleRecord>
load_records(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::Io, "cannot open record file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_records(buf.str(), path.string());
}

void
write_records(const std::filesystem::path& path, std::span<const ExampleRecord> records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorKind::Io, "cannot write record file " + path.string());
    }
    for (const auto& r : records) {
        json obj = {{"id", r.id}, {"source", r.source}, {"target", r.target}};
        if (!r.targets_alt.empty()) {
            obj["targets_alt"] = r.targets_alt;
        }
        out << obj.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// EmbeddingStore

EmbeddingStore
EmbeddingStore::from_values(std::vector<float> values,
                            std::size_t dim,
                            std::vector<std::string> ids,
                            std::string encoder_tag) {
    if (dim == 0) {
        fail(ErrorKind::Validation, "embedding dim must be positive");
    }
    if (values.size() != ids.size() * dim) {
        fail(ErrorKind::Validation,
             "embedding size mismatch: " + std::to_string(values.size()) + " values for " +
                 std::to_string(ids.size()) + " rows of dim " + std::to_string(dim));
    }
    check_finite(values, dim);
    auto owned = std::make_shared<const std::vector<float>>(std::move(values));
    EmbeddingStore store;
    store.values_ = std::span<const float>(*owned);
    store.backing_ = owned;
    store.rows_ = ids.size();
    store.dim_ = dim;
    store.ids_ = std::make_shared<const std::vector<std::string>>(std::move(ids));
    store.encoder_tag_ = std::move(encoder_tag);
    store.finish_construction();
    return store;
}

void
EmbeddingStore::finish_construction() {
    auto index = std::make_shared<std::unordered_map<std::string, std::size_t>>();
    index->reserve(ids_->size());
    for (std::size_t i = 0; i < ids_->size(); ++i) {
        if (!index->emplace((*ids_)[i], i).second) {
            fail(ErrorKind::Validation, "duplicate id '" + (*ids_)[i] + "' in embedding manifest");
        }
    }
    index_ = std::move(index);

    auto norms = std::make_shared<std::vector<double>>(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        (*norms)[r] = squared_norm(row(r));
    }
    norms_ = std::move(norms);
}

std::optional<std::size_t>
EmbeddingStore::find(std::string_view id) const {
    if (!index_) {
        return std::nullopt;
    }
    auto it = index_->find(std::string(id));
    if (it == index_->end()) {
        return std::nullopt;
    }
    return it->second;
}

EmbeddingStore
EmbeddingStore::select_rows(std::span<const std::size_t> rows) const {
    std::vector<float> values;
    values.reserve(rows.size() * dim_);
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (std::size_t r : rows) {
        if (r >= rows_) {
            fail(ErrorKind::Domain, "select_rows: row " + std::to_string(r) + " out of range");
        }
        auto src = row(r);
        values.insert(values.end(), src.begin(), src.end());
        ids.push_back((*ids_)[r]);
    }
    return from_values(std::move(values), dim_, std::move(ids), encoder_tag_);
}

EmbeddingStore
load_embeddings(const std::filesystem::path& path) {
    auto file = std::make_shared<MappedFile>(path);
    const unsigned char* p = file->data();
    const std::size_t size = file->size();
    const std::string name = path.string();

    if (size < kEmbeddingHeaderBytes) {
        fail(ErrorKind::Validation, name + ": truncated header (" + std::to_string(size) + " bytes)");
    }
    if (std::memcmp(p, kEmbeddingMagic, 4) != 0) {
        fail(ErrorKind::Validation, name + ": bad magic, not a KATE embedding file");
    }
    const auto version = read_le<std::uint32_t>(p + 4);
    if (version != kEmbeddingVersion) {
        fail(ErrorKind::Validation, name + ": unsupported version " + std::to_string(version));
    }
    const auto rows = read_le<std::uint64_t>(p + 8);
    const auto dim = read_le<std::uint32_t>(p + 16);
    const auto reserved = read_le<std::uint32_t>(p + 20);
    if (dim == 0) {
        fail(ErrorKind::Validation, name + ": dim must be positive");
    }
    if (reserved != 0) {
        fail(ErrorKind::Validation, name + ": reserved header field must be 0");
    }
    const std::uint64_t max_values = (std::numeric_limits<std::uint64_t>::max() - 64) / 4;
    if (rows > max_values / dim) {
        fail(ErrorKind::Validation, name + ": header shape overflows");
    }
    const std::uint64_t matrix_bytes = rows * dim * 4;
    const std::uint64_t trailer_at = kEmbeddingHeaderBytes + matrix_bytes;
    if (size < trailer_at + 8) {
        fail(ErrorKind::Validation,
             name + ": size mismatch, header declares " + std::to_string(rows) + " x " + std::to_string(dim) +
                 " values (" + std::to_string(matrix_bytes) + " bytes) but the file holds " +
                 std::to_string(size) + " bytes");
    }
    const auto trailer_len = read_le<std::uint64_t>(p + trailer_at);
    if (trailer_len != size - trailer_at - 8) {
        fail(ErrorKind::Validation,
             name + ": size mismatch, trailer declares " + std::to_string(trailer_len) + " bytes but " +
                 std::to_string(size - trailer_at - 8) + " remain");
    }

    json trailer;
    try {
        trailer = json::parse(p + trailer_at + 8, p + size);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Validation, name + ": malformed trailer (" + e.what() + ")");
    }
    if (!trailer.is_object() || !trailer.contains("ids") || !trailer["ids"].is_array()) {
        fail(ErrorKind::Validation, name + ": trailer lacks an \"ids\" array");
    }
    std::vector<std::string> ids;
    ids.reserve(trailer["ids"].size());
    for (const auto& id : trailer["ids"]) {
        if (!id.is_string()) {
            fail(ErrorKind::Validation, name + ": trailer ids must be strings");
        }
        ids.push_back(id.get<std::string>());
    }
    if (ids.size() != rows) {
        fail(ErrorKind::Validation,
             name + ": manifest lists " + std::to_string(ids.size()) + " ids for " + std::to_string(rows) + " rows");
    }
    std::string tag;
    if (auto it = trailer.find("encoder_tag"); it != trailer.end() && it->is_string()) {
        tag = it->get<std::string>();
    }

    const std::size_t count = static_cast<std::size_t>(rows) * dim;
    if constexpr (kLittleEndianHost) {
        // Offset 24 keeps the matrix 4-byte aligned inside the page-aligned map.
        auto values = std::span<const float>(reinterpret_cast<const float*>(p + kEmbeddingHeaderBytes), count);
        check_finite(values, dim);
        EmbeddingStore store;
        store.values_ = values;
        store.backing_ = file;
        store.rows_ = rows;
        store.dim_ = dim;
        store.ids_ = std::make_shared<const std::vector<std::string>>(std::move(ids));
        store.encoder_tag_ = std::move(tag);
        store.mapped_ = true;
        store.finish_construction();
        return store;
    } else {
        std::vector<float> values(count);
        for (std::size_t i = 0; i < count; ++i) {
            values[i] = read_f32_le(p + kEmbeddingHeaderBytes + 4 * i);
        }
        return EmbeddingStore::from_values(std::move(values), dim, std::move(ids), std::move(tag));
    }
}

void
check_alignment(const EmbeddingStore& store, std::span<const ExampleRecord> records) {
    if (store.rows() != records.size()) {
        fail(ErrorKind::Validation,
             "embedding store has " + std::to_string(store.rows()) + " rows but there are " +
                 std::to_string(records.size()) + " records");
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (store.ids()[i] != records[i].id) {
            fail(ErrorKind::Validation,
                 "manifest id '" + store.ids()[i] + "' at row " + std::to_string(i) + " does not match record id '" +
                     records[i].id + "'");
        }
    }
}

EmbeddingStore
load_embeddings(const std::filesystem::path& path, std::span<const ExampleRecord> records) {
    EmbeddingStore store = load_embeddings(path);
    check_alignment(store, records);
    return store;
}

void
write_embeddings(const std::filesystem::path& path, const EmbeddingStore& store) {
    std::string header;
    header.append(kEmbeddingMagic, 4);
    append_le<std::uint32_t>(header, kEmbeddingVersion);
    append_le<std::uint64_t>(header, store.rows());
    append_le<std::uint32_t>(header, static_cast<std::uint32_t>(store.dim()));
    append_le<std::uint32_t>(header, 0);

    const std::string trailer = json{{"ids", store.ids()}, {"encoder_tag", store.encoder_tag()}}.dump();
    std::string trailer_len;
    append_le<std::uint64_t>(trailer_len, trailer.size());

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorKind::Io, "cannot write embedding file " + path.string());
    }
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    if constexpr (kLittleEndianHost) {
        out.write(reinterpret_cast<const char*>(store.values().data()),
                  static_cast<std::streamsize>(store.values().size_bytes()));
    } else {
        std::string body;
        body.reserve(store.values().size() * 4);
        for (float v : store.values()) {
            append_le<std::uint32_t>(body, std::bit_cast<std::uint32_t>(v));
        }
        out.write(body.data(), static_cast<std::streamsize>(body.size()));
    }
    out.write(trailer_len.data(), 8);
    out.write(trailer.data(), static_cast<std::streamsize>(trailer.size()));
    if (!out) {
        fail(ErrorKind::Io, "write failed for " + path.string());
    }
}

// ---------------------------------------------------------------------------
// subsampling

std::vector<std::size_t>
subsample_indices(std::size_t population, std::size_t size, std::uint64_t seed) {
    if (size < 1 || size > population) {
        fail(ErrorKind::Domain,
             "subsample size " + std::to_string(size) + " outside [1, " + std::to_string(population) + "]");
    }
    if (size == population) {
        std::vector<std::size_t> all(population);
        for (std::size_t i = 0; i < population; ++i) {
            all[i] = i;
        }
        return all;
    }
    auto picked = sample_prefix(population, size, seed);
    std::sort(picked.begin(), picked.end());
    return picked;
}

std::vector<ExampleRecord>
subsample(std::span<const ExampleRecord> records, std::size_t size, std::uint64_t seed) {
    std::vector<ExampleRecord> out;
    out.reserve(size);
    for (std::size_t i : subsample_indices(records.size(), size, seed)) {
        out.push_back(records[i]);
    }
    return out;
}

}  // namespace kate
