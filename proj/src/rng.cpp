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

#include "kate/rng.hpp"

#include <cassert>

namespace kate {

std::uint64_t
splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t
derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ splitmix64(a + 1));
    s = splitmix64(s ^ splitmix64(b + 1));
    return s;
}

std::uint64_t
Rng::uniform_below(std::uint64_t n) {
    assert(n > 0);
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t x = engine_();
        if (x >= threshold) {
            return x % n;
        }
    }
}

std::size_t
PermutationSampler::at(std::size_t i) const {
    auto it = swapped_.find(i);
    return it == swapped_.end() ? i : it->second;
}

std::size_t
PermutationSampler::draw() {
    assert(pos_ < n_);
    const std::size_t j = pos_ + static_cast<std::size_t>(rng_.uniform_below(n_ - pos_));
    const std::size_t picked = at(j);
    if (j != pos_) {
        swapped_[j] = at(pos_);
    }
    swapped_.erase(pos_);
    ++pos_;
    return picked;
}

std::vector<std::size_t>
sample_prefix(std::size_t n, std::size_t m, std::uint64_t seed) {
    assert(m <= n);
    PermutationSampler sampler(n, seed);
    std::vector<std::size_t> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        out.push_back(sampler.draw());
    }
    return out;
}

}  // namespace kate
