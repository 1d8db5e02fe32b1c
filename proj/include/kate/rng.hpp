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

// Portable randomness for every seeded operation in the project.
//
// Generator: std::mt19937_64. Its output sequence for a given seed is fixed
// by the C++ standard, so results do not depend on the standard library in
// use. The std:: distributions are NOT portable and are never used here.
//
// Bounded draws: uniform_below(n) rejects raw outputs below (2^64 - n) mod n
// and returns x mod n, which is exactly uniform.
//
// Seed splitting: derive_seed(master, a, b) folds each component into the
// state with the SplitMix64 finalizer:
//     s = mix(master); s = mix(s ^ mix(a + 1)); s = mix(s ^ mix(b + 1))
// where mix is SplitMix64's (x += 0x9e3779b97f4a7c15; xor-shift-multiply).

#include <cstddef>
#include <cstdint>
#include <random>
#include <unordered_map>
#include <vector>

namespace kate {

std::uint64_t
splitmix64(std::uint64_t x) noexcept;

std::uint64_t
derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) noexcept;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {
    }

    std::uint64_t
    next() {
        return engine_();
    }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t
    uniform_below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

// Lazy Fisher-Yates over [0, n): draw() returns the next element of a
// uniformly random permutation in O(1) amortized time and memory
// proportional to the number of draws. The first m draws equal the first m
// positions of the dense in-place shuffle
//     for i in 0..n-1: swap(a[i], a[i + uniform_below(n - i)])
// so prefixes taken with the same seed are nested.
class PermutationSampler {
public:
    PermutationSampler(std::size_t n, std::uint64_t seed) : n_(n), rng_(seed) {
    }

    std::size_t
    draw();

    std::size_t
    remaining() const noexcept {
        return n_ - pos_;
    }

private:
    std::size_t
    at(std::size_t i) const;

    std::size_t n_;
    std::size_t pos_ = 0;
    Rng rng_;
    std::unordered_map<std::size_t, std::size_t> swapped_;
};

// First m elements of the seeded permutation of [0, n).
std::vector<std::size_t>
sample_prefix(std::size_t n, std::size_t m, std::uint64_t seed);

}  // namespace kate
