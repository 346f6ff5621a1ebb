// SPDX-License-Identifier: Apache-2.0
//
// Seed derivation and a small portable random source.
//
// Every stage of the pipeline draws from its own stream:
//   stage_seed = splitmix64(user_seed XOR fnv1a64(stage_name))
// and, for per-item streams, splitmix64(stage_seed XOR splitmix64(index)).
// std::mt19937_64 output is fixed by the standard; the bounded and real
// draws below avoid the implementation-defined <random> distributions so
// outputs are identical across standard libraries.
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace logo {

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::uint64_t splitmix64(std::uint64_t x) noexcept;

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage, std::uint64_t index) noexcept;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    // Uniform integer in [lo, hi], inclusive.
    std::int64_t between(std::int64_t lo, std::int64_t hi);

    // Uniform double in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // `count` distinct values from [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count);

private:
    std::mt19937_64 engine_;
};

}  // namespace logo
