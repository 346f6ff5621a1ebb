// SPDX-License-Identifier: Apache-2.0
//
// Synthetic positional indices: a real sequence of k tokens is given
// positions i + b_i that end exactly at a target length K, so short data
// can stand in for long data during training.
//
// Two strategies:
//  - continuous: every token of a chunk shares one bias, so positions stay
//    consecutive inside a chunk and jump between chunks;
//  - sparse: every token draws its own bias, bounded by
//    chunk_ordinal * (K - k) / N, then the draws are sorted.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

namespace logo {

enum class PositionStrategy { continuous, sparse };

std::string_view to_string(PositionStrategy s) noexcept;
PositionStrategy parse_position_strategy(std::string_view name);

class PositionMap {
public:
    // Validates every invariant: biases non-negative and nondecreasing,
    // final index == target_len, all indices within [0, target_len].
    static PositionMap from_biases(std::int64_t target_len, std::vector<std::int64_t> biases,
                                   PositionStrategy strategy, std::size_t chunk_len, std::uint64_t seed);

    std::size_t real_len() const noexcept { return biases_.size(); }
    std::int64_t target_len() const noexcept { return target_len_; }
    std::span<const std::int64_t> biases() const noexcept { return biases_; }
    std::int64_t bias(std::size_t i) const { return biases_[i]; }
    std::int64_t index(std::size_t i) const { return static_cast<std::int64_t>(i) + biases_[i]; }
    std::vector<std::int64_t> indices() const;
    PositionStrategy strategy() const noexcept { return strategy_; }
    std::size_t chunk_len() const noexcept { return chunk_len_; }
    std::uint64_t seed() const noexcept { return seed_; }

    friend bool operator==(const PositionMap&, const PositionMap&) = default;

private:
    PositionMap() = default;

    std::int64_t target_len_ = 0;
    std::vector<std::int64_t> biases_;
    PositionStrategy strategy_ = PositionStrategy::continuous;
    std::size_t chunk_len_ = 0;
    std::uint64_t seed_ = 0;
};

// ceil(k / chunk_len), at least 1.
std::size_t position_chunk_count(std::size_t k, std::size_t chunk_len);

PositionMap synth_continuous(std::size_t k, std::int64_t target_len, std::size_t chunk_len, std::uint64_t seed);
PositionMap synth_sparse(std::size_t k, std::int64_t target_len, std::size_t chunk_len, std::uint64_t seed);
PositionMap synth_position_map(PositionStrategy strategy, std::size_t k, std::int64_t target_len,
                               std::size_t chunk_len, std::uint64_t seed);

struct StrategyRatio {
    unsigned continuous = 9;
    unsigned sparse = 1;
};

StrategyRatio parse_strategy_ratio(std::string_view text);  // "9:1"

// Fixed interleaving: within each block of (continuous + sparse) ordinals
// the continuous ones come first.
PositionStrategy scheduled_strategy(std::size_t ordinal, StrategyRatio ratio);

// Map j uses scheduled_strategy(j) and seed derive_seed(seed, "position_map", j).
std::vector<PositionMap> synth_mixed(std::size_t count, StrategyRatio ratio, std::size_t k, std::int64_t target_len,
                                     std::size_t chunk_len, std::uint64_t seed);

struct CoverageReport {
    std::int64_t target_len = 0;
    std::size_t map_count = 0;

    // Absolute coverage of [0, target_len].
    std::size_t visited = 0;
    std::size_t unvisited = 0;
    std::size_t max_gap = 0;  // longest run of never-visited indices

    // Relative distances d = target_len - index(i) between the final
    // position and every token, pooled over all maps; bins split
    // [0, target_len] evenly. Counts sum to `pairs`.
    std::vector<std::uint64_t> histogram;
    std::uint64_t pairs = 0;
    double uniformity_stat = 0.0;  // chi-square against equal bin counts
    std::size_t degrees_of_freedom = 0;
    double critical_value_p01 = 0.0;
    double p_value = 0.0;

    // Consecutive index differences index(i+1) - index(i) and their counts.
    std::map<std::int64_t, std::uint64_t> step_counts;
};

CoverageReport coverage_report(std::span<const PositionMap> maps, std::size_t bins);

// Upper-tail critical value of the chi-square distribution.
double chi_square_critical(std::size_t dof, double p);
double chi_square_survival(double stat, std::size_t dof);

}  // namespace logo
