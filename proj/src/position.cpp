// SPDX-License-Identifier: Apache-2.0
#include "logo/position.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "logo/error.hpp"
#include "logo/rng.hpp"

namespace logo {

std::string_view to_string(PositionStrategy s) noexcept {
    return s == PositionStrategy::continuous ? "continuous" : "sparse";
}

PositionStrategy parse_position_strategy(std::string_view name) {
    if (name == "continuous") return PositionStrategy::continuous;
    if (name == "sparse") return PositionStrategy::sparse;
    fail(ErrorKind::invalid_argument, "unknown position strategy '" + std::string(name) + "'");
}

PositionMap PositionMap::from_biases(std::int64_t target_len, std::vector<std::int64_t> biases,
                                     PositionStrategy strategy, std::size_t chunk_len, std::uint64_t seed) {
    require(!biases.empty(), ErrorKind::invalid_argument, "position map needs at least one token");
    require(chunk_len >= 1, ErrorKind::invalid_argument, "position map chunk_len must be at least 1");
    const std::size_t k = biases.size();
    for (std::size_t i = 0; i < k; ++i) {
        require(biases[i] >= 0, ErrorKind::invalid_argument, "position bias must be non-negative");
        if (i > 0 && biases[i] < biases[i - 1]) {
            fail(ErrorKind::invalid_argument, "position biases must be nondecreasing (bias " + std::to_string(i) + ")");
        }
    }
    const std::int64_t last = static_cast<std::int64_t>(k - 1) + biases.back();
    require(last == target_len, ErrorKind::invalid_argument,
            "final position " + std::to_string(last) + " does not equal target length " + std::to_string(target_len));
    PositionMap m;
    m.target_len_ = target_len;
    m.biases_ = std::move(biases);
    m.strategy_ = strategy;
    m.chunk_len_ = chunk_len;
    m.seed_ = seed;
    return m;
}

std::vector<std::int64_t> PositionMap::indices() const {
    std::vector<std::int64_t> out(biases_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = index(i);
    return out;
}

std::size_t position_chunk_count(std::size_t k, std::size_t chunk_len) {
    require(chunk_len >= 1, ErrorKind::invalid_argument, "chunk_len must be at least 1");
    return std::max<std::size_t>(1, (k + chunk_len - 1) / chunk_len);
}

namespace {

void check_lengths(std::size_t k, std::int64_t target_len) {
    require(k >= 1, ErrorKind::invalid_argument, "real length must be at least 1");
    require(target_len > static_cast<std::int64_t>(k), ErrorKind::invalid_argument,
            "target length " + std::to_string(target_len) + " must exceed real length " + std::to_string(k));
}

}  // namespace

PositionMap synth_continuous(std::size_t k, std::int64_t target_len, std::size_t chunk_len, std::uint64_t seed) {
    check_lengths(k, target_len);
    chunk_len = std::min(chunk_len, k);
    const std::size_t n_chunks = position_chunk_count(k, chunk_len);
    const auto kk = static_cast<std::int64_t>(k);
    // Total bias carried by the last token: (k-1) + slack == K.
    const std::int64_t slack = target_len - kk + 1;
    const double per_chunk = static_cast<double>(target_len - kk) / static_cast<double>(n_chunks);

    Rng rng(seed);
    std::vector<double> raw(n_chunks);
    for (auto& r : raw) r = rng.uniform(1.0, std::max(1.0, per_chunk));
    const double raw_sum = std::accumulate(raw.begin(), raw.end(), 0.0);

    // Gaps are at least 1 when the slack allows it; the rounding remainder
    // goes to the last gap so the final chunk lands on K.
    const auto n = static_cast<std::int64_t>(n_chunks);
    const std::int64_t base = slack >= n ? 1 : 0;
    const std::int64_t extra = slack - base * n;
    std::vector<std::int64_t> gaps(n_chunks);
    std::int64_t used = 0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        gaps[c] = base + static_cast<std::int64_t>(std::floor(static_cast<double>(extra) * raw[c] / raw_sum));
        used += gaps[c];
    }
    // floor() can overshoot by an ulp-sized margin only in pathological
    // cases; pull the excess back off the largest gaps.
    while (used > slack) {
        auto it = std::max_element(gaps.begin(), gaps.end());
        --*it;
        --used;
    }
    gaps.back() += slack - used;

    std::vector<std::int64_t> biases(k);
    std::int64_t chunk_bias = 0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        chunk_bias += gaps[c];
        const std::size_t first = c * chunk_len;
        const std::size_t last = std::min(k, first + chunk_len);
        std::fill(biases.begin() + static_cast<std::ptrdiff_t>(first), biases.begin() + static_cast<std::ptrdiff_t>(last),
                  chunk_bias);
    }
    return PositionMap::from_biases(target_len, std::move(biases), PositionStrategy::continuous, chunk_len, seed);
}

PositionMap synth_sparse(std::size_t k, std::int64_t target_len, std::size_t chunk_len, std::uint64_t seed) {
    check_lengths(k, target_len);
    chunk_len = std::min(chunk_len, k);
    const std::size_t n_chunks = position_chunk_count(k, chunk_len);
    const auto kk = static_cast<std::int64_t>(k);
    const std::int64_t slack = target_len - kk + 1;

    Rng rng(seed);
    // Draws lie in [0, K - k]; a counting pass sorts them.
    std::vector<std::uint32_t> counts(static_cast<std::size_t>(target_len - kk) + 1, 0);
    for (std::size_t i = 0; i < k; ++i) {
        const auto ordinal = static_cast<std::int64_t>(i / chunk_len);
        // Upper bound ordinal * (K - k) / N, rounded down. The first chunk
        // (and any chunk whose bound falls below 1) keeps bias 0.
        const std::int64_t bound = ordinal * (target_len - kk) / static_cast<std::int64_t>(n_chunks);
        ++counts[static_cast<std::size_t>(bound >= 1 ? rng.between(1, bound) : 0)];
    }
    std::vector<std::int64_t> biases;
    biases.reserve(k);
    for (std::size_t v = 0; v < counts.size(); ++v) {
        biases.insert(biases.end(), counts[v], std::min(static_cast<std::int64_t>(v), slack));
    }
    biases.back() = slack;
    return PositionMap::from_biases(target_len, std::move(biases), PositionStrategy::sparse, chunk_len, seed);
}

PositionMap synth_position_map(PositionStrategy strategy, std::size_t k, std::int64_t target_len,
                               std::size_t chunk_len, std::uint64_t seed) {
    return strategy == PositionStrategy::continuous ? synth_continuous(k, target_len, chunk_len, seed)
                                                    : synth_sparse(k, target_len, chunk_len, seed);
}

StrategyRatio parse_strategy_ratio(std::string_view text) {
    const auto colon = text.find(':');
    StrategyRatio r;
    auto parse = [&](std::string_view part, unsigned& out) {
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
        return ec == std::errc{} && ptr == part.data() + part.size() && !part.empty();
    };
    const bool ok = colon != std::string_view::npos && parse(text.substr(0, colon), r.continuous) &&
                    parse(text.substr(colon + 1), r.sparse);
    require(ok, ErrorKind::invalid_argument, "strategy ratio must look like '9:1', got '" + std::string(text) + "'");
    require(r.continuous + r.sparse > 0, ErrorKind::invalid_argument, "strategy ratio cannot be 0:0");
    return r;
}

PositionStrategy scheduled_strategy(std::size_t ordinal, StrategyRatio ratio) {
    const std::size_t block = ratio.continuous + ratio.sparse;
    require(block > 0, ErrorKind::invalid_argument, "strategy ratio cannot be 0:0");
    return ordinal % block < ratio.continuous ? PositionStrategy::continuous : PositionStrategy::sparse;
}

std::vector<PositionMap> synth_mixed(std::size_t count, StrategyRatio ratio, std::size_t k, std::int64_t target_len,
                                     std::size_t chunk_len, std::uint64_t seed) {
    std::vector<PositionMap> out;
    out.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        out.push_back(synth_position_map(scheduled_strategy(j, ratio), k, target_len, chunk_len,
                                         derive_seed(seed, "position_map", j)));
    }
    return out;
}

double chi_square_critical(std::size_t dof, double p) {
    require(dof >= 1, ErrorKind::invalid_argument, "chi-square needs at least one degree of freedom");
    boost::math::chi_squared dist(static_cast<double>(dof));
    return boost::math::quantile(boost::math::complement(dist, p));
}

double chi_square_survival(double stat, std::size_t dof) {
    require(dof >= 1, ErrorKind::invalid_argument, "chi-square needs at least one degree of freedom");
    boost::math::chi_squared dist(static_cast<double>(dof));
    return boost::math::cdf(boost::math::complement(dist, std::max(0.0, stat)));
}

CoverageReport coverage_report(std::span<const PositionMap> maps, std::size_t bins) {
    require(!maps.empty(), ErrorKind::invalid_argument, "coverage report needs at least one position map");
    require(bins >= 1, ErrorKind::invalid_argument, "coverage report needs at least one bin");
    const std::int64_t target = maps.front().target_len();
    for (const auto& m : maps) {
        require(m.target_len() == target, ErrorKind::invalid_argument, "all position maps must share target length");
    }

    CoverageReport r;
    r.target_len = target;
    r.map_count = maps.size();
    r.histogram.assign(bins, 0);
    const auto width = static_cast<std::uint64_t>(target) + 1;
    std::vector<char> seen(width, 0);

    for (const auto& m : maps) {
        for (std::size_t i = 0; i < m.real_len(); ++i) {
            const std::int64_t idx = m.index(i);
            seen[static_cast<std::size_t>(idx)] = 1;
            const auto d = static_cast<std::uint64_t>(target - idx);
            ++r.histogram[static_cast<std::size_t>(d * bins / width)];
            ++r.pairs;
            if (i + 1 < m.real_len()) ++r.step_counts[m.index(i + 1) - idx];
        }
    }

    std::size_t run = 0;
    for (char s : seen) {
        if (s) {
            ++r.visited;
            run = 0;
        } else {
            ++r.unvisited;
            r.max_gap = std::max(r.max_gap, ++run);
        }
    }

    // Expected count per bin is proportional to the number of integer
    // distances each bin spans.
    double stat = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        const std::uint64_t lo = (b * width + bins - 1) / bins;
        const std::uint64_t hi = ((b + 1) * width + bins - 1) / bins;
        const double expected = static_cast<double>(r.pairs) * static_cast<double>(hi - lo) / static_cast<double>(width);
        if (expected > 0.0) {
            const double diff = static_cast<double>(r.histogram[b]) - expected;
            stat += diff * diff / expected;
        }
    }
    r.uniformity_stat = stat;
    r.degrees_of_freedom = bins > 1 ? bins - 1 : 0;
    if (r.degrees_of_freedom > 0) {
        r.critical_value_p01 = chi_square_critical(r.degrees_of_freedom, 0.01);
        r.p_value = chi_square_survival(stat, r.degrees_of_freedom);
    } else {
        r.p_value = 1.0;
    }
    return r;
}

}  // namespace logo
