// SPDX-License-Identifier: Apache-2.0
#include "logo/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "logo/error.hpp"
#include "logo/rng.hpp"

namespace logo {

bool SequenceScore::has_positive_logprob() const noexcept {
    return std::any_of(token_logprobs.begin(), token_logprobs.end(), [](double v) { return v > 0.0; });
}

LogoConfig profile(std::string_view name) {
    if (name == "llama3") return {10.0, 3.0, 0.1, SftSign::nll};
    if (name == "mistral") return {2.5, 0.25, 0.1, SftSign::nll};
    if (name == "llama2") return {3.0, 0.6, 0.1, SftSign::nll};
    fail(ErrorKind::invalid_argument, "unknown profile '" + std::string(name) + "' (expected llama3, mistral or llama2)");
}

std::vector<std::string_view> profile_names() { return {"llama3", "mistral", "llama2"}; }

void validate(const LogoConfig& c) {
    require(std::isfinite(c.beta) && c.beta > 0.0, ErrorKind::invalid_argument, "beta must be positive and finite");
    require(std::isfinite(c.gamma) && c.gamma >= 0.0, ErrorKind::invalid_argument, "gamma must be non-negative");
    require(std::isfinite(c.lambda) && c.lambda >= 0.0, ErrorKind::invalid_argument, "lambda must be non-negative");
}

void validate(const SequenceScore& score, std::string_view what) {
    require(score.length() >= 1, ErrorKind::invalid_argument, std::string(what) + " has no tokens");
    for (double v : score.token_logprobs) {
        if (!std::isfinite(v)) fail(ErrorKind::numeric, std::string(what) + " has a non-finite log-probability");
    }
}

void validate(const LogoBatchItem& item) {
    validate(item.preferred, "preferred sequence");
    require(!item.dispreferred.empty(), ErrorKind::invalid_argument, "item needs at least one dis-preferred sequence");
    for (std::size_t j = 0; j < item.dispreferred.size(); ++j) {
        validate(item.dispreferred[j], "dis-preferred sequence " + std::to_string(j));
    }
}

double neg_log_sigmoid(double x) noexcept {
    // softplus(-x) = max(-x, 0) + log1p(exp(-|x|))
    return std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

double mean_logprob(const SequenceScore& s) {
    return std::accumulate(s.token_logprobs.begin(), s.token_logprobs.end(), 0.0) / static_cast<double>(s.length());
}

LossBreakdown core(const LogoBatchItem& item, const LogoConfig& config) {
    validate(config);
    validate(item);
    LossBreakdown b;
    b.preference_reward = implicit_reward(item.preferred, config.beta);
    double sum = 0.0;
    for (const auto& d : item.dispreferred) sum += implicit_reward(d, config.beta);
    b.mean_dispref_reward = sum / static_cast<double>(item.dispreferred.size());
    b.margin = b.preference_reward - b.mean_dispref_reward;
    b.sigmoid_arg = b.margin - config.gamma;
    b.total = neg_log_sigmoid(b.sigmoid_arg);
    require(std::isfinite(b.total), ErrorKind::numeric, "loss is not finite");
    return b;
}

}  // namespace

double implicit_reward(const SequenceScore& score, double beta) {
    validate(score, "sequence");
    return beta * mean_logprob(score);
}

LossBreakdown simpo_loss(const SequenceScore& preferred, const SequenceScore& dispreferred, const LogoConfig& config) {
    validate(config);
    validate(preferred, "preferred sequence");
    validate(dispreferred, "dis-preferred sequence");
    LossBreakdown b;
    b.preference_reward = implicit_reward(preferred, config.beta);
    b.mean_dispref_reward = implicit_reward(dispreferred, config.beta);
    b.margin = b.preference_reward - b.mean_dispref_reward;
    b.sigmoid_arg = b.margin - config.gamma;
    b.total = neg_log_sigmoid(b.sigmoid_arg);
    require(std::isfinite(b.total), ErrorKind::numeric, "loss is not finite");
    return b;
}

LossBreakdown logo_loss(const LogoBatchItem& item, const LogoConfig& config) { return core(item, config); }

LossBreakdown logo_loss_regularized(const LogoBatchItem& item, const LogoConfig& config) {
    LossBreakdown b = core(item, config);
    const double avg = mean_logprob(item.preferred);
    b.sft_term = config.sft_sign == SftSign::nll ? -avg : avg;
    if (config.lambda != 0.0) b.total += config.lambda * b.sft_term;
    require(std::isfinite(b.total), ErrorKind::numeric, "regularized loss is not finite");
    return b;
}

ItemGradient loss_gradient(const LogoBatchItem& item, const LogoConfig& config) {
    const LossBreakdown b = core(item, config);
    const double s = sigmoid(b.sigmoid_arg);
    const double m = static_cast<double>(item.dispreferred.size());
    const double len_w = static_cast<double>(item.preferred.length());
    const double sft_sign = config.sft_sign == SftSign::nll ? -1.0 : 1.0;

    ItemGradient g;
    g.preferred.assign(item.preferred.length(), (s - 1.0) * config.beta / len_w + sft_sign * config.lambda / len_w);
    for (const auto& d : item.dispreferred) {
        const double len_l = static_cast<double>(d.length());
        g.dispreferred.emplace_back(d.length(), (1.0 - s) * config.beta / (m * len_l));
    }
    return g;
}

GradCheckResult finite_difference_check(const LogoBatchItem& item, const LogoConfig& config, double eps) {
    const ItemGradient analytic = loss_gradient(item, config);
    GradCheckResult r;
    LogoBatchItem probe = item;
    auto check = [&](double& slot, double a) {
        const double saved = slot;
        slot = saved + eps;
        const double up = logo_loss_regularized(probe, config).total;
        slot = saved - eps;
        const double down = logo_loss_regularized(probe, config).total;
        slot = saved;
        const double numeric = (up - down) / (2.0 * eps);
        const double abs_err = std::abs(a - numeric);
        const double rel_err = abs_err / std::max({std::abs(a), std::abs(numeric), 1e-8});
        r.max_absolute_error = std::max(r.max_absolute_error, abs_err);
        r.max_relative_error = std::max(r.max_relative_error, rel_err);
        ++r.coordinates;
    };
    for (std::size_t t = 0; t < probe.preferred.length(); ++t) {
        check(probe.preferred.token_logprobs[t], analytic.preferred[t]);
    }
    for (std::size_t j = 0; j < probe.dispreferred.size(); ++j) {
        for (std::size_t t = 0; t < probe.dispreferred[j].length(); ++t) {
            check(probe.dispreferred[j].token_logprobs[t], analytic.dispreferred[j][t]);
        }
    }
    return r;
}

LogoBatchItem random_batch_item(std::uint64_t seed, std::size_t m) {
    require(m >= 1, ErrorKind::invalid_argument, "M must be at least 1");
    Rng rng(seed);
    const double base = rng.uniform(-2.0, -0.5);
    auto sequence = [&] {
        SequenceScore s;
        s.token_logprobs.resize(static_cast<std::size_t>(rng.between(4, 32)));
        for (auto& v : s.token_logprobs) v = base + rng.uniform(-0.25, 0.25);
        return s;
    };
    LogoBatchItem item;
    item.preferred = sequence();
    for (std::size_t j = 0; j < m; ++j) item.dispreferred.push_back(sequence());
    return item;
}

MarginHistogram histogram_of(std::vector<double> values, std::size_t bins) {
    require(!values.empty(), ErrorKind::invalid_argument, "histogram needs at least one value");
    require(bins >= 1, ErrorKind::invalid_argument, "histogram needs at least one bin");
    MarginHistogram h;
    const double n = static_cast<double>(values.size());
    h.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - h.mean) * (v - h.mean);
    h.stddev = std::sqrt(ss / n);
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    h.min = *lo_it;
    h.max = *hi_it;

    if (h.min == h.max) {
        h.edges = {h.min - 0.5, h.min + 0.5};
        h.counts = {values.size()};
    } else {
        const double width = (h.max - h.min) / static_cast<double>(bins);
        h.edges.resize(bins + 1);
        for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = h.min + width * static_cast<double>(i);
        h.edges.back() = h.max;
        h.counts.assign(bins, 0);
        for (double v : values) {
            auto b = static_cast<std::size_t>((v - h.min) / width);
            ++h.counts[std::min(b, bins - 1)];
        }
    }
    h.margins = std::move(values);
    return h;
}

MarginHistogram margin_histogram(std::span<const LogoBatchItem> items, const LogoConfig& config, std::size_t bins) {
    require(!items.empty(), ErrorKind::invalid_argument, "margin histogram needs at least one item");
    std::vector<double> margins;
    margins.reserve(items.size());
    for (const auto& item : items) margins.push_back(logo_loss(item, config).margin);
    return histogram_of(std::move(margins), bins);
}

}  // namespace logo
