// SPDX-License-Identifier: Apache-2.0
//
// Reference-free preference objectives on per-token log-probabilities.
//
//   r(y)      = (beta / |y|) * sum_t log p(y_t)
//   arg       = r(y_w) - (1/M) * sum_j r(y_l_j) - gamma
//   loss      = -log sigmoid(arg)          (M = 1 is the SimPO loss)
//   total     = loss + lambda * sft
//   sft       = -(1/|y_w|) * sum_t log p(y_w_t)      (SftSign::nll)
//             = +(1/|y_w|) * sum_t log p(y_w_t)      (SftSign::literal)
//
// Each dis-preference is normalized by its own length.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace logo {

struct SequenceScore {
    std::vector<double> token_logprobs;

    std::size_t length() const noexcept { return token_logprobs.size(); }
    // True when some entry is positive, which no normalized model produces.
    bool has_positive_logprob() const noexcept;
};

struct LogoBatchItem {
    SequenceScore preferred;
    std::vector<SequenceScore> dispreferred;
};

enum class SftSign { nll, literal };

struct LogoConfig {
    double beta = 10.0;
    double gamma = 3.0;
    double lambda = 0.1;
    SftSign sft_sign = SftSign::nll;
};

// Named hyperparameter presets: llama3 (10, 3), mistral (2.5, 0.25),
// llama2 (3, 0.6); lambda 0.1 for all.
LogoConfig profile(std::string_view name);
std::vector<std::string_view> profile_names();

void validate(const LogoConfig& config);
void validate(const SequenceScore& score, std::string_view what);
void validate(const LogoBatchItem& item);

struct LossBreakdown {
    double total = 0.0;
    double preference_reward = 0.0;
    double mean_dispref_reward = 0.0;
    double margin = 0.0;
    double sft_term = 0.0;  // unscaled; total includes lambda * sft_term
    double sigmoid_arg = 0.0;
};

// softplus(-x) = -log sigmoid(x), stable for any finite x.
double neg_log_sigmoid(double x) noexcept;
double sigmoid(double x) noexcept;

double implicit_reward(const SequenceScore& score, double beta);
LossBreakdown simpo_loss(const SequenceScore& preferred, const SequenceScore& dispreferred, const LogoConfig& config);
LossBreakdown logo_loss(const LogoBatchItem& item, const LogoConfig& config);
LossBreakdown logo_loss_regularized(const LogoBatchItem& item, const LogoConfig& config);

struct ItemGradient {
    std::vector<double> preferred;
    std::vector<std::vector<double>> dispreferred;
};

// d(logo_loss_regularized.total) / d(token logprob).
ItemGradient loss_gradient(const LogoBatchItem& item, const LogoConfig& config);

struct GradCheckResult {
    double max_relative_error = 0.0;
    double max_absolute_error = 0.0;
    std::size_t coordinates = 0;
};

// Central differences of logo_loss_regularized against loss_gradient.
// Relative error per coordinate: |a - n| / max(|a|, |n|, 1e-8).
GradCheckResult finite_difference_check(const LogoBatchItem& item, const LogoConfig& config, double eps = 1e-6);

// Seeded random item with `m` dis-preferences for gradient checks. Lengths
// are drawn from [4, 32]; log-probabilities share one per-item base in
// [-2, -0.5] plus per-token jitter in [-0.25, 0.25], which keeps the
// sigmoid away from saturation for every shipped profile.
LogoBatchItem random_batch_item(std::uint64_t seed, std::size_t m);

struct MarginHistogram {
    std::vector<double> edges;  // bins + 1 edges
    std::vector<std::size_t> counts;
    std::vector<double> margins;
    double mean = 0.0;
    double stddev = 0.0;  // population
    double min = 0.0;
    double max = 0.0;
};

// Equal-width bins over [min, max]; a degenerate range becomes one spike
// bin of width 1 centred on the value.
MarginHistogram margin_histogram(std::span<const LogoBatchItem> items, const LogoConfig& config, std::size_t bins);
MarginHistogram histogram_of(std::vector<double> values, std::size_t bins);

}  // namespace logo
