// SPDX-License-Identifier: Apache-2.0
//
// A bigram categorical model trained on the regularized LOGO objective by
// full-batch gradient descent. Small enough that every gradient is exact
// and checkable against finite differences.
//
// State of response token t: the previous response token, or for t = 0 the
// last context token (state 0 when the context is empty). S = V.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logo/objective.hpp"
#include "logo/pref_synth.hpp"

namespace logo {

using TokenSeq = std::vector<std::uint32_t>;

class TinyModel {
public:
    static constexpr std::size_t kMaxVocab = 256;

    // Logits initialized from U(-init_scale, init_scale) with the given seed.
    static TinyModel random(std::size_t vocab_size, std::uint64_t seed, double init_scale = 0.1);
    static TinyModel from_logits(std::size_t vocab_size, std::vector<double> logits);

    std::size_t vocab_size() const noexcept { return vocab_; }
    std::size_t state_count() const noexcept { return vocab_; }
    std::span<const double> logits() const noexcept { return logits_; }
    std::span<double> logits() noexcept { return logits_; }
    double logit(std::size_t state, std::size_t token) const { return logits_[state * vocab_ + token]; }
    double& logit(std::size_t state, std::size_t token) { return logits_[state * vocab_ + token]; }

    std::size_t state_for(const TokenSeq& context, const TokenSeq& response, std::size_t t) const;
    // log-softmax of one state's logit row.
    std::vector<double> log_probs(std::size_t state) const;
    bool all_finite() const noexcept;

    friend bool operator==(const TinyModel&, const TinyModel&) = default;

private:
    TinyModel() = default;

    std::size_t vocab_ = 0;
    std::vector<double> logits_;  // S x V, row-major
};

SequenceScore score_sequence(const TinyModel& model, const TokenSeq& context, const TokenSeq& response);

struct ToyExample {
    TokenSeq context;
    TokenSeq preferred;
    std::vector<TokenSeq> dispreferred;
};

struct ToyMetrics {
    double loss = 0.0;  // batch mean of the regularized total
    double margin = 0.0;
    double pref_reward = 0.0;
    double dispref_reward = 0.0;
    double pref_nll = 0.0;  // mean per-token NLL of the preferred sequences
};

ToyMetrics evaluate(const TinyModel& model, std::span<const ToyExample> batch, const LogoConfig& config);

// Per-example margins against every dis-preference of each example.
std::vector<double> example_margins(const TinyModel& model, std::span<const ToyExample> batch, const LogoConfig& config);

// Gradient of evaluate().loss with respect to the logits, same layout.
std::vector<double> objective_gradient(const TinyModel& model, std::span<const ToyExample> batch,
                                       const LogoConfig& config);

struct StepRecord {
    std::size_t step = 0;
    double loss = 0.0;
    double margin = 0.0;
    double pref_reward = 0.0;
    double dispref_reward = 0.0;
    double pref_nll = 0.0;
    double lr_used = 0.0;
    std::size_t halvings = 0;
    bool accepted = true;
};

struct TrainState {
    std::size_t step = 0;
    double learning_rate = 0.0;
    ToyMetrics initial;
    std::vector<StepRecord> history;
};

inline constexpr std::size_t kMaxHalvings = 20;

// One descent step from `lr`. If the loss rises, lr is halved up to
// kMaxHalvings times; a step that still raises the loss is rejected and
// the model is left unchanged. Non-finite gradients or losses throw.
StepRecord train_step(TinyModel& model, std::span<const ToyExample> batch, const LogoConfig& config, double lr);

struct TrainResult {
    TinyModel model;
    TrainState state;
};

// `max_dispreferred` truncates each example's dis-preference list (0 keeps all).
TrainResult run_training(std::span<const ToyExample> corpus, const LogoConfig& config, std::size_t steps, double lr,
                         std::uint64_t seed, std::size_t vocab_size, std::size_t max_dispreferred = 0);

std::vector<ToyExample> truncate_dispreferred(std::span<const ToyExample> corpus, std::size_t max_dispreferred);

struct GradientCheck {
    double max_relative_error = 0.0;
    double max_absolute_error = 0.0;
    std::size_t coordinates = 0;
};

// Central differences on the end-to-end objective over every logit.
// Relative error per coordinate: |a - n| / max(|a|, |n|, floor).
GradientCheck model_gradient_check(const TinyModel& model, std::span<const ToyExample> batch, const LogoConfig& config,
                                   double eps = 1e-6, double floor = 1e-6);

// Seeded fixture: context tokens from [1, 8), preferred responses from
// [8, 16), and two dis-preference modes from [16, 24) and [24, 32).
// vocab_size must be at least 32.
std::vector<ToyExample> make_toy_fixture(std::size_t count, std::uint64_t seed, std::size_t vocab_size = 32);

// Byte-level view of a training sample for a V = 256 model: the last
// `max_len` bytes of the question as context and the first `max_len` bytes
// of each response.
ToyExample to_toy_example(const TrainingSample& sample, std::size_t max_len = 64);
TokenSeq bytes_to_tokens(std::string_view text, std::size_t max_len);

// Greedy byte-level decoding from a V = 256 model.
class ToyModelProvider final : public GenerationProvider {
public:
    ToyModelProvider(TinyModel model, std::size_t max_new_tokens);
    std::string generate(const GenerationRequest& request) const override;

private:
    TinyModel model_;
    std::size_t max_new_tokens_;
};

}  // namespace logo
