// SPDX-License-Identifier: Apache-2.0
#include "logo/toy_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "logo/error.hpp"
#include "logo/rng.hpp"

namespace logo {

TinyModel TinyModel::random(std::size_t vocab_size, std::uint64_t seed, double init_scale) {
    require(vocab_size >= 1 && vocab_size <= kMaxVocab, ErrorKind::invalid_argument,
            "vocab_size must lie in [1, 256]");
    TinyModel m;
    m.vocab_ = vocab_size;
    m.logits_.resize(vocab_size * vocab_size);
    Rng rng(seed);
    for (auto& v : m.logits_) v = rng.uniform(-init_scale, init_scale);
    return m;
}

TinyModel TinyModel::from_logits(std::size_t vocab_size, std::vector<double> logits) {
    require(vocab_size >= 1 && vocab_size <= kMaxVocab, ErrorKind::invalid_argument,
            "vocab_size must lie in [1, 256]");
    require(logits.size() == vocab_size * vocab_size, ErrorKind::invalid_argument,
            "logit matrix must have vocab_size^2 entries");
    TinyModel m;
    m.vocab_ = vocab_size;
    m.logits_ = std::move(logits);
    require(m.all_finite(), ErrorKind::numeric, "logit matrix has non-finite entries");
    return m;
}

std::size_t TinyModel::state_for(const TokenSeq& context, const TokenSeq& response, std::size_t t) const {
    if (t > 0) return response[t - 1];
    return context.empty() ? 0 : context.back();
}

std::vector<double> TinyModel::log_probs(std::size_t state) const {
    const double* row = logits_.data() + state * vocab_;
    const std::size_t top = static_cast<std::size_t>(std::max_element(row, row + vocab_) - row);
    const double mx = row[top];
    // Mass outside the argmax, so log1p keeps precision near saturation.
    double rest = 0.0;
    for (std::size_t v = 0; v < vocab_; ++v) {
        if (v != top) rest += std::exp(row[v] - mx);
    }
    const double log_norm = std::log1p(rest);
    std::vector<double> out(vocab_);
    for (std::size_t v = 0; v < vocab_; ++v) out[v] = (row[v] - mx) - log_norm;
    return out;
}

bool TinyModel::all_finite() const noexcept {
    return std::all_of(logits_.begin(), logits_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

void check_tokens(const TinyModel& model, const TokenSeq& seq, std::string_view what) {
    for (auto tok : seq) {
        if (tok >= model.vocab_size()) {
            fail(ErrorKind::invalid_argument, std::string(what) + " token " + std::to_string(tok) +
                                                  " is outside the vocabulary of size " +
                                                  std::to_string(model.vocab_size()));
        }
    }
}

// Log-softmax rows for every state, computed once per pass.
std::vector<std::vector<double>> all_log_probs(const TinyModel& model) {
    std::vector<std::vector<double>> rows(model.state_count());
    for (std::size_t s = 0; s < rows.size(); ++s) rows[s] = model.log_probs(s);
    return rows;
}

SequenceScore score_with(const TinyModel& model, const std::vector<std::vector<double>>& rows,
                         const TokenSeq& context, const TokenSeq& response) {
    require(!response.empty(), ErrorKind::invalid_argument, "cannot score an empty response");
    check_tokens(model, context, "context");
    check_tokens(model, response, "response");
    SequenceScore out;
    out.token_logprobs.reserve(response.size());
    for (std::size_t t = 0; t < response.size(); ++t) {
        out.token_logprobs.push_back(rows[model.state_for(context, response, t)][response[t]]);
    }
    return out;
}

LogoBatchItem item_for(const TinyModel& model, const std::vector<std::vector<double>>& rows, const ToyExample& ex) {
    LogoBatchItem item;
    item.preferred = score_with(model, rows, ex.context, ex.preferred);
    for (const auto& d : ex.dispreferred) item.dispreferred.push_back(score_with(model, rows, ex.context, d));
    return item;
}

}  // namespace

SequenceScore score_sequence(const TinyModel& model, const TokenSeq& context, const TokenSeq& response) {
    return score_with(model, all_log_probs(model), context, response);
}

ToyMetrics evaluate(const TinyModel& model, std::span<const ToyExample> batch, const LogoConfig& config) {
    require(!batch.empty(), ErrorKind::invalid_argument, "training batch is empty");
    const auto rows = all_log_probs(model);
    ToyMetrics m;
    for (const auto& ex : batch) {
        const LogoBatchItem item = item_for(model, rows, ex);
        const LossBreakdown b = logo_loss_regularized(item, config);
        m.loss += b.total;
        m.margin += b.margin;
        m.pref_reward += b.preference_reward;
        m.dispref_reward += b.mean_dispref_reward;
        double sum = 0.0;
        for (double v : item.preferred.token_logprobs) sum += v;
        m.pref_nll += -sum / static_cast<double>(item.preferred.length());
    }
    const double n = static_cast<double>(batch.size());
    m.loss /= n;
    m.margin /= n;
    m.pref_reward /= n;
    m.dispref_reward /= n;
    m.pref_nll /= n;
    return m;
}

std::vector<double> example_margins(const TinyModel& model, std::span<const ToyExample> batch,
                                    const LogoConfig& config) {
    const auto rows = all_log_probs(model);
    std::vector<double> out;
    out.reserve(batch.size());
    for (const auto& ex : batch) out.push_back(logo_loss(item_for(model, rows, ex), config).margin);
    return out;
}

std::vector<double> objective_gradient(const TinyModel& model, std::span<const ToyExample> batch,
                                       const LogoConfig& config) {
    require(!batch.empty(), ErrorKind::invalid_argument, "training batch is empty");
    const std::size_t v_size = model.vocab_size();
    const auto rows = all_log_probs(model);
    std::vector<double> grad(model.logits().size(), 0.0);
    const double scale = 1.0 / static_cast<double>(batch.size());

    // d log p(y | s) / d logit(s, v) = [v == y] - p(v | s)
    auto backprop = [&](const TokenSeq& context, const TokenSeq& response, const std::vector<double>& g) {
        for (std::size_t t = 0; t < response.size(); ++t) {
            const std::size_t s = model.state_for(context, response, t);
            const double coeff = scale * g[t];
            double* row = grad.data() + s * v_size;
            for (std::size_t v = 0; v < v_size; ++v) row[v] -= coeff * std::exp(rows[s][v]);
            row[response[t]] += coeff;
        }
    };
    for (const auto& ex : batch) {
        const ItemGradient g = loss_gradient(item_for(model, rows, ex), config);
        backprop(ex.context, ex.preferred, g.preferred);
        for (std::size_t j = 0; j < ex.dispreferred.size(); ++j) backprop(ex.context, ex.dispreferred[j], g.dispreferred[j]);
    }
    return grad;
}

namespace {

StepRecord record_of(std::size_t step, const ToyMetrics& m) {
    StepRecord r;
    r.step = step;
    r.loss = m.loss;
    r.margin = m.margin;
    r.pref_reward = m.pref_reward;
    r.dispref_reward = m.dispref_reward;
    r.pref_nll = m.pref_nll;
    return r;
}

}  // namespace

StepRecord train_step(TinyModel& model, std::span<const ToyExample> batch, const LogoConfig& config, double lr) {
    require(std::isfinite(lr) && lr >= 0.0, ErrorKind::invalid_argument, "learning rate must be non-negative");
    const ToyMetrics before = evaluate(model, batch, config);
    require(std::isfinite(before.loss), ErrorKind::numeric, "training loss is not finite before the step");
    if (lr == 0.0) {
        StepRecord r = record_of(0, before);
        r.accepted = false;
        return r;
    }
    const std::vector<double> grad = objective_gradient(model, batch, config);
    for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!std::isfinite(grad[i])) {
            std::ostringstream msg;
            msg << "non-finite gradient at state " << i / model.vocab_size() << ", token " << i % model.vocab_size()
                << " (loss " << before.loss << ", lr " << lr << ")";
            fail(ErrorKind::numeric, msg.str());
        }
    }

    TinyModel trial = model;
    double step_lr = lr;
    for (std::size_t halvings = 0; halvings <= kMaxHalvings; ++halvings) {
        auto dst = trial.logits();
        auto src = model.logits();
        for (std::size_t i = 0; i < grad.size(); ++i) dst[i] = src[i] - step_lr * grad[i];
        const ToyMetrics after = evaluate(trial, batch, config);
        if (std::isfinite(after.loss) && after.loss <= before.loss) {
            require(trial.all_finite(), ErrorKind::numeric, "parameters became non-finite");
            model = std::move(trial);
            StepRecord r = record_of(0, after);
            r.lr_used = step_lr;
            r.halvings = halvings;
            return r;
        }
        step_lr *= 0.5;
    }
    StepRecord r = record_of(0, before);
    r.lr_used = 0.0;
    r.halvings = kMaxHalvings;
    r.accepted = false;
    return r;
}

std::vector<ToyExample> truncate_dispreferred(std::span<const ToyExample> corpus, std::size_t max_dispreferred) {
    std::vector<ToyExample> out(corpus.begin(), corpus.end());
    if (max_dispreferred == 0) return out;
    for (auto& ex : out) {
        if (ex.dispreferred.size() > max_dispreferred) ex.dispreferred.resize(max_dispreferred);
    }
    return out;
}

TrainResult run_training(std::span<const ToyExample> corpus, const LogoConfig& config, std::size_t steps, double lr,
                         std::uint64_t seed, std::size_t vocab_size, std::size_t max_dispreferred) {
    require(!corpus.empty(), ErrorKind::invalid_argument, "training corpus is empty");
    validate(config);
    const auto batch = truncate_dispreferred(corpus, max_dispreferred);
    TrainResult out{TinyModel::random(vocab_size, derive_seed(seed, "toy_init")), {}};
    out.state.learning_rate = lr;
    out.state.initial = evaluate(out.model, batch, config);
    out.state.history.reserve(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        StepRecord r = train_step(out.model, batch, config, lr);
        r.step = i + 1;
        out.state.history.push_back(r);
        out.state.step = i + 1;
    }
    return out;
}

GradientCheck model_gradient_check(const TinyModel& model, std::span<const ToyExample> batch, const LogoConfig& config,
                                   double eps, double floor) {
    const std::vector<double> analytic = objective_gradient(model, batch, config);
    TinyModel probe = model;
    GradientCheck r;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double saved = probe.logits()[i];
        probe.logits()[i] = saved + eps;
        const double up = evaluate(probe, batch, config).loss;
        probe.logits()[i] = saved - eps;
        const double down = evaluate(probe, batch, config).loss;
        probe.logits()[i] = saved;
        const double numeric = (up - down) / (2.0 * eps);
        const double abs_err = std::abs(analytic[i] - numeric);
        r.max_absolute_error = std::max(r.max_absolute_error, abs_err);
        r.max_relative_error =
            std::max(r.max_relative_error, abs_err / std::max({std::abs(analytic[i]), std::abs(numeric), floor}));
        ++r.coordinates;
    }
    return r;
}

std::vector<ToyExample> make_toy_fixture(std::size_t count, std::uint64_t seed, std::size_t vocab_size) {
    require(vocab_size >= 32 && vocab_size <= TinyModel::kMaxVocab, ErrorKind::invalid_argument,
            "toy fixture needs a vocabulary of at least 32 tokens");
    Rng rng(derive_seed(seed, "toy_fixture"));
    auto seq = [&](std::uint32_t lo, std::uint32_t hi, std::size_t min_len, std::size_t max_len) {
        TokenSeq out(static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(min_len),
                                                          static_cast<std::int64_t>(max_len))));
        for (auto& t : out) t = static_cast<std::uint32_t>(rng.between(lo, hi - 1));
        return out;
    };
    std::vector<ToyExample> out(count);
    for (auto& ex : out) {
        ex.context = seq(1, 8, 3, 6);
        ex.preferred = seq(8, 16, 4, 8);
        ex.dispreferred.push_back(seq(16, 24, 4, 8));
        ex.dispreferred.push_back(seq(24, 32, 4, 8));
    }
    return out;
}

TokenSeq bytes_to_tokens(std::string_view text, std::size_t max_len) {
    TokenSeq out;
    for (std::size_t i = 0; i < text.size() && out.size() < max_len; ++i) {
        out.push_back(static_cast<unsigned char>(text[i]));
    }
    return out;
}

ToyExample to_toy_example(const TrainingSample& sample, std::size_t max_len) {
    ToyExample ex;
    const std::string_view q = sample.question;
    ex.context = bytes_to_tokens(q.substr(q.size() > max_len ? q.size() - max_len : 0), max_len);
    ex.preferred = bytes_to_tokens(sample.preference.response, max_len);
    for (const auto& d : sample.dispreferences) ex.dispreferred.push_back(bytes_to_tokens(d.response, max_len));
    return ex;
}

ToyModelProvider::ToyModelProvider(TinyModel model, std::size_t max_new_tokens)
    : model_(std::move(model)), max_new_tokens_(max_new_tokens) {
    require(model_.vocab_size() == TinyModel::kMaxVocab, ErrorKind::invalid_argument,
            "the byte-level provider needs a 256-token model");
    require(max_new_tokens_ >= 1, ErrorKind::invalid_argument, "max_new_tokens must be at least 1");
}

std::string ToyModelProvider::generate(const GenerationRequest& request) const {
    std::size_t state = request.context.empty() ? 0 : static_cast<unsigned char>(request.context.back());
    std::string out;
    for (std::size_t i = 0; i < max_new_tokens_; ++i) {
        std::size_t best = 0;
        for (std::size_t v = 1; v < model_.vocab_size(); ++v) {
            if (model_.logit(state, v) > model_.logit(state, best)) best = v;
        }
        if (best == '\n' || best == 0) break;
        out.push_back(static_cast<char>(best));
        state = best;
    }
    if (out.empty()) out = " ";
    return out;
}

}  // namespace logo
