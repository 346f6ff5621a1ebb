// SPDX-License-Identifier: Apache-2.0
//
// logo_cli: one binary, one subcommand per pipeline stage.
//
// Parameter precedence: built-in defaults < --config JSON object < flags.
// Every run prints its effective parameters and seed to stderr (unless
// --quiet) and writes its outputs atomically into --out.
//
// Exit codes:
//   0 success              4 missing input          7 numeric failure
//   2 usage error          5 I/O failure            8 check failed
//   3 schema violation     6 invalid argument

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "logo/corpus.hpp"
#include "logo/error.hpp"
#include "logo/io.hpp"
#include "logo/jsonl.hpp"
#include "logo/niah.hpp"
#include "logo/objective.hpp"
#include "logo/position.hpp"
#include "logo/pref_synth.hpp"
#include "logo/rng.hpp"
#include "logo/toy_trainer.hpp"

namespace fs = std::filesystem;
using namespace logo;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitCheckFailed = 8;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::schema: return 3;
        case ErrorKind::not_found: return 4;
        case ErrorKind::io: return 5;
        case ErrorKind::invalid_argument: return 6;
        case ErrorKind::numeric: return 7;
    }
    return 1;
}

void print_error(std::string_view kind, const std::string& message, int code) {
    Json err = {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
    std::cerr << err.dump() << '\n';
}

// Flags that may also come from the --config file. A value from the file
// is used only when the flag itself was not given.
class Params {
public:
    template <class T>
    CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, T& slot,
                     const std::string& help) {
        CLI::Option* opt = app->add_option(flag, slot, help);
        if constexpr (!is_optional<T>::value) opt->capture_default_str();
        entries_.push_back(Entry{
            key, app, opt,
            [&slot, key](const Json& config) {
                try {
                    if constexpr (is_optional<T>::value) {
                        slot = config.at(key).get<typename T::value_type>();
                    } else {
                        slot = config.at(key).get<T>();
                    }
                } catch (const nlohmann::json::exception&) {
                    fail(ErrorKind::schema, "config field '" + key + "' has the wrong type");
                }
            },
            [&slot, key](Json& out) {
                if constexpr (is_optional<T>::value) {
                    out[key] = slot ? Json(*slot) : Json(nullptr);
                } else {
                    out[key] = slot;
                }
            }});
        return opt;
    }

    // Only parameters of the root app and of `active` take part.
    void resolve(const Json& config, const CLI::App* root, const CLI::App* active) {
        for (auto& e : entries_) {
            if (e.app != root && e.app != active) continue;
            if (e.option->count() == 0 && config.contains(e.key)) e.from_config(config);
        }
    }

    Json effective(const CLI::App* root, const CLI::App* active) const {
        Json out = Json::object();
        for (const auto& e : entries_) {
            if (e.app == root || e.app == active) e.to_json(out);
        }
        return out;
    }

private:
    template <class T>
    struct is_optional : std::false_type {};
    template <class T>
    struct is_optional<std::optional<T>> : std::true_type {};

    struct Entry {
        std::string key;
        const CLI::App* app;
        CLI::Option* option;
        std::function<void(const Json&)> from_config;
        std::function<void(Json&)> to_json;
    };
    std::vector<Entry> entries_;
};

struct Options {
    // global
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    bool quiet = false;

    // inputs
    std::string input;
    std::string sidecar;
    std::string responses;
    std::string examples;
    std::string samples;
    std::string instance;
    std::string trace;
    std::string generation;
    std::string generation_file;

    // pipeline
    std::size_t chunk_len = 512;
    std::size_t delta = 6;
    std::size_t n = 16;
    std::size_t m = 2;
    double mix_ratio = 0.25;
    std::int64_t target_len = 65536;
    std::string ratio = "9:1";

    // positions
    std::size_t k = 19;
    std::int64_t big_k = 43;
    std::string strategy = "continuous";
    std::size_t maps = 5000;
    std::size_t bins = 64;
    bool text = false;

    // objective
    std::string profile = "llama3";
    std::optional<double> beta;
    std::optional<double> gamma;
    std::optional<double> lambda;
    bool literal_sft = false;
    std::size_t trials = 100;
    double eps = 1e-6;
    double tolerance = 1e-5;
    std::size_t margin_bins = 20;

    // toy training
    std::size_t steps = 200;
    double lr = 1.0;
    std::size_t toy_samples = 32;
    std::size_t vocab = 32;

    // niah
    std::size_t haystack_len = 2000;
    std::size_t needles = 2;
    std::string depths;
    std::string template_id = "sandwich";
    std::size_t top_k = kDefaultTopK;
};

LogoConfig objective_config(const Options& o, std::string_view profile_name) {
    LogoConfig c = profile(profile_name);
    if (o.beta) c.beta = *o.beta;
    if (o.gamma) c.gamma = *o.gamma;
    if (o.lambda) c.lambda = *o.lambda;
    c.sft_sign = o.literal_sft ? SftSign::literal : SftSign::nll;
    validate(c);
    return c;
}

SampleConfig sample_config(const Options& o) {
    SampleConfig c;
    c.chunk_len = o.chunk_len;
    c.delta = o.delta;
    c.n = o.n;
    c.m = o.m;
    c.mix_ratio = o.mix_ratio;
    c.target_len = o.target_len;
    c.strategy_ratio = parse_strategy_ratio(o.ratio);
    c.seed = derive_seed(o.seed, "build_samples");
    validate(c);
    return c;
}

void write_output(const Options& o, const std::string& name, std::string_view contents) {
    write_file_atomic(fs::path(o.out_dir) / name, contents);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::unique_ptr<EntityExtractor> make_extractor(const Options& o) {
    if (o.sidecar.empty()) return std::make_unique<RuleBasedExtractor>();
    return std::make_unique<SidecarExtractor>(SidecarExtractor::load(o.sidecar));
}

int run_chunk(const Options& o) {
    std::vector<Json> lines;
    for (const auto& t : read_corpus(o.input)) {
        for (const auto& c : chunk_context(t.context, o.chunk_len)) lines.push_back(to_json(c, t));
    }
    write_output(o, "chunks.jsonl", to_jsonl(lines));
    return 0;
}

int run_score(const Options& o) {
    const auto extractor = make_extractor(o);
    std::vector<Json> lines;
    for (const auto& t : read_corpus(o.input)) {
        const auto chunks = chunk_context(t.context, o.chunk_len);
        const auto q = question_entities(t, *extractor);
        for (const auto& s : score_context(t, chunks, q, *extractor)) lines.push_back(to_json(s, t.source_id));
    }
    write_output(o, "scored.jsonl", to_jsonl(lines));
    return 0;
}

int run_build_samples(const Options& o) {
    const SampleConfig config = sample_config(o);
    const auto extractor = make_extractor(o);
    std::unique_ptr<GenerationProvider> provider;
    if (o.responses.empty()) {
        provider = std::make_unique<ExtractiveProvider>();
    } else {
        provider = std::make_unique<PrecomputedProvider>(PrecomputedProvider::load(o.responses));
    }
    std::vector<TrainingSample> samples;
    std::vector<Json> lines;
    const auto corpus = read_corpus(o.input);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& t = corpus[i];
        const auto chunks = chunk_context(t.context, config.chunk_len);
        const auto q = question_entities(t, *extractor);
        const auto scored = score_context(t, chunks, q, *extractor);
        const auto partition = partition_chunks(scored, config.delta);
        try {
            samples.push_back(build_training_sample(t, chunks, partition, q, *provider, config, i));
        } catch (const Error& e) {
            fail(e.kind(), "source_id '" + t.source_id + "': " + e.what());
        }
        lines.push_back(to_json(samples.back()));
    }
    write_output(o, "samples.jsonl", to_jsonl(lines));
    write_output(o, "budget.json", dump(to_json(token_budget(samples, config))));
    return 0;
}

int run_synth_pos(const Options& o) {
    const auto map = synth_position_map(parse_position_strategy(o.strategy), o.k, o.big_k, o.chunk_len,
                                        derive_seed(o.seed, "synth_pos"));
    write_output(o, "position_map.json", dump(to_json(map)));
    return 0;
}

std::string render_histogram(const CoverageReport& r) {
    std::ostringstream out;
    const std::uint64_t peak = *std::max_element(r.histogram.begin(), r.histogram.end());
    const std::size_t bins = r.histogram.size();
    const auto width = static_cast<std::uint64_t>(r.target_len) + 1;
    out << "relative distance histogram (" << r.pairs << " pairs, chi2 " << r.uniformity_stat << ", critical "
        << r.critical_value_p01 << ")\n";
    for (std::size_t b = 0; b < bins; ++b) {
        const std::uint64_t lo = (b * width + bins - 1) / bins;
        const std::size_t bar = peak == 0 ? 0 : static_cast<std::size_t>(r.histogram[b] * 50 / peak);
        out << std::setw(8) << lo << " | " << std::string(bar, '#') << ' ' << r.histogram[b] << '\n';
    }
    return out.str();
}

int run_coverage(const Options& o) {
    const auto maps = synth_mixed(o.maps, parse_strategy_ratio(o.ratio), o.k, o.big_k, o.chunk_len,
                                  derive_seed(o.seed, "coverage"));
    const auto report = coverage_report(maps, o.bins);
    write_output(o, "coverage.json", dump(to_json(report)));
    if (o.text) write_output(o, "coverage.txt", render_histogram(report));
    return 0;
}

int run_loss(const Options& o) {
    const LogoConfig config = objective_config(o, o.profile);
    const auto lines = read_jsonl(o.input);
    std::vector<LogoBatchItem> items;
    Json per_item = Json::array();
    double total = 0.0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        items.push_back(batch_item_from_json(lines[i], o.input + " line " + std::to_string(i + 1)));
        const LossBreakdown b = logo_loss_regularized(items.back(), config);
        total += b.total;
        Json entry = to_json(b);
        entry["flagged_positive_logprob"] = items.back().preferred.has_positive_logprob();
        per_item.push_back(std::move(entry));
    }
    require(!items.empty(), ErrorKind::invalid_argument, "batch file has no items");
    Json report = {{"config", to_json(config)},
                   {"items", std::move(per_item)},
                   {"mean_total", total / static_cast<double>(items.size())},
                   {"margin_histogram", to_json(margin_histogram(items, config, o.margin_bins))}};
    write_output(o, "loss.json", dump(with_schema(std::move(report))));
    return 0;
}

int run_grad_check(const Options& o) {
    std::vector<std::string_view> names;
    if (o.profile == "all") {
        names = profile_names();
    } else {
        names = {o.profile};
    }
    double worst = 0.0;
    Json per_profile = Json::array();
    for (auto name : names) {
        const LogoConfig config = objective_config(o, name);
        double max_rel = 0.0;
        double max_abs = 0.0;
        for (std::size_t t = 0; t < o.trials; ++t) {
            const auto item = random_batch_item(derive_seed(o.seed, "grad_check", t), 1 + t % 3);
            const auto r = finite_difference_check(item, config, o.eps);
            max_rel = std::max(max_rel, r.max_relative_error);
            max_abs = std::max(max_abs, r.max_absolute_error);
        }
        worst = std::max(worst, max_rel);
        per_profile.push_back({{"profile", name},
                               {"config", to_json(config)},
                               {"max_relative_error", max_rel},
                               {"max_absolute_error", max_abs}});
    }
    const bool pass = worst < o.tolerance;
    Json report = {{"trials", o.trials},        {"eps", o.eps},   {"tolerance", o.tolerance},
                   {"max_relative_error", worst}, {"pass", pass}, {"profiles", std::move(per_profile)}};
    write_output(o, "grad_check.json", dump(with_schema(std::move(report))));
    return pass ? 0 : kExitCheckFailed;
}

std::vector<ToyExample> toy_examples_from_samples(const std::string& path) {
    std::vector<ToyExample> out;
    const auto lines = read_jsonl(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string where = path + " line " + std::to_string(i + 1);
        TrainingSample s;
        s.question = get_as<std::string>(lines[i], "question", where);
        s.preference.response = get_as<std::string>(field(lines[i], "preference", where), "response", where);
        for (const auto& d : field(lines[i], "dispreferences", where)) {
            ResponseRecord r;
            r.response = get_as<std::string>(d, "response", where);
            s.dispreferences.push_back(std::move(r));
        }
        out.push_back(to_toy_example(s));
    }
    return out;
}

int run_train_toy(const Options& o) {
    const LogoConfig config = objective_config(o, o.profile);
    std::vector<ToyExample> corpus;
    std::size_t vocab = o.vocab;
    if (!o.examples.empty()) {
        const auto lines = read_jsonl(o.examples);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            corpus.push_back(toy_example_from_json(lines[i], o.examples + " line " + std::to_string(i + 1)));
        }
    } else if (!o.samples.empty()) {
        corpus = toy_examples_from_samples(o.samples);
        vocab = TinyModel::kMaxVocab;
    } else {
        corpus = make_toy_fixture(o.toy_samples, derive_seed(o.seed, "train_toy"), vocab);
    }
    const auto result = run_training(corpus, config, o.steps, o.lr, derive_seed(o.seed, "train_toy"), vocab, o.m);

    std::vector<Json> history;
    for (const auto& r : result.state.history) history.push_back(to_json(r));
    const auto batch = truncate_dispreferred(corpus, o.m);
    Json summary = {{"config", to_json(config)},
                    {"steps", result.state.step},
                    {"learning_rate", result.state.learning_rate},
                    {"examples", corpus.size()},
                    {"vocab_size", vocab},
                    {"initial", to_json(result.state.initial)},
                    {"final", to_json(evaluate(result.model, batch, config))}};
    write_output(o, "history.jsonl", to_jsonl(history));
    write_output(o, "model.json", dump(to_json(result.model)));
    write_output(o, "train_summary.json", dump(with_schema(std::move(summary))));
    return 0;
}

std::vector<double> parse_depths(const std::string& text, std::size_t n) {
    std::vector<double> out;
    if (text.empty()) {
        for (std::size_t j = 0; j < n; ++j) out.push_back(static_cast<double>(j + 1) / static_cast<double>(n + 1));
        return out;
    }
    std::stringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(part, &used));
            require(used == part.size(), ErrorKind::invalid_argument, "");
        } catch (const std::exception&) {
            fail(ErrorKind::invalid_argument, "bad depth '" + part + "' (expected comma-separated fractions)");
        }
    }
    return out;
}

int run_niah_gen(const Options& o) {
    const auto depths = parse_depths(o.depths, o.needles);
    const auto inst = generate_niah(o.haystack_len, o.needles, depths, o.template_id, derive_seed(o.seed, "niah"));
    write_output(o, "niah_instance.json", dump(to_json(inst)));
    return 0;
}

int run_niah_score(const Options& o) {
    const auto inst = niah_instance_from_json(read_json(o.instance), o.instance);
    const auto scores = head_retrieval_score(read_trace(o.trace), inst);
    Json per_head = Json::array();
    for (const auto& s : scores) per_head.push_back(to_json(s));
    Json report = {{"per_head", std::move(per_head)},
                   {"top_k", o.top_k},
                   {"threshold", kRetrievalThreshold},
                   {"aggregate", aggregate_retrieval_score(scores, o.top_k)}};
    std::optional<std::string> generation;
    if (!o.generation_file.empty()) {
        generation = read_file(o.generation_file);
    } else if (!o.generation.empty()) {
        generation = o.generation;
    }
    report["recall"] = generation ? Json(recall_score(*generation, inst)) : Json(nullptr);
    write_output(o, "niah_score.json", dump(with_schema(std::move(report))));
    return 0;
}

int run_classify(const Options& o) {
    const auto lines = read_jsonl(o.input);
    std::vector<Json> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string where = o.input + " line " + std::to_string(i + 1);
        const auto response = get_as<std::string>(lines[i], "response", where);
        const auto question = get_as<std::string>(lines[i], "question", where);
        const auto subject = get_as<std::string>(lines[i], "subject", where);
        const auto truth = get_as<std::string>(lines[i], "ground_truth", where);
        const EntitySet r_ent = extract_entities(response);
        const EntitySet q_ent = extract_entities(question);
        Json rec = {{"line", i + 1},
                    {"label", to_string(classify_error_pattern(response, r_ent, q_ent, subject, truth))},
                    {"response_entities", to_json(r_ent)},
                    {"question_entities", to_json(q_ent)}};
        if (const Json* id = optional_field(lines[i], "id")) rec["id"] = *id;
        out.push_back(with_schema(std::move(rec)));
    }
    write_output(o, "classified.jsonl", to_jsonl(out));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LOGO long-context alignment pipeline"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--config", o.config_path, "JSON object of parameter overrides")->check(CLI::ExistingFile);
    Params params;
    params.add(&app, "--seed", "seed", o.seed, "master seed");
    app.add_option("--out", o.out_dir, "output directory")->capture_default_str();
    app.add_flag("--quiet", o.quiet, "do not log the effective configuration");

    auto* chunk = app.add_subcommand("chunk", "split contexts into fixed-length chunks");
    auto* score = app.add_subcommand("score", "score chunks by entity overlap with the question");
    auto* build = app.add_subcommand("build-samples", "assemble preference/dis-preference training samples");
    auto* synth = app.add_subcommand("synth-pos", "synthesize one position map");
    auto* coverage = app.add_subcommand("coverage", "coverage report over mixed-strategy position maps");
    auto* loss = app.add_subcommand("loss", "evaluate the objective on a batch of log-probabilities");
    auto* grad = app.add_subcommand("grad-check", "finite-difference check of the analytic gradient");
    auto* train = app.add_subcommand("train-toy", "train the toy bigram model");
    auto* niah_gen = app.add_subcommand("niah-gen", "generate a multi-value needle-in-a-haystack instance");
    auto* niah_score = app.add_subcommand("niah-score", "retrieval and recall scores from an attention trace");
    auto* classify = app.add_subcommand("classify", "label responses with an error pattern");

    for (auto* sub : {chunk, score, build}) {
        sub->add_option("--input", o.input, "corpus JSONL")->required();
        sub->add_option("--sidecar", o.sidecar, "precomputed entity JSONL (default: rule-based extractor)");
        params.add(sub, "--chunk-len", "chunk_len", o.chunk_len, "tokens per chunk");
    }
    chunk->remove_option(chunk->get_option("--sidecar"));
    build->add_option("--responses", o.responses, "precomputed responses JSONL (default: extractive)");
    params.add(build, "--delta", "delta", o.delta, "importance threshold");
    params.add(build, "--n", "n", o.n, "chunks per assembled context");
    params.add(build, "--m", "m", o.m, "dis-preference instances per sample");
    params.add(build, "--mix-ratio", "mix_ratio", o.mix_ratio, "essential share of a partial dis-preference context");
    params.add(build, "--target-len", "target_len", o.target_len, "synthetic context length K");
    params.add(build, "--ratio", "ratio", o.ratio, "continuous:sparse position schedule");

    params.add(synth, "--k", "k", o.k, "real length");
    params.add(synth, "--K", "target_len", o.big_k, "target length");
    params.add(synth, "--strategy", "strategy", o.strategy, "continuous or sparse")
        ->check(CLI::IsMember({"continuous", "sparse"}));
    params.add(synth, "--chunk-len", "chunk_len", o.chunk_len, "tokens per chunk");

    params.add(coverage, "--maps", "maps", o.maps, "number of maps");
    params.add(coverage, "--k", "k", o.k, "real length");
    params.add(coverage, "--K", "target_len", o.big_k, "target length");
    params.add(coverage, "--chunk-len", "chunk_len", o.chunk_len, "tokens per chunk");
    params.add(coverage, "--ratio", "ratio", o.ratio, "continuous:sparse schedule");
    params.add(coverage, "--bins", "bins", o.bins, "relative-distance bins");
    coverage->add_flag("--text", o.text, "also write a plain-text histogram");

    for (auto* sub : {loss, grad, train}) {
        params.add(sub, "--profile", "profile", o.profile, "llama3, mistral or llama2");
        params.add(sub, "--beta", "beta", o.beta, "reward scale (overrides the profile)");
        params.add(sub, "--gamma", "gamma", o.gamma, "target margin (overrides the profile)");
        params.add(sub, "--lambda", "lambda", o.lambda, "SFT weight (overrides the profile)");
        sub->add_flag("--literal-sft", o.literal_sft, "add +lambda*mean log p instead of the NLL");
    }
    loss->add_option("--input", o.input, "batch JSONL")->required();
    params.add(loss, "--bins", "margin_bins", o.margin_bins, "margin histogram bins");
    params.add(grad, "--trials", "trials", o.trials, "random items per profile");
    params.add(grad, "--eps", "eps", o.eps, "finite-difference step");
    params.add(grad, "--tolerance", "tolerance", o.tolerance, "maximum relative error");

    params.add(train, "--steps", "steps", o.steps, "gradient steps");
    params.add(train, "--lr", "lr", o.lr, "learning rate");
    params.add(train, "--m", "m", o.m, "dis-preferences used per example (0 = all)");
    params.add(train, "--toy-samples", "toy_samples", o.toy_samples, "fixture size when no input is given");
    params.add(train, "--vocab", "vocab", o.vocab, "fixture vocabulary size");
    auto* ex_opt = train->add_option("--examples", o.examples, "toy examples JSONL");
    train->add_option("--samples", o.samples, "training samples JSONL (byte-level, V=256)")->excludes(ex_opt);

    params.add(niah_gen, "--haystack-len", "haystack_len", o.haystack_len, "haystack tokens");
    params.add(niah_gen, "--needles", "needles", o.needles, "number of needles");
    params.add(niah_gen, "--depths", "depths", o.depths, "comma-separated depths (default evenly spaced)");
    params.add(niah_gen, "--template", "template", o.template_id, "sandwich or magic_number");

    niah_score->add_option("--instance", o.instance, "instance JSON")->required();
    niah_score->add_option("--trace", o.trace, "trace JSONL")->required();
    auto* gen_opt = niah_score->add_option("--generation", o.generation, "generated answer text");
    niah_score->add_option("--generation-file", o.generation_file, "file holding the generated answer")
        ->excludes(gen_opt);
    params.add(niah_score, "--top-k", "top_k", o.top_k, "heads averaged");

    classify->add_option("--input", o.input, "JSONL {response, question, subject, ground_truth}")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        print_error("usage", e.what(), kExitUsage);
        return kExitUsage;
    }

    try {
        Json config = Json::object();
        if (!o.config_path.empty()) {
            config = read_json(o.config_path);
            require(config.is_object(), ErrorKind::schema, o.config_path + ": config must be a JSON object");
        }
        CLI::App* sub = app.get_subcommands().front();
        params.resolve(config, &app, sub);

        if (!o.quiet) {
            Json log = {{"subcommand", sub->get_name()},
                        {"seed", o.seed},
                        {"out", o.out_dir},
                        {"params", params.effective(&app, sub)}};
            for (const auto& [key, value] :
                 {std::pair<const char*, const std::string*>{"input", &o.input}, {"sidecar", &o.sidecar},
                  {"responses", &o.responses}, {"examples", &o.examples}, {"samples", &o.samples},
                  {"instance", &o.instance}, {"trace", &o.trace}, {"config", &o.config_path}}) {
                if (!value->empty()) log["inputs"][key] = *value;
            }
            std::cerr << log.dump() << '\n';
        }

        std::error_code ec;
        fs::create_directories(o.out_dir, ec);
        require(!ec, ErrorKind::io, "cannot create output directory '" + o.out_dir + "': " + ec.message());

        const std::string name = sub->get_name();
        if (name == "chunk") return run_chunk(o);
        if (name == "score") return run_score(o);
        if (name == "build-samples") return run_build_samples(o);
        if (name == "synth-pos") return run_synth_pos(o);
        if (name == "coverage") return run_coverage(o);
        if (name == "loss") return run_loss(o);
        if (name == "grad-check") return run_grad_check(o);
        if (name == "train-toy") return run_train_toy(o);
        if (name == "niah-gen") return run_niah_gen(o);
        if (name == "niah-score") return run_niah_score(o);
        if (name == "classify") return run_classify(o);
        print_error("usage", "unknown subcommand '" + name + "'", kExitUsage);
        return kExitUsage;
    } catch (const Error& e) {
        const int code = exit_code(e.kind());
        print_error(to_string(e.kind()), e.what(), code);
        return code;
    } catch (const std::exception& e) {
        print_error("internal", e.what(), 1);
        return 1;
    }
}
