// SPDX-License-Identifier: Apache-2.0
#include "logo/pref_synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "logo/error.hpp"
#include "logo/jsonl.hpp"
#include "logo/rng.hpp"

namespace logo {

namespace {

// `count` ids drawn uniformly without replacement.
std::vector<std::size_t> draw(std::span<const ScoredChunk> pool, std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::size_t> out;
    out.reserve(count);
    for (std::size_t pos : rng.sample_without_replacement(pool.size(), count)) out.push_back(pool[pos].chunk.index);
    return out;
}

ContextAssembly finish(std::vector<std::size_t> ids, AssemblyRole role, std::size_t n) {
    std::sort(ids.begin(), ids.end());
    return ContextAssembly{std::move(ids), role, n};
}

}  // namespace

ChunkPartition partition_chunks(std::span<const ScoredChunk> scored, std::size_t delta) {
    ChunkPartition p;
    for (const auto& c : scored) {
        if (c.score > delta) {
            p.essential.push_back(c);
        } else if (c.score < delta) {
            p.irrelevant.push_back(c);
        } else {
            p.at_threshold.push_back(c);
        }
    }
    return p;
}

std::string_view to_string(AssemblyRole role) noexcept {
    switch (role) {
        case AssemblyRole::preference_input: return "preference_input";
        case AssemblyRole::dispref_all_irrelevant: return "dispref_all_irrelevant";
        case AssemblyRole::dispref_partial: return "dispref_partial";
        case AssemblyRole::shared_prime: return "shared_prime";
    }
    return "preference_input";
}

AssemblyRole parse_assembly_role(std::string_view name) {
    for (auto r : {AssemblyRole::preference_input, AssemblyRole::dispref_all_irrelevant, AssemblyRole::dispref_partial,
                   AssemblyRole::shared_prime}) {
        if (to_string(r) == name) return r;
    }
    fail(ErrorKind::schema, "unknown assembly role '" + std::string(name) + "'");
}

std::string_view to_string(DisprefMode mode) noexcept {
    return mode == DisprefMode::all_irrelevant ? "all_irrelevant" : "partial_relevant";
}

DisprefMode parse_dispref_mode(std::string_view name) {
    if (name == "all_irrelevant") return DisprefMode::all_irrelevant;
    if (name == "partial_relevant") return DisprefMode::partial_relevant;
    fail(ErrorKind::invalid_argument, "unknown dis-preference mode '" + std::string(name) + "'");
}

AssemblyRole role_for(DisprefMode mode) noexcept {
    return mode == DisprefMode::all_irrelevant ? AssemblyRole::dispref_all_irrelevant : AssemblyRole::dispref_partial;
}

ContextAssembly assemble_preference_context(const ChunkPartition& partition, std::size_t n, std::uint64_t seed) {
    require(n >= 1, ErrorKind::invalid_argument, "N must be at least 1");
    require(partition.total() > 0, ErrorKind::invalid_argument, "cannot assemble a context from zero chunks");
    require(!partition.essential.empty(), ErrorKind::invalid_argument,
            "preference context needs at least one chunk scoring above delta");
    require(partition.total() >= n, ErrorKind::invalid_argument,
            "preference context needs " + std::to_string(n) + " chunks but only " +
                std::to_string(partition.total()) + " exist (short by " + std::to_string(n - partition.total()) + ")");

    std::vector<ScoredChunk> essential = partition.essential;
    std::stable_sort(essential.begin(), essential.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
        return a.score != b.score ? a.score > b.score : a.chunk.index < b.chunk.index;
    });
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < std::min(n, essential.size()); ++i) ids.push_back(essential[i].chunk.index);

    if (ids.size() < n) {
        // at_threshold scores exceed every irrelevant score, so one
        // descending sort over both pools takes at_threshold first.
        std::vector<ScoredChunk> pool = partition.at_threshold;
        pool.insert(pool.end(), partition.irrelevant.begin(), partition.irrelevant.end());
        Rng rng(derive_seed(seed, "top_up"));
        rng.shuffle(pool);
        std::stable_sort(pool.begin(), pool.end(),
                         [](const ScoredChunk& a, const ScoredChunk& b) { return a.score > b.score; });
        for (std::size_t i = 0; ids.size() < n; ++i) ids.push_back(pool[i].chunk.index);
    }
    return finish(std::move(ids), AssemblyRole::preference_input, n);
}

std::size_t essential_count(std::size_t n, double mix_ratio) {
    require(mix_ratio >= 0.0 && mix_ratio <= 1.0, ErrorKind::invalid_argument, "mix_ratio must lie in [0, 1]");
    // The epsilon keeps products like 0.3 * 10 from flooring to 2.
    return static_cast<std::size_t>(std::floor(mix_ratio * static_cast<double>(n) + 1e-9));
}

ContextAssembly assemble_dispreference_context(const ChunkPartition& partition, std::size_t n, DisprefMode mode,
                                               double mix_ratio, std::uint64_t seed) {
    require(n >= 1, ErrorKind::invalid_argument, "N must be at least 1");
    const std::size_t from_essential = mode == DisprefMode::all_irrelevant ? 0 : essential_count(n, mix_ratio);
    const std::size_t from_irrelevant = n - from_essential;
    const std::string label(to_string(mode));
    if (partition.essential.size() < from_essential) {
        fail(ErrorKind::invalid_argument, label + " context needs " + std::to_string(from_essential) +
                                              " essential chunks but only " +
                                              std::to_string(partition.essential.size()) + " exist (short by " +
                                              std::to_string(from_essential - partition.essential.size()) + ")");
    }
    if (partition.irrelevant.size() < from_irrelevant) {
        fail(ErrorKind::invalid_argument, label + " context needs " + std::to_string(from_irrelevant) +
                                              " irrelevant chunks but only " +
                                              std::to_string(partition.irrelevant.size()) + " exist (short by " +
                                              std::to_string(from_irrelevant - partition.irrelevant.size()) + ")");
    }
    std::vector<std::size_t> ids = draw(partition.irrelevant, from_irrelevant, derive_seed(seed, "irrelevant"));
    const auto ess = draw(partition.essential, from_essential, derive_seed(seed, "essential"));
    ids.insert(ids.end(), ess.begin(), ess.end());
    return finish(std::move(ids), role_for(mode), n);
}

ContextAssembly build_shared_context(const ContextAssembly& preference,
                                     std::span<const ContextAssembly> dispreferences) {
    std::set<std::size_t> ids(preference.chunk_ids.begin(), preference.chunk_ids.end());
    for (const auto& d : dispreferences) ids.insert(d.chunk_ids.begin(), d.chunk_ids.end());
    return ContextAssembly{{ids.begin(), ids.end()}, AssemblyRole::shared_prime, ids.size()};
}

std::string assemble_text(const TokenizedText& context, std::span<const Chunk> chunks,
                          const ContextAssembly& assembly) {
    std::string out;
    for (std::size_t id : assembly.chunk_ids) {
        require(id < chunks.size(), ErrorKind::invalid_argument,
                "chunk id " + std::to_string(id) + " is out of range (" + std::to_string(chunks.size()) + " chunks)");
        if (!out.empty()) out.push_back('\n');
        out += chunks[id].text(context);
    }
    return out;
}

std::string ExtractiveProvider::generate(const GenerationRequest& request) const {
    const std::string_view ctx = request.context;
    std::string_view best;
    std::size_t best_score = 0;
    std::size_t start = 0;
    while (start < ctx.size()) {
        std::size_t end = ctx.find_first_of(".!?\n", start);
        end = end == std::string_view::npos ? ctx.size() : end + 1;
        std::string_view sentence = ctx.substr(start, end - start);
        while (!sentence.empty() && is_space_byte(static_cast<unsigned char>(sentence.front()))) sentence.remove_prefix(1);
        while (!sentence.empty() && is_space_byte(static_cast<unsigned char>(sentence.back()))) sentence.remove_suffix(1);
        if (!sentence.empty()) {
            const std::size_t score =
                request.question_entities ? score_chunk(extract_entities(sentence), *request.question_entities) : 0;
            if (best.empty() || score > best_score) {
                best = sentence;
                best_score = score;
            }
        }
        start = end;
    }
    require(!best.empty(), ErrorKind::invalid_argument, "extractive provider got an empty context");
    return std::string(best);
}

PrecomputedProvider PrecomputedProvider::load(const std::filesystem::path& path) {
    PrecomputedProvider out;
    const auto lines = read_jsonl(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string where = path.string() + " record " + std::to_string(i + 1);
        const auto& j = lines[i];
        out.add(get_as<std::string>(j, "source_id", where), parse_assembly_role(get_as<std::string>(j, "role", where)),
                get_as<std::size_t>(j, "instance", where), get_as<std::string>(j, "response", where));
    }
    return out;
}

void PrecomputedProvider::add(std::string source_id, AssemblyRole role, std::size_t instance, std::string response) {
    table_[{std::move(source_id), role, instance}] = std::move(response);
}

std::string PrecomputedProvider::generate(const GenerationRequest& request) const {
    auto it = table_.find(std::tuple{std::string(request.source_id), request.role, request.instance});
    if (it == table_.end()) {
        fail(ErrorKind::not_found, "no precomputed response for source_id '" + std::string(request.source_id) +
                                       "', instance " + std::to_string(request.instance));
    }
    return it->second;
}

void validate(const SampleConfig& c) {
    require(c.chunk_len >= 1, ErrorKind::invalid_argument, "chunk_len must be at least 1");
    require(c.n >= 1, ErrorKind::invalid_argument, "N must be at least 1");
    require(c.m >= 1, ErrorKind::invalid_argument, "M must be at least 1");
    require(c.mix_ratio >= 0.0 && c.mix_ratio <= 1.0, ErrorKind::invalid_argument, "mix_ratio must lie in [0, 1]");
    require(c.target_len >= 1, ErrorKind::invalid_argument, "target_len must be positive");
    require(c.strategy_ratio.continuous + c.strategy_ratio.sparse > 0, ErrorKind::invalid_argument,
            "strategy ratio cannot be 0:0");
}

DisprefMode dispref_mode_for(std::size_t j) noexcept {
    return j % 2 == 0 ? DisprefMode::all_irrelevant : DisprefMode::partial_relevant;
}

namespace {

std::size_t assembly_tokens(std::span<const Chunk> chunks, const ContextAssembly& a) {
    std::size_t total = 0;
    for (std::size_t id : a.chunk_ids) total += chunks[id].token_count();
    return total;
}

std::string generate_or_explain(const GenerationProvider& provider, const GenerationRequest& request) {
    try {
        return provider.generate(request);
    } catch (const Error& e) {
        fail(e.kind(), "generation failed for source_id '" + std::string(request.source_id) + "', role " +
                           std::string(to_string(request.role)) + " (instance " + std::to_string(request.instance) +
                           "): " + e.what());
    }
}

}  // namespace

TrainingSample build_training_sample(const Triplet& triplet, std::span<const Chunk> chunks,
                                     const ChunkPartition& partition, const EntitySet& question_entities,
                                     const GenerationProvider& provider, const SampleConfig& config,
                                     std::size_t sample_index) {
    validate(config);
    TrainingSample s;
    s.source_id = triplet.source_id;
    s.question = triplet.question.text();
    s.seed = derive_seed(config.seed, "sample", sample_index);

    s.preference.role = AssemblyRole::preference_input;
    s.preference.seed = derive_seed(s.seed, "preference");
    s.preference.assembly = assemble_preference_context(partition, config.n, s.preference.seed);

    std::vector<ContextAssembly> dispref_assemblies;
    for (std::size_t j = 0; j < config.m; ++j) {
        ResponseRecord r;
        r.mode = dispref_mode_for(j);
        r.role = role_for(*r.mode);
        r.seed = derive_seed(s.seed, "dispreference", j);
        r.assembly = assemble_dispreference_context(partition, config.n, *r.mode, config.mix_ratio, r.seed);
        dispref_assemblies.push_back(r.assembly);
        s.dispreferences.push_back(std::move(r));
    }

    s.shared_context = build_shared_context(s.preference.assembly, dispref_assemblies);
    s.shared_text = assemble_text(triplet.context, chunks, s.shared_context);
    s.shared_tokens = assembly_tokens(chunks, s.shared_context);
    const std::uint64_t shared_hash = fnv1a64(s.shared_text);

    auto fill = [&](ResponseRecord& r, std::size_t instance) {
        r.assembled_text = assemble_text(triplet.context, chunks, r.assembly);
        r.context_tokens = assembly_tokens(chunks, r.assembly);
        r.shared_context_hash = shared_hash;
        GenerationRequest req;
        req.source_id = triplet.source_id;
        req.role = r.role;
        req.instance = instance;
        req.question = triplet.question.text();
        req.context = r.assembled_text;
        req.question_entities = &question_entities;
        req.seed = derive_seed(r.seed, "generation");
        r.response = generate_or_explain(provider, req);
    };
    fill(s.preference, 0);
    for (std::size_t j = 0; j < s.dispreferences.size(); ++j) {
        auto& r = s.dispreferences[j];
        fill(r, j + 1);
        if (triplet.answer && !triplet.answer->empty()) {
            r.error_pattern = classify_error_pattern(r.response, extract_entities(r.response), question_entities,
                                                     triplet.subject.value_or(""), *triplet.answer);
        }
    }

    require(config.target_len > static_cast<std::int64_t>(s.shared_tokens), ErrorKind::invalid_argument,
            "target_len " + std::to_string(config.target_len) + " must exceed the shared context length " +
                std::to_string(s.shared_tokens) + " of sample '" + s.source_id + "'");
    const std::size_t instances = 1 + config.m;
    for (std::size_t j = 0; j < instances; ++j) {
        const std::size_t ordinal = sample_index * instances + j;
        s.position_maps.push_back(synth_position_map(scheduled_strategy(ordinal, config.strategy_ratio),
                                                     s.shared_tokens, config.target_len, config.chunk_len,
                                                     derive_seed(config.seed, "position_map", ordinal)));
    }
    return s;
}

std::uint64_t budget_formula(std::uint64_t samples, const SampleConfig& config) {
    return samples * config.chunk_len * config.n * (config.m + 1);
}

TokenBudget token_budget(std::span<const TrainingSample> samples, const SampleConfig& config) {
    TokenBudget b;
    b.samples = samples.size();
    for (const auto& s : samples) {
        b.instance_context_tokens += s.preference.context_tokens;
        for (const auto& d : s.dispreferences) b.instance_context_tokens += d.context_tokens;
        b.shared_context_tokens += static_cast<std::uint64_t>(s.shared_tokens) * s.instance_count();
    }
    b.formula_tokens = budget_formula(samples.size(), config);
    return b;
}

}  // namespace logo
