// SPDX-License-Identifier: Apache-2.0
#include "synthetic.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <string_view>

#include <nlohmann/json.hpp>

#include "logo/error.hpp"
#include "logo/rng.hpp"

namespace logo::testing {

namespace {

constexpr std::array<std::string_view, 24> kFiller = {
    "river", "stone", "quiet", "morning", "light", "window", "paper", "green",  "slowly", "bridge", "market", "cold",
    "garden", "letter", "autumn", "small",  "table", "across", "silver", "wind",  "harbor", "field",  "bright", "road",
};

// Questions mention ids [0, q); distractors use ids from 1000 up.
constexpr std::size_t kDistractorBase = 1000;

std::vector<std::string> chunk_tokens(const std::vector<std::string>& entities, std::size_t chunk_len, Rng& rng) {
    // Entities sit at even slots >= 2 apart, fillers everywhere else; a
    // period closes every 12th slot.
    std::vector<std::string> tokens(chunk_len);
    for (std::size_t i = 0; i < chunk_len; ++i) {
        tokens[i] = (i % 12 == 11) ? std::string(".") : std::string(kFiller[rng.below(kFiller.size())]);
    }
    std::vector<std::size_t> slots;
    for (std::size_t i = 1; i < chunk_len; i += 3) {
        if (i % 12 != 11) slots.push_back(i);
    }
    require(entities.size() <= slots.size(), ErrorKind::invalid_argument, "chunk too short for its entities");
    const auto picked = rng.sample_without_replacement(slots.size(), entities.size());
    for (std::size_t e = 0; e < entities.size(); ++e) tokens[slots[picked[e]]] = entities[e];
    return tokens;
}

}  // namespace

std::string entity_name(std::size_t id) {
    std::string s = "Q";
    do {
        s.push_back(static_cast<char>('a' + id % 26));
        id /= 26;
    } while (id > 0);
    return s;
}

SyntheticRecord make_synthetic_record(std::size_t index, const SyntheticSpec& spec) {
    Rng rng(derive_seed(spec.seed, "synthetic_record", index));
    SyntheticRecord r;
    r.source_id = "syn-" + std::to_string(index);

    const std::size_t q = spec.question_entities;
    r.question = "how do";
    for (std::size_t e = 0; e < q; ++e) r.question += (e == 0 ? " " : " and ") + entity_name(e);
    r.question += " relate ?";
    r.subject = entity_name(0);

    std::vector<std::size_t> overlaps;
    overlaps.insert(overlaps.end(), spec.essential, spec.essential_overlap);
    overlaps.insert(overlaps.end(), spec.at_threshold, spec.threshold_overlap);
    for (std::size_t i = 0; i < spec.irrelevant; ++i) {
        overlaps.push_back(static_cast<std::size_t>(rng.below(spec.irrelevant_max_overlap + 1)));
    }
    rng.shuffle(overlaps);

    std::string text;
    std::size_t distractor = kDistractorBase;
    for (std::size_t overlap : overlaps) {
        std::vector<std::string> entities;
        for (std::size_t id : rng.sample_without_replacement(q, overlap)) entities.push_back(entity_name(id));
        for (std::size_t d = 0; d < 2; ++d) entities.push_back(entity_name(distractor++));
        for (const auto& t : chunk_tokens(entities, spec.chunk_len, rng)) {
            if (!text.empty()) text.push_back(' ');
            text += t;
        }
    }
    r.context = std::move(text);
    r.chunk_overlaps = std::move(overlaps);
    r.answer = entity_name(0) + " meets " + entity_name(1);
    return r;
}

std::vector<SyntheticRecord> make_synthetic_records(std::size_t count, const SyntheticSpec& spec) {
    std::vector<SyntheticRecord> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(make_synthetic_record(i, spec));
    return out;
}

Triplet to_triplet(const SyntheticRecord& r) {
    return make_triplet(r.source_id, r.question, r.context, {}, r.answer, r.subject);
}

std::vector<Triplet> make_synthetic_corpus(std::size_t count, const SyntheticSpec& spec) {
    std::vector<Triplet> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(to_triplet(make_synthetic_record(i, spec)));
    return out;
}

void write_corpus_jsonl(const std::filesystem::path& path, const std::vector<SyntheticRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    for (const auto& r : records) {
        nlohmann::json j = {{"source_id", r.source_id}, {"question", r.question}, {"context", r.context},
                            {"answer", r.answer},       {"subject", r.subject}};
        out << j.dump() << '\n';
    }
    require(static_cast<bool>(out), ErrorKind::io, "cannot write " + path.string());
}

std::string CannedProvider::generate(const GenerationRequest& request) const {
    return std::string(to_string(request.role)) + " " + std::to_string(request.instance) + " for " +
           std::string(request.source_id);
}

ScoredChunk scored_chunk(std::size_t index, std::size_t score) {
    ScoredChunk s;
    s.chunk.index = index;
    s.chunk.token_begin = index * 4;
    s.chunk.token_end = index * 4 + 4;
    s.score = score;
    return s;
}

std::vector<ScoredChunk> scored_chunks(const std::vector<std::size_t>& scores) {
    std::vector<ScoredChunk> out;
    for (std::size_t i = 0; i < scores.size(); ++i) out.push_back(scored_chunk(i, scores[i]));
    return out;
}

std::filesystem::path fresh_temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("logo_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace logo::testing

namespace logo::testing {

NiahInstance handmade_instance(const std::vector<NeedleSpec>& needles, std::size_t gap, std::string question,
                               std::vector<std::string> ground_truth) {
    const auto filler = filler_sentences();
    NiahInstance inst;
    std::string text;
    std::size_t pos = 0;
    std::size_t f = 0;
    auto append = [&](std::string_view s) {
        if (!text.empty()) text.push_back(' ');
        text += s;
        const std::size_t n = tokenize(s).size();
        pos += n;
        return n;
    };
    for (const auto& spec : needles) {
        for (std::size_t i = 0; i < gap; ++i) append(filler[f++ % filler.size()]);
        Needle nd{spec.key, spec.value, spec.sentence, pos, 0};
        nd.end = nd.start + append(spec.sentence);
        inst.needles.push_back(std::move(nd));
    }
    for (std::size_t i = 0; i < gap; ++i) append(filler[f++ % filler.size()]);
    inst.haystack = TokenizedText(std::move(text));
    inst.question = std::move(question);
    inst.ground_truth_values = std::move(ground_truth);
    inst.template_id = "sandwich";
    validate(inst);
    return inst;
}

NiahInstance sandwich_instance() {
    return handmade_instance(
        {{"San Francisco", "eat a sandwich",
          "The best thing to do in San Francisco is to eat a sandwich and sit in Dolores Park."},
         {"New York", "eat a sandwich",
          "The best thing to do in New York is to eat a sandwich and visit the Statue of Liberty."}},
        5, "What is the single best thing to do in both San Francisco and New York?", {"eat a sandwich"});
}

std::vector<std::size_t> needle_positions(const NiahInstance& instance) {
    std::vector<std::size_t> out;
    for (const auto& nd : instance.needles) {
        for (std::size_t p = nd.start; p < nd.end; ++p) out.push_back(p);
    }
    std::sort(out.begin(), out.end());
    return out;
}

AttentionTrace copy_trace(const NiahInstance& instance, std::int64_t head, const std::vector<std::size_t>& positions) {
    AttentionTrace trace;
    for (std::size_t step = 0; step < positions.size(); ++step) {
        const std::string tok(instance.haystack.token(positions[step]));
        trace.push_back({head, step, tok, positions[step], tok});
    }
    return trace;
}

AttentionTrace filler_trace(const NiahInstance& instance, std::int64_t head, std::size_t steps) {
    std::vector<std::size_t> filler;
    const auto needles = needle_positions(instance);
    for (std::size_t p = 0; p < instance.haystack.size() && filler.size() < steps; ++p) {
        if (!std::binary_search(needles.begin(), needles.end(), p)) filler.push_back(p);
    }
    return copy_trace(instance, head, filler);
}

}  // namespace logo::testing
