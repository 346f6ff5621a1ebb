// SPDX-License-Identifier: Apache-2.0
//
// Seeded synthetic corpora and canned generations for tests.
//
// Every chunk of a synthetic context is exactly chunk_len tokens. Entity
// names are made-up capitalized single tokens ("Qabc"); filler is
// lowercase and never contains a connector word, digits or quotes, so
// the rule-based extractor sees exactly the planted entities.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "logo/corpus.hpp"
#include "logo/niah.hpp"
#include "logo/pref_synth.hpp"

namespace logo::testing {

struct SyntheticSpec {
    std::size_t chunk_len = 512;
    std::size_t question_entities = 10;
    std::size_t essential = 6;      // chunks holding 8 question entities
    std::size_t at_threshold = 2;   // chunks holding exactly 6
    std::size_t irrelevant = 18;    // chunks holding 0 to 3
    std::size_t essential_overlap = 8;
    std::size_t threshold_overlap = 6;
    std::size_t irrelevant_max_overlap = 3;
    std::uint64_t seed = 1;
};

struct SyntheticRecord {
    std::string source_id;
    std::string question;
    std::string context;
    std::string answer;
    std::string subject;
    std::vector<std::size_t> chunk_overlaps;  // planted score per chunk, in context order
};

std::string entity_name(std::size_t id);

SyntheticRecord make_synthetic_record(std::size_t index, const SyntheticSpec& spec);
std::vector<SyntheticRecord> make_synthetic_records(std::size_t count, const SyntheticSpec& spec);
Triplet to_triplet(const SyntheticRecord& record);
std::vector<Triplet> make_synthetic_corpus(std::size_t count, const SyntheticSpec& spec);
void write_corpus_jsonl(const std::filesystem::path& path, const std::vector<SyntheticRecord>& records);

// Returns "<role> <instance> for <source_id>".
class CannedProvider final : public GenerationProvider {
public:
    std::string generate(const GenerationRequest& request) const override;
};

ScoredChunk scored_chunk(std::size_t index, std::size_t score);
std::vector<ScoredChunk> scored_chunks(const std::vector<std::size_t>& scores);

std::filesystem::path fresh_temp_dir(const std::string& name);

// Haystack of filler with the given needle sentences inserted in order,
// each after `gap` filler sentences. Values and keys are taken verbatim.
struct NeedleSpec {
    std::string key;
    std::string value;
    std::string sentence;
};
NiahInstance handmade_instance(const std::vector<NeedleSpec>& needles, std::size_t gap, std::string question,
                               std::vector<std::string> ground_truth);

// The two-city sandwich instance: San Francisco / Dolores Park and New
// York / Statue of Liberty, ground truth "eat a sandwich".
NiahInstance sandwich_instance();

// Union of needle token positions, ascending.
std::vector<std::size_t> needle_positions(const NiahInstance& instance);

// One record per position for `head`: the head attends to the position
// and the decoded token equals the token there (a copy).
AttentionTrace copy_trace(const NiahInstance& instance, std::int64_t head, const std::vector<std::size_t>& positions);
// A head that attends to filler only; the decoded token still matches.
AttentionTrace filler_trace(const NiahInstance& instance, std::int64_t head, std::size_t steps);

}  // namespace logo::testing
