// SPDX-License-Identifier: Apache-2.0
//
// Multi-value needle-in-a-haystack instances, per-head retrieval scores
// from argmax-attention traces, and recall of needle values in a
// generation.
//
// A decoding step copies for head h when the token the head attends to
// most lies inside a needle and equals the decoded token. The head's
// retrieval score is |copied needle positions| / |needle positions|, with
// positions pooled over all needles.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logo/tokenizer.hpp"

namespace logo {

struct Needle {
    std::string key;       // e.g. the city the needle talks about
    std::string value;     // the answer the needle carries
    std::string sentence;  // full inserted sentence
    std::size_t start = 0; // haystack token range [start, end)
    std::size_t end = 0;
};

struct NiahInstance {
    TokenizedText haystack;
    std::vector<Needle> needles;
    std::string question;
    std::vector<std::string> ground_truth_values;
    std::string template_id;
    std::uint64_t seed = 0;
};

// Template ids: "sandwich" (every needle shares the value "eat a
// sandwich"; the question asks for the common action) and "magic_number"
// (each needle carries its own 7-digit number).
std::vector<std::string_view> niah_template_ids();

// The haystack has exactly `haystack_len` tokens: seeded filler sentences
// plus the needles, each inserted at the filler sentence boundary closest
// to depth * filler_length. Two needles landing on the same boundary are
// rejected as overlapping.
NiahInstance generate_niah(std::size_t haystack_len, std::size_t n_needles, std::span<const double> depths,
                           std::string_view template_id, std::uint64_t seed);

// Throws unless every needle range is in bounds, disjoint from the others
// and covers exactly its sentence.
void validate(const NiahInstance& instance);

std::span<const std::string_view> filler_sentences();

struct TraceRecord {
    std::int64_t head = 0;
    std::size_t step = 0;
    std::string decoded_token;
    std::size_t argmax_pos = 0;
    std::string input_token;
};

using AttentionTrace = std::vector<TraceRecord>;

struct HeadScore {
    std::int64_t head = 0;
    std::vector<std::size_t> copy_set;  // copied needle positions, ascending
    double retrieval_score = 0.0;
    bool is_retrieval_head = false;
};

inline constexpr double kRetrievalThreshold = 0.1;
inline constexpr std::size_t kDefaultTopK = 10;

// One score per head, ordered by head id. Records pointing outside the
// haystack, whose input_token disagrees with the haystack, or repeating a
// (head, step) pair are rejected.
std::vector<HeadScore> head_retrieval_score(const AttentionTrace& trace, const NiahInstance& instance);

// Mean of the top_k scores among heads scoring >= 0.1 (ties: lower head id
// first); 0 when no head qualifies.
double aggregate_retrieval_score(std::span<const HeadScore> scores, std::size_t top_k = kDefaultTopK);

// Fraction of ground-truth values found in the generation, case-folded.
double recall_score(std::string_view generation, const NiahInstance& instance);

}  // namespace logo
