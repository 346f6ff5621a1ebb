// SPDX-License-Identifier: Apache-2.0
//
// Question/context/prediction triplets, fixed-length chunking, entity
// extraction and overlap scoring, and the misalignment taxonomy used to
// label dis-preference responses.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "logo/tokenizer.hpp"

namespace logo {

struct Triplet {
    std::string source_id;
    TokenizedText question;
    TokenizedText context;
    TokenizedText prediction;  // may be empty before generation
    std::optional<std::string> answer;
    std::optional<std::string> subject;
};

// Validates the non-empty question/context invariants.
Triplet make_triplet(std::string source_id, std::string question, std::string context,
                     std::string prediction = {}, std::optional<std::string> answer = std::nullopt,
                     std::optional<std::string> subject = std::nullopt);

// A contiguous token span of a context. char_begin/char_end cover the
// chunk's share of the source text, whitespace included, so the chunk
// spans of one context tile the whole text.
struct Chunk {
    std::size_t index = 0;
    std::size_t token_begin = 0;
    std::size_t token_end = 0;
    std::size_t char_begin = 0;
    std::size_t char_end = 0;

    std::size_t token_count() const noexcept { return token_end - token_begin; }
    TokenView view(const TokenizedText& context) const { return context.view(token_begin, token_end); }
    // Text from the first to the last token, without surrounding whitespace.
    std::string_view text(const TokenizedText& context) const { return view(context).covered_text(); }
};

std::vector<Chunk> chunk_context(const TokenizedText& context, std::size_t chunk_len);

// Trim, collapse internal whitespace, ASCII case-fold.
std::string normalize_entity(std::string_view raw);

class EntitySet {
public:
    using container = std::set<std::string, std::less<>>;
    using const_iterator = container::const_iterator;

    EntitySet() = default;
    EntitySet(std::initializer_list<std::string_view> raw);

    // Normalizes before inserting; empty strings are dropped.
    bool insert(std::string_view raw);
    bool contains(std::string_view raw) const;

    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }
    const_iterator begin() const noexcept { return items_.begin(); }
    const_iterator end() const noexcept { return items_.end(); }
    const container& items() const noexcept { return items_; }

    friend bool operator==(const EntitySet&, const EntitySet&) = default;

private:
    container items_;
};

EntitySet set_intersection(const EntitySet& a, const EntitySet& b);

// Rule-based extraction: maximal runs of capitalized tokens (joined across
// the connectors "of", "de", "del", "da", "van", "von", "der", "la", "le",
// "du" when a capitalized token follows), with leading function words such
// as "The" or "What" stripped; spans between a pair of double quotes; and
// numeric literals ("2024", "3.5", "1,000").
EntitySet extract_entities(const TokenView& text);
EntitySet extract_entities(std::string_view text);

// Lookup key for extractors. Question entities use kQuestionChunk.
inline constexpr std::int64_t kQuestionChunk = -1;

struct EntityKey {
    std::string source_id;
    std::int64_t chunk_index = kQuestionChunk;
};

class EntityExtractor {
public:
    virtual ~EntityExtractor() = default;
    virtual EntitySet extract(const TokenView& text, const EntityKey& key) const = 0;
};

class RuleBasedExtractor final : public EntityExtractor {
public:
    EntitySet extract(const TokenView& text, const EntityKey&) const override { return extract_entities(text); }
};

// Precomputed entities keyed by (source_id, chunk_index), loaded once and
// read-only afterwards. A missing key is an error, never an empty set.
class SidecarExtractor final : public EntityExtractor {
public:
    static SidecarExtractor load(const std::filesystem::path& path);

    void add(const EntityKey& key, EntitySet entities);
    EntitySet extract(const TokenView& text, const EntityKey& key) const override;
    std::size_t size() const noexcept { return table_.size(); }

private:
    std::map<std::pair<std::string, std::int64_t>, EntitySet, std::less<>> table_;
};

// |chunk ∩ question|
std::size_t score_chunk(const EntitySet& chunk_entities, const EntitySet& question_entities);

struct ScoredChunk {
    Chunk chunk;
    EntitySet entities;
    std::size_t score = 0;
};

EntitySet question_entities(const Triplet& triplet, const EntityExtractor& extractor);

std::vector<ScoredChunk> score_context(const Triplet& triplet, const std::vector<Chunk>& chunks,
                                       const EntitySet& question_entities, const EntityExtractor& extractor);

enum class ErrorPattern { aligned, instruction_unfollow, hallucination, indeterminate };

std::string_view to_string(ErrorPattern pattern) noexcept;
ErrorPattern parse_error_pattern(std::string_view name);

// Rules, first match wins:
//   aligned               response text contains the ground truth (case-folded)
//   instruction_unfollow  response and question share no entity
//   hallucination         the entity sets overlap without being identical,
//                         and the subject entity appears in the response
//   indeterminate         everything else
ErrorPattern classify_error_pattern(std::string_view response_text, const EntitySet& response_entities,
                                    const EntitySet& question_entities, std::string_view subject_entity,
                                    std::string_view ground_truth);

// ASCII case-insensitive substring test.
bool contains_case_folded(std::string_view haystack, std::string_view needle);

}  // namespace logo
