// SPDX-License-Identifier: Apache-2.0
//
// Preference and dis-preference context assembly and LOGO training sample
// construction.
//
// Chunks are bucketed against a threshold delta: essential (score > delta),
// irrelevant (score < delta) and at_threshold (score == delta, used only to
// top up a short preference context). A sample pairs one preference
// instance, built from the essential chunks, with M dis-preference
// instances built from irrelevant chunks (all_irrelevant) or a mix
// (partial_relevant). All instances share the union context C'.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "logo/corpus.hpp"
#include "logo/position.hpp"

namespace logo {

struct ChunkPartition {
    std::vector<ScoredChunk> essential;
    std::vector<ScoredChunk> irrelevant;
    std::vector<ScoredChunk> at_threshold;

    std::size_t total() const noexcept { return essential.size() + irrelevant.size() + at_threshold.size(); }
};

// Input order is preserved inside each bucket.
ChunkPartition partition_chunks(std::span<const ScoredChunk> scored, std::size_t delta);

enum class AssemblyRole { preference_input, dispref_all_irrelevant, dispref_partial, shared_prime };
enum class DisprefMode { all_irrelevant, partial_relevant };

std::string_view to_string(AssemblyRole role) noexcept;
AssemblyRole parse_assembly_role(std::string_view name);
std::string_view to_string(DisprefMode mode) noexcept;
DisprefMode parse_dispref_mode(std::string_view name);
AssemblyRole role_for(DisprefMode mode) noexcept;

struct ContextAssembly {
    std::vector<std::size_t> chunk_ids;  // ascending
    AssemblyRole role = AssemblyRole::preference_input;
    std::size_t target_count = 0;

    friend bool operator==(const ContextAssembly&, const ContextAssembly&) = default;
};

// The N highest-scoring essential chunks (ties: lower index first). When
// fewer than N are essential, the rest is topped up from at_threshold and
// irrelevant chunks by descending score, ties broken by a seeded draw.
ContextAssembly assemble_preference_context(const ChunkPartition& partition, std::size_t n, std::uint64_t seed);

// all_irrelevant: N irrelevant chunks. partial_relevant:
// floor(mix_ratio * N) essential chunks plus irrelevant ones for the rest.
// Essential and irrelevant draws use separate derived streams, so
// partial_relevant with mix_ratio 0 selects exactly what all_irrelevant does.
ContextAssembly assemble_dispreference_context(const ChunkPartition& partition, std::size_t n, DisprefMode mode,
                                               double mix_ratio, std::uint64_t seed);

std::size_t essential_count(std::size_t n, double mix_ratio);

ContextAssembly build_shared_context(const ContextAssembly& preference,
                                     std::span<const ContextAssembly> dispreferences);

// Covered text of each selected chunk, in id order, separated by '\n'.
// Token count equals the sum of the chunks' token counts.
std::string assemble_text(const TokenizedText& context, std::span<const Chunk> chunks,
                          const ContextAssembly& assembly);

struct GenerationRequest {
    std::string_view source_id;
    AssemblyRole role = AssemblyRole::preference_input;
    std::size_t instance = 0;  // 0 for the preference, 1..M for dis-preferences
    std::string_view question;
    std::string_view context;
    const EntitySet* question_entities = nullptr;
    std::uint64_t seed = 0;
};

class GenerationProvider {
public:
    virtual ~GenerationProvider() = default;
    virtual std::string generate(const GenerationRequest& request) const = 0;
};

// Returns the context sentence sharing the most entities with the question
// (earliest on ties). A cheap stand-in for a model answering from context.
class ExtractiveProvider final : public GenerationProvider {
public:
    std::string generate(const GenerationRequest& request) const override;
};

// Responses read from JSONL {"source_id", "role", "instance", "response"}.
class PrecomputedProvider final : public GenerationProvider {
public:
    static PrecomputedProvider load(const std::filesystem::path& path);
    void add(std::string source_id, AssemblyRole role, std::size_t instance, std::string response);
    std::string generate(const GenerationRequest& request) const override;
    std::size_t size() const noexcept { return table_.size(); }

private:
    std::map<std::tuple<std::string, AssemblyRole, std::size_t>, std::string, std::less<>> table_;
};

struct SampleConfig {
    std::size_t chunk_len = 512;
    std::size_t delta = 6;
    std::size_t n = 16;
    std::size_t m = 2;
    double mix_ratio = 0.25;
    std::int64_t target_len = 65536;
    StrategyRatio strategy_ratio{};
    std::uint64_t seed = 0;
};

void validate(const SampleConfig& config);

// Dis-preference j (0-based) uses all_irrelevant for even j and
// partial_relevant for odd j, so M >= 2 always has one of each.
DisprefMode dispref_mode_for(std::size_t j) noexcept;

struct ResponseRecord {
    AssemblyRole role = AssemblyRole::preference_input;
    ContextAssembly assembly;
    std::string assembled_text;
    std::size_t context_tokens = 0;
    std::string response;
    std::optional<DisprefMode> mode;
    std::optional<ErrorPattern> error_pattern;
    std::uint64_t seed = 0;
    std::uint64_t shared_context_hash = 0;  // fnv1a64 of the shared text
};

struct TrainingSample {
    std::string source_id;
    std::string question;
    ContextAssembly shared_context;
    std::string shared_text;
    std::size_t shared_tokens = 0;
    ResponseRecord preference;
    std::vector<ResponseRecord> dispreferences;
    std::vector<PositionMap> position_maps;  // M + 1: preference first
    std::uint64_t seed = 0;

    std::size_t instance_count() const noexcept { return 1 + dispreferences.size(); }
};

// `sample_index` is the ordinal of this sample in the output; it selects
// the per-sample seed and the continuous/sparse schedule slot of each
// instance's position map.
TrainingSample build_training_sample(const Triplet& triplet, std::span<const Chunk> chunks,
                                     const ChunkPartition& partition, const EntitySet& question_entities,
                                     const GenerationProvider& provider, const SampleConfig& config,
                                     std::size_t sample_index);

struct TokenBudget {
    std::size_t samples = 0;
    std::uint64_t instance_context_tokens = 0;  // sum over instances of assembled context tokens
    std::uint64_t shared_context_tokens = 0;    // sum over instances of C' tokens
    std::uint64_t formula_tokens = 0;           // samples * chunk_len * N * (M + 1)
};

TokenBudget token_budget(std::span<const TrainingSample> samples, const SampleConfig& config);
std::uint64_t budget_formula(std::uint64_t samples, const SampleConfig& config);

}  // namespace logo
