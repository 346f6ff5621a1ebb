// SPDX-License-Identifier: Apache-2.0
//
// JSON wire formats. Every top-level output object carries
// "logo_schema": 1; readers reject a different version when the field is
// present.
#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "logo/corpus.hpp"
#include "logo/jsonl.hpp"
#include "logo/niah.hpp"
#include "logo/objective.hpp"
#include "logo/position.hpp"
#include "logo/pref_synth.hpp"
#include "logo/toy_trainer.hpp"

namespace logo {

Json with_schema(Json object);
void check_schema(const Json& object, std::string_view where);

// Corpus: {"source_id", "question", "context", "answer"?, "subject"?, "prediction"?}
Triplet triplet_from_json(const Json& j, std::string_view where);
std::vector<Triplet> read_corpus(const std::filesystem::path& path);

Json to_json(const EntitySet& set);
Json to_json(const Chunk& chunk, const Triplet& triplet);
// Scored output: {"source_id", "chunk_index", "score", "entities"}
Json to_json(const ScoredChunk& scored, std::string_view source_id);

Json to_json(const ContextAssembly& assembly);
Json to_json(const ResponseRecord& record);
Json to_json(const TrainingSample& sample);
Json to_json(const TokenBudget& budget);

// {real_len, target_len, strategy, chunk_len, seed, biases}
Json to_json(const PositionMap& map);
PositionMap position_map_from_json(const Json& j, std::string_view where);
Json to_json(const CoverageReport& report);

SequenceScore sequence_score_from_json(const Json& j, std::string_view where);
// {"preferred": [...], "dispreferred": [[...], ...]}
LogoBatchItem batch_item_from_json(const Json& j, std::string_view where);
Json to_json(const LogoBatchItem& item);
Json to_json(const LossBreakdown& loss);
Json to_json(const MarginHistogram& histogram);
Json to_json(const LogoConfig& config);

Json to_json(const StepRecord& record);
Json to_json(const ToyMetrics& metrics);
Json to_json(const TinyModel& model);
TinyModel tiny_model_from_json(const Json& j, std::string_view where);
Json to_json(const ToyExample& example);
ToyExample toy_example_from_json(const Json& j, std::string_view where);

Json to_json(const NiahInstance& instance);
NiahInstance niah_instance_from_json(const Json& j, std::string_view where);
TraceRecord trace_record_from_json(const Json& j, std::string_view where);
AttentionTrace read_trace(const std::filesystem::path& path);
Json to_json(const HeadScore& score);

}  // namespace logo
