// SPDX-License-Identifier: Apache-2.0
#include "logo/io.hpp"

#include <string>

#include "logo/error.hpp"

namespace logo {

Json with_schema(Json object) {
    object["logo_schema"] = kSchemaVersion;
    return object;
}

void check_schema(const Json& object, std::string_view where) {
    if (!object.is_object()) fail(ErrorKind::schema, std::string(where) + ": expected a JSON object");
    if (const Json* v = optional_field(object, "logo_schema")) {
        if (!v->is_number_integer() || v->get<int>() != kSchemaVersion) {
            fail(ErrorKind::schema, std::string(where) + ": unsupported logo_schema " + v->dump());
        }
    }
}

namespace {

std::optional<std::string> optional_string(const Json& j, std::string_view key, std::string_view where) {
    const Json* v = optional_field(j, key);
    if (v == nullptr || v->is_null()) return std::nullopt;
    if (!v->is_string()) fail(ErrorKind::schema, std::string(where) + ": field '" + std::string(key) + "' must be a string");
    return v->get<std::string>();
}

std::string sub(std::string_view where, std::string_view what) { return std::string(where) + " " + std::string(what); }

}  // namespace

Triplet triplet_from_json(const Json& j, std::string_view where) {
    check_schema(j, where);
    try {
        return make_triplet(get_as<std::string>(j, "source_id", where), get_as<std::string>(j, "question", where),
                            get_as<std::string>(j, "context", where),
                            optional_string(j, "prediction", where).value_or(""), optional_string(j, "answer", where),
                            optional_string(j, "subject", where));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::invalid_argument) fail(ErrorKind::schema, std::string(where) + ": " + e.what());
        throw;
    }
}

std::vector<Triplet> read_corpus(const std::filesystem::path& path) {
    const auto lines = read_jsonl(path);
    std::vector<Triplet> out;
    out.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        out.push_back(triplet_from_json(lines[i], path.string() + " line " + std::to_string(i + 1)));
    }
    return out;
}

Json to_json(const EntitySet& set) {
    Json out = Json::array();
    for (const auto& e : set) out.push_back(e);
    return out;
}

Json to_json(const Chunk& c, const Triplet& t) {
    return with_schema({{"source_id", t.source_id},
                        {"chunk_index", c.index},
                        {"token_begin", c.token_begin},
                        {"token_end", c.token_end},
                        {"char_span", {c.char_begin, c.char_end}},
                        {"text", std::string(c.text(t.context))}});
}

Json to_json(const ScoredChunk& s, std::string_view source_id) {
    return with_schema({{"source_id", source_id},
                        {"chunk_index", s.chunk.index},
                        {"score", s.score},
                        {"entities", to_json(s.entities)}});
}

Json to_json(const ContextAssembly& a) {
    return {{"chunk_ids", a.chunk_ids}, {"role", to_string(a.role)}, {"target_count", a.target_count}};
}

Json to_json(const ResponseRecord& r) {
    Json j = {{"role", to_string(r.role)},
              {"assembly", to_json(r.assembly)},
              {"assembled_text", r.assembled_text},
              {"context_tokens", r.context_tokens},
              {"response", r.response},
              {"seed", r.seed},
              {"shared_context_hash", r.shared_context_hash}};
    if (r.mode) j["mode"] = to_string(*r.mode);
    if (r.error_pattern) j["error_pattern"] = to_string(*r.error_pattern);
    return j;
}

Json to_json(const TrainingSample& s) {
    Json disprefs = Json::array();
    for (const auto& d : s.dispreferences) disprefs.push_back(to_json(d));
    Json maps = Json::array();
    for (const auto& m : s.position_maps) maps.push_back(to_json(m));
    return with_schema({{"source_id", s.source_id},
                        {"question", s.question},
                        {"seed", s.seed},
                        {"shared_context", to_json(s.shared_context)},
                        {"shared_text", s.shared_text},
                        {"shared_tokens", s.shared_tokens},
                        {"preference", to_json(s.preference)},
                        {"dispreferences", std::move(disprefs)},
                        {"position_maps", std::move(maps)}});
}

Json to_json(const TokenBudget& b) {
    return with_schema({{"samples", b.samples},
                        {"instance_context_tokens", b.instance_context_tokens},
                        {"shared_context_tokens", b.shared_context_tokens},
                        {"formula_tokens", b.formula_tokens}});
}

Json to_json(const PositionMap& m) {
    return with_schema({{"real_len", m.real_len()},
                        {"target_len", m.target_len()},
                        {"strategy", to_string(m.strategy())},
                        {"chunk_len", m.chunk_len()},
                        {"seed", m.seed()},
                        {"biases", std::vector<std::int64_t>(m.biases().begin(), m.biases().end())}});
}

PositionMap position_map_from_json(const Json& j, std::string_view where) {
    check_schema(j, where);
    auto biases = get_as<std::vector<std::int64_t>>(j, "biases", where);
    require(biases.size() == get_as<std::size_t>(j, "real_len", where), ErrorKind::schema,
            std::string(where) + ": real_len does not match the number of biases");
    try {
        return PositionMap::from_biases(get_as<std::int64_t>(j, "target_len", where), std::move(biases),
                                        parse_position_strategy(get_as<std::string>(j, "strategy", where)),
                                        get_as<std::size_t>(j, "chunk_len", where),
                                        get_as<std::uint64_t>(j, "seed", where));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::invalid_argument) fail(ErrorKind::schema, std::string(where) + ": " + e.what());
        throw;
    }
}

Json to_json(const CoverageReport& r) {
    Json steps = Json::array();
    for (const auto& [gap, count] : r.step_counts) steps.push_back({{"step", gap}, {"count", count}});
    return with_schema({{"target_len", r.target_len},
                        {"maps", r.map_count},
                        {"visited", r.visited},
                        {"unvisited", r.unvisited},
                        {"max_gap", r.max_gap},
                        {"pairs", r.pairs},
                        {"histogram", r.histogram},
                        {"uniformity_stat", r.uniformity_stat},
                        {"degrees_of_freedom", r.degrees_of_freedom},
                        {"critical_value_p01", r.critical_value_p01},
                        {"p_value", r.p_value},
                        {"step_counts", std::move(steps)}});
}

SequenceScore sequence_score_from_json(const Json& j, std::string_view where) {
    if (!j.is_array()) fail(ErrorKind::schema, std::string(where) + ": expected an array of log-probabilities");
    SequenceScore s;
    for (const auto& v : j) {
        if (!v.is_number()) fail(ErrorKind::schema, std::string(where) + ": log-probabilities must be numbers");
        s.token_logprobs.push_back(v.get<double>());
    }
    return s;
}

LogoBatchItem batch_item_from_json(const Json& j, std::string_view where) {
    check_schema(j, where);
    LogoBatchItem item;
    item.preferred = sequence_score_from_json(field(j, "preferred", where), sub(where, "preferred"));
    const Json& d = field(j, "dispreferred", where);
    if (!d.is_array()) fail(ErrorKind::schema, std::string(where) + ": 'dispreferred' must be an array of arrays");
    for (std::size_t i = 0; i < d.size(); ++i) {
        item.dispreferred.push_back(sequence_score_from_json(d[i], sub(where, "dispreferred " + std::to_string(i))));
    }
    return item;
}

Json to_json(const LogoBatchItem& item) {
    Json d = Json::array();
    for (const auto& s : item.dispreferred) d.push_back(s.token_logprobs);
    return with_schema({{"preferred", item.preferred.token_logprobs}, {"dispreferred", std::move(d)}});
}

Json to_json(const LossBreakdown& b) {
    return {{"total", b.total},
            {"preference_reward", b.preference_reward},
            {"mean_dispref_reward", b.mean_dispref_reward},
            {"margin", b.margin},
            {"sft_term", b.sft_term},
            {"sigmoid_arg", b.sigmoid_arg}};
}

Json to_json(const MarginHistogram& h) {
    return {{"edges", h.edges}, {"counts", h.counts}, {"mean", h.mean}, {"stddev", h.stddev},
            {"min", h.min},     {"max", h.max}};
}

Json to_json(const LogoConfig& c) {
    return {{"beta", c.beta},
            {"gamma", c.gamma},
            {"lambda", c.lambda},
            {"sft_sign", c.sft_sign == SftSign::nll ? "nll" : "literal"}};
}

Json to_json(const StepRecord& r) {
    return with_schema({{"step", r.step},
                        {"loss", r.loss},
                        {"margin", r.margin},
                        {"pref_reward", r.pref_reward},
                        {"dispref_reward", r.dispref_reward},
                        {"pref_nll", r.pref_nll},
                        {"lr_used", r.lr_used},
                        {"halvings", r.halvings},
                        {"accepted", r.accepted}});
}

Json to_json(const ToyMetrics& m) {
    return {{"loss", m.loss},
            {"margin", m.margin},
            {"pref_reward", m.pref_reward},
            {"dispref_reward", m.dispref_reward},
            {"pref_nll", m.pref_nll}};
}

Json to_json(const TinyModel& m) {
    return with_schema({{"vocab_size", m.vocab_size()},
                        {"state_count", m.state_count()},
                        {"state_fn", "previous_token"},
                        {"logits", std::vector<double>(m.logits().begin(), m.logits().end())}});
}

TinyModel tiny_model_from_json(const Json& j, std::string_view where) {
    check_schema(j, where);
    return TinyModel::from_logits(get_as<std::size_t>(j, "vocab_size", where),
                                  get_as<std::vector<double>>(j, "logits", where));
}

Json to_json(const ToyExample& ex) {
    return with_schema({{"context", ex.context}, {"preferred", ex.preferred}, {"dispreferred", ex.dispreferred}});
}

ToyExample toy_example_from_json(const Json& j, std::string_view where) {
    check_schema(j, where);
    ToyExample ex;
    ex.context = get_as<TokenSeq>(j, "context", where);
    ex.preferred = get_as<TokenSeq>(j, "preferred", where);
    ex.dispreferred = get_as<std::vector<TokenSeq>>(j, "dispreferred", where);
    return ex;
}

Json to_json(const NiahInstance& inst) {
    Json needles = Json::array();
    for (const auto& n : inst.needles) {
        needles.push_back(
            {{"key", n.key}, {"value", n.value}, {"sentence", n.sentence}, {"start", n.start}, {"end", n.end}});
    }
    return with_schema({{"haystack", inst.haystack.text()},
                        {"haystack_tokens", inst.haystack.size()},
                        {"needles", std::move(needles)},
                        {"question", inst.question},
                        {"ground_truth_values", inst.ground_truth_values},
                        {"template", inst.template_id},
                        {"seed", inst.seed}});
}

NiahInstance niah_instance_from_json(const Json& j, std::string_view where) {
    check_schema(j, where);
    NiahInstance inst;
    inst.haystack = TokenizedText(get_as<std::string>(j, "haystack", where));
    const Json& needles = field(j, "needles", where);
    if (!needles.is_array()) fail(ErrorKind::schema, std::string(where) + ": 'needles' must be an array");
    for (std::size_t i = 0; i < needles.size(); ++i) {
        const std::string w = sub(where, "needle " + std::to_string(i));
        Needle n;
        n.key = optional_string(needles[i], "key", w).value_or("");
        n.value = get_as<std::string>(needles[i], "value", w);
        n.start = get_as<std::size_t>(needles[i], "start", w);
        n.end = get_as<std::size_t>(needles[i], "end", w);
        n.sentence = optional_string(needles[i], "sentence", w).value_or("");
        if (n.sentence.empty() && n.start < n.end && n.end <= inst.haystack.size()) {
            n.sentence = std::string(inst.haystack.view(n.start, n.end).covered_text());
        }
        inst.needles.push_back(std::move(n));
    }
    inst.question = get_as<std::string>(j, "question", where);
    inst.ground_truth_values = get_as<std::vector<std::string>>(j, "ground_truth_values", where);
    inst.template_id = optional_string(j, "template", where).value_or("");
    if (const Json* s = optional_field(j, "seed")) inst.seed = s->get<std::uint64_t>();
    try {
        validate(inst);
    } catch (const Error& e) {
        fail(ErrorKind::schema, std::string(where) + ": " + e.what());
    }
    return inst;
}

TraceRecord trace_record_from_json(const Json& j, std::string_view where) {
    check_schema(j, where);
    TraceRecord r;
    r.head = get_as<std::int64_t>(j, "head", where);
    r.step = get_as<std::size_t>(j, "step", where);
    r.decoded_token = get_as<std::string>(j, "decoded_token", where);
    r.argmax_pos = get_as<std::size_t>(j, "argmax_pos", where);
    r.input_token = get_as<std::string>(j, "input_token", where);
    return r;
}

AttentionTrace read_trace(const std::filesystem::path& path) {
    const auto lines = read_jsonl(path);
    AttentionTrace out;
    out.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        out.push_back(trace_record_from_json(lines[i], path.string() + " line " + std::to_string(i + 1)));
    }
    return out;
}

Json to_json(const HeadScore& s) {
    return {{"head", s.head},
            {"copy_set", s.copy_set},
            {"retrieval_score", s.retrieval_score},
            {"is_retrieval_head", s.is_retrieval_head}};
}

}  // namespace logo
