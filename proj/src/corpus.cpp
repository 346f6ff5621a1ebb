// SPDX-License-Identifier: Apache-2.0
#include "logo/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "logo/error.hpp"
#include "logo/jsonl.hpp"

namespace logo {

namespace {

char fold(char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

std::string folded(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), fold);
    return out;
}

bool is_capitalized(std::string_view tok) {
    return !tok.empty() && tok.front() >= 'A' && tok.front() <= 'Z';
}

bool is_digits(std::string_view tok) {
    return !tok.empty() && std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool is_connector(std::string_view tok) {
    static constexpr std::array<std::string_view, 10> kConnectors = {"of", "de", "del", "da", "van",
                                                                     "von", "der", "la", "le", "du"};
    return std::find(kConnectors.begin(), kConnectors.end(), tok) != kConnectors.end();
}

// Capitalized function words that open sentences rather than name things.
bool is_leading_stopword(std::string_view folded_tok) {
    static const std::set<std::string, std::less<>> kStop = {
        "a",     "about", "after", "also",  "an",    "and",   "are",   "as",    "at",     "because",
        "before", "but",  "by",    "can",   "could", "did",   "do",    "does",  "for",    "from",
        "he",    "her",   "here",  "his",   "how",   "i",     "if",    "in",    "is",     "it",
        "its",   "my",    "of",    "on",    "or",    "our",   "please", "she",  "should", "so",
        "that",  "the",   "their", "then",  "there", "these", "they",  "this",  "those",  "to",
        "was",   "we",    "were",  "what",  "when",  "where", "which", "while", "who",    "whom",
        "whose", "why",   "will",  "with",  "would", "you",   "your"};
    return kStop.contains(folded_tok);
}

bool adjacent(const TokenView& v, std::size_t a, std::size_t b) {
    return v.tokens[a].end == v.tokens[b].begin;
}

}  // namespace

Triplet make_triplet(std::string source_id, std::string question, std::string context, std::string prediction,
                     std::optional<std::string> answer, std::optional<std::string> subject) {
    Triplet t;
    t.source_id = std::move(source_id);
    t.question = TokenizedText(std::move(question));
    t.context = TokenizedText(std::move(context));
    t.prediction = TokenizedText(std::move(prediction));
    t.answer = std::move(answer);
    t.subject = std::move(subject);
    require(!t.question.empty(), ErrorKind::invalid_argument,
            "triplet '" + t.source_id + "': question must contain at least one token");
    require(!t.context.empty(), ErrorKind::invalid_argument,
            "triplet '" + t.source_id + "': context must contain at least one token");
    return t;
}

std::vector<Chunk> chunk_context(const TokenizedText& context, std::size_t chunk_len) {
    require(chunk_len >= 1, ErrorKind::invalid_argument, "chunk_len must be at least 1");
    require(!context.empty(), ErrorKind::invalid_argument, "cannot chunk an empty context");
    const auto tokens = context.tokens();
    const std::size_t n = tokens.size();
    const std::size_t count = (n + chunk_len - 1) / chunk_len;
    std::vector<Chunk> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Chunk c;
        c.index = i;
        c.token_begin = i * chunk_len;
        c.token_end = std::min(n, c.token_begin + chunk_len);
        c.char_begin = i == 0 ? 0 : tokens[c.token_begin].begin;
        c.char_end = c.token_end == n ? context.text().size() : tokens[c.token_end].begin;
        out.push_back(c);
    }
    return out;
}

std::string normalize_entity(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (char c : raw) {
        if (is_space_byte(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(fold(c));
    }
    return out;
}

EntitySet::EntitySet(std::initializer_list<std::string_view> raw) {
    for (auto s : raw) insert(s);
}

bool EntitySet::insert(std::string_view raw) {
    std::string norm = normalize_entity(raw);
    if (norm.empty()) return false;
    return items_.insert(std::move(norm)).second;
}

bool EntitySet::contains(std::string_view raw) const {
    return items_.contains(normalize_entity(raw));
}

EntitySet set_intersection(const EntitySet& a, const EntitySet& b) {
    EntitySet out;
    for (const auto& e : a) {
        if (b.items().contains(e)) out.insert(e);
    }
    return out;
}

EntitySet extract_entities(const TokenView& v) {
    EntitySet out;
    const std::size_t n = v.size();

    // Quoted spans.
    for (std::size_t i = 0; i < n; ++i) {
        if (v.token(i) != "\"") continue;
        std::size_t j = i + 1;
        while (j < n && v.token(j) != "\"") ++j;
        if (j >= n) break;
        if (j > i + 1) {
            auto inner = v.text.substr(v.tokens[i + 1].begin, v.tokens[j - 1].end - v.tokens[i + 1].begin);
            out.insert(inner);
        }
        i = j;
    }

    std::size_t i = 0;
    while (i < n) {
        const auto tok = v.token(i);
        if (is_capitalized(tok)) {
            std::vector<std::size_t> run{i};
            std::size_t j = i + 1;
            while (j < n) {
                if (is_capitalized(v.token(j))) {
                    run.push_back(j++);
                } else if (is_connector(v.token(j)) && j + 1 < n && is_capitalized(v.token(j + 1))) {
                    run.push_back(j);
                    run.push_back(j + 1);
                    j += 2;
                } else {
                    break;
                }
            }
            std::size_t first = 0;
            while (first < run.size() && (is_leading_stopword(folded(v.token(run[first]))) ||
                                          is_connector(v.token(run[first])))) {
                ++first;
            }
            if (first < run.size()) {
                std::string entity;
                for (std::size_t r = first; r < run.size(); ++r) {
                    if (!entity.empty()) entity.push_back(' ');
                    entity += v.token(run[r]);
                }
                out.insert(entity);
            }
            i = j;
        } else if (is_digits(tok)) {
            std::size_t j = i;
            // digits ([.,] digits)* with no whitespace in between
            while (j + 2 < n && (v.token(j + 1) == "." || v.token(j + 1) == ",") && is_digits(v.token(j + 2)) &&
                   adjacent(v, j, j + 1) && adjacent(v, j + 1, j + 2)) {
                j += 2;
            }
            out.insert(v.text.substr(v.tokens[i].begin, v.tokens[j].end - v.tokens[i].begin));
            i = j + 1;
        } else {
            ++i;
        }
    }
    return out;
}

EntitySet extract_entities(std::string_view text) {
    const auto tokens = tokenize(text);
    return extract_entities(TokenView{text, tokens});
}

SidecarExtractor SidecarExtractor::load(const std::filesystem::path& path) {
    SidecarExtractor out;
    const auto lines = read_jsonl(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string where = path.string() + " record " + std::to_string(i + 1);
        const auto& j = lines[i];
        EntityKey key{get_as<std::string>(j, "source_id", where), get_as<std::int64_t>(j, "chunk_index", where)};
        const Json& list = field(j, "entities", where);
        if (!list.is_array()) fail(ErrorKind::schema, where + ": 'entities' must be an array");
        EntitySet set;
        for (const auto& e : list) {
            if (!e.is_string()) fail(ErrorKind::schema, where + ": entities must be strings");
            set.insert(e.get<std::string>());
        }
        out.add(key, std::move(set));
    }
    return out;
}

void SidecarExtractor::add(const EntityKey& key, EntitySet entities) {
    table_[{key.source_id, key.chunk_index}] = std::move(entities);
}

EntitySet SidecarExtractor::extract(const TokenView&, const EntityKey& key) const {
    auto it = table_.find(std::pair{key.source_id, key.chunk_index});
    if (it == table_.end()) {
        fail(ErrorKind::not_found, "entity sidecar has no entry for source_id '" + key.source_id +
                                       "', chunk_index " + std::to_string(key.chunk_index));
    }
    return it->second;
}

std::size_t score_chunk(const EntitySet& chunk_entities, const EntitySet& question_entities) {
    const auto& small = chunk_entities.size() <= question_entities.size() ? chunk_entities : question_entities;
    const auto& large = &small == &chunk_entities ? question_entities : chunk_entities;
    std::size_t count = 0;
    for (const auto& e : small) count += large.items().contains(e) ? 1 : 0;
    return count;
}

EntitySet question_entities(const Triplet& triplet, const EntityExtractor& extractor) {
    return extractor.extract(triplet.question.view(), EntityKey{triplet.source_id, kQuestionChunk});
}

std::vector<ScoredChunk> score_context(const Triplet& triplet, const std::vector<Chunk>& chunks,
                                       const EntitySet& question_entities, const EntityExtractor& extractor) {
    std::vector<ScoredChunk> out;
    out.reserve(chunks.size());
    for (const auto& c : chunks) {
        ScoredChunk sc;
        sc.chunk = c;
        sc.entities = extractor.extract(c.view(triplet.context),
                                        EntityKey{triplet.source_id, static_cast<std::int64_t>(c.index)});
        sc.score = score_chunk(sc.entities, question_entities);
        out.push_back(std::move(sc));
    }
    return out;
}

std::string_view to_string(ErrorPattern pattern) noexcept {
    switch (pattern) {
        case ErrorPattern::aligned: return "aligned";
        case ErrorPattern::instruction_unfollow: return "instruction_unfollow";
        case ErrorPattern::hallucination: return "hallucination";
        case ErrorPattern::indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

ErrorPattern parse_error_pattern(std::string_view name) {
    for (auto p : {ErrorPattern::aligned, ErrorPattern::instruction_unfollow, ErrorPattern::hallucination,
                   ErrorPattern::indeterminate}) {
        if (to_string(p) == name) return p;
    }
    fail(ErrorKind::schema, "unknown error pattern '" + std::string(name) + "'");
}

bool contains_case_folded(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                          [](char a, char b) { return fold(a) == fold(b); });
    return it != haystack.end();
}

ErrorPattern classify_error_pattern(std::string_view response_text, const EntitySet& response_entities,
                                    const EntitySet& question_entities, std::string_view subject_entity,
                                    std::string_view ground_truth) {
    const std::string truth = normalize_entity(ground_truth);
    require(!truth.empty(), ErrorKind::invalid_argument, "ground truth must be non-empty");
    if (normalize_entity(response_text).find(truth) != std::string::npos) return ErrorPattern::aligned;

    const std::size_t overlap = score_chunk(response_entities, question_entities);
    if (overlap == 0) return ErrorPattern::instruction_unfollow;

    const bool partial = response_entities != question_entities;
    if (partial && response_entities.contains(subject_entity)) return ErrorPattern::hallucination;
    return ErrorPattern::indeterminate;
}

}  // namespace logo
