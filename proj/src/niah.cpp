// SPDX-License-Identifier: Apache-2.0
#include "logo/niah.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>

#include "logo/corpus.hpp"
#include "logo/error.hpp"
#include "logo/rng.hpp"

namespace logo {

namespace {

constexpr std::array<std::string_view, 24> kFiller = {
    "The river bends twice before it reaches the old mill.",
    "Most of the houses on the hill were built from grey stone.",
    "In autumn the orchards smell of apples and wet leaves.",
    "A narrow path runs along the edge of the quiet field.",
    "The library keeps its oldest maps in a locked wooden cabinet.",
    "Every morning the baker opens the shutters before sunrise.",
    "Clouds gathered over the valley but no rain fell that day.",
    "The market square fills with stalls on the first day of each month.",
    "An old clock above the station still shows the wrong time.",
    "Children often race paper boats along the shallow canal.",
    "The lighthouse keeper writes the weather in a thick notebook.",
    "Snow rarely stays for long on the southern slopes.",
    "A family of ducks nests near the reeds every spring.",
    "The bridge was painted green after the last repairs.",
    "Farmers bring their wool to the weekly fair by cart.",
    "The museum displays pottery found during the road works.",
    "Evening light turns the brick walls a warm orange.",
    "A small bell rings whenever the shop door opens.",
    "The forest trail is marked with white stripes on the trees.",
    "Letters arrive twice a week when the roads are clear.",
    "The choir practices in the hall on long winter evenings.",
    "Fishermen mend their nets while waiting for the tide.",
    "A row of poplars shelters the garden from the wind.",
    "The old well in the courtyard has been dry for years.",
};

constexpr std::array<std::string_view, 12> kCities = {
    "San Francisco", "Dublin", "Lisbon", "Kyoto", "Montreal", "Cape Town",
    "Buenos Aires", "Helsinki", "Marrakesh", "Vancouver", "Edinburgh", "Hanoi",
};

constexpr std::array<std::string_view, 12> kActivities = {
    "sit in Dolores Park on a sunny day",
    "walk along the river at dusk",
    "listen to music in a small cafe",
    "watch the boats from the harbour wall",
    "read a book under an old tree",
    "ride a bicycle through the quiet streets",
    "visit the botanical garden in the morning",
    "climb the hill to see the whole city",
    "browse the stalls of the covered market",
    "take a long walk on the beach",
    "explore the narrow lanes of the old town",
    "watch the sunset from a rooftop terrace",
};

constexpr std::string_view kSharedValue = "eat a sandwich";

std::string join_cities(const std::vector<std::string>& cities) {
    if (cities.size() == 1) return cities.front();
    std::string out;
    for (std::size_t i = 0; i < cities.size(); ++i) {
        if (i > 0) out += i + 1 == cities.size() ? " and " : ", ";
        out += cities[i];
    }
    return out;
}

struct Piece {
    std::string text;
    std::size_t tokens = 0;
    int needle = -1;
};

}  // namespace

std::vector<std::string_view> niah_template_ids() { return {"sandwich", "magic_number"}; }

std::span<const std::string_view> filler_sentences() { return kFiller; }

NiahInstance generate_niah(std::size_t haystack_len, std::size_t n_needles, std::span<const double> depths,
                           std::string_view template_id, std::uint64_t seed) {
    require(n_needles >= 1, ErrorKind::invalid_argument, "at least one needle is required");
    require(depths.size() == n_needles, ErrorKind::invalid_argument,
            "expected " + std::to_string(n_needles) + " depths, got " + std::to_string(depths.size()));
    require(n_needles <= kCities.size(), ErrorKind::invalid_argument,
            "at most " + std::to_string(kCities.size()) + " needles are supported");
    for (double d : depths) require(d >= 0.0 && d <= 1.0, ErrorKind::invalid_argument, "depths must lie in [0, 1]");
    const bool sandwich = template_id == "sandwich";
    require(sandwich || template_id == "magic_number", ErrorKind::invalid_argument,
            "unknown template '" + std::string(template_id) + "'");

    NiahInstance inst;
    inst.template_id = std::string(template_id);
    inst.seed = seed;

    Rng pick(derive_seed(seed, "niah_needles"));
    const auto city_ids = pick.sample_without_replacement(kCities.size(), n_needles);
    const auto activity_ids = pick.sample_without_replacement(kActivities.size(), n_needles);
    std::vector<std::string> cities;
    std::set<std::string> used_values;
    for (std::size_t j = 0; j < n_needles; ++j) {
        Needle nd;
        nd.key = std::string(kCities[city_ids[j]]);
        if (sandwich) {
            nd.value = std::string(kSharedValue);
            nd.sentence = "The best thing to do in " + nd.key + " is to " + nd.value + " and " +
                          std::string(kActivities[activity_ids[j]]) + ".";
        } else {
            do {
                nd.value = std::to_string(pick.between(1000000, 9999999));
            } while (!used_values.insert(nd.value).second);
            nd.sentence = "The special magic number for " + nd.key + " is " + nd.value + ".";
        }
        cities.push_back(nd.key);
        inst.needles.push_back(std::move(nd));
    }
    if (sandwich) {
        inst.question = n_needles == 2 ? "What is the single best thing to do in both " + cities[0] + " and " +
                                             cities[1] + "?"
                                       : "What is the single best thing to do in all of " + join_cities(cities) + "?";
        inst.ground_truth_values = {std::string(kSharedValue)};
    } else {
        inst.question = "What are the special magic numbers for " + join_cities(cities) + "?";
        for (const auto& nd : inst.needles) inst.ground_truth_values.push_back(nd.value);
    }

    for (std::string_view f : kFiller) {
        for (const auto& v : inst.ground_truth_values) {
            require(!contains_case_folded(f, v), ErrorKind::invalid_argument,
                    "filler sentence contains the needle value '" + v + "'");
        }
    }

    std::size_t needle_tokens = 0;
    for (const auto& nd : inst.needles) needle_tokens += tokenize(nd.sentence).size();
    require(haystack_len > needle_tokens, ErrorKind::invalid_argument,
            "haystack_len " + std::to_string(haystack_len) + " cannot hold " + std::to_string(needle_tokens) +
                " needle tokens plus filler");
    const std::size_t filler_len = haystack_len - needle_tokens;

    // Whole filler sentences in seeded order; the last one is cut so the
    // filler has exactly filler_len tokens.
    Rng order(derive_seed(seed, "niah_filler"));
    std::vector<Piece> filler;
    std::size_t have = 0;
    std::vector<std::size_t> deck;
    while (have < filler_len) {
        if (deck.empty()) {
            deck.resize(kFiller.size());
            for (std::size_t i = 0; i < deck.size(); ++i) deck[i] = i;
            order.shuffle(deck);
        }
        const std::string_view s = kFiller[deck.back()];
        deck.pop_back();
        const auto toks = tokenize(s);
        const std::size_t take = std::min(toks.size(), filler_len - have);
        filler.push_back({std::string(s.substr(0, toks[take - 1].end)), take, -1});
        have += take;
    }

    // Boundary b sits before filler piece b; boundary filler.size() is the end.
    std::vector<std::size_t> boundary_tokens(filler.size() + 1, 0);
    for (std::size_t b = 0; b < filler.size(); ++b) boundary_tokens[b + 1] = boundary_tokens[b] + filler[b].tokens;
    std::map<std::size_t, std::size_t> boundary_of_needle;
    std::set<std::size_t> taken;
    for (std::size_t j = 0; j < n_needles; ++j) {
        const double want = depths[j] * static_cast<double>(filler_len);
        std::size_t best = 0;
        for (std::size_t b = 1; b < boundary_tokens.size(); ++b) {
            if (std::abs(static_cast<double>(boundary_tokens[b]) - want) <
                std::abs(static_cast<double>(boundary_tokens[best]) - want)) {
                best = b;
            }
        }
        require(taken.insert(best).second, ErrorKind::invalid_argument,
                "needles " + std::to_string(j) + " and another request the same insertion point (depth " +
                    std::to_string(depths[j]) + ")");
        boundary_of_needle[best] = j;
    }

    std::vector<Piece> pieces;
    for (std::size_t b = 0; b <= filler.size(); ++b) {
        if (auto it = boundary_of_needle.find(b); it != boundary_of_needle.end()) {
            const auto& nd = inst.needles[it->second];
            pieces.push_back({nd.sentence, tokenize(nd.sentence).size(), static_cast<int>(it->second)});
        }
        if (b < filler.size()) pieces.push_back(filler[b]);
    }

    std::string text;
    std::size_t pos = 0;
    for (const auto& p : pieces) {
        if (!text.empty()) text.push_back(' ');
        text += p.text;
        if (p.needle >= 0) {
            inst.needles[static_cast<std::size_t>(p.needle)].start = pos;
            inst.needles[static_cast<std::size_t>(p.needle)].end = pos + p.tokens;
        }
        pos += p.tokens;
    }
    inst.haystack = TokenizedText(std::move(text));
    validate(inst);
    require(inst.haystack.size() == haystack_len, ErrorKind::invalid_argument, "haystack length mismatch");
    return inst;
}

void validate(const NiahInstance& inst) {
    require(!inst.needles.empty(), ErrorKind::invalid_argument, "instance has no needles");
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    for (const auto& nd : inst.needles) {
        require(nd.start < nd.end && nd.end <= inst.haystack.size(), ErrorKind::invalid_argument,
                "needle range [" + std::to_string(nd.start) + ", " + std::to_string(nd.end) +
                    ") is outside the haystack");
        require(inst.haystack.view(nd.start, nd.end).covered_text() == nd.sentence, ErrorKind::invalid_argument,
                "needle range [" + std::to_string(nd.start) + ", " + std::to_string(nd.end) +
                    ") does not cover its sentence");
        ranges.emplace_back(nd.start, nd.end);
    }
    std::sort(ranges.begin(), ranges.end());
    for (std::size_t i = 1; i < ranges.size(); ++i) {
        require(ranges[i].first >= ranges[i - 1].second, ErrorKind::invalid_argument, "needle ranges overlap");
    }
}

std::vector<HeadScore> head_retrieval_score(const AttentionTrace& trace, const NiahInstance& instance) {
    std::set<std::size_t> needle_positions;
    for (const auto& nd : instance.needles) {
        require(nd.end <= instance.haystack.size(), ErrorKind::invalid_argument, "needle range outside haystack");
        for (std::size_t p = nd.start; p < nd.end; ++p) needle_positions.insert(p);
    }
    require(!needle_positions.empty(), ErrorKind::invalid_argument, "instance has no needle tokens");

    std::map<std::int64_t, std::set<std::size_t>> copies;
    std::set<std::pair<std::int64_t, std::size_t>> seen;
    for (const auto& r : trace) {
        const auto where = [&] {
            return "trace record (head " + std::to_string(r.head) + ", step " + std::to_string(r.step) + ")";
        };
        if (r.argmax_pos >= instance.haystack.size()) {
            fail(ErrorKind::invalid_argument, where() + " points at position " + std::to_string(r.argmax_pos) +
                                                  " outside a haystack of " +
                                                  std::to_string(instance.haystack.size()) + " tokens");
        }
        if (instance.haystack.token(r.argmax_pos) != r.input_token) {
            fail(ErrorKind::invalid_argument, where() + " names input token '" + r.input_token +
                                                  "' but the haystack has '" +
                                                  std::string(instance.haystack.token(r.argmax_pos)) + "'");
        }
        if (!seen.insert({r.head, r.step}).second) fail(ErrorKind::invalid_argument, "duplicate " + where());
        auto& set = copies[r.head];
        if (needle_positions.contains(r.argmax_pos) && r.decoded_token == r.input_token) set.insert(r.argmax_pos);
    }

    std::vector<HeadScore> out;
    const double denom = static_cast<double>(needle_positions.size());
    for (auto& [head, set] : copies) {
        HeadScore h;
        h.head = head;
        h.copy_set.assign(set.begin(), set.end());
        h.retrieval_score = static_cast<double>(set.size()) / denom;
        h.is_retrieval_head = h.retrieval_score >= kRetrievalThreshold;
        out.push_back(std::move(h));
    }
    return out;
}

double aggregate_retrieval_score(std::span<const HeadScore> scores, std::size_t top_k) {
    std::vector<const HeadScore*> kept;
    for (const auto& s : scores) {
        if (s.retrieval_score >= kRetrievalThreshold) kept.push_back(&s);
    }
    if (kept.empty() || top_k == 0) return 0.0;
    std::stable_sort(kept.begin(), kept.end(), [](const HeadScore* a, const HeadScore* b) {
        return a->retrieval_score != b->retrieval_score ? a->retrieval_score > b->retrieval_score : a->head < b->head;
    });
    const std::size_t take = std::min(top_k, kept.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < take; ++i) sum += kept[i]->retrieval_score;
    return sum / static_cast<double>(take);
}

double recall_score(std::string_view generation, const NiahInstance& instance) {
    if (instance.ground_truth_values.empty()) return 0.0;
    std::size_t hit = 0;
    for (const auto& v : instance.ground_truth_values) hit += contains_case_folded(generation, v) ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(instance.ground_truth_values.size());
}

}  // namespace logo
