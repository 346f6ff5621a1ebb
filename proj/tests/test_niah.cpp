// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <set>

#include "logo/error.hpp"
#include "logo/niah.hpp"
#include "synthetic.hpp"

namespace logo {
namespace {

using testing::copy_trace;
using testing::filler_trace;
using testing::needle_positions;

NiahInstance liberty_instance() {
    return testing::handmade_instance(
        {{"New York", "eat a sandwich",
          "The best thing to do in New York is to eat a sandwich and visit the Statue of Liberty."}},
        4, "What is the best thing to do in New York?", {"eat a sandwich"});
}

HeadScore head(std::int64_t id, double score) { return {id, {}, score, score >= kRetrievalThreshold}; }

TEST(Generate, SandwichTwoNeedles) {
    const std::vector<double> depths{0.25, 0.75};
    const auto inst = generate_niah(2000, 2, depths, "sandwich", 3);
    EXPECT_EQ(inst.haystack.size(), 2000u);
    ASSERT_EQ(inst.needles.size(), 2u);
    EXPECT_EQ(inst.ground_truth_values, std::vector<std::string>{"eat a sandwich"});
    EXPECT_EQ(inst.question, "What is the single best thing to do in both " + inst.needles[0].key + " and " +
                                 inst.needles[1].key + "?");
    for (const auto& nd : inst.needles) {
        EXPECT_NE(nd.sentence.find("eat a sandwich"), std::string::npos);
        EXPECT_EQ(inst.haystack.view(nd.start, nd.end).covered_text(), nd.sentence);
    }
    EXPECT_LT(inst.needles[0].start, inst.needles[1].start);
}

TEST(Generate, DepthZeroStartsHaystack) {
    const std::vector<double> depths{0.0};
    const auto inst = generate_niah(300, 1, depths, "sandwich", 1);
    EXPECT_EQ(inst.needles[0].start, 0u);
}

TEST(Generate, DepthOneEndsHaystack) {
    const std::vector<double> depths{1.0};
    const auto inst = generate_niah(300, 1, depths, "magic_number", 1);
    EXPECT_EQ(inst.needles[0].end, 300u);
}

TEST(Generate, Deterministic) {
    const std::vector<double> depths{0.1, 0.3, 0.5, 0.7, 0.9};
    const auto a = generate_niah(3000, 5, depths, "magic_number", 42);
    const auto b = generate_niah(3000, 5, depths, "magic_number", 42);
    EXPECT_EQ(a.haystack.text(), b.haystack.text());
    EXPECT_EQ(a.question, b.question);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(a.needles[i].start, b.needles[i].start);
        EXPECT_EQ(a.needles[i].value, b.needles[i].value);
    }
}

TEST(Generate, MagicNumbersDistinct) {
    const std::vector<double> depths{0.1, 0.3, 0.5, 0.7, 0.9};
    const auto inst = generate_niah(3000, 5, depths, "magic_number", 8);
    std::set<std::string> values(inst.ground_truth_values.begin(), inst.ground_truth_values.end());
    EXPECT_EQ(values.size(), 5u);
    for (const auto& v : values) EXPECT_EQ(v.size(), 7u);
}

TEST(Generate, ExactLengthAcrossSizes) {
    for (std::size_t len : {120u, 333u, 1000u, 4097u}) {
        const std::vector<double> depths{0.2, 0.8};
        ASSERT_EQ(generate_niah(len, 2, depths, "sandwich", len).haystack.size(), len);
    }
}

TEST(Generate, FillerHasNoNeedleValues) {
    for (auto f : filler_sentences()) EXPECT_FALSE(contains_case_folded(f, "eat a sandwich"));
}

TEST(Generate, Rejections) {
    const std::vector<double> same{0.5, 0.5};
    EXPECT_THROW(generate_niah(2000, 2, same, "sandwich", 1), Error);
    const std::vector<double> one{0.5};
    EXPECT_THROW(generate_niah(2000, 2, one, "sandwich", 1), Error);
    EXPECT_THROW(generate_niah(2000, 1, one, "limerick", 1), Error);
    EXPECT_THROW(generate_niah(10, 1, one, "sandwich", 1), Error);
    const std::vector<double> bad{1.5};
    EXPECT_THROW(generate_niah(2000, 1, bad, "sandwich", 1), Error);
}

TEST(Validate, RejectsBrokenRanges) {
    auto inst = liberty_instance();
    inst.needles[0].end = inst.haystack.size() + 1;
    EXPECT_THROW(validate(inst), Error);
    inst = liberty_instance();
    inst.needles[0].start += 1;
    EXPECT_THROW(validate(inst), Error);
}

TEST(Retrieval, FullCopy) {
    const auto inst = liberty_instance();
    const auto scores = head_retrieval_score(copy_trace(inst, 0, needle_positions(inst)), inst);
    ASSERT_EQ(scores.size(), 1u);
    EXPECT_EQ(scores[0].retrieval_score, 1.0);
    EXPECT_TRUE(scores[0].is_retrieval_head);
}

TEST(Retrieval, HalfCopy) {
    const auto inst = liberty_instance();
    auto pos = needle_positions(inst);
    ASSERT_EQ(pos.size(), 20u);
    pos.resize(10);
    const auto scores = head_retrieval_score(copy_trace(inst, 3, pos), inst);
    EXPECT_EQ(scores[0].retrieval_score, 0.5);
    EXPECT_EQ(scores[0].copy_set, pos);
}

TEST(Retrieval, NoCopy) {
    const auto inst = liberty_instance();
    const auto scores = head_retrieval_score(filler_trace(inst, 1, 30), inst);
    EXPECT_EQ(scores[0].retrieval_score, 0.0);
    EXPECT_FALSE(scores[0].is_retrieval_head);
}

TEST(Retrieval, MismatchedDecodeIsNotACopy) {
    const auto inst = liberty_instance();
    auto trace = copy_trace(inst, 0, needle_positions(inst));
    for (auto& r : trace) r.decoded_token = "zzz";
    EXPECT_EQ(head_retrieval_score(trace, inst)[0].retrieval_score, 0.0);
}

TEST(Retrieval, RepeatedPositionCountsOnce) {
    const auto inst = liberty_instance();
    const auto p = needle_positions(inst).front();
    const auto scores = head_retrieval_score(copy_trace(inst, 0, {p, p, p, p}), inst);
    EXPECT_EQ(scores[0].copy_set.size(), 1u);
    EXPECT_EQ(scores[0].retrieval_score, 1.0 / 20.0);
}

TEST(Retrieval, MultiNeedleDenominatorIsUnion) {
    const auto inst = testing::sandwich_instance();
    const auto pos = needle_positions(inst);
    ASSERT_EQ(pos.size(), 39u);
    const std::vector<std::size_t> first(pos.begin(), pos.begin() + 19);
    EXPECT_EQ(head_retrieval_score(copy_trace(inst, 0, first), inst)[0].retrieval_score, 19.0 / 39.0);
    EXPECT_EQ(head_retrieval_score(copy_trace(inst, 0, pos), inst)[0].retrieval_score, 1.0);
}

TEST(Retrieval, TraceRejections) {
    const auto inst = liberty_instance();
    auto bad_pos = copy_trace(inst, 0, {0});
    bad_pos[0].argmax_pos = inst.haystack.size();
    EXPECT_THROW(head_retrieval_score(bad_pos, inst), Error);
    auto bad_tok = copy_trace(inst, 0, {0});
    bad_tok[0].input_token = "not-there";
    EXPECT_THROW(head_retrieval_score(bad_tok, inst), Error);
    auto dup = copy_trace(inst, 0, {0, 1});
    dup[1].step = dup[0].step;
    EXPECT_THROW(head_retrieval_score(dup, inst), Error);
}

TEST(Aggregate, FilterThenTopTen) {
    std::vector<HeadScore> s;
    for (int i = 0; i < 10; ++i) s.push_back(head(i, 1.0));
    s.push_back(head(10, 0.05));
    s.push_back(head(11, 0.0));
    EXPECT_EQ(aggregate_retrieval_score(s, 10), 1.0);
}

TEST(Aggregate, NoSurvivors) {
    const std::vector<HeadScore> s{head(0, 0.05), head(1, 0.09), head(2, 0.0)};
    EXPECT_EQ(aggregate_retrieval_score(s, 10), 0.0);
}

TEST(Aggregate, MeanOfSurvivors) {
    const std::vector<HeadScore> s{head(0, 0.9), head(1, 0.6), head(2, 0.3), head(3, 0.01)};
    EXPECT_EQ(aggregate_retrieval_score(s, 10), 0.6);
}

TEST(Aggregate, ThresholdIsInclusive) {
    const std::vector<HeadScore> s{head(0, 0.1), head(1, 0.0)};
    EXPECT_EQ(aggregate_retrieval_score(s, 10), 0.1);
}

TEST(Aggregate, TopKCutsLowest) {
    std::vector<HeadScore> s;
    for (int i = 0; i < 12; ++i) s.push_back(head(i, 0.125 * (1 + i % 8)));
    // Top 10: 1, 0.875, 0.75, 0.625, 0.5, 0.5, 0.375, 0.375, 0.25, 0.25 (sum 5.5).
    EXPECT_EQ(aggregate_retrieval_score(s, 10), 0.55);
    EXPECT_EQ(aggregate_retrieval_score(s, 1), 1.0);
}

TEST(Recall, SandwichFixture) {
    const auto inst = testing::sandwich_instance();
    EXPECT_EQ(recall_score("You should Eat a Sandwich in both cities.", inst), 1.0);
    EXPECT_EQ(recall_score("", inst), 0.0);
    EXPECT_EQ(recall_score("sit in Dolores Park", inst), 0.0);
}

TEST(Recall, PartialValues) {
    auto inst = liberty_instance();
    inst.ground_truth_values = {"1234567", "7654321"};
    EXPECT_EQ(recall_score("the numbers are 7654321 and 1234567", inst), 1.0);
    EXPECT_EQ(recall_score("only 1234567", inst), 0.5);
}

}  // namespace
}  // namespace logo
