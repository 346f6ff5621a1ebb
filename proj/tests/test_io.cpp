// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>
#include <functional>

#include "logo/error.hpp"
#include "logo/io.hpp"
#include "synthetic.hpp"

namespace logo {
namespace {

namespace fs = std::filesystem;

void write(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::invalid_argument;
}

TEST(Jsonl, SkipsBlankLinesAndReportsLineNumbers) {
    const auto dir = testing::fresh_temp_dir("jsonl");
    write(dir / "a.jsonl", "{\"x\":1}\n\n  \n{\"x\":2}\n");
    EXPECT_EQ(read_jsonl(dir / "a.jsonl").size(), 2u);
    write(dir / "b.jsonl", "{\"x\":1}\n{broken\n");
    try {
        read_jsonl(dir / "b.jsonl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::schema);
        EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
    }
    EXPECT_EQ(kind_of([&] { read_jsonl(dir / "missing.jsonl"); }), ErrorKind::not_found);
}

TEST(Jsonl, AtomicWriteLeavesNoTemp) {
    const auto dir = testing::fresh_temp_dir("atomic");
    write_file_atomic(dir / "out.json", "abc");
    write_file_atomic(dir / "out.json", "defg");
    EXPECT_EQ(read_file(dir / "out.json"), "defg");
    EXPECT_FALSE(fs::exists(dir / "out.json.tmp"));
    EXPECT_EQ(kind_of([&] { write_file_atomic(dir / "no" / "such" / "dir.json", "x"); }), ErrorKind::io);
    EXPECT_FALSE(fs::exists(dir / "no"));
}

TEST(Schema, VersionChecked) {
    EXPECT_NO_THROW(check_schema(Json{{"logo_schema", 1}}, "x"));
    EXPECT_NO_THROW(check_schema(Json::object(), "x"));
    EXPECT_EQ(kind_of([] { check_schema(Json{{"logo_schema", 2}}, "x"); }), ErrorKind::schema);
    EXPECT_EQ(kind_of([] { check_schema(Json::array(), "x"); }), ErrorKind::schema);
}

TEST(Corpus, ReadsAndRejects) {
    const auto dir = testing::fresh_temp_dir("corpus");
    testing::SyntheticSpec spec;
    spec.chunk_len = 32;
    testing::write_corpus_jsonl(dir / "c.jsonl", testing::make_synthetic_records(3, spec));
    const auto corpus = read_corpus(dir / "c.jsonl");
    ASSERT_EQ(corpus.size(), 3u);
    EXPECT_EQ(corpus[1].source_id, "syn-1");
    EXPECT_EQ(corpus[0].subject, "Qa");

    write(dir / "bad.jsonl", "{\"source_id\":\"a\",\"question\":\"q\"}\n");
    EXPECT_EQ(kind_of([&] { read_corpus(dir / "bad.jsonl"); }), ErrorKind::schema);
    write(dir / "empty.jsonl", "{\"source_id\":\"a\",\"question\":\"\",\"context\":\"c\"}\n");
    EXPECT_EQ(kind_of([&] { read_corpus(dir / "empty.jsonl"); }), ErrorKind::schema);
    write(dir / "type.jsonl", "{\"source_id\":3,\"question\":\"q\",\"context\":\"c\"}\n");
    EXPECT_EQ(kind_of([&] { read_corpus(dir / "type.jsonl"); }), ErrorKind::schema);
}

TEST(RoundTrip, PositionMap) {
    const auto m = synth_sparse(40, 400, 8, 5);
    EXPECT_EQ(position_map_from_json(to_json(m), "x"), m);
    Json broken = to_json(m);
    broken["target_len"] = 401;
    EXPECT_THROW(position_map_from_json(broken, "x"), Error);
}

TEST(RoundTrip, BatchItem) {
    const auto item = random_batch_item(3, 2);
    const auto back = batch_item_from_json(to_json(item), "x");
    EXPECT_EQ(back.preferred.token_logprobs, item.preferred.token_logprobs);
    ASSERT_EQ(back.dispreferred.size(), 2u);
    EXPECT_EQ(back.dispreferred[1].token_logprobs, item.dispreferred[1].token_logprobs);
    EXPECT_EQ(kind_of([] { batch_item_from_json(Json{{"preferred", {-1.0}}}, "x"); }), ErrorKind::schema);
}

TEST(RoundTrip, TinyModelAndExamples) {
    const auto m = TinyModel::random(32, 4);
    EXPECT_EQ(tiny_model_from_json(to_json(m), "x"), m);
    for (const auto& ex : make_toy_fixture(3, 1)) {
        const auto back = toy_example_from_json(to_json(ex), "x");
        EXPECT_EQ(back.context, ex.context);
        EXPECT_EQ(back.preferred, ex.preferred);
        EXPECT_EQ(back.dispreferred, ex.dispreferred);
    }
}

TEST(RoundTrip, NiahInstance) {
    const std::vector<double> depths{0.3, 0.6};
    const auto inst = generate_niah(500, 2, depths, "magic_number", 2);
    const auto back = niah_instance_from_json(to_json(inst), "x");
    EXPECT_EQ(back.haystack.text(), inst.haystack.text());
    EXPECT_EQ(back.ground_truth_values, inst.ground_truth_values);
    ASSERT_EQ(back.needles.size(), 2u);
    EXPECT_EQ(back.needles[1].start, inst.needles[1].start);
    EXPECT_EQ(back.needles[1].sentence, inst.needles[1].sentence);
}

TEST(RoundTrip, TraceRecord) {
    const Json j = {{"head", 7}, {"step", 2}, {"decoded_token", "a"}, {"argmax_pos", 9}, {"input_token", "a"}};
    const auto r = trace_record_from_json(j, "x");
    EXPECT_EQ(r.head, 7);
    EXPECT_EQ(r.argmax_pos, 9u);
    EXPECT_EQ(kind_of([] { trace_record_from_json(Json{{"head", 1}}, "x"); }), ErrorKind::schema);
}

TEST(Serialize, OutputsCarrySchema) {
    EXPECT_EQ(to_json(synth_continuous(8, 20, 4, 1))["logo_schema"], 1);
    EXPECT_EQ(to_json(TokenBudget{})["logo_schema"], 1);
}

}  // namespace
}  // namespace logo
