// Copyright 2026 The gsclip Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstring>

#include "gsclip/io/container.hpp"
#include "gsclip/io/records.hpp"
#include "gsclip/io/report.hpp"
#include "support.hpp"

namespace gsclip::io {
namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidConfig;
}

std::string header(std::uint16_t version, std::uint16_t dtype, std::uint32_t dim, std::uint64_t count) {
  std::string h = "GSCE";
  h.append(reinterpret_cast<const char*>(&version), 2);
  h.append(reinterpret_cast<const char*>(&dtype), 2);
  h.append(reinterpret_cast<const char*>(&dim), 4);
  h.append(reinterpret_cast<const char*>(&count), 8);
  return h;
}

TEST(Container, LayoutIsLittleEndianWithTwentyByteHeader) {
  const auto bytes = encode_container({2, 1, {1.0f, -2.5f}});
  ASSERT_EQ(bytes.size(), 28u);
  EXPECT_EQ(bytes.substr(0, 20), header(1, 1, 2, 1));
  float v;
  std::memcpy(&v, bytes.data() + 24, 4);
  EXPECT_EQ(v, -2.5f);
  EXPECT_EQ(decode_container(bytes).values, (std::vector<float>{1.0f, -2.5f}));
}

TEST(Container, HeaderErrors) {
  EXPECT_EQ(code_of([] { decode_container(""); }), ErrorCode::BadMagic);
  EXPECT_EQ(code_of([] { decode_container("GSCX" + std::string(16, '\0')); }), ErrorCode::BadMagic);
  EXPECT_EQ(code_of([] { decode_container("GSCE\1\0"); }), ErrorCode::MalformedHeader);
  EXPECT_EQ(code_of([] { decode_container(header(2, 1, 1, 0)); }), ErrorCode::UnsupportedVersion);
  EXPECT_EQ(code_of([] { decode_container(header(1, 2, 1, 0)); }), ErrorCode::UnsupportedDtype);
  EXPECT_EQ(code_of([] { decode_container(header(1, 1, 0, 3)); }), ErrorCode::MalformedHeader);
  EXPECT_EQ(code_of([] { decode_container(header(1, 1, 2, 1) + std::string(7, '\0')); }),
            ErrorCode::TruncatedPayload);
  EXPECT_EQ(code_of([] { decode_container(header(1, 1, 4, ~std::uint64_t{0})); }), ErrorCode::TruncatedPayload);
  EXPECT_EQ(code_of([] { decode_container(header(1, 1, 1, 1) + std::string(5, '\0')); }), ErrorCode::TrailingData);
  EXPECT_EQ(decode_container(header(1, 1, 3, 0)).count, 0u);
}

TEST(Sidecar, ErrorsAndBlankLines) {
  EXPECT_EQ(decode_sidecar("\n{\"index\":0,\"id\":\"a\",\"object\":\"cat\"}\n\n").size(), 1u);
  EXPECT_EQ(code_of([] { decode_sidecar("{\"index\":1,\"id\":\"a\",\"object\":\"cat\"}"); }),
            ErrorCode::SidecarMismatch);
  EXPECT_EQ(code_of([] { decode_sidecar("{\"index\":0,\"object\":\"cat\"}"); }), ErrorCode::SidecarMismatch);
  EXPECT_EQ(code_of([] { decode_sidecar("{\"index\":0,\"id\":\"a\",\"object\":\"cat\",\"labels\":[1]}"); }),
            ErrorCode::SidecarMismatch);
  EXPECT_EQ(code_of([] { decode_sidecar("[1,2]"); }), ErrorCode::SidecarMismatch);
  EXPECT_EQ(code_of([] { decode_sidecar("{oops"); }), ErrorCode::SidecarMismatch);
}

TEST(Embeddings, RoundTripIsExactForF32Values) {
  Xoshiro256 rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    const auto set = testing::random_f32_set(rng, 1 + rng.below(12), 1 + rng.below(10));
    const auto [c, s] = encode_embeddings(set);
    EXPECT_EQ(decode_embeddings(c, s), set);
  }
}

TEST(Embeddings, FilesAndMismatches) {
  testing::TempDir dir("io");
  Xoshiro256 rng(11);
  const auto set = testing::random_f32_set(rng, 4, 3);
  write_embeddings(set, dir / "set.gsce");
  EXPECT_TRUE(fs::exists(dir / "set.gsce.meta.jsonl"));
  EXPECT_EQ(read_embeddings(dir / "set.gsce"), set);
  EXPECT_EQ(code_of([&] { read_embeddings(dir / "absent.gsce"); }), ErrorCode::IoFailure);

  const auto [c, s] = encode_embeddings(set);
  const auto short_sidecar = s.substr(0, s.rfind('\n', s.size() - 2) + 1);
  EXPECT_EQ(code_of([&] { decode_embeddings(c, short_sidecar); }), ErrorCode::SidecarMismatch);
  auto mixed = s;
  mixed.replace(mixed.rfind(set.object()), set.object().size(), "other");
  EXPECT_EQ(code_of([&] { decode_embeddings(c, mixed); }), ErrorCode::SidecarMismatch);
  auto nan = c;
  const float q = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(nan.data() + kHeaderSize + 4, &q, 4);
  EXPECT_EQ(code_of([&] { decode_embeddings(nan, s); }), ErrorCode::NonFiniteValue);
}

TEST(FormatTotality, RandomBytesAndMutationsOnlyRaiseTypedErrors) {
  Xoshiro256 rng(12);
  const auto set = testing::random_f32_set(rng, 3, 4);
  const auto [container, sidecar] = encode_embeddings(set);
  const std::string dump =
      "{\"header\":{\"model\":\"m\"}}\n{\"object\":\"cat\",\"text\":\"a photo of a cat with grass\",\"log_prob\":-1.5}\n";
  const std::string synonyms = "{\"label\":\"sofa\",\"synonym\":\"couch\"}\n";
  const std::string antonyms = "{\"pattern\":\"with\",\"replacement\":\"without\"}\n";
  const std::string words = "{\"word\":\"grass\",\"pos\":\"NOUN\",\"rank\":3}\n";
  const std::string corpus =
      "{\"id\":\"rule:1\",\"object\":\"cat\",\"text\":\"a cat with grass\",\"contrast_text\":\"a cat without "
      "grass\",\"contrast_mode\":\"negation\",\"source\":\"rule\",\"contrast_fallback\":false}\n";
  const std::string templates = "{\"pattern\":\"a photo of a [object] with [context]\"}\n";

  for (int i = 0; i < 3000; ++i) {
    const auto noise = testing::random_bytes(rng, 64);
    const auto mc = testing::mutate(rng, container);
    const auto ms = testing::mutate(rng, sidecar);
    ASSERT_TRUE(testing::total_on([](const std::string& b) { decode_container(b); }, noise));
    ASSERT_TRUE(testing::total_on([](const std::string& b) { decode_container(b); }, "GSCE" + noise));
    ASSERT_TRUE(testing::total_on([&](const std::string& b) { decode_embeddings(b, sidecar); }, mc));
    ASSERT_TRUE(testing::total_on([&](const std::string& b) { decode_embeddings(container, b); }, ms));
    ASSERT_TRUE(testing::total_on([](const std::string& b) { decode_candidate_dump(b); }, testing::mutate(rng, dump)));
    ASSERT_TRUE(testing::total_on([](const std::string& b) { decode_synonym_table(b); }, testing::mutate(rng, synonyms)));
    ASSERT_TRUE(testing::total_on([](const std::string& b) { decode_antonym_table(b); }, testing::mutate(rng, antonyms)));
    ASSERT_TRUE(testing::total_on([](const std::string& b) { decode_word_list(b); }, testing::mutate(rng, words)));
    ASSERT_TRUE(testing::total_on([](const std::string& b) { decode_corpus(b); }, testing::mutate(rng, corpus)));
    ASSERT_TRUE(testing::total_on([](const std::string& b) { decode_templates(b); }, testing::mutate(rng, templates)));
    ASSERT_TRUE(testing::total_on([](const std::string& b) { decode_vocabulary(b); }, noise));
    ASSERT_TRUE(testing::total_on([](const std::string& b) { decode_catalog(b); }, noise));
  }
}

TEST(Records, CandidateDumpRoundTrip) {
  CandidateDump d;
  d.header = json{{"model", "gpt2"}, {"prefix", "a photo of a cat with"}};
  d.records = {{"cat", "a photo of a cat with a hat", -2.25}, {"cat", "a photo of a cat with grass", -0.5}};
  const auto back = decode_candidate_dump(encode_candidate_dump(d));
  ASSERT_TRUE(back.header.has_value());
  EXPECT_EQ(*back.header, *d.header);
  EXPECT_EQ(back.records, d.records);
  EXPECT_EQ(code_of([] { decode_candidate_dump("{\"object\":\"cat\",\"text\":\"x\"}"); }), ErrorCode::MalformedRecord);
}

TEST(Records, WordListAntonymsSynonyms) {
  const std::vector<gen::WordFrequencyEntry> words{{"grass", "NOUN", 12}, {"blue", "ADJ", 40}};
  EXPECT_EQ(decode_word_list(encode_word_list(words)), words);
  const gen::AntonymTable ant{{"with", "without"}, {"in front of", "behind"}};
  EXPECT_EQ(decode_antonym_table(encode_antonym_table(ant)), ant);
  EXPECT_EQ(code_of([] { decode_antonym_table("{\"pattern\":\"  \",\"replacement\":\"x\"}"); }),
            ErrorCode::MalformedRecord);
  const auto syn = decode_synonym_table("{\"label\":\"sofa\",\"synonym\":\"couch\"}\n");
  EXPECT_TRUE(syn.synonyms_of("sofa").count("couch"));
}

TEST(Records, CorpusRoundTripAndValidation) {
  CandidateExplanation c;
  c.id = "lm:000001";
  c.object = "cat";
  c.text = "a photo of a cat with a hat";
  c.contrast_text = "a photo of a cat without a hat";
  c.source = CandidateSource::lm;
  c.generation_score = -3.5;
  const std::vector<CandidateExplanation> corpus{c};
  EXPECT_EQ(decode_corpus(encode_corpus(corpus)), corpus);
  auto same = c;
  same.contrast_text = same.text;
  EXPECT_EQ(code_of([&] { decode_corpus(encode_corpus({same})); }), ErrorCode::MalformedRecord);
  auto off = c;
  off.object = "dog";
  EXPECT_EQ(code_of([&] { decode_corpus(encode_corpus({off})); }), ErrorCode::MalformedRecord);
}

TEST(Records, TemplatesAndVocabulary) {
  const auto t = decode_templates(
      "{\"pattern\":\"a photo of a [object] with [context]\"}\n"
      "{\"pattern\":\"a [slot] [slot]\",\"slots\":[\"attribute\",\"object\"]}\n");
  ASSERT_EQ(t.size(), 2u);
  const auto v = decode_vocabulary(R"({"objects":["cat"],"attributes":{"color":["black"]},"contexts":["grass"]})");
  EXPECT_EQ(v.objects(), std::vector<std::string>{"cat"});
  EXPECT_EQ(code_of([] { decode_vocabulary("{\"objects\":[1]}"); }), ErrorCode::MalformedRecord);
}

TEST(Records, CatalogResolvesRelativePaths) {
  const auto c = decode_catalog(
      R"({"model_tag":"m","text_cache":"t.gsce","corpora":{"Cat":"/abs/c.jsonl"},
          "sets":[{"id":"s","path":"a.gsce","object":"cat","labels":["x"]}]})",
      "/base");
  EXPECT_EQ(c.text_cache, fs::path("/base/t.gsce"));
  EXPECT_EQ(c.corpora.at("cat"), fs::path("/abs/c.jsonl"));
  EXPECT_EQ(c.sets[0].path, "/base/a.gsce");
  EXPECT_EQ(decode_catalog(encode_catalog(c)).sets[0].labels, std::vector<std::string>{"x"});
  EXPECT_EQ(code_of([] { decode_catalog("{\"model_tag\":\"m\",\"text_cache\":\"t\",\"corpora\":[]}"); }),
            ErrorCode::MalformedRecord);
}

TEST(Report, JsonShapeAndTable) {
  Xoshiro256 rng(13);
  const auto a = testing::random_set(rng, 8, 4, "cat", "a");
  const auto b = testing::random_set(rng, 9, 4, "cat", "b");
  const auto rc = testing::random_corpus(rng, 3, 4, "cat");
  const auto r = explain(a, b, rc.corpus, rc.text_embs, {});
  const auto j = report_to_json(r);
  EXPECT_EQ(j.at("ranked").size(), 3u);
  EXPECT_TRUE(j.at("ranked")[0].contains("p_value"));
  EXPECT_EQ(j.at("top_x"), 5);
  const auto table = format_report_table(r);
  EXPECT_NE(table.find(r.ranked[0].candidate.text), std::string::npos);
}

}  // namespace
}  // namespace gsclip::io
