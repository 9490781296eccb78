// Copyright 2026 The ENG Authors.
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

#include "eng/node_encoding.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "eng/common.hpp"
#include "eng/fixtures.hpp"

namespace eng {
namespace {

std::filesystem::path tmp(const std::string& name) {
  const std::filesystem::path dir = ENG_TEST_TMP;
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::vector<std::string> words(std::size_t n, const std::string& w) { return std::vector<std::string>(n, w); }

TEST(TokenBudget, CutsContextThenSentence) {
  NodeInput in{words(10, "s"), words(10, "c"), words(5, "l")};
  apply_token_budget(in, 40);
  EXPECT_EQ(in.token_count(), 25u);
  apply_token_budget(in, 20);
  EXPECT_EQ(in.sentence.size(), 10u);
  EXPECT_EQ(in.context.size(), 5u);
  EXPECT_EQ(in.label_sentence.size(), 5u);
  apply_token_budget(in, 12);
  EXPECT_EQ(in.sentence.size(), 7u);
  EXPECT_TRUE(in.context.empty());
  apply_token_budget(in, 3);
  EXPECT_TRUE(in.sentence.empty());
  EXPECT_EQ(in.label_sentence.size(), 5u);
}

TEST(NodeInput, AssemblesThreeParts) {
  const Document doc = make_story("n", {"ann ate .", "bob ran .", "ann slept ."}, {"ann", "bob"});
  const NarrativeGraph g = build_graph(doc);
  const std::vector<std::string> vocab = {"joy", "fear"};
  const NodeInput in = assemble_node_input(doc, g.nodes[2], vocab);
  EXPECT_EQ(in.sentence, (std::vector<std::string>{"ann", "slept", "."}));
  EXPECT_EQ(in.context, (std::vector<std::string>{"ann", "ate", ".", "ann", "slept", "."}));
  EXPECT_EQ(in.label_sentence, (std::vector<std::string>{"ann", "is", "joy", ",", "fear", "."}));
  const NodeInput bare = assemble_node_input(doc, g.nodes[1], {});
  EXPECT_TRUE(bare.label_sentence.empty());
  EXPECT_EQ(bare.context, bare.sentence);
  const NodeInput cut = assemble_node_input(doc, g.nodes[2], vocab, 10);
  EXPECT_EQ(cut.token_count(), 10u);
  EXPECT_EQ(cut.context.size(), 1u);
}

TEST(Vocabulary, UnknownMapsToZero) {
  TokenVocabulary v;
  EXPECT_EQ(v.size(), 1u);
  EXPECT_EQ(v.add("cat"), 1);
  EXPECT_EQ(v.add("cat"), 1);
  EXPECT_EQ(v.id("dog"), TokenVocabulary::kUnk);
  EXPECT_THROW(TokenVocabulary(std::vector<std::string>{"a"}), DataError);
  EXPECT_THROW(TokenVocabulary(std::vector<std::string>{"<unk>", "a", "a"}), DataError);
  const auto docs = storycommonsense_toy(2, 1);
  const TokenVocabulary built = TokenVocabulary::build(docs);
  EXPECT_NE(built.id("spiritual"), TokenVocabulary::kUnk);
  EXPECT_NE(built.id("unfulfilled"), TokenVocabulary::kUnk);
  for (const std::string& t : docs[0].sentences[0].tokens) EXPECT_NE(built.id(t), TokenVocabulary::kUnk);
  EXPECT_EQ(TokenVocabulary(built.tokens()).tokens(), built.tokens());
}

TEST(BagEncoder, MatchesHandComputation) {
  TokenVocabulary vocab(std::vector<std::string>{"<unk>", "a", "b"});
  ad::ParameterStore store;
  Rng rng(0);
  init_bag_encoder(store, vocab.size(), 2, rng);
  store.mutable_value("encoder/embedding") = ad::Tensor(3, 2, {0.5, -0.5, 1, 2, 3, -4});
  ad::Tensor w(6, 2, 0.0);
  // Output 0 reads mean(sentence)[0] - mean(label)[1]; output 1 reads -mean(context)[1].
  w(0, 0) = 1.0;
  w(5, 0) = -1.0;
  w(3, 1) = -1.0;
  store.mutable_value("encoder/proj_w") = w;
  store.mutable_value("encoder/proj_b") = ad::Tensor::row_vector({0.25, 0.0});
  const std::vector<NodeInput> inputs = {{{"a", "b"}, {"zzz"}, {"b"}}, {{"a"}, {"b", "b"}, {}}};
  ad::Tape tape;
  const ad::Tensor out = encode_bag(tape, store, vocab, inputs).value();
  ASSERT_EQ(out.rows(), 2u);
  EXPECT_DOUBLE_EQ(out(0, 0), 2.0 + 4.0 + 0.25);
  EXPECT_DOUBLE_EQ(out(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(out(1, 0), 1.25);
  EXPECT_DOUBLE_EQ(out(1, 1), 4.0);

  store.mutable_value("encoder/proj_b") = ad::Tensor::row_vector({-10.0, -10.0});
  ad::Tape clipped;
  EXPECT_EQ(encode_bag(clipped, store, vocab, inputs).value(), ad::Tensor(2, 2, 0.0));
}

TEST(Exchange, RoundTripIsBitwiseAtF32) {
  Rng rng(4);
  std::vector<EmbeddingRecord> recs;
  for (int n = 0; n < 5; ++n) {
    EmbeddingRecord r{"doc", n, {}, "", ""};
    for (int k = 0; k < 7; ++k) r.vector.push_back(rng.normal() * std::pow(10.0, k - 3));
    recs.push_back(r);
  }
  const auto path = tmp("emb.tsv");
  write_embedding_records(path, 7, recs, false);
  std::size_t dim = 0;
  const auto back = read_embedding_records(path, &dim);
  EXPECT_EQ(dim, 7u);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    for (std::size_t k = 0; k < 7; ++k) {
      EXPECT_EQ(back[i].vector[k], static_cast<double>(static_cast<float>(recs[i].vector[k])));
    }
  }
  write_embedding_records(path, 7, back, false);
  const auto again = read_embedding_records(path, nullptr);
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(again[i].vector, back[i].vector);
}

TEST(Exchange, TagsColumns) {
  const std::vector<EmbeddingRecord> recs = {{"d", 0, {1.0, 2.0}, "ate", "love"}};
  const auto path = tmp("tags.tsv");
  write_embedding_records(path, 2, recs, true);
  EXPECT_NE(read_file(path).find("tags=verb,label"), std::string::npos);
  const auto back = read_embedding_records(path, nullptr);
  EXPECT_EQ(back[0].verb, "ate");
  EXPECT_EQ(back[0].label, "love");
}

TEST(Exchange, RejectsDuplicateRaggedAndMissingRows) {
  const auto path = tmp("bad.tsv");
  write_file(path, "#eng-embeddings dim=2\nd\t0\t1 2\nd\t0\t3 4\nd\t1\t1 2\nd\t1\t5 6\n");
  try {
    read_embedding_table(path);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("(d, 0), (d, 1)"), std::string::npos) << e.what();
  }
  write_file(path, "#eng-embeddings dim=2\nd\t0\t1\nd\t1\t1 2 3\n");
  try {
    read_embedding_table(path);
    FAIL();
  } catch (const DataError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("(d, 0) has 1"), std::string::npos) << what;
    EXPECT_NE(what.find("(d, 1) has 3"), std::string::npos) << what;
  }
  write_file(path, "d\t0\t1 2\n");
  EXPECT_THROW(read_embedding_table(path), DataError);
  write_file(path, "#eng-embeddings dim=2\nd\t0\t1 x\n");
  EXPECT_THROW(read_embedding_table(path), DataError);

  write_file(path, "#eng-embeddings dim=2\nn\t0\t1 2\n");
  const Document doc = make_story("n", {"ann ate .", "bob ran ."}, {"ann", "bob"});
  const std::vector<NarrativeGraph> graphs = {build_graph(doc)};
  try {
    load_external_embeddings(path, graphs);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("(n, 1)"), std::string::npos) << e.what();
  }
}

TEST(External, ProjectsOnlyWhenDimensionsDiffer) {
  const auto path = tmp("ext.tsv");
  write_file(path, "#eng-embeddings dim=3\nn\t0\t1 2 3\nn\t1\t4 5 6\n");
  const Document doc = make_story("n", {"ann ate .", "bob ran ."}, {"ann", "bob"});
  const std::vector<NarrativeGraph> graphs = {build_graph(doc)};
  const ExternalEmbeddingTable table = load_external_embeddings(path, graphs);
  ad::ParameterStore store;
  Rng rng(1);
  init_external_projection(store, 3, 3, rng);
  EXPECT_EQ(store.size(), 0u);
  {
    ad::Tape tape;
    const ad::Tensor h = encode_external(tape, store, table, graphs[0], 3).value();
    EXPECT_EQ(h, ad::Tensor(2, 3, {1, 2, 3, 4, 5, 6}));
  }
  init_external_projection(store, 3, 2, rng);
  store.mutable_value("encoder/ext_proj_w") = ad::Tensor(3, 2, {1, 0, 0, 1, 1, 1});
  store.mutable_value("encoder/ext_proj_b") = ad::Tensor::row_vector({0.5, -0.5});
  ad::Tape tape;
  const ad::Tensor h = encode_external(tape, store, table, graphs[0], 2).value();
  EXPECT_EQ(h, ad::Tensor(2, 2, {4.5, 4.5, 10.5, 10.5}));
}

}  // namespace
}  // namespace eng
