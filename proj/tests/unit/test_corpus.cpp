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

#include "eng/corpus.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "eng/common.hpp"
#include "eng/fixtures.hpp"

namespace eng {
namespace {

const char* kLine =
    R"({"doc_id":"d1","sentences":[{"index":0,"text":"Ann ate .","tokens":["ann","ate","."]},)"
    R"({"index":1,"text":"But Ann slept .","tokens":["but","ann","slept","."]}],)"
    R"("chains":[{"entity":"Ann","mentions":[[0,0,1],[1,1,2]]}],)"
    R"("connectives":[{"sent":1,"start":0,"end":1,"surface":"but","position":"initial"}],)"
    R"("labels":{"maslow":[{"entity":"Ann","sentence":0,"votes":{"physiological":[1,1,0],"love":[1,0,0]}}]}})";

TEST(Tokenize, LowercasesAndSplitsPunctuation) {
  EXPECT_EQ(tokenize("Ann's well-known cat, Bob!"),
            (std::vector<std::string>{"ann's", "well-known", "cat", ",", "bob", "!"}));
  EXPECT_EQ(tokenize("  - 'quoted'  "), (std::vector<std::string>{"-", "'", "quoted", "'"}));
  EXPECT_EQ(normalize_text("He  said:Hi."), "he said : hi .");
  EXPECT_TRUE(tokenize("").empty());
}

TEST(Corpus, ParsesAndAggregatesMissingLabels) {
  const Document doc = parse_document_line(kLine);
  EXPECT_EQ(doc.doc_id, "d1");
  ASSERT_EQ(doc.sentences.size(), 2u);
  ASSERT_EQ(doc.connectives.size(), 1u);
  EXPECT_EQ(doc.connectives[0].position, ConnectivePosition::kSentenceInitial);
  const NodeLabels* nl = doc.labels->find(Task::kMaslow, "Ann", 0);
  ASSERT_NE(nl, nullptr);
  EXPECT_EQ(nl->labels, (std::vector<std::string>{"physiological"}));
  EXPECT_TRUE(doc.labels->has(Task::kMaslow));
  EXPECT_FALSE(doc.labels->has(Task::kReiss));
  EXPECT_FALSE(doc.labels->has(Task::kDesire));
}

TEST(Corpus, FormatRoundTrip) {
  const Document doc = parse_document_line(kLine);
  const std::string line = format_document_line(doc);
  EXPECT_EQ(format_document_line(parse_document_line(line)), line);
  for (const Document& d : storycommonsense_toy(3, 5)) {
    const std::string l = format_document_line(d);
    EXPECT_EQ(format_document_line(parse_document_line(l)), l);
  }
}

TEST(Corpus, OutOfRangeSentenceNamesDocument) {
  Document doc = make_story("story-9", {"Ann ate .", "Ann ran .", "Bob sat .", "Bob ran .", "Ann sat ."},
                            {"ann", "bob"});
  doc.chains[0].mentions.push_back(Mention{7, TokenSpan{0, 1}});
  try {
    validate_document(doc);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("story-9"), std::string::npos);
    EXPECT_NE(what.find("chains[0]"), std::string::npos);
    EXPECT_NE(what.find("7"), std::string::npos);
  }
}

TEST(Corpus, RejectsMalformedInput) {
  EXPECT_THROW(parse_document_line(R"({"doc_id":"x","sentences":[],"chains":[],"connectives":[],"extra":1})"),
               DataError);
  EXPECT_THROW(parse_document_line(R"({"doc_id":"x","sentences":[{"index":0,"text":"a b","tokens":["a"]}]})"),
               DataError);
  EXPECT_THROW(parse_document_line(
                   R"({"doc_id":"x","sentences":[{"index":0,"text":"a","tokens":["a"]}],)"
                   R"("chains":[{"entity":"A","mentions":[[0,0,2]]}]})"),
               DataError);
  EXPECT_THROW(parse_document_line(
                   R"({"doc_id":"x","sentences":[{"index":0,"text":"a","tokens":["a"]}],)"
                   R"("chains":[{"entity":"A","mentions":[[0,0,1]]}],)"
                   R"("labels":{"maslow":[{"entity":"A","sentence":0,"labels":["hunger"]}]}})"),
               DataError);
}

TEST(Corpus, LoadReportsLineNumber) {
  const std::filesystem::path dir = ENG_TEST_TMP;
  std::filesystem::create_directories(dir);
  const auto path = dir / "bad_corpus.jsonl";
  write_file(path, std::string(kLine) + "\n\n{not json}\n");
  try {
    load_corpus(path);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_corpus(dir / "missing.jsonl"), DataError);
}

TEST(Corpus, WriteLoadRoundTrip) {
  const auto docs = desire_toy(4, 3);
  const auto path = std::filesystem::path(ENG_TEST_TMP) / "desire.jsonl";
  std::filesystem::create_directories(path.parent_path());
  write_corpus(path, docs);
  const auto back = load_corpus(path);
  ASSERT_EQ(back.size(), docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    EXPECT_EQ(format_document_line(back[i]), format_document_line(docs[i]));
  }
}

TEST(Votes, FlagMajority) {
  EXPECT_TRUE(vote_active(std::vector<double>{1, 1, 0}, Task::kMaslow));
  EXPECT_TRUE(vote_active(std::vector<double>{1, 1, 1}, Task::kReiss));
  EXPECT_FALSE(vote_active(std::vector<double>{1, 0, 0}, Task::kMaslow));
  EXPECT_FALSE(vote_active(std::vector<double>{0, 0, 0}, Task::kReiss));
}

TEST(Votes, PlutchikMeanRating) {
  EXPECT_TRUE(vote_active(std::vector<double>{2, 2, 2}, Task::kPlutchik));
  EXPECT_TRUE(vote_active(std::vector<double>{5, 1, 0}, Task::kPlutchik));
  EXPECT_FALSE(vote_active(std::vector<double>{3, 2, 0}, Task::kPlutchik));
  EXPECT_FALSE(vote_active(std::vector<double>{1, 1, 1}, Task::kPlutchik));
}

TEST(Votes, RequiresThreeAnnotators) {
  EXPECT_THROW(vote_active(std::vector<double>{1, 1}, Task::kMaslow), DataError);
  EXPECT_THROW(vote_active(std::vector<double>{1, 1, 1, 1}, Task::kPlutchik), DataError);
  EXPECT_THROW(vote_active(std::vector<double>{1, 1, 1}, Task::kDesire), DataError);
}

TEST(Votes, AggregateInCanonicalOrder) {
  const RawVotes votes = {{"stability", {1, 1, 0}}, {"esteem", {0, 1, 1}}, {"love", {0, 0, 1}}};
  EXPECT_EQ(aggregate_votes(votes, Task::kMaslow), (std::vector<std::string>{"esteem", "stability"}));
  const RawVotes plut = {{"joy", {3, 2, 1}}, {"fear", {2, 2, 1}}, {"anger", {4, 4, 0}}};
  EXPECT_EQ(aggregate_votes(plut, Task::kPlutchik), (std::vector<std::string>{"anger", "joy"}));
}

TEST(Labels, VocabulariesAreSorted) {
  for (Task t : {Task::kMaslow, Task::kReiss, Task::kPlutchik, Task::kDesire}) {
    const auto& v = label_vocabulary(t);
    EXPECT_TRUE(std::is_sorted(v.begin(), v.end())) << task_name(t);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(label_index(t, v[i]), static_cast<int>(i));
    EXPECT_EQ(parse_task(task_name(t)), t);
  }
  EXPECT_EQ(label_vocabulary(Task::kMaslow).size(), 5u);
  EXPECT_EQ(label_vocabulary(Task::kReiss).size(), 19u);
  EXPECT_EQ(label_vocabulary(Task::kPlutchik).size(), 8u);
  EXPECT_EQ(label_index(Task::kMaslow, "hunger"), -1);
}

TEST(Labels, LabelSentence) {
  const std::vector<std::string> vocab = {"esteem", "love", "stability"};
  EXPECT_EQ(build_label_sentence("Ann", vocab), "Ann is esteem, love, stability.");
  EXPECT_EQ(build_label_sentence("Bob", std::vector<std::string>{"joy"}), "Bob is joy.");
  EXPECT_THROW(build_label_sentence("Bob", std::vector<std::string>{}), std::invalid_argument);
}

TEST(Sentiment, ScoreWithNegation) {
  SentimentLexicon lex;
  lex.scores = {{"good", 0.5}, {"bad", -0.8}};
  lex.negations = {"not"};
  const std::vector<std::string> a = {"it", "was", "good"};
  EXPECT_DOUBLE_EQ(sentiment_score(a, lex), 0.5 / std::sqrt(3.0));
  const std::vector<std::string> b = {"not", "very", "very", "good", "bad"};
  // "good" is three tokens after "not"; "bad" is four tokens after.
  EXPECT_DOUBLE_EQ(sentiment_score(b, lex), (-0.5 - 0.8) / std::sqrt(5.0));
  EXPECT_EQ(sentiment_label(a, lex), Sentiment::kPositive);
  EXPECT_EQ(sentiment_label(b, lex), Sentiment::kNegative);
  EXPECT_EQ(sentiment_label(std::vector<std::string>{"x"}, lex), Sentiment::kNeutral);
  EXPECT_DOUBLE_EQ(sentiment_score(std::vector<std::string>{}, lex), 0.0);
}

TEST(Sentiment, LoadLexiconFile) {
  const auto path = std::filesystem::path(ENG_TEST_TMP) / "lex.tsv";
  std::filesystem::create_directories(path.parent_path());
  write_file(path, "# comment\nGreat\t0.9\n@negation\tnever\n@thresholds\t-0.2\t0.2\n");
  const SentimentLexicon lex = load_sentiment_lexicon(path);
  EXPECT_DOUBLE_EQ(lex.scores.at("great"), 0.9);
  EXPECT_EQ(lex.negations.count("never"), 1u);
  EXPECT_EQ(lex.negations.count("not"), 0u);
  EXPECT_DOUBLE_EQ(lex.t_pos, 0.2);
  write_file(path, "great\t1.5\n");
  EXPECT_THROW(load_sentiment_lexicon(path), DataError);
  write_file(path, "great\tabc\n");
  EXPECT_THROW(load_sentiment_lexicon(path), DataError);
}

}  // namespace
}  // namespace eng
