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

#include "eng/fixtures.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "eng/common.hpp"
#include "eng/symbolic.hpp"

namespace eng {
namespace {

TEST(MakeStory, MentionsAndConnectives) {
  const Document d = make_story("m", {"ann ate .", "so bob and ann ran .", "nobody left ."}, {"ann", "bob", "cat"});
  ASSERT_EQ(d.chains.size(), 2u);
  EXPECT_EQ(d.chains[0].entity, "ann");
  EXPECT_EQ(d.chains[0].mentions, (std::vector<Mention>{{0, {0, 1}}, {1, {3, 4}}}));
  ASSERT_EQ(d.connectives.size(), 1u);
  EXPECT_EQ(d.connectives[0].surface, "so");
  EXPECT_EQ(d.connectives[0].sentence, 1);
  EXPECT_FALSE(d.labels.has_value());
}

TEST(PlantedLinks, ScriptOrderPerCharacter) {
  const std::vector<std::string> script = {"woke", "dressed", "cooked", "worked", "shopped", "read", "slept"};
  const auto docs = planted_link_corpus(20, 3);
  ASSERT_EQ(docs.size(), 20u);
  for (const Document& d : docs) {
    EXPECT_EQ(d.chains.size(), 4u);
    EXPECT_EQ(d.sentences.size(), 12u);
    for (const CorefChain& c : d.chains) {
      ASSERT_EQ(c.mentions.size(), 3u);
      std::vector<std::size_t> steps;
      for (const Mention& m : c.mentions) {
        const auto& tokens = d.sentences[static_cast<std::size_t>(m.sentence)].tokens;
        const auto it = std::find(script.begin(), script.end(), tokens[static_cast<std::size_t>(m.span.end)]);
        ASSERT_NE(it, script.end());
        steps.push_back(static_cast<std::size_t>(it - script.begin()));
      }
      EXPECT_EQ(steps[1], steps[0] + 1);
      EXPECT_EQ(steps[2], steps[0] + 2);
    }
  }
  EXPECT_EQ(format_document_line(planted_link_corpus(2, 9)[1]), format_document_line(planted_link_corpus(2, 9)[1]));
}

TEST(StoryCommonsenseToy, LabelsFollowVerbProfiles) {
  std::map<std::string, VerbProfile> by_verb;
  for (const VerbProfile& v : verb_profiles()) by_verb[v.verb] = v;
  const auto docs = storycommonsense_toy(10, 2);
  for (const Document& d : docs) {
    ASSERT_TRUE(d.labels.has_value());
    EXPECT_EQ(d.sentences.size(), 5u);
    EXPECT_EQ(d.labels->tags.size(), 5u);
    for (const NodeTag& tag : d.labels->tags) {
      const VerbProfile& p = by_verb.at(tag.verb);
      EXPECT_EQ(d.labels->find(Task::kMaslow, tag.entity, tag.sentence)->labels, std::vector<std::string>{p.maslow});
      EXPECT_EQ(d.labels->find(Task::kReiss, tag.entity, tag.sentence)->labels, std::vector<std::string>{p.reiss});
      EXPECT_EQ(d.labels->find(Task::kPlutchik, tag.entity, tag.sentence)->labels, p.plutchik);
      for (const auto& [label, votes] : d.labels->find(Task::kPlutchik, tag.entity, tag.sentence)->votes) {
        EXPECT_EQ(votes.size(), 3u) << label;
      }
    }
  }
}

TEST(VerbProfiles, RespectKnowledgeTables) {
  const KnowledgeBase kb = builtin_knowledge();
  for (const VerbProfile& v : verb_profiles()) {
    EXPECT_TRUE(kb.align.aligned(v.maslow, v.reiss)) << v.verb;
    bool pos = false, neg = false;
    for (const std::string& p : v.plutchik) {
      pos = pos || kb.polarity.positive.count(p);
      neg = neg || kb.polarity.negative.count(p);
    }
    EXPECT_FALSE(pos && neg) << v.verb;
  }
}

TEST(DesireToy, LabelFollowsClosingSentence) {
  for (const Document& d : desire_toy(12, 5)) {
    ASSERT_TRUE(d.labels && d.labels->desire);
    EXPECT_EQ(d.labels->desire->sentence, 0);
    const auto& last = d.sentences.back().tokens;
    const bool success = std::find(last.begin(), last.end(), "succeeded") != last.end();
    EXPECT_EQ(d.labels->desire->label, success ? "fulfilled" : "unfulfilled");
  }
}

TEST(AllRelations, CompleteWithoutSelfLoops) {
  const NarrativeGraph g = all_relations_graph(5);
  EXPECT_EQ(g.edges.size(), 5u * 4u * kNumRelations);
  for (const TypedEdge& e : g.edges) EXPECT_NE(e.source, e.target);
}

TEST(Export, WritesLoadableFiles) {
  const auto dir = std::filesystem::path(ENG_TEST_TMP) / "fixtures";
  std::filesystem::remove_all(dir);
  const auto written = export_fixtures(dir, 11);
  EXPECT_EQ(written.size(), 8u);
  EXPECT_EQ(load_corpus(dir / "link_corpus.jsonl").size(), 50u);
  EXPECT_EQ(load_corpus(dir / "scs_train.jsonl").size(), 40u);
  EXPECT_EQ(load_corpus(dir / "scs_dev.jsonl").size(), 10u);
  EXPECT_EQ(load_corpus(dir / "scs_test.jsonl").size(), 10u);
  EXPECT_EQ(load_corpus(dir / "desire_train.jsonl").size(), 30u);
  EXPECT_EQ(load_corpus(dir / "desire_dev.jsonl").size(), 10u);
  EXPECT_EQ(read_predictions(dir / "eval_pred.tsv").nodes.size(), 4u);
  const auto again = std::filesystem::path(ENG_TEST_TMP) / "fixtures_again";
  export_fixtures(again, 11);
  for (const auto& p : written) EXPECT_EQ(read_file(p), read_file(again / p.filename())) << p;
}

}  // namespace
}  // namespace eng
