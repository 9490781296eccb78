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

// Synthetic corpora used by tests, acceptance checks and the
// export-fixtures command.

#ifndef ENG_FIXTURES_HPP_
#define ENG_FIXTURES_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eng/corpus.hpp"
#include "eng/narrative_graph.hpp"
#include "eng/training.hpp"

namespace eng {

// Builds a document from whitespace-tokenized sentences. Every token listed
// in `characters` becomes a mention of that character; a sentence-initial
// token found in the connective lexicon is annotated as a connective.
Document make_story(const std::string& doc_id, const std::vector<std::string>& sentences,
                    const std::vector<std::string>& characters);

// Stories where each character walks through a fixed script of verbs in
// order, so the next mention of a character is predictable from the
// current one.
std::vector<Document> planted_link_corpus(std::size_t stories, std::uint64_t seed);

struct VerbProfile {
  std::string verb;
  std::string maslow;
  std::string reiss;
  std::vector<std::string> plutchik;
};
// Verb-determined labels, consistent with the builtin alignment and
// polarity tables.
const std::vector<VerbProfile>& verb_profiles();

// Two characters, five sentences, raw annotator votes for Maslow, Reiss and
// Plutchik on every node, plus verb tags.
std::vector<Document> storycommonsense_toy(std::size_t stories, std::uint64_t seed);

// Desire fulfilment decided by the closing sentence.
std::vector<Document> desire_toy(std::size_t stories, std::uint64_t seed);

// `nodes` nodes with an edge of every relation between every ordered pair.
NarrativeGraph all_relations_graph(std::size_t nodes);

// One story with four labeled Maslow nodes and predictions scoring three
// true positives, one false positive and one false negative.
struct EvalFixture {
  std::vector<Document> gold;
  std::vector<NodePrediction> predictions;
};
EvalFixture eval_fixture();

// Writes every fixture under `dir` and returns the written paths.
std::vector<std::filesystem::path> export_fixtures(const std::filesystem::path& dir, std::uint64_t seed);

}  // namespace eng

#endif  // ENG_FIXTURES_HPP_
