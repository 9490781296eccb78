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

#include <algorithm>

#include "eng/common.hpp"

namespace eng {
namespace {

const std::vector<std::string> kNames = {"anna", "ben",  "carl", "dora", "emma", "finn", "gina",
                                         "hugo", "iris", "jack", "kate", "liam", "mia",  "noah",
                                         "olga", "paul", "rosa", "sam",  "tina", "vera"};

const std::vector<std::string> kScript = {"woke", "dressed", "cooked", "worked", "shopped", "read", "slept"};

const std::vector<std::string> kObjects = {"quietly", "early", "again", "alone", "slowly", "happily"};

const std::vector<std::string> kOpeners = {"but", "because", "so", "then", "when", "after"};

std::vector<std::string> pick_names(std::size_t k, Rng& rng) {
  std::vector<std::string> pool = kNames;
  rng.shuffle(pool);
  pool.resize(k);
  return pool;
}

void add_votes(NodeLabels& nl, Task task, const std::vector<std::string>& active, Rng& rng) {
  const std::vector<std::string>& vocab = label_vocabulary(task);
  for (const std::string& l : active) {
    std::vector<double> v = task == Task::kPlutchik ? std::vector<double>{3, 2, 1 + static_cast<double>(rng.index(3))}
                                                    : std::vector<double>{1, 1, static_cast<double>(rng.index(2))};
    rng.shuffle(v);
    nl.votes[l] = v;
  }
  std::string distractor = vocab[rng.index(vocab.size())];
  if (!nl.votes.count(distractor)) {
    std::vector<double> v = task == Task::kPlutchik ? std::vector<double>{2, 2, 1} : std::vector<double>{1, 0, 0};
    rng.shuffle(v);
    nl.votes[distractor] = v;
  }
  nl.labels = aggregate_votes(nl.votes, task);
}

}  // namespace

Document make_story(const std::string& doc_id, const std::vector<std::string>& sentences,
                    const std::vector<std::string>& characters) {
  Document doc;
  doc.doc_id = doc_id;
  const ConnectiveLexicon& lexicon = default_connective_lexicon();
  for (const std::string& c : characters) doc.chains.push_back({c, {}});
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    Sentence s;
    s.index = static_cast<int>(i);
    s.text = sentences[i];
    s.tokens = tokenize(s.text);
    for (std::size_t t = 0; t < s.tokens.size(); ++t) {
      for (CorefChain& c : doc.chains) {
        if (s.tokens[t] == c.entity) c.mentions.push_back({s.index, {static_cast<int>(t), static_cast<int>(t) + 1}});
      }
    }
    if (!s.tokens.empty() && lexicon.count(s.tokens.front())) {
      doc.connectives.push_back({s.index, {0, 1}, s.tokens.front(), ConnectivePosition::kSentenceInitial});
    }
    doc.sentences.push_back(std::move(s));
  }
  std::erase_if(doc.chains, [](const CorefChain& c) { return c.mentions.empty(); });
  validate_document(doc);
  return doc;
}

std::vector<Document> planted_link_corpus(std::size_t stories, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Document> out;
  for (std::size_t d = 0; d < stories; ++d) {
    const std::vector<std::string> names = pick_names(4, rng);
    std::vector<std::size_t> step(names.size());
    std::vector<std::size_t> left(names.size(), 3);
    for (std::size_t& s : step) s = rng.index(kScript.size() - 3);
    std::vector<std::string> sentences;
    while (true) {
      std::vector<std::size_t> open;
      for (std::size_t c = 0; c < names.size(); ++c) {
        if (left[c]) open.push_back(c);
      }
      if (open.empty()) break;
      const std::size_t c = open[rng.index(open.size())];
      std::string s;
      if (!sentences.empty() && rng.uniform() < 0.2) s = kOpeners[rng.index(kOpeners.size())] + " ";
      s += names[c] + " " + kScript[step[c]] + " " + kObjects[rng.index(kObjects.size())] + " .";
      sentences.push_back(s);
      ++step[c];
      --left[c];
    }
    out.push_back(make_story("link-" + std::to_string(d), sentences, names));
  }
  return out;
}

const std::vector<VerbProfile>& verb_profiles() {
  static const std::vector<VerbProfile> profiles = {
      {"ate", "physiological", "food", {"joy"}},
      {"napped", "physiological", "rest", {"trust"}},
      {"studied", "spiritual growth", "curiosity", {"anticipation"}},
      {"hugged", "love", "family", {"joy", "trust"}},
      {"won", "esteem", "competition", {"joy", "surprise"}},
      {"lost", "esteem", "status", {"anger", "sadness"}},
      {"fell", "stability", "health", {"fear"}},
      {"saved", "stability", "savings", {"anticipation", "trust"}},
  };
  return profiles;
}

std::vector<Document> storycommonsense_toy(std::size_t stories, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<VerbProfile>& profiles = verb_profiles();
  std::vector<Document> out;
  for (std::size_t d = 0; d < stories; ++d) {
    const std::vector<std::string> names = pick_names(2, rng);
    std::vector<std::string> sentences;
    std::vector<std::pair<std::string, const VerbProfile*>> nodes;
    for (int i = 0; i < 5; ++i) {
      const std::string& who = names[rng.index(2)];
      const VerbProfile& p = profiles[rng.index(profiles.size())];
      sentences.push_back(who + " " + p.verb + " " + kObjects[rng.index(kObjects.size())] + " .");
      nodes.emplace_back(who, &p);
    }
    Document doc = make_story("scs-" + std::to_string(d), sentences, names);
    TaskLabels labels;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto& [who, p] = nodes[i];
      const int sent = static_cast<int>(i);
      for (Task task : {Task::kMaslow, Task::kReiss, Task::kPlutchik}) {
        NodeLabels nl;
        nl.entity = who;
        nl.sentence = sent;
        const std::vector<std::string> active = task == Task::kMaslow  ? std::vector<std::string>{p->maslow}
                                                : task == Task::kReiss ? std::vector<std::string>{p->reiss}
                                                                       : p->plutchik;
        add_votes(nl, task, active, rng);
        labels.nodes[task].push_back(std::move(nl));
      }
      labels.tags.push_back({who, sent, p->verb});
    }
    doc.labels = std::move(labels);
    validate_document(doc);
    out.push_back(std::move(doc));
  }
  return out;
}

std::vector<Document> desire_toy(std::size_t stories, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<std::string> goals = {"win the race", "bake a cake", "find the dog", "pass the test"};
  std::vector<Document> out;
  for (std::size_t d = 0; d < stories; ++d) {
    const std::vector<std::string> names = pick_names(2, rng);
    const bool fulfilled = rng.uniform() < 0.5;
    std::vector<std::string> sentences = {
        names[0] + " wanted to " + goals[rng.index(goals.size())] + " .",
        names[0] + " asked " + names[1] + " for help .",
        names[1] + " " + kScript[rng.index(kScript.size())] + " " + kObjects[rng.index(kObjects.size())] + " .",
        fulfilled ? names[0] + " finally succeeded ." : names[0] + " sadly failed .",
    };
    Document doc = make_story("desire-" + std::to_string(d), sentences, names);
    TaskLabels labels;
    labels.desire = DesireLabel{fulfilled ? "fulfilled" : "unfulfilled", 0};
    doc.labels = std::move(labels);
    out.push_back(std::move(doc));
  }
  return out;
}

NarrativeGraph all_relations_graph(std::size_t nodes) {
  NarrativeGraph g;
  g.doc_id = "all-relations";
  for (std::size_t i = 0; i < nodes; ++i) {
    g.nodes.push_back({static_cast<int>(i), "e" + std::to_string(i % 4), static_cast<int>(i), {0, 1}});
  }
  for (Relation r : kRelations) {
    for (std::size_t i = 0; i < nodes; ++i) {
      for (std::size_t j = 0; j < nodes; ++j) {
        if (i != j) g.add_edge({static_cast<int>(i), r, static_cast<int>(j)});
      }
    }
  }
  return g;
}

EvalFixture eval_fixture() {
  EvalFixture f;
  Document doc = make_story("eval-0", {"anna ate early .", "ben won again .", "anna fell slowly .", "ben read alone ."},
                            {"anna", "ben"});
  const std::vector<std::pair<std::string, std::vector<std::string>>> gold = {
      {"anna", {"love", "physiological"}}, {"ben", {"esteem"}}, {"anna", {"stability"}}, {"ben", {}}};
  const std::vector<std::vector<std::string>> predicted = {
      {"love", "physiological"}, {"esteem", "stability"}, {}, {}};
  TaskLabels labels;
  const std::vector<std::string>& vocab = label_vocabulary(Task::kMaslow);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    NodeLabels nl;
    nl.entity = gold[i].first;
    nl.sentence = static_cast<int>(i);
    nl.labels = gold[i].second;
    labels.nodes[Task::kMaslow].push_back(nl);
    NodePrediction p;
    p.doc_id = doc.doc_id;
    p.node_id = static_cast<int>(i);
    p.entity = nl.entity;
    p.sentence = nl.sentence;
    p.decisions.assign(vocab.size(), 0);
    p.probabilities.assign(vocab.size(), 0.25);
    for (const std::string& l : predicted[i]) {
      const auto k = static_cast<std::size_t>(label_index(Task::kMaslow, l));
      p.decisions[k] = 1;
      p.probabilities[k] = 0.75;
    }
    f.predictions.push_back(std::move(p));
  }
  doc.labels = std::move(labels);
  validate_document(doc);
  f.gold.push_back(std::move(doc));
  return f;
}

std::vector<std::filesystem::path> export_fixtures(const std::filesystem::path& dir, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto corpus = [&](const std::string& name, const std::vector<Document>& docs) {
    write_corpus(dir / name, docs);
    written.push_back(dir / name);
  };
  corpus("link_corpus.jsonl", planted_link_corpus(50, seed));
  std::vector<Document> scs = storycommonsense_toy(60, seed + 1);
  corpus("scs_train.jsonl", {scs.begin(), scs.begin() + 40});
  corpus("scs_dev.jsonl", {scs.begin() + 40, scs.begin() + 50});
  corpus("scs_test.jsonl", {scs.begin() + 50, scs.end()});
  std::vector<Document> desire = desire_toy(40, seed + 2);
  corpus("desire_train.jsonl", {desire.begin(), desire.begin() + 30});
  corpus("desire_dev.jsonl", {desire.begin() + 30, desire.end()});
  const EvalFixture eval = eval_fixture();
  corpus("eval_gold.jsonl", eval.gold);
  write_predictions(dir / "eval_pred.tsv", Task::kMaslow, eval.predictions, {});
  written.push_back(dir / "eval_pred.tsv");
  return written;
}

}  // namespace eng
