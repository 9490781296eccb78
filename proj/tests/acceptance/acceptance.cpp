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

// Acceptance checks: one PASS/FAIL line per criterion.
//
// usage: eng_acceptance <path to eng binary> <work dir>

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "eng/common.hpp"
#include "eng/corpus.hpp"
#include "eng/fixtures.hpp"
#include "eng/metrics.hpp"
#include "eng/model.hpp"
#include "eng/narrative_graph.hpp"
#include "eng/symbolic.hpp"
#include "eng/task_heads.hpp"
#include "eng/training.hpp"

namespace fs = std::filesystem;
using namespace eng;

namespace {

// Tolerances and budgets.
constexpr double kGradTolerance = 1e-4;
constexpr double kGradSeconds = 60.0;
constexpr int kMapPrograms = 500;
constexpr std::size_t kMapMaxVariables = 12;
constexpr double kMapSeconds = 60.0;
constexpr int kSamplingDraws = 10000;
constexpr double kSamplingTolerance = 0.02;
constexpr std::size_t kLinkStories = 50;
constexpr std::size_t kLinkMaxEpochs = 100;
constexpr double kLinkMrrFactor = 2.0;
constexpr double kLinkSeconds = 600.0;
constexpr std::size_t kOverfitStories = 20;
constexpr std::size_t kOverfitMaxEpochs = 200;
constexpr double kOverfitF1 = 99.0;
constexpr double kKnnAccuracy = 0.95;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

int shell(const std::string& cmd, const fs::path& log) {
  const std::string full = cmd + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(full.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

// ---------------------------------------------------------------------------

Outcome gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Document> docs = desire_toy(1, 21);
  Document& doc = docs[0];
  // Maslow gold on every node, so the node head sees a multi-label target.
  TaskLabels& labels = *doc.labels;
  const NarrativeGraph graph = build_graph(doc);
  Rng rng(5);
  for (const EngNode& n : graph.nodes) {
    NodeLabels nl;
    nl.entity = n.entity;
    nl.sentence = n.sentence;
    for (const std::string& l : label_vocabulary(Task::kMaslow)) {
      if (rng.uniform() < 0.4) nl.labels.push_back(l);
    }
    labels.nodes[Task::kMaslow].push_back(nl);
  }
  validate_document(doc);
  if (graph.node_count() != 5) return {false, "fixture graph has " + std::to_string(graph.node_count()) + " nodes"};

  ModelConfig cfg;
  cfg.dim = 4;
  cfg.layers = 2;
  cfg.head_hidden = 5;
  const TokenVocabulary vocab = TokenVocabulary::build(docs);
  const GraphExample node_ex = make_example(doc, graph, Task::kMaslow);
  const GraphExample plain_ex = make_example(doc, graph, std::nullopt);

  std::vector<EdgeSample> samples;
  {
    Rng srng(3);
    samples = sample_training_edges(graph, 0.5, default_relation_distribution(), srng);
    const std::size_t positives = samples.size();
    for (std::size_t k = 0; k < positives; ++k) samples.push_back(corrupt_edge(graph, samples[k].edge, srng));
  }
  const RelationWeights eps = relation_loss_weights(EdgeWeighting::kRate);
  std::vector<int> sentiment(graph.node_count());
  for (std::size_t i = 0; i < sentiment.size(); ++i) sentiment[i] = static_cast<int>(i % kSentimentClasses);
  const std::vector<double> alpha = inverse_frequency_weights(sentiment, kSentimentClasses);

  struct Path {
    std::string objective;
    std::function<ad::Var(ad::Tape&, const EngModel&)> loss;
  };
  const std::vector<Path> paths = {
      {"maslow",
       [&](ad::Tape& tape, const EngModel& m) {
         ad::Tensor targets(graph.node_count(), label_vocabulary(Task::kMaslow).size());
         for (const EngNode& n : graph.nodes) {
           const auto g = gold_vector(doc, Task::kMaslow, n.entity, n.sentence);
           for (std::size_t c = 0; c < g->size(); ++c) targets(static_cast<std::size_t>(n.id), c) = (*g)[c];
         }
         ad::Var logits = feed_forward(tape, m.store, "head/node", encode_graph(tape, m, node_ex));
         return node_loss_multilabel(logits, targets);
       }},
      {"sentiment",
       [&](ad::Tape& tape, const EngModel& m) {
         ad::Var logits = feed_forward(tape, m.store, "head/sentiment", encode_graph(tape, m, plain_ex));
         return node_loss_multiclass(logits, sentiment, alpha);
       }},
      {"link",
       [&](ad::Tape& tape, const EngModel& m) {
         ad::Var h = encode_graph(tape, m, plain_ex);
         return link_loss(distmult_scores(tape, m.store, h, samples), samples, eps);
       }},
      {"desire",
       [&](ad::Tape& tape, const EngModel& m) {
         ad::Var h = encode_graph(tape, m, plain_ex);
         Attended att = attend_document(tape, m.store, h, desire_query(tape, m, plain_ex));
         const int gold[] = {label_index(Task::kDesire, doc.labels->desire->label)};
         const double w[] = {0.7, 1.3};
         return node_loss_multiclass(feed_forward(tape, m.store, "head/doc", att.document), gold, w);
       }},
  };

  double worst = 0.0;
  std::string worst_where;
  std::size_t coords = 0;
  for (const Path& p : paths) {
    Rng mrng(11);
    EngModel model = create_model(cfg, vocab, mrng);
    attach_head(model, p.objective, mrng);
    const ad::LossBuilder builder = [&](ad::Tape& tape, const ad::ParameterStore& store) {
      EngModel view{model.config, model.vocab, store, model.objective, nullptr};
      return p.loss(tape, view);
    };
    // Every coordinate of every parameter.
    const auto res = ad::finite_difference_check(model.store, builder, {}, 1e-5, model.store.scalar_count(), 1);
    coords += res.coordinates;
    if (res.max_relative_error >= worst) {
      worst = res.max_relative_error;
      worst_where = p.objective + ":" + res.worst_parameter;
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = worst < kGradTolerance && secs < kGradSeconds;
  return {pass, "max rel err " + fmt("%.2e", worst) + " (" + worst_where + ") over " + std::to_string(coords) +
                    " coords, 4 paths, " + fmt("%.1f", secs) + "s"};
}

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> brute_force_map(const GroundProgram& p) {
  const std::size_t n = p.num_variables;
  auto sat = [](const GroundClause& c, const std::vector<std::uint8_t>& a) {
    for (const Literal& l : c.literals) {
      if ((a[static_cast<std::size_t>(l.var)] != 0) == l.positive) return true;
    }
    return false;
  };
  std::vector<std::uint8_t> best, a(n);
  double best_value = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (std::size_t v = 0; v < n; ++v) a[v] = static_cast<std::uint8_t>((mask >> (n - 1 - v)) & 1);
    bool feasible = true;
    for (const GroundClause& h : p.hard) feasible = feasible && sat(h, a);
    if (!feasible) continue;
    double value = 0.0;
    for (const GroundClause& c : p.weighted) value += sat(c, a) ? c.weight : 0.0;
    if (best.empty() || value > best_value + kObjectiveTolerance) {
      best = a;
      best_value = value;
    }
  }
  return best;
}

GroundClause exclusion(std::size_t i, std::size_t j) {
  GroundClause c;
  c.literals = {{static_cast<int>(i), false}, {static_cast<int>(j), false}};
  return c;
}

// Variables are (mention, task, label) triples; hard clauses instantiate the
// shipped alignment and polarity rules, weighted clauses are unary and
// transition clauses with weights in [-3, 3].
GroundProgram random_map_program(Rng& rng, const KnowledgeBase& kb) {
  GroundProgram p;
  const std::size_t n = 2 + rng.index(kMapMaxVariables - 1);
  struct Var {
    int mention;
    Task task;
    std::string label;
  };
  std::vector<Var> vars;
  std::set<std::tuple<int, Task, std::string>> seen;
  while (vars.size() < n) {
    const int mention = static_cast<int>(rng.index(2));
    const Task task = std::vector<Task>{Task::kMaslow, Task::kReiss, Task::kPlutchik}[rng.index(3)];
    const auto& vocab = label_vocabulary(task);
    const std::string label = vocab[rng.index(vocab.size())];
    if (!seen.emplace(mention, task, label).second) continue;
    vars.push_back({mention, task, label});
  }
  p.num_variables = n;
  auto weight = [&rng] { return rng.uniform(-3.0, 3.0); };
  GroundClause c;
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.uniform() < 0.8) {
      c.literals = {{static_cast<int>(i), true}};
      c.weight = weight();
      p.weighted.push_back(c);
    }
    for (std::size_t j = 0; j < n; ++j) {
      const Var& a = vars[i];
      const Var& b = vars[j];
      if (i == j || a.mention != b.mention) continue;
      if (a.task == Task::kMaslow && b.task == Task::kReiss && !kb.align.aligned(a.label, b.label)) {
        p.hard.push_back(exclusion(i, j));
      }
      if (a.task == Task::kPlutchik && b.task == Task::kPlutchik && kb.polarity.positive.count(a.label) &&
          kb.polarity.negative.count(b.label)) {
        p.hard.push_back(exclusion(i, j));
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (vars[i].mention == 0 && vars[j].mention == 1 && vars[i].task == vars[j].task && rng.uniform() < 0.5) {
        c.literals = {{static_cast<int>(i), false}, {static_cast<int>(j), true}};
        c.weight = weight();
        p.weighted.push_back(c);
      }
    }
  }
  return p;
}

Outcome map_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const KnowledgeBase kb = builtin_knowledge();
  Rng rng(2024);
  int matched = 0;
  std::size_t hard_total = 0;
  std::string first_bad;
  for (int t = 0; t < kMapPrograms; ++t) {
    const GroundProgram p = random_map_program(rng, kb);
    hard_total += p.hard.size();
    const std::vector<std::uint8_t> expected = brute_force_map(p);
    const MapResult bnb = map_inference(p, SolverKind::kBranchAndBound);
    const MapResult aut = map_inference(p, SolverKind::kAuto);
    if (bnb.assignment == expected && aut.assignment == expected) {
      ++matched;
    } else if (first_bad.empty()) {
      first_bad = " first mismatch at program " + std::to_string(t);
    }
  }
  const double secs = seconds_since(t0);
  return {matched == kMapPrograms && secs < kMapSeconds,
          std::to_string(matched) + "/" + std::to_string(kMapPrograms) + " exact matches (" +
              std::to_string(hard_total) + " hard clauses), " + fmt("%.1f", secs) + "s" + first_bad};
}

// ---------------------------------------------------------------------------

Outcome sampling_distribution() {
  const NarrativeGraph g = all_relations_graph(6);
  const double rate = 1.0 / static_cast<double>(g.edges.size());
  Rng rng(99);
  std::array<int, kNumRelations> counts{};
  for (int i = 0; i < kSamplingDraws; ++i) {
    const auto s = sample_training_edges(g, rate, default_relation_distribution(), rng);
    if (s.size() != 1) return {false, "expected one draw per call"};
    ++counts[relation_index(s[0].edge.relation)];
  }
  const std::array<double, kNumRelations> target = {0.50, 0.20, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05};
  double worst = 0.0;
  std::string detail;
  for (std::size_t r = 0; r < kNumRelations; ++r) {
    const double share = static_cast<double>(counts[r]) / kSamplingDraws;
    worst = std::max(worst, std::abs(share - target[r]));
    detail += std::string(r ? " " : "") + std::string(relation_name(kRelations[r])) + "=" + fmt("%.4f", share);
  }
  return {worst <= kSamplingTolerance, detail + "; max abs dev " + fmt("%.4f", worst)};
}

// ---------------------------------------------------------------------------

struct LinkRun {
  RankingResult before, after;
  std::size_t epochs = 0;
};

LinkRun train_link(const std::vector<Document>& docs, const LinkSplit& split, bool mask) {
  Rng rng(6);
  ModelConfig cfg;
  cfg.dim = 32;
  cfg.layers = 2;
  cfg.head_hidden = 32;
  EngModel model = create_model(cfg, TokenVocabulary::build(docs), rng);
  attach_head(model, "link", rng);
  LinkRun run;
  run.before = rank_heldout_edges(model, split);
  TrainConfig tc = pretraining_defaults();
  tc.lr = 1e-2;
  tc.epochs = kLinkMaxEpochs;
  tc.batch_graphs = 5;
  tc.seed = 6;
  tc.sample_rate = 0.5;
  tc.mask_sampled_edges = mask;
  run.epochs = pretrain_link(model, split.train, tc).epochs_run;
  run.after = rank_heldout_edges(model, split);
  return run;
}

// Sampled positives are removed from the message graph; the unmasked run
// is reported alongside.
Outcome link_learnability() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Document> docs = planted_link_corpus(kLinkStories, 5);
  const std::vector<GraphExample> examples = prepare_examples(docs, GraphConfig{}, std::nullopt);
  Rng rng(6);
  const LinkSplit split = hold_out_edges(examples, Relation::kCNext, 0.25, rng);
  const LinkRun masked = train_link(docs, split, true);
  const double secs = seconds_since(t0);
  const LinkRun unmasked = train_link(docs, split, false);
  const RankingResult& a = masked.after;
  const bool pass = a.mrr >= kLinkMrrFactor * a.random_mrr && masked.epochs <= kLinkMaxEpochs && secs < kLinkSeconds;
  return {pass, "MRR " + fmt("%.3f", a.mrr) + " vs random " + fmt("%.3f", a.random_mrr) + " (untrained " +
                    fmt("%.3f", masked.before.mrr) + ") on " + std::to_string(a.edges) + " held-out CNext edges, " +
                    std::to_string(masked.epochs) + " epochs, " + fmt("%.0f", secs) + "s; without edge masking " +
                    fmt("%.3f", unmasked.after.mrr)};
}

// ---------------------------------------------------------------------------

Outcome overfit_capacity() {
  const std::vector<Document> docs = storycommonsense_toy(kOverfitStories, 8);
  const std::vector<GraphExample> examples = prepare_examples(docs, GraphConfig{}, Task::kMaslow);
  Rng rng(9);
  ModelConfig cfg;
  cfg.dim = 32;
  cfg.layers = 2;
  cfg.head_hidden = 32;
  EngModel model = create_model(cfg, TokenVocabulary::build(docs), rng);
  attach_head(model, "maslow", rng);
  TrainConfig tc = downstream_defaults();
  tc.lr = 1e-2;
  tc.warmup_steps = 0;
  tc.epochs = kOverfitMaxEpochs;
  tc.patience = kOverfitMaxEpochs;
  tc.seed = 9;
  std::size_t reached = 0;
  tc.on_epoch = [&](const EpochRecord& r) {
    if (!reached && r.dev_metric >= kOverfitF1) reached = r.epoch;
  };
  train_downstream(model, Task::kMaslow, examples, examples, tc);
  const MetricsReport rep = evaluate_node_predictions(predict_nodes(model, Task::kMaslow, examples, true), Task::kMaslow);
  const bool pass = rep.micro.f1 >= kOverfitF1 && rep.macro.f1 >= kOverfitF1;
  return {pass, "training micro F1 " + fmt("%.2f", rep.micro.f1) + ", macro F1 " + fmt("%.2f", rep.macro.f1) +
                    (reached ? " (macro >= 99 first at epoch " + std::to_string(reached) + ")" : "")};
}

// ---------------------------------------------------------------------------

std::map<std::string, std::string> files_of(const fs::path& dir) {
  std::map<std::string, std::string> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) out[e.path().filename().string()] = read_file(e.path());
  }
  return out;
}

Outcome determinism(const fs::path& eng, const fs::path& work) {
  const fs::path fx = work / "fixtures";
  if (shell(q(eng) + " export-fixtures --out " + q(fx), work / "export.log") != 0) {
    return {false, "export-fixtures failed, see " + (work / "export.log").string()};
  }
  std::vector<std::map<std::string, std::string>> runs;
  for (int i = 0; i < 2; ++i) {
    const fs::path out = work / ("det_" + std::to_string(i));
    fs::remove_all(out);
    const std::string cmd = q(eng) + " pretrain --objective link --seed 7 --corpus " + q(fx / "link_corpus.jsonl") +
                            " --out " + q(out) + " --epochs 3 --dim 32 --head-hidden 32";
    const fs::path log = work / ("det_" + std::to_string(i) + ".log");
    if (shell(cmd, log) != 0) return {false, "pretrain failed, see " + log.string()};
    runs.push_back(files_of(out));
  }
  std::size_t bytes = 0;
  for (const auto& [name, data] : runs[0]) bytes += data.size();
  const bool same = !runs[0].empty() && runs[0] == runs[1];
  return {same, std::to_string(runs[0].size()) + " checkpoint files, " + std::to_string(bytes) + " bytes, " +
                    (same ? "bitwise identical" : "differ")};
}

// ---------------------------------------------------------------------------

Outcome constraint_satisfaction(const fs::path& eng, const fs::path& work) {
  const fs::path fx = work / "fixtures";
  const fs::path ckpt = work / "scs_maslow";
  fs::remove_all(ckpt);
  const std::string train = q(eng) + " train --task maslow --train " + q(fx / "scs_train.jsonl") + " --dev " +
                            q(fx / "scs_dev.jsonl") + " --out " + q(ckpt) +
                            " --dim 32 --head-hidden 32 --epochs 10 --lr 0.01 --warmup-steps 0 --seed 3";
  if (shell(train, work / "scs_train.log") != 0) return {false, "train failed, see " + (work / "scs_train.log").string()};
  const fs::path log = work / "scs_infer.log";
  const std::string infer = q(eng) + " infer --ckpt " + q(ckpt) + " --input " + q(fx / "scs_test.jsonl") + " --out " +
                            q(work / "scs_joint") + " --symbolic " + q(fs::path(ENG_DATA_DIR) / "storycommonsense.rules") +
                            " --train " + q(fx / "scs_train.jsonl") + " --dev " + q(fx / "scs_dev.jsonl") +
                            " --save-potentials " + q(work / "scs_potentials") + " --seed 3";
  if (shell(infer, log) != 0) return {false, "infer failed, see " + log.string()};
  std::istringstream in(read_file(log));
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string k1, k2, k3, k4;
    long stories = -1, hard = -1, align = -1, polarity = -1;
    if (ls >> k1 >> stories >> k2 >> hard >> k3 >> align >> k4 >> polarity && k1 == "stories" &&
        k2 == "hard_violations") {
      const bool pass = stories > 0 && hard == 0 && align == 0 && polarity == 0;
      return {pass, std::to_string(stories) + " test stories: " + std::to_string(hard) + " hard-clause violations, " +
                        std::to_string(align) + " alignment and " + std::to_string(polarity) +
                        " polarity conflicts in decoded labels"};
    }
  }
  return {false, "no summary line in " + log.string()};
}

// ---------------------------------------------------------------------------

Outcome metric_oracles() {
  std::vector<std::string> failures;
  const EvalFixture fx = eval_fixture();
  PredictionFile file;
  file.task = Task::kMaslow;
  file.nodes = fx.predictions;
  const MetricsReport r = score_against_corpus(file, fx.gold);
  if (!(r.micro.tp == 3 && r.micro.fp == 1 && r.micro.fn == 1)) failures.push_back("fixture counts");
  for (double v : {r.micro.precision, r.micro.recall, r.micro.f1}) {
    if (std::abs(v - 75.0) > 1e-9) failures.push_back("prf1 " + fmt("%.4f", v));
  }
  const std::vector<int> assignment = {0, 0, 0, 1, 1};
  const std::vector<std::string> tags = {"a", "a", "b", "b", "b"};
  const double purity = purity_from_assignment(assignment, tags);
  if (purity != 0.8) failures.push_back("purity " + fmt("%.17g", purity));

  Rng rng(12);
  Points pts;
  std::vector<std::string> blob_tags;
  for (int i = 0; i < 200; ++i) {
    const bool left = i % 2 == 0;
    pts.push_back({(left ? -3.0 : 3.0) + rng.normal(), rng.normal()});
    blob_tags.push_back(left ? "left" : "right");
  }
  const double acc = knn_classify(pts, blob_tags, 5, 10, rng);
  if (!(acc > kKnnAccuracy)) failures.push_back("knn " + fmt("%.3f", acc));
  const std::string detail = "P/R/F1 " + fmt("%.2f", r.micro.precision) + "/" + fmt("%.2f", r.micro.recall) + "/" +
                             fmt("%.2f", r.micro.f1) + ", purity " + fmt("%g", purity) + ", KNN accuracy " +
                             fmt("%.3f", acc);
  return {failures.empty(), failures.empty() ? detail : detail + "; failed: " + join(failures, ", ")};
}

// ---------------------------------------------------------------------------

Outcome vote_aggregation() {
  struct Case {
    Task task;
    std::vector<double> votes;
    bool active;
  };
  const std::vector<Case> cases = {
      {Task::kMaslow, {1, 1, 1}, true},   {Task::kMaslow, {1, 1, 0}, true},    {Task::kMaslow, {0, 1, 1}, true},
      {Task::kMaslow, {1, 0, 0}, false},  {Task::kMaslow, {0, 0, 0}, false},   {Task::kReiss, {1, 0, 1}, true},
      {Task::kReiss, {0, 0, 1}, false},   {Task::kPlutchik, {2, 2, 2}, true},  {Task::kPlutchik, {3, 2, 1}, true},
      {Task::kPlutchik, {5, 1, 0}, true}, {Task::kPlutchik, {2, 2, 1}, false}, {Task::kPlutchik, {5, 0, 0}, false},
      {Task::kPlutchik, {1, 1, 1}, false}, {Task::kPlutchik, {0, 0, 0}, false}, {Task::kPlutchik, {4, 1, 1}, true},
  };
  std::size_t ok = 0;
  for (const Case& c : cases) ok += vote_active(c.votes, c.task) == c.active ? 1 : 0;

  // Whole-node fixtures: raw votes and the hand-assigned label sets.
  struct NodeCase {
    Task task;
    RawVotes votes;
    std::vector<std::string> labels;
  };
  const std::vector<NodeCase> nodes = {
      {Task::kMaslow, {{"love", {1, 1, 0}}, {"esteem", {0, 0, 1}}, {"stability", {1, 0, 1}}}, {"love", "stability"}},
      {Task::kReiss, {{"food", {0, 1, 0}}, {"rest", {0, 0, 0}}}, {}},
      {Task::kPlutchik, {{"joy", {3, 3, 0}}, {"fear", {2, 1, 2}}, {"trust", {1, 2, 3}}}, {"joy", "trust"}},
  };
  for (const NodeCase& n : nodes) ok += aggregate_votes(n.votes, n.task) == n.labels ? 1 : 0;
  const std::size_t total = cases.size() + nodes.size();
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " hand-labeled fixtures reproduced"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: eng_acceptance <eng binary> <work dir>\n";
    return 2;
  }
  const fs::path eng = fs::absolute(argv[1]);
  const fs::path work = fs::absolute(argv[2]);
  fs::create_directories(work);

  struct Check {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Check> checks = {
      {"gradient-correctness", gradient_check},
      {"map-oracle-equivalence", map_oracle},
      {"edge-sampling-distribution", sampling_distribution},
      {"link-tapt-learnability", link_learnability},
      {"overfit-capacity", overfit_capacity},
      {"determinism", [&] { return determinism(eng, work); }},
      {"constraint-satisfaction", [&] { return constraint_satisfaction(eng, work); }},
      {"metric-oracles", metric_oracles},
      {"vote-aggregation", vote_aggregation},
  };
  int failed = 0;
  for (const Check& c : checks) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << std::endl;
    failed += o.pass ? 0 : 1;
  }
  std::cout << (checks.size() - static_cast<std::size_t>(failed)) << "/" << checks.size() << " criteria passed\n";
  return failed ? 1 : 0;
}
