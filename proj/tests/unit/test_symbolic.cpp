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

#include "eng/symbolic.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eng/common.hpp"
#include "eng/fixtures.hpp"
#include "eng/task_heads.hpp"
#include "eng/training.hpp"

namespace eng {
namespace {

const std::filesystem::path kData = ENG_DATA_DIR;

StoryContext context_of(const std::vector<std::string>& sentences, const std::vector<std::string>& chars) {
  return story_context(build_graph(make_story("s", sentences, chars)));
}

GroundClause clause(std::vector<Literal> lits, double w = 0.0) {
  GroundClause c;
  c.literals = std::move(lits);
  c.weight = w;
  return c;
}

// Brute force over every assignment in lexicographic order (variable 0
// most significant, false first); keeps the first strict improvement.
std::vector<std::uint8_t> oracle_map(const GroundProgram& p) {
  const std::size_t n = p.num_variables;
  std::vector<std::uint8_t> best, a(n);
  double best_value = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (std::size_t v = 0; v < n; ++v) a[v] = (mask >> (n - 1 - v)) & 1;
    bool ok = true;
    for (const GroundClause& h : p.hard) {
      bool sat = false;
      for (const Literal& l : h.literals) sat = sat || (a[static_cast<std::size_t>(l.var)] != 0) == l.positive;
      ok = ok && sat;
    }
    if (!ok) continue;
    double value = 0.0;
    for (const GroundClause& c : p.weighted) {
      bool sat = false;
      for (const Literal& l : c.literals) sat = sat || (a[static_cast<std::size_t>(l.var)] != 0) == l.positive;
      if (sat) value += c.weight;
    }
    if (best.empty() || value > best_value + kObjectiveTolerance) {
      best = a;
      best_value = value;
    }
  }
  return best;
}

GroundProgram random_program(Rng& rng) {
  GroundProgram p;
  p.num_variables = 1 + rng.index(10);
  const std::size_t clauses = 1 + rng.index(3 * p.num_variables);
  for (std::size_t c = 0; c < clauses; ++c) {
    std::vector<Literal> lits;
    const std::size_t k = 1 + rng.index(std::min<std::size_t>(2, p.num_variables));
    for (std::size_t i = 0; i < k; ++i) lits.push_back({static_cast<int>(rng.index(p.num_variables)), rng.uniform() < 0.5});
    p.weighted.push_back(clause(lits, rng.uniform(-3.0, 3.0)));
  }
  const std::size_t hard = rng.index(p.num_variables + 1);
  for (std::size_t c = 0; c < hard && p.num_variables > 1; ++c) {
    const int a = static_cast<int>(rng.index(p.num_variables));
    const int b = static_cast<int>(rng.index(p.num_variables));
    if (a != b) p.hard.push_back(clause({{a, false}, {b, false}}));
  }
  return p;
}

TEST(Rules, AsciiAndUnicodeAgree) {
  const RuleSet a = parse_rules("weighted t: Plut(e_i, l_i) & HasNext(e_i, e_j) => Plut(e_j, l_j)\n"
                                "hard: Plut(e, p) & Pos(p) & Neg(q) => !Plut(e, q)\n");
  const RuleSet u = parse_rules("# comment\n\nweighted t: Plut(e_i, l_i) ∧ HasNext(e_i, e_j) ⇒ Plut(e_j, l_j)\n"
                                "hard: Plut(e, p) ∧ Pos(p) ∧ Neg(q) ⇒ ¬Plut(e, q)\n");
  ASSERT_EQ(a.rules.size(), 2u);
  ASSERT_EQ(u.rules.size(), 2u);
  for (std::size_t r = 0; r < 2; ++r) {
    EXPECT_EQ(a.rules[r].kind, u.rules[r].kind);
    EXPECT_EQ(a.rules[r].potential, u.rules[r].potential);
    ASSERT_EQ(a.rules[r].body.size(), u.rules[r].body.size());
    for (std::size_t i = 0; i < a.rules[r].body.size(); ++i) {
      EXPECT_EQ(a.rules[r].body[i].predicate, u.rules[r].body[i].predicate);
      EXPECT_EQ(a.rules[r].body[i].args, u.rules[r].body[i].args);
    }
    EXPECT_EQ(a.rules[r].head.negated, u.rules[r].head.negated);
  }
  EXPECT_TRUE(a.rules[1].head.negated);
  EXPECT_EQ(a.rules[0].potential, "t");
  EXPECT_EQ(a.tasks(), std::set<Task>{Task::kPlutchik});
  EXPECT_EQ(parse_rules("hard: Plut(e, \"joy\") => ~Plut(e, \"fear\")").rules[0].head.args[1], "\"fear\"");
}

TEST(Rules, RejectsMalformedLines) {
  EXPECT_THROW(parse_rules("weighted: Entity(e) => Plut(e, l)"), DataError);
  EXPECT_THROW(parse_rules("hard x: Entity(e) => Plut(e, l)"), DataError);
  EXPECT_THROW(parse_rules("soft a: Entity(e) => Plut(e, l)"), DataError);
  EXPECT_THROW(parse_rules("weighted a: Entity(e) Plut(e, l)"), DataError);
  EXPECT_THROW(parse_rules("weighted a: Entity(e) => Feels(e, l)"), DataError);
  EXPECT_THROW(parse_rules("weighted a: Entity(e) => Plut(e, l)\nweighted a: Entity(e) => Plut(e, l)"), DataError);
  const StoryContext ctx = context_of({"ann ate ."}, {"ann"});
  EXPECT_THROW(ground_rules(parse_rules("weighted a: Entity(e) => Plut(e)"), ctx, builtin_knowledge()), DataError);
  EXPECT_THROW(ground_rules(parse_rules("hard: Entity(e) => Pos(e)"), ctx, builtin_knowledge()), DataError);
  EXPECT_THROW(ground_rules(parse_rules("weighted a: Pos(p) => Plut(e, p)"), ctx, builtin_knowledge()), DataError);
}

TEST(Knowledge, DataFilesMatchBuiltins) {
  const AlignTable align = load_alignment(kData / "maslow_reiss_alignment.tsv");
  EXPECT_EQ(align.reiss_to_maslow, builtin_alignment().reiss_to_maslow);
  EXPECT_EQ(align.reiss_to_maslow.size(), label_vocabulary(Task::kReiss).size());
  EXPECT_TRUE(align.aligned("physiological", "food"));
  EXPECT_FALSE(align.aligned("love", "food"));
  const PolarityGroups pol = load_polarity(kData / "plutchik_polarity.tsv");
  EXPECT_EQ(pol.positive, builtin_polarity().positive);
  EXPECT_EQ(pol.negative, builtin_polarity().negative);
  EXPECT_EQ(pol.positive.size() + pol.negative.size(), 8u);
  EXPECT_NO_THROW(load_rules(kData / "storycommonsense.rules"));
  for (const VerbProfile& v : verb_profiles()) EXPECT_TRUE(builtin_alignment().aligned(v.maslow, v.reiss)) << v.verb;
}

TEST(Grounding, UnaryAndPolarityCounts) {
  const RuleSet rules = parse_rules("weighted u: Entity(e) => Plut(e, l)\n"
                                    "hard: Plut(e, p) & Pos(p) & Neg(q) => !Plut(e, q)\n");
  const GroundProgram p = ground_rules(rules, context_of({"ann ate ."}, {"ann"}), builtin_knowledge());
  EXPECT_EQ(p.num_variables, 8u);
  EXPECT_EQ(p.weighted.size(), 8u);
  EXPECT_EQ(p.hard.size(), 16u);
  for (const GroundClause& c : p.weighted) {
    ASSERT_EQ(c.literals.size(), 1u);
    EXPECT_TRUE(c.literals[0].positive);
    EXPECT_EQ(c.literals[0].var, p.variable(Task::kPlutchik, 0, c.labels[0]));
  }
  for (const GroundClause& c : p.hard) {
    ASSERT_EQ(c.literals.size(), 2u);
    EXPECT_FALSE(c.literals[0].positive);
    EXPECT_FALSE(c.literals[1].positive);
  }
  const GroundProgram soft = ground_rules(rules, context_of({"ann ate ."}, {"ann"}), builtin_knowledge(), false);
  EXPECT_TRUE(soft.hard.empty());
}

TEST(Grounding, TransitionsAndAlignment) {
  const StoryContext ctx = context_of({"ann ate .", "bob ran .", "ann ran ."}, {"ann", "bob"});
  ASSERT_EQ(ctx.mentions.size(), 3u);
  EXPECT_EQ(ctx.has_next, (std::set<std::pair<int, int>>{}));
  const StoryContext adj = context_of({"ann ate .", "ann ran .", "bob sat ."}, {"ann", "bob"});
  EXPECT_EQ(adj.has_next, (std::set<std::pair<int, int>>{{0, 1}}));

  const RuleSet trans = parse_rules("weighted t: Plut(e_i, l_i) ∧ HasNext(e_i, e_j) ⇒ Plut(e_j, l_j)");
  const GroundProgram p = ground_rules(trans, adj, builtin_knowledge());
  EXPECT_EQ(p.num_variables, 24u);
  EXPECT_EQ(p.weighted.size(), 64u);
  for (const GroundClause& c : p.weighted) {
    EXPECT_EQ(c.mentions, (std::vector<int>{0, 1}));
    EXPECT_EQ(c.literals, (std::vector<Literal>{{p.variable(Task::kPlutchik, 0, c.labels[0]), false},
                                                {p.variable(Task::kPlutchik, 1, c.labels[1]), true}}));
  }

  const GroundProgram all = ground_rules(load_rules(kData / "storycommonsense.rules"),
                                         context_of({"ann ate ."}, {"ann"}), builtin_knowledge());
  EXPECT_EQ(all.num_variables, 5u + 19u + 8u);
  EXPECT_EQ(all.weighted.size(), 5u + 19u + 8u);
  EXPECT_EQ(all.hard.size(), 5u * 19u - 19u + 16u);
}

TEST(Map, HandPrograms) {
  GroundProgram p;
  p.num_variables = 2;
  p.weighted = {clause({{0, true}}, 1.0), clause({{1, true}}, -2.0)};
  for (SolverKind s : {SolverKind::kAuto, SolverKind::kBranchAndBound, SolverKind::kExhaustive}) {
    const MapResult r = map_inference(p, s);
    EXPECT_EQ(r.assignment, (std::vector<std::uint8_t>{1, 0}));
    EXPECT_DOUBLE_EQ(r.objective, 1.0);
  }

  // joy (var 0) and fear (var 1) both score positive, but cannot co-occur.
  GroundProgram c;
  c.num_variables = 2;
  c.weighted = {clause({{0, true}}, 2.0), clause({{1, true}}, 1.5)};
  c.hard = {clause({{0, false}, {1, false}})};
  for (SolverKind s : {SolverKind::kBranchAndBound, SolverKind::kExhaustive}) {
    const MapResult r = map_inference(c, s);
    EXPECT_EQ(r.assignment, (std::vector<std::uint8_t>{1, 0}));
    EXPECT_EQ(c.violations(r.assignment), 0u);
  }
  EXPECT_EQ(c.violations(std::vector<std::uint8_t>{1, 1}), 1u);
  EXPECT_DOUBLE_EQ(c.objective(std::vector<std::uint8_t>{1, 1}), 3.5);

  GroundProgram infeasible;
  infeasible.num_variables = 1;
  infeasible.hard = {clause({{0, true}}), clause({{0, false}})};
  EXPECT_THROW(map_inference(infeasible), DataError);

  EXPECT_EQ(parse_solver("bnb"), SolverKind::kBranchAndBound);
  EXPECT_EQ(parse_solver(solver_name(SolverKind::kExhaustive)), SolverKind::kExhaustive);
  EXPECT_THROW(parse_solver("greedy"), UsageError);
}

TEST(Map, TiesPreferFalse) {
  GroundProgram p;
  p.num_variables = 3;
  p.weighted = {clause({{0, true}, {1, true}}, 1.0)};
  const MapResult r = map_inference(p, SolverKind::kBranchAndBound);
  EXPECT_EQ(r.assignment, (std::vector<std::uint8_t>{0, 1, 0}));
  EXPECT_EQ(map_inference(p, SolverKind::kExhaustive).assignment, r.assignment);
}

TEST(Map, RandomProgramsMatchOracle) {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const GroundProgram p = random_program(rng);
    const std::vector<std::uint8_t> expected = oracle_map(p);
    for (SolverKind s : {SolverKind::kBranchAndBound, SolverKind::kExhaustive, SolverKind::kAuto}) {
      const MapResult r = map_inference(p, s);
      EXPECT_NEAR(r.objective, p.objective(expected), 1e-9) << "trial " << trial;
      EXPECT_EQ(r.assignment, expected) << "trial " << trial << " solver " << solver_name(s);
      EXPECT_EQ(p.violations(r.assignment), 0u);
    }
  }
}

TEST(Map, TautologiesAndPositiveScalingKeepArgmax) {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const GroundProgram p = random_program(rng);
    const auto base = map_inference(p).assignment;
    GroundProgram taut = p;
    const int v = static_cast<int>(rng.index(p.num_variables));
    taut.weighted.push_back(clause({{v, true}, {v, false}}, rng.uniform(-5.0, 5.0)));
    EXPECT_EQ(map_inference(taut).assignment, base) << trial;
    GroundProgram scaled = p;
    for (GroundClause& c : scaled.weighted) c.weight *= 2.5;
    EXPECT_EQ(map_inference(scaled).assignment, base) << trial;
  }
}

TEST(Map, LargeComponentUsesBranchAndBound) {
  GroundProgram p;
  p.num_variables = 40;
  for (int v = 0; v + 1 < 40; ++v) p.weighted.push_back(clause({{v, false}, {v + 1, true}}, 0.5));
  for (int v = 0; v < 40; v += 3) p.weighted.push_back(clause({{v, true}}, v % 2 ? 1.0 : -0.75));
  const MapResult r = map_inference(p);
  EXPECT_DOUBLE_EQ(r.objective, map_inference(p, SolverKind::kBranchAndBound).objective);
  GroundProgram wide;
  wide.num_variables = 64;
  for (int v = 0; v + 1 < 64; ++v) wide.weighted.push_back(clause({{v, true}, {v + 1, true}}, 1.0));
  EXPECT_THROW(map_inference(wide, SolverKind::kExhaustive), UsageError);
  EXPECT_DOUBLE_EQ(map_inference(wide).objective, 63.0);
}

TEST(Map, NodeBudgetKeepsFeasibleIncumbent) {
  Rng rng(8);
  GroundProgram p;
  p.num_variables = 30;
  for (int v = 0; v < 30; ++v) p.weighted.push_back(clause({{v, true}}, rng.uniform(-1.0, 1.0)));
  for (int v = 0; v + 1 < 30; ++v) {
    for (int u = v + 1; u < std::min(30, v + 6); ++u) {
      p.weighted.push_back(clause({{v, false}, {u, rng.uniform() < 0.5}}, rng.uniform(-1.0, 1.0)));
    }
    if (v % 4 == 0) p.hard.push_back(clause({{v, false}, {v + 1, false}}, 0.0));
  }
  const MapResult capped = map_inference(p, SolverKind::kBranchAndBound, 10);
  EXPECT_EQ(capped.unproven, 1u);
  EXPECT_EQ(p.violations(capped.assignment), 0u);
  const MapResult full = map_inference(p, SolverKind::kBranchAndBound, 0);
  EXPECT_EQ(full.unproven, 0u);
  EXPECT_GE(full.objective, capped.objective - kObjectiveTolerance);
}

TEST(Potentials, ScoreRulesHandFixture) {
  const RuleSet rules = parse_rules("weighted u: Entity(e) => Plut(e, l)");
  const auto specs = potential_specs(rules);
  ASSERT_EQ(specs.size(), 1u);
  EXPECT_EQ(specs[0].mention_arity, 1u);
  EXPECT_EQ(specs[0].outputs, 8u);
  ad::ParameterStore store;
  Rng rng(0);
  init_potentials(store, specs, 2, 2, rng);
  store.mutable_value("potential/u/w1") = ad::Tensor(2, 2, {1, 0, 0, 1});
  store.mutable_value("potential/u/b1") = ad::Tensor(1, 2, 0.0);
  ad::Tensor w2(2, 8, 1.0);
  for (std::size_t l = 0; l < 8; ++l) w2(0, l) = static_cast<double>(l);
  store.mutable_value("potential/u/w2") = w2;
  store.mutable_value("potential/u/b2") = ad::Tensor(1, 8, -0.5);
  GroundProgram p = ground_rules(rules, context_of({"ann ate ."}, {"ann"}), builtin_knowledge());
  // hidden = [1, 2]; logit_l = l + 2 - 0.5.
  score_rules(p, rules, store, ad::Tensor(1, 2, {1.0, 2.0}));
  for (const GroundClause& c : p.weighted) EXPECT_DOUBLE_EQ(c.weight, c.labels[0] + 1.5);
  score_rules(p, rules, store, ad::Tensor(1, 2, {1.0, 2.0}), {"u"});
  for (const GroundClause& c : p.weighted) EXPECT_EQ(c.weight, 0.0);
  EXPECT_THROW(score_rules(p, rules, store, ad::Tensor(0, 2)), DataError);
}

struct ToyStories {
  std::vector<Document> docs;
  std::vector<StoryData> data;
};

// Mention embeddings are one-hot verb indicators, so Plutchik labels are
// a deterministic function of the input.
ToyStories toy_stories(std::size_t n, std::uint64_t seed) {
  ToyStories t;
  t.docs = storycommonsense_toy(n, seed);
  for (const Document& d : t.docs) {
    StoryData s;
    s.doc = &d;
    s.context = story_context(build_graph(d));
    s.embeddings = ad::Tensor(s.context.mentions.size(), verb_profiles().size());
    for (std::size_t m = 0; m < s.context.mentions.size(); ++m) {
      for (const NodeTag& tag : d.labels->tags) {
        if (tag.entity != s.context.mentions[m].entity || tag.sentence != s.context.mentions[m].sentence) continue;
        for (std::size_t v = 0; v < verb_profiles().size(); ++v) {
          if (verb_profiles()[v].verb == tag.verb) s.embeddings(m, v) = 1.0;
        }
      }
    }
    t.data.push_back(std::move(s));
  }
  return t;
}

TEST(Potentials, ZeroLearningRateKeepsParameters) {
  ToyStories t = toy_stories(3, 1);
  const RuleSet rules = parse_rules("weighted u: Entity(e) => Plut(e, l)");
  ad::ParameterStore store;
  Rng rng(2);
  init_potentials(store, potential_specs(rules), 8, 4, rng);
  const ad::ParameterStore before = store;
  PotentialTrainConfig cfg;
  cfg.lr = 0.0;
  cfg.max_epochs = 3;
  const PotentialTrainReport rep = train_potentials(store, rules, t.data, {}, cfg);
  for (const std::string& n : before.names()) EXPECT_EQ(store.value(n), before.value(n)) << n;
  EXPECT_EQ(rep.rows.at("u"), 3u * 5u);
}

TEST(Potentials, LearnsSeparableUnaryLabels) {
  ToyStories train = toy_stories(20, 3);
  ToyStories dev = toy_stories(5, 4);
  const RuleSet rules = parse_rules("weighted u: Entity(e) => Plut(e, l)\n"
                                    "weighted r: Entity(e) => Reiss(e, l)\n"
                                    "weighted d: Entity(e) => Maslow(e, l)\n");
  ad::ParameterStore store;
  Rng rng(5);
  init_potentials(store, potential_specs(rules), 8, 16, rng);
  PotentialTrainConfig cfg;
  cfg.lr = 0.5;
  cfg.max_epochs = 300;
  cfg.patience = 20;
  cfg.batch = 8;
  const PotentialTrainReport rep = train_potentials(store, rules, train.data, dev.data, cfg);
  EXPECT_TRUE(rep.disabled.empty());
  std::size_t wrong = 0, total = 0;
  for (const StoryData& s : dev.data) {
    GroundProgram p = ground_rules(rules, s.context, builtin_knowledge());
    score_rules(p, rules, store, s.embeddings);
    const auto decoded = decode_assignment(p, map_inference(p).assignment, s.context.mentions.size());
    for (Task task : {Task::kMaslow, Task::kReiss, Task::kPlutchik}) {
      for (std::size_t m = 0; m < s.context.mentions.size(); ++m) {
        const auto gold = gold_vector(*s.doc, task, s.context.mentions[m].entity, s.context.mentions[m].sentence);
        ASSERT_TRUE(gold.has_value());
        ++total;
        std::vector<int> active;
        for (std::size_t l = 0; l < gold->size(); ++l) {
          if ((*gold)[l]) active.push_back(static_cast<int>(l));
        }
        wrong += decoded.at(task)[m] != active ? 1 : 0;
      }
    }
  }
  EXPECT_EQ(wrong, 0u) << "of " << total;
}

TEST(Potentials, NoRowsDisablesPotential) {
  ToyStories t = toy_stories(2, 1);
  const RuleSet rules = parse_rules("weighted t: Plut(e_i, l_i) ∧ HasNext(e_i, e_j) ⇒ Plut(e_j, l_j)");
  ad::ParameterStore store;
  Rng rng(2);
  init_potentials(store, potential_specs(rules), 8, 4, rng);
  std::vector<StoryData> unlabeled = t.data;
  for (StoryData& s : unlabeled) s.doc = nullptr;
  const PotentialTrainReport rep = train_potentials(store, rules, unlabeled, {}, {});
  EXPECT_EQ(rep.disabled, std::set<std::string>{"t"});
  EXPECT_EQ(rep.warnings.size(), 1u);
}

TEST(Decode, ViolationCounts) {
  const KnowledgeBase kb = builtin_knowledge();
  std::map<Task, std::vector<std::vector<int>>> labels;
  auto hot = [](Task task, std::vector<std::string> names) {
    std::vector<int> v;
    for (const auto& n : names) v.push_back(label_index(task, n));
    std::sort(v.begin(), v.end());
    return v;
  };
  labels[Task::kMaslow] = {hot(Task::kMaslow, {"physiological"}), hot(Task::kMaslow, {"love"})};
  labels[Task::kReiss] = {hot(Task::kReiss, {"food"}), hot(Task::kReiss, {"food", "family"})};
  labels[Task::kPlutchik] = {hot(Task::kPlutchik, {"joy", "fear", "anger"}), hot(Task::kPlutchik, {"joy"})};
  const ViolationCount v = count_violations(labels, kb);
  EXPECT_EQ(v.alignment, 1u);
  EXPECT_EQ(v.polarity, 2u);

  const RuleSet rules = load_rules(kData / "storycommonsense.rules");
  const GroundProgram p = ground_rules(rules, context_of({"ann ate .", "bob ran ."}, {"ann", "bob"}), kb);
  std::vector<std::uint8_t> a(p.num_variables, 0);
  a[static_cast<std::size_t>(p.variable(Task::kReiss, 1, label_index(Task::kReiss, "rest")))] = 1;
  const auto decoded = decode_assignment(p, a, 2);
  EXPECT_EQ(decoded.at(Task::kReiss)[1], hot(Task::kReiss, {"rest"}));
  EXPECT_EQ(decoded.at(Task::kReiss)[0], hot(Task::kReiss, {}));
}

}  // namespace
}  // namespace eng
