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

// Weighted and hard horn clauses over character mental states: parsing,
// grounding, neural potentials and exact MAP inference.

#ifndef ENG_SYMBOLIC_HPP_
#define ENG_SYMBOLIC_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "eng/autodiff.hpp"
#include "eng/corpus.hpp"
#include "eng/narrative_graph.hpp"

namespace eng {

// Predicted predicates: Maslow, Reiss, Plut (one boolean per mention and
// label). Observed predicates: Entity(e), HasNext(e_i, e_j), Align(m, r),
// Pos(p), Neg(q).
struct Atom {
  std::string predicate;
  std::vector<std::string> args;  // variables, or "quoted" label constants
  bool negated = false;
};

enum class RuleKind { kWeighted, kHard };

struct Rule {
  RuleKind kind = RuleKind::kWeighted;
  std::string potential;  // weighted rules only
  std::vector<Atom> body;
  Atom head;
  std::string text;
};

struct RuleSet {
  std::vector<Rule> rules;
  std::set<Task> tasks() const;
};

// One rule per line, '#' comments:
//   weighted <potential>: Entity(e) => Maslow(e, l)
//   hard: Plut(e, p) & Pos(p) & Neg(q) => !Plut(e, q)
// Conjunction: & or ∧; implication: => or ⇒; negation: !, ~ or ¬.
RuleSet parse_rules(std::string_view text);
RuleSet load_rules(const std::filesystem::path& path);

// Each Reiss motive refines exactly one Maslow need.
struct AlignTable {
  std::map<std::string, std::string> reiss_to_maslow;
  bool aligned(std::string_view maslow, std::string_view reiss) const;
};

struct PolarityGroups {
  std::set<std::string> positive;
  std::set<std::string> negative;
};

struct KnowledgeBase {
  AlignTable align;
  PolarityGroups polarity;
};

const AlignTable& builtin_alignment();
const PolarityGroups& builtin_polarity();
// "maslow<TAB>reiss" rows.
AlignTable load_alignment(const std::filesystem::path& path);
// "label<TAB>positive|negative" rows.
PolarityGroups load_polarity(const std::filesystem::path& path);
KnowledgeBase builtin_knowledge();

struct StoryMention {
  int node_id = 0;
  std::string entity;
  int sentence = 0;
};

struct StoryContext {
  std::string doc_id;
  std::vector<StoryMention> mentions;
  std::set<std::pair<int, int>> has_next;  // mention indices
};

// Mentions are the graph nodes; HasNext links a character's nodes in
// consecutive sentences.
StoryContext story_context(const NarrativeGraph& graph);

struct Literal {
  int var = 0;
  bool positive = true;
  auto operator<=>(const Literal&) const = default;
};

struct GroundClause {
  std::vector<Literal> literals;  // disjunction
  double weight = 0.0;
  int rule = -1;
  std::vector<int> mentions;  // potential input, weighted clauses only
  std::vector<int> labels;    // potential output index tuple
};

struct VariableKey {
  Task task = Task::kMaslow;
  int mention = 0;
  int label = 0;
};

struct GroundProgram {
  std::size_t num_variables = 0;
  std::vector<VariableKey> keys;  // may be empty for hand-built programs
  std::vector<GroundClause> weighted;
  std::vector<GroundClause> hard;

  int variable(Task task, int mention, int label) const;
  // Sum of weights of satisfied weighted clauses.
  double objective(std::span<const std::uint8_t> assignment) const;
  std::size_t violations(std::span<const std::uint8_t> assignment) const;

  std::map<std::tuple<Task, int, int>, int> index;
};

bool clause_satisfied(const GroundClause& clause, std::span<const std::uint8_t> assignment);

// One variable per (task, mention, label) for every predicted predicate in
// the rule set; one clause per rule instantiation whose observed atoms hold.
// `hard_rules` false drops hard clauses.
GroundProgram ground_rules(const RuleSet& rules, const StoryContext& story, const KnowledgeBase& kb,
                           bool hard_rules = true);

// Potential networks: one 2-layer FFN per weighted-rule potential, input the
// concatenated mention embeddings, one output per label tuple.
struct PotentialSpec {
  std::string name;
  std::size_t mention_arity = 0;
  std::vector<Task> label_domains;
  std::size_t outputs = 0;
};

std::vector<PotentialSpec> potential_specs(const RuleSet& rules);
std::string potential_prefix(const std::string& name);
void init_potentials(ad::ParameterStore& store, std::span<const PotentialSpec> specs, std::size_t dim,
                     std::size_t hidden, Rng& rng);

// Sets each weighted clause to the logit of its potential; clauses of
// disabled potentials get weight 0.
void score_rules(GroundProgram& program, const RuleSet& rules, const ad::ParameterStore& potentials,
                 const ad::Tensor& embeddings, const std::set<std::string>& disabled = {});

enum class SolverKind { kAuto, kBranchAndBound, kExhaustive };
std::string_view solver_name(SolverKind kind);
SolverKind parse_solver(std::string_view name);

inline constexpr double kObjectiveTolerance = 1e-9;
inline constexpr std::size_t kExhaustiveLimit = 20;
inline constexpr std::size_t kDefaultNodeBudget = 200000;

struct MapResult {
  std::vector<std::uint8_t> assignment;
  double objective = 0.0;
  std::size_t explored = 0;
  std::size_t unproven = 0;  // components whose search stopped at the node budget
};

// Maximises the weighted objective subject to every hard clause, per
// connected component. Ties resolve to the lexicographically smallest
// assignment (false before true, variable 0 first). kAuto enumerates
// components below kExhaustiveLimit variables and branches otherwise.
// Branching stops after node_budget search nodes per component (0: no
// limit) and keeps the best feasible assignment found so far.
MapResult map_inference(const GroundProgram& program, SolverKind solver = SolverKind::kAuto,
                        std::size_t node_budget = kDefaultNodeBudget);

struct StoryData {
  const Document* doc = nullptr;
  StoryContext context;
  ad::Tensor embeddings;  // one row per mention
};

struct PotentialTrainConfig {
  double lr = 1e-3;
  std::size_t max_epochs = 200;
  std::size_t patience = 5;
  std::size_t batch = 32;
  std::uint64_t seed = 0;
};

struct PotentialTrainReport {
  std::map<std::string, std::size_t> rows;
  std::map<std::string, double> train_loss;
  std::map<std::string, double> dev_loss;
  std::map<std::string, std::size_t> epochs;
  std::set<std::string> disabled;
  std::vector<std::string> warnings;
};

// Local normalisation: each potential minimises its own BCE, where the
// target of a label tuple is 1 iff the ground clause is satisfied by the
// gold labels. Plain SGD; stops after `patience` epochs without a
// lower validation loss (training loss without dev data) and keeps the best
// parameters.
PotentialTrainReport train_potentials(ad::ParameterStore& potentials, const RuleSet& rules,
                                      std::span<const StoryData> train, std::span<const StoryData> dev,
                                      const PotentialTrainConfig& config);

// Active labels per task and mention from a MAP assignment.
std::map<Task, std::vector<std::vector<int>>> decode_assignment(const GroundProgram& program,
                                                                std::span<const std::uint8_t> assignment,
                                                                std::size_t mentions);

struct ViolationCount {
  std::size_t alignment = 0;
  std::size_t polarity = 0;
};
// Counts alignment and polarity conflicts directly from decoded labels.
ViolationCount count_violations(const std::map<Task, std::vector<std::vector<int>>>& labels,
                                const KnowledgeBase& kb);

}  // namespace eng

#endif  // ENG_SYMBOLIC_HPP_
