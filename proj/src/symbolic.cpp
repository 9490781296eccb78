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

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "eng/task_heads.hpp"
#include "eng/training.hpp"

namespace eng {
namespace {

constexpr int kMentionDomain = -1;

enum class PredKind { kPredicted, kEntity, kHasNext, kAlign, kPos, kNeg };

struct PredicateInfo {
  PredKind kind;
  std::vector<int> domains;  // per argument: kMentionDomain or a Task
};

std::optional<PredicateInfo> predicate_info(std::string_view name) {
  const int maslow = static_cast<int>(Task::kMaslow);
  const int reiss = static_cast<int>(Task::kReiss);
  const int plut = static_cast<int>(Task::kPlutchik);
  if (name == "Maslow") return PredicateInfo{PredKind::kPredicted, {kMentionDomain, maslow}};
  if (name == "Reiss") return PredicateInfo{PredKind::kPredicted, {kMentionDomain, reiss}};
  if (name == "Plut" || name == "Plutchik") return PredicateInfo{PredKind::kPredicted, {kMentionDomain, plut}};
  if (name == "Entity") return PredicateInfo{PredKind::kEntity, {kMentionDomain}};
  if (name == "HasNext") return PredicateInfo{PredKind::kHasNext, {kMentionDomain, kMentionDomain}};
  if (name == "Align") return PredicateInfo{PredKind::kAlign, {maslow, reiss}};
  if (name == "Pos") return PredicateInfo{PredKind::kPos, {plut}};
  if (name == "Neg") return PredicateInfo{PredKind::kNeg, {plut}};
  return std::nullopt;
}

std::size_t domain_size(int domain) { return label_vocabulary(static_cast<Task>(domain)).size(); }

// A rule with resolved variables: every argument is a variable index or a
// label constant.
struct CompiledArg {
  int var = -1;
  int constant = -1;
};

struct CompiledAtom {
  PredKind kind;
  int task = -1;  // predicted atoms
  std::vector<CompiledArg> args;
  bool negated = false;
  std::size_t ready = 0;  // binding depth after which every variable is bound
};

struct CompiledRule {
  std::vector<int> domains;       // per variable, in binding order
  std::vector<int> mention_vars;  // binding positions
  std::vector<int> label_vars;
  std::vector<CompiledAtom> observed;
  std::vector<CompiledAtom> predicted;  // body atoms then the head
  std::size_t head = 0;                 // index of the head in `predicted`
};

CompiledRule compile_rule(const Rule& rule) {
  std::vector<std::string> names;
  std::vector<int> domains;
  std::vector<const Atom*> atoms;
  for (const Atom& a : rule.body) atoms.push_back(&a);
  atoms.push_back(&rule.head);
  auto fail = [&rule](const std::string& msg) { return DataError("rule '" + rule.text + "': " + msg); };
  for (const Atom* a : atoms) {
    const auto info = predicate_info(a->predicate);
    if (!info) throw fail("unknown predicate '" + a->predicate + "'");
    if (info->domains.size() != a->args.size()) throw fail("wrong arity for " + a->predicate);
    for (std::size_t i = 0; i < a->args.size(); ++i) {
      const std::string& arg = a->args[i];
      if (arg.front() == '"') continue;
      auto it = std::find(names.begin(), names.end(), arg);
      if (it == names.end()) {
        names.push_back(arg);
        domains.push_back(info->domains[i]);
      } else if (domains[static_cast<std::size_t>(it - names.begin())] != info->domains[i]) {
        throw fail("variable '" + arg + "' used with conflicting types");
      }
    }
  }
  CompiledRule c;
  std::vector<int> order;
  for (std::size_t v = 0; v < names.size(); ++v) {
    if (domains[v] == kMentionDomain) order.push_back(static_cast<int>(v));
  }
  for (std::size_t v = 0; v < names.size(); ++v) {
    if (domains[v] != kMentionDomain) order.push_back(static_cast<int>(v));
  }
  std::vector<int> position(names.size());
  for (std::size_t p = 0; p < order.size(); ++p) {
    position[static_cast<std::size_t>(order[p])] = static_cast<int>(p);
    c.domains.push_back(domains[static_cast<std::size_t>(order[p])]);
    (c.domains.back() == kMentionDomain ? c.mention_vars : c.label_vars).push_back(static_cast<int>(p));
  }
  for (std::size_t ai = 0; ai < atoms.size(); ++ai) {
    const Atom* a = atoms[ai];
    const auto info = *predicate_info(a->predicate);
    CompiledAtom ca;
    ca.kind = info.kind;
    ca.negated = a->negated;
    if (info.kind == PredKind::kPredicted) ca.task = info.domains[1];
    for (std::size_t i = 0; i < a->args.size(); ++i) {
      const std::string& arg = a->args[i];
      CompiledArg carg;
      if (arg.front() == '"') {
        if (info.domains[i] == kMentionDomain) throw fail("mention arguments cannot be constants");
        const std::string label = arg.substr(1, arg.size() - 2);
        carg.constant = label_index(static_cast<Task>(info.domains[i]), label);
        if (carg.constant < 0) throw fail("label '" + label + "' is not in the vocabulary");
      } else {
        carg.var = position[static_cast<std::size_t>(std::find(names.begin(), names.end(), arg) - names.begin())];
        ca.ready = std::max(ca.ready, static_cast<std::size_t>(carg.var) + 1);
      }
      ca.args.push_back(carg);
    }
    const bool is_head = ai + 1 == atoms.size();
    if (info.kind == PredKind::kPredicted) {
      if (is_head) c.head = c.predicted.size();
      c.predicted.push_back(ca);
    } else {
      if (is_head) throw fail("the head must be a predicted atom");
      c.observed.push_back(ca);
    }
  }
  if (rule.kind == RuleKind::kWeighted) {
    for (const CompiledAtom& a : c.observed) {
      for (const CompiledArg& arg : a.args) {
        if (arg.var < 0 || c.domains[static_cast<std::size_t>(arg.var)] != kMentionDomain) {
          throw fail("observed atoms of weighted rules may only relate mentions");
        }
      }
    }
  }
  return c;
}

int arg_value(const CompiledArg& a, const std::vector<int>& binding) {
  return a.var >= 0 ? binding[static_cast<std::size_t>(a.var)] : a.constant;
}

bool observed_holds(const CompiledAtom& a, const std::vector<int>& binding, const StoryContext& story,
                    const KnowledgeBase& kb) {
  bool value = false;
  switch (a.kind) {
    case PredKind::kEntity:
      value = true;
      break;
    case PredKind::kHasNext:
      value = story.has_next.count({arg_value(a.args[0], binding), arg_value(a.args[1], binding)}) != 0;
      break;
    case PredKind::kAlign:
      value = kb.align.aligned(label_vocabulary(Task::kMaslow)[static_cast<std::size_t>(arg_value(a.args[0], binding))],
                               label_vocabulary(Task::kReiss)[static_cast<std::size_t>(arg_value(a.args[1], binding))]);
      break;
    case PredKind::kPos:
      value = kb.polarity.positive.count(
                  label_vocabulary(Task::kPlutchik)[static_cast<std::size_t>(arg_value(a.args[0], binding))]) != 0;
      break;
    case PredKind::kNeg:
      value = kb.polarity.negative.count(
                  label_vocabulary(Task::kPlutchik)[static_cast<std::size_t>(arg_value(a.args[0], binding))]) != 0;
      break;
    case PredKind::kPredicted:
      break;
  }
  return value != a.negated;
}

// Calls `emit` for every binding of the first `depth_limit` variables whose
// fully bound observed atoms hold.
void enumerate_bindings(const CompiledRule& rule, std::size_t depth_limit, std::size_t mentions,
                        const StoryContext& story, const KnowledgeBase& kb,
                        const std::function<void(const std::vector<int>&)>& emit) {
  std::vector<int> binding(rule.domains.size(), -1);
  std::function<void(std::size_t)> rec = [&](std::size_t depth) {
    for (const CompiledAtom& a : rule.observed) {
      if (a.ready == depth && !observed_holds(a, binding, story, kb)) return;
    }
    if (depth == depth_limit) {
      emit(binding);
      return;
    }
    const int domain = rule.domains[depth];
    const std::size_t n = domain == kMentionDomain ? mentions : domain_size(domain);
    for (std::size_t v = 0; v < n; ++v) {
      binding[depth] = static_cast<int>(v);
      rec(depth + 1);
    }
    binding[depth] = -1;
  };
  // Atoms with only constants are checked at depth 0.
  rec(0);
}

std::size_t label_tuple_index(const CompiledRule& rule, const std::vector<int>& binding) {
  std::size_t idx = 0;
  for (int p : rule.label_vars) {
    idx = idx * domain_size(rule.domains[static_cast<std::size_t>(p)]) +
          static_cast<std::size_t>(binding[static_cast<std::size_t>(p)]);
  }
  return idx;
}

std::string trim_copy(std::string_view s) { return trim(s); }

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

Atom parse_atom(std::string text, const std::string& where) {
  Atom a;
  text = trim_copy(text);
  while (!text.empty() && (text.front() == '!' || text.front() == '~')) {
    a.negated = !a.negated;
    text = trim_copy(text.substr(1));
  }
  const std::size_t open = text.find('(');
  if (open == std::string::npos || text.back() != ')') throw DataError(where + ": malformed atom '" + text + "'");
  a.predicate = trim_copy(text.substr(0, open));
  std::stringstream ss(text.substr(open + 1, text.size() - open - 2));
  std::string arg;
  while (std::getline(ss, arg, ',')) {
    arg = trim_copy(arg);
    if (arg.empty()) throw DataError(where + ": empty argument in '" + text + "'");
    if (arg.front() == '"' && (arg.size() < 2 || arg.back() != '"')) {
      throw DataError(where + ": unterminated constant in '" + text + "'");
    }
    a.args.push_back(arg);
  }
  if (a.predicate.empty() || !predicate_info(a.predicate)) {
    throw DataError(where + ": unknown predicate '" + a.predicate + "'");
  }
  return a;
}

// ---------------------------------------------------------------------------
// MAP

struct LocalClause {
  std::vector<std::pair<int, bool>> lits;  // local var, positive
  double weight = 0.0;
};

struct Component {
  std::vector<int> vars;  // global ids, ascending
  std::vector<LocalClause> weighted;
  std::vector<LocalClause> hard;
};

int literal_state(const std::pair<int, bool>& lit, const std::vector<int>& val) {
  const int v = val[static_cast<std::size_t>(lit.first)];
  if (v < 0) return -1;
  return (v == 1) == lit.second ? 1 : 0;
}

double exact_value(const Component& c, const std::vector<int>& val) {
  double total = 0.0;
  for (const LocalClause& cl : c.weighted) {
    for (const auto& lit : cl.lits) {
      if (literal_state(lit, val) == 1) {
        total += cl.weight;
        break;
      }
    }
  }
  return total;
}

bool hard_ok(const Component& c, const std::vector<int>& val) {
  for (const LocalClause& cl : c.hard) {
    bool sat = false;
    for (const auto& lit : cl.lits) sat = sat || literal_state(lit, val) == 1;
    if (!sat) return false;
  }
  return true;
}

std::vector<int> solve_exhaustive(const Component& c, std::size_t* explored) {
  const std::size_t n = c.vars.size();
  if (n >= 63) throw UsageError("exhaustive MAP cannot enumerate " + std::to_string(n) + " variables");
  std::vector<int> val(n, 0), best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (std::size_t k = 0; k < n; ++k) val[k] = static_cast<int>((mask >> (n - 1 - k)) & 1U);
    ++*explored;
    if (!hard_ok(c, val)) continue;
    const double v = exact_value(c, val);
    if (best.empty() || v > best_value + kObjectiveTolerance) {
      best_value = v;
      best = val;
    }
  }
  if (best.empty()) throw DataError("MAP inference: hard constraints are infeasible");
  return best;
}

class BranchAndBound {
 public:
  BranchAndBound(const Component& c, std::size_t budget)
      : c_(c), budget_(budget), val_(c.vars.size(), -1), gain0_(c.vars.size(), 0.0), gain1_(c.vars.size(), 0.0),
        in_touched_(c.vars.size(), false), hard_of_(c.vars.size()), weighted_of_(c.vars.size()) {
    for (std::size_t h = 0; h < c.hard.size(); ++h) {
      for (const auto& lit : c.hard[h].lits) hard_of_[static_cast<std::size_t>(lit.first)].push_back(h);
    }
    for (std::size_t w = 0; w < c.weighted.size(); ++w) {
      for (const auto& lit : c.weighted[w].lits) {
        auto& list = weighted_of_[static_cast<std::size_t>(lit.first)];
        if (list.empty() || list.back() != w) list.push_back(w);
      }
    }
  }

  bool exhausted() const { return exhausted_; }

  std::vector<int> solve(std::size_t* explored) {
    seed_incumbent();
    std::vector<int> queue;
    for (std::size_t h = 0; h < c_.hard.size(); ++h) {
      if (!check_hard(h, queue)) return finish();
    }
    if (propagate(queue)) dfs(0);
    *explored += explored_;
    return finish();
  }

 private:
  std::vector<int> finish() {
    if (best_.empty()) throw DataError("MAP inference: hard constraints are infeasible");
    return best_;
  }

  bool clause_true(const LocalClause& cl, const std::vector<int>& val) const {
    for (const auto& lit : cl.lits) {
      if (literal_state(lit, val) == 1) return true;
    }
    return false;
  }

  // Objective change from flipping k, or nullopt when a hard clause breaks.
  std::optional<double> flip_gain(std::vector<int>& val, std::size_t k) const {
    double before = 0.0, after = 0.0;
    for (std::size_t w : weighted_of_[k]) before += clause_true(c_.weighted[w], val) ? c_.weighted[w].weight : 0.0;
    val[k] ^= 1;
    bool ok = true;
    for (std::size_t h : hard_of_[k]) ok = ok && clause_true(c_.hard[h], val);
    for (std::size_t w : weighted_of_[k]) after += clause_true(c_.weighted[w], val) ? c_.weighted[w].weight : 0.0;
    val[k] ^= 1;
    if (!ok) return std::nullopt;
    return after - before;
  }

  // Flips k and repairs each hard clause it breaks through another literal.
  bool eject(std::vector<int>& val, double& value, std::size_t k, bool force = false) const {
    std::vector<int> next = val;
    next[k] ^= 1;
    for (std::size_t h : hard_of_[k]) {
      const LocalClause& cl = c_.hard[h];
      if (clause_true(cl, next)) continue;
      for (const auto& lit : cl.lits) {
        if (static_cast<std::size_t>(lit.first) != k) {
          next[static_cast<std::size_t>(lit.first)] = lit.second ? 1 : 0;
          break;
        }
      }
    }
    if (!hard_ok(c_, next)) return false;
    const double v = exact_value(c_, next);
    if (!force && v <= value + kObjectiveTolerance) return false;
    val = std::move(next);
    value = v;
    return true;
  }

  void climb(std::vector<int>& val, double& value) const {
    for (bool improved = true; improved;) {
      improved = false;
      for (std::size_t k = 0; k < val.size(); ++k) {
        if (const auto gain = flip_gain(val, k)) {
          if (*gain > kObjectiveTolerance) {
            val[k] ^= 1;
            value += *gain;
            improved = true;
          }
        } else if (eject(val, value, k)) {
          improved = true;
        }
      }
    }
  }

  // Iterated local search from all-false: climb, perturb a few variables
  // while staying feasible, climb again, keep the better assignment.
  void seed_incumbent() {
    std::vector<int> val(c_.vars.size(), 0);
    if (!hard_ok(c_, val)) return;
    double value = exact_value(c_, val);
    climb(val, value);
    std::vector<int> best = val;
    double best_value = value;
    // Second start: every variable whose unit clauses favour true.
    std::vector<double> unit(val.size(), 0.0);
    for (const LocalClause& cl : c_.weighted) {
      if (cl.lits.size() == 1) unit[static_cast<std::size_t>(cl.lits[0].first)] += cl.lits[0].second ? cl.weight : -cl.weight;
    }
    std::fill(val.begin(), val.end(), 0);
    value = exact_value(c_, val);
    for (std::size_t k = 0; k < val.size(); ++k) {
      if (unit[k] > 0.0 && val[k] == 0) eject(val, value, k, true);
    }
    climb(val, value);
    if (value > best_value + kObjectiveTolerance) {
      best = val;
      best_value = value;
    }
    Rng rng(c_.vars.size());
    const std::size_t kick = std::max<std::size_t>(2, val.size() / 20);
    for (int round = 0; round < 100; ++round) {
      val = best;
      value = best_value;
      for (std::size_t f = 0; f < kick; ++f) {
        eject(val, value, rng.index(val.size()), true);
      }
      climb(val, value);
      if (value > best_value + kObjectiveTolerance) {
        best = val;
        best_value = value;
      }
    }
    best_ = best;
    best_value_ = exact_value(c_, best);
    from_dfs_ = false;
  }

  void assign(int k, int v) {
    val_[static_cast<std::size_t>(k)] = v;
    trail_.push_back(k);
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      val_[static_cast<std::size_t>(trail_.back())] = -1;
      trail_.pop_back();
    }
  }

  // False on conflict; forces the last open literal of a unit clause.
  bool check_hard(std::size_t h, std::vector<int>& queue) {
    const LocalClause& cl = c_.hard[h];
    int open = -1;
    std::size_t open_count = 0;
    for (std::size_t i = 0; i < cl.lits.size(); ++i) {
      const int s = literal_state(cl.lits[i], val_);
      if (s == 1) return true;
      if (s == -1) {
        ++open_count;
        open = static_cast<int>(i);
      }
    }
    if (open_count == 0) return false;
    if (open_count == 1) {
      const auto& lit = cl.lits[static_cast<std::size_t>(open)];
      assign(lit.first, lit.second ? 1 : 0);
      queue.push_back(lit.first);
    }
    return true;
  }

  bool propagate(std::vector<int>& queue) {
    while (!queue.empty()) {
      const int k = queue.back();
      queue.pop_back();
      for (std::size_t h : hard_of_[static_cast<std::size_t>(k)]) {
        if (!check_hard(h, queue)) return false;
      }
    }
    return true;
  }

  bool reference_true(const std::pair<int, bool>& lit) const {
    const auto k = static_cast<std::size_t>(lit.first);
    const bool value = best_.empty() ? false : best_[k] == 1;
    return value == lit.second;
  }

  // Each open clause is bounded by a function of one variable: clauses with
  // a single open variable, and negative clauses through an open literal
  // that is false in the incumbent; positive clauses with several open
  // variables count in full.
  double bound() {
    double total = 0.0;
    touched_.clear();
    for (const LocalClause& cl : c_.weighted) {
      const std::pair<int, bool>* first = nullptr;
      bool multiple = false, satisfied = false;
      for (const auto& lit : cl.lits) {
        const int s = literal_state(lit, val_);
        if (s == 1) {
          satisfied = true;
          break;
        }
        if (s == -1) {
          if (!first) {
            first = &lit;
          } else {
            multiple = true;
            if (reference_true(*first) && !reference_true(lit)) first = &lit;
          }
        }
      }
      if (satisfied) {
        total += cl.weight;
      } else if (!first) {
        continue;
      } else if (multiple && cl.weight >= 0.0) {
        total += cl.weight;
      } else {
        const auto k = static_cast<std::size_t>(first->first);
        if (!in_touched_[k]) {
          in_touched_[k] = true;
          touched_.push_back(first->first);
        }
        (first->second ? gain1_[k] : gain0_[k]) += cl.weight;
      }
    }
    for (int k : touched_) {
      const auto i = static_cast<std::size_t>(k);
      total += std::max(gain0_[i], gain1_[i]);
      gain0_[i] = 0.0;
      gain1_[i] = 0.0;
      in_touched_[i] = false;
    }
    return total;
  }

  void dfs(std::size_t pos) {
    if (budget_ && explored_ >= budget_ && !best_.empty()) {
      exhausted_ = true;
      return;
    }
    ++explored_;
    while (pos < val_.size() && val_[pos] >= 0) ++pos;
    const double b = bound();
    if (pos == val_.size()) {
      if (best_.empty() || b > best_value_ + kObjectiveTolerance ||
          (!from_dfs_ && b >= best_value_ - kObjectiveTolerance)) {
        best_ = val_;
        best_value_ = b;
        from_dfs_ = true;
      }
      return;
    }
    if (!best_.empty()) {
      if (from_dfs_ ? b <= best_value_ + kObjectiveTolerance : b < best_value_ - kObjectiveTolerance) return;
    }
    for (int v : {0, 1}) {
      const std::size_t mark = trail_.size();
      assign(static_cast<int>(pos), v);
      std::vector<int> queue{static_cast<int>(pos)};
      if (propagate(queue)) dfs(pos + 1);
      undo(mark);
    }
  }

  const Component& c_;
  std::size_t budget_;
  bool exhausted_ = false;
  std::vector<int> val_;
  std::vector<double> gain0_, gain1_;
  std::vector<bool> in_touched_;
  std::vector<int> touched_;
  std::vector<std::vector<std::size_t>> hard_of_, weighted_of_;
  std::vector<int> trail_;
  std::vector<int> best_;
  double best_value_ = -std::numeric_limits<double>::infinity();
  bool from_dfs_ = false;
  std::size_t explored_ = 0;
};

std::vector<Component> split_components(const GroundProgram& p) {
  const std::size_t n = p.num_variables;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  auto unite = [&](const GroundClause& cl) {
    for (const Literal& l : cl.literals) {
      if (l.var < 0 || static_cast<std::size_t>(l.var) >= n) {
        throw DataError("MAP inference: clause literal references variable " + std::to_string(l.var));
      }
    }
    for (std::size_t i = 1; i < cl.literals.size(); ++i) {
      const int a = find(cl.literals[0].var), b = find(cl.literals[i].var);
      if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
  };
  for (const GroundClause& cl : p.weighted) unite(cl);
  for (const GroundClause& cl : p.hard) unite(cl);
  std::map<int, std::size_t> comp_of_root;
  std::vector<Component> comps;
  std::vector<int> local(n, -1);
  std::vector<std::size_t> comp_of_var(n);
  std::vector<bool> used(n, false);
  for (const GroundClause& cl : p.weighted) {
    for (const Literal& l : cl.literals) used[static_cast<std::size_t>(l.var)] = true;
  }
  for (const GroundClause& cl : p.hard) {
    for (const Literal& l : cl.literals) used[static_cast<std::size_t>(l.var)] = true;
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (!used[v]) continue;
    const int root = find(static_cast<int>(v));
    auto [it, inserted] = comp_of_root.emplace(root, comps.size());
    if (inserted) comps.emplace_back();
    Component& c = comps[it->second];
    local[v] = static_cast<int>(c.vars.size());
    comp_of_var[v] = it->second;
    c.vars.push_back(static_cast<int>(v));
  }
  auto add = [&](const GroundClause& cl, bool hard) {
    if (cl.literals.empty()) {
      if (hard) throw DataError("MAP inference: empty hard clause is infeasible");
      return;
    }
    LocalClause lc;
    lc.weight = cl.weight;
    for (const Literal& l : cl.literals) lc.lits.emplace_back(local[static_cast<std::size_t>(l.var)], l.positive);
    Component& c = comps[comp_of_var[static_cast<std::size_t>(cl.literals[0].var)]];
    (hard ? c.hard : c.weighted).push_back(std::move(lc));
  };
  for (const GroundClause& cl : p.weighted) add(cl, false);
  for (const GroundClause& cl : p.hard) add(cl, true);
  return comps;
}

// Row-major label tuple enumeration for a compiled rule.
std::vector<std::vector<int>> label_tuples(const CompiledRule& rule) {
  std::vector<std::vector<int>> out{{}};
  for (int p : rule.label_vars) {
    std::vector<std::vector<int>> next;
    const std::size_t n = domain_size(rule.domains[static_cast<std::size_t>(p)]);
    for (const auto& prefix : out) {
      for (std::size_t v = 0; v < n; ++v) {
        next.push_back(prefix);
        next.back().push_back(static_cast<int>(v));
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace

std::set<Task> RuleSet::tasks() const {
  std::set<Task> out;
  for (const Rule& r : rules) {
    std::vector<const Atom*> atoms;
    for (const Atom& a : r.body) atoms.push_back(&a);
    atoms.push_back(&r.head);
    for (const Atom* a : atoms) {
      const auto info = predicate_info(a->predicate);
      if (info && info->kind == PredKind::kPredicted) out.insert(static_cast<Task>(info->domains[1]));
    }
  }
  return out;
}

RuleSet parse_rules(std::string_view text) {
  RuleSet set;
  std::stringstream ss{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  std::set<std::string> potentials;
  while (std::getline(ss, raw)) {
    ++line_no;
    const std::string where = "rules:" + std::to_string(line_no);
    std::string line = raw.substr(0, raw.find('#'));
    replace_all(line, "\xE2\x88\xA7", "&");   // ∧
    replace_all(line, "\xE2\x87\x92", "=>");  // ⇒
    replace_all(line, "\xC2\xAC", "!");       // ¬
    line = trim_copy(line);
    if (line.empty()) continue;
    const std::size_t colon = line.find(':');
    if (colon == std::string::npos) throw DataError(where + ": expected 'weighted <name>:' or 'hard:' prefix");
    Rule rule;
    rule.text = trim_copy(line.substr(colon + 1));
    std::stringstream head(line.substr(0, colon));
    std::string kind, name, extra;
    head >> kind >> name >> extra;
    if (kind == "weighted") {
      if (name.empty() || !extra.empty()) throw DataError(where + ": weighted rules need exactly one potential name");
      if (!potentials.insert(name).second) throw DataError(where + ": duplicate potential '" + name + "'");
      rule.kind = RuleKind::kWeighted;
      rule.potential = name;
    } else if (kind == "hard") {
      if (!name.empty()) throw DataError(where + ": hard rules take no potential name");
      rule.kind = RuleKind::kHard;
    } else {
      throw DataError(where + ": unknown rule kind '" + kind + "'");
    }
    const std::size_t arrow = rule.text.find("=>");
    if (arrow == std::string::npos) throw DataError(where + ": missing '=>'");
    std::stringstream body(rule.text.substr(0, arrow));
    std::string atom;
    while (std::getline(body, atom, '&')) {
      if (trim_copy(atom).empty()) throw DataError(where + ": empty conjunct");
      rule.body.push_back(parse_atom(atom, where));
    }
    rule.head = parse_atom(rule.text.substr(arrow + 2), where);
    compile_rule(rule);
    set.rules.push_back(std::move(rule));
  }
  return set;
}

RuleSet load_rules(const std::filesystem::path& path) { return parse_rules(read_file(path)); }

bool AlignTable::aligned(std::string_view maslow, std::string_view reiss) const {
  auto it = reiss_to_maslow.find(std::string(reiss));
  return it != reiss_to_maslow.end() && it->second == maslow;
}

const AlignTable& builtin_alignment() {
  static const AlignTable table = [] {
    AlignTable t;
    const std::pair<const char*, std::vector<const char*>> rows[] = {
        {"physiological", {"food", "rest"}},
        {"stability", {"health", "order", "savings", "tranquility"}},
        {"love", {"belonging", "contact", "family", "romance"}},
        {"esteem", {"approval", "competition", "honor", "power", "status"}},
        {"spiritual growth", {"curiosity", "idealism", "independence", "serenity"}},
    };
    for (const auto& [maslow, motives] : rows) {
      for (const char* r : motives) t.reiss_to_maslow[r] = maslow;
    }
    return t;
  }();
  return table;
}

const PolarityGroups& builtin_polarity() {
  static const PolarityGroups groups{{"anticipation", "joy", "surprise", "trust"},
                                     {"anger", "disgust", "fear", "sadness"}};
  return groups;
}

KnowledgeBase builtin_knowledge() { return {builtin_alignment(), builtin_polarity()}; }

AlignTable load_alignment(const std::filesystem::path& path) {
  AlignTable t;
  const std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string line = trim(lines[i].substr(0, lines[i].find('#')));
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(where + ": expected 'maslow<TAB>reiss'");
    const std::string maslow = trim(line.substr(0, tab)), reiss = trim(line.substr(tab + 1));
    if (label_index(Task::kMaslow, maslow) < 0) throw DataError(where + ": unknown Maslow label '" + maslow + "'");
    if (label_index(Task::kReiss, reiss) < 0) throw DataError(where + ": unknown Reiss label '" + reiss + "'");
    if (!t.reiss_to_maslow.emplace(reiss, maslow).second) {
      throw DataError(where + ": Reiss label '" + reiss + "' aligned twice");
    }
  }
  for (const std::string& r : label_vocabulary(Task::kReiss)) {
    if (!t.reiss_to_maslow.count(r)) throw DataError(path.string() + ": Reiss label '" + r + "' has no alignment");
  }
  return t;
}

PolarityGroups load_polarity(const std::filesystem::path& path) {
  PolarityGroups g;
  const std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string line = trim(lines[i].substr(0, lines[i].find('#')));
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(where + ": expected 'label<TAB>positive|negative'");
    const std::string label = trim(line.substr(0, tab)), group = trim(line.substr(tab + 1));
    if (label_index(Task::kPlutchik, label) < 0) throw DataError(where + ": unknown Plutchik label '" + label + "'");
    if (g.positive.count(label) || g.negative.count(label)) throw DataError(where + ": '" + label + "' listed twice");
    if (group == "positive") {
      g.positive.insert(label);
    } else if (group == "negative") {
      g.negative.insert(label);
    } else {
      throw DataError(where + ": group must be positive or negative");
    }
  }
  return g;
}

StoryContext story_context(const NarrativeGraph& graph) {
  StoryContext s;
  s.doc_id = graph.doc_id;
  for (const EngNode& n : graph.nodes) s.mentions.push_back({n.id, n.entity, n.sentence});
  for (const TypedEdge& e : graph.edges) {
    if (e.relation != Relation::kCNext) continue;
    const EngNode& a = graph.nodes[static_cast<std::size_t>(e.source)];
    const EngNode& b = graph.nodes[static_cast<std::size_t>(e.target)];
    if (a.entity == b.entity && b.sentence == a.sentence + 1) s.has_next.insert({e.source, e.target});
  }
  return s;
}

bool clause_satisfied(const GroundClause& clause, std::span<const std::uint8_t> assignment) {
  for (const Literal& l : clause.literals) {
    if ((assignment[static_cast<std::size_t>(l.var)] != 0) == l.positive) return true;
  }
  return false;
}

int GroundProgram::variable(Task task, int mention, int label) const {
  auto it = index.find({task, mention, label});
  return it == index.end() ? -1 : it->second;
}

double GroundProgram::objective(std::span<const std::uint8_t> assignment) const {
  double total = 0.0;
  for (const GroundClause& c : weighted) {
    if (clause_satisfied(c, assignment)) total += c.weight;
  }
  return total;
}

std::size_t GroundProgram::violations(std::span<const std::uint8_t> assignment) const {
  std::size_t n = 0;
  for (const GroundClause& c : hard) n += clause_satisfied(c, assignment) ? 0 : 1;
  return n;
}

GroundProgram ground_rules(const RuleSet& rules, const StoryContext& story, const KnowledgeBase& kb,
                           bool hard_rules) {
  GroundProgram p;
  const std::size_t mentions = story.mentions.size();
  for (Task task : rules.tasks()) {
    const std::size_t labels = label_vocabulary(task).size();
    for (std::size_t m = 0; m < mentions; ++m) {
      for (std::size_t l = 0; l < labels; ++l) {
        p.index[{task, static_cast<int>(m), static_cast<int>(l)}] = static_cast<int>(p.keys.size());
        p.keys.push_back({task, static_cast<int>(m), static_cast<int>(l)});
      }
    }
  }
  p.num_variables = p.keys.size();
  for (std::size_t ri = 0; ri < rules.rules.size(); ++ri) {
    const Rule& rule = rules.rules[ri];
    if (rule.kind == RuleKind::kHard && !hard_rules) continue;
    const CompiledRule c = compile_rule(rule);
    enumerate_bindings(c, c.domains.size(), mentions, story, kb, [&](const std::vector<int>& b) {
      GroundClause cl;
      cl.rule = static_cast<int>(ri);
      bool tautology = false;
      for (std::size_t ai = 0; ai < c.predicted.size(); ++ai) {
        const CompiledAtom& a = c.predicted[ai];
        const int var = p.variable(static_cast<Task>(a.task), arg_value(a.args[0], b), arg_value(a.args[1], b));
        const bool positive = ai == c.head ? !a.negated : a.negated;
        const Literal lit{var, positive};
        const Literal opposite{var, !positive};
        if (std::find(cl.literals.begin(), cl.literals.end(), opposite) != cl.literals.end()) tautology = true;
        if (std::find(cl.literals.begin(), cl.literals.end(), lit) == cl.literals.end()) cl.literals.push_back(lit);
      }
      if (tautology) return;
      if (rule.kind == RuleKind::kHard) {
        p.hard.push_back(std::move(cl));
        return;
      }
      for (int pos : c.mention_vars) cl.mentions.push_back(b[static_cast<std::size_t>(pos)]);
      for (int pos : c.label_vars) cl.labels.push_back(b[static_cast<std::size_t>(pos)]);
      p.weighted.push_back(std::move(cl));
    });
  }
  return p;
}

std::vector<PotentialSpec> potential_specs(const RuleSet& rules) {
  std::vector<PotentialSpec> out;
  for (const Rule& r : rules.rules) {
    if (r.kind != RuleKind::kWeighted) continue;
    const CompiledRule c = compile_rule(r);
    PotentialSpec s;
    s.name = r.potential;
    s.mention_arity = c.mention_vars.size();
    s.outputs = 1;
    for (int p : c.label_vars) {
      s.label_domains.push_back(static_cast<Task>(c.domains[static_cast<std::size_t>(p)]));
      s.outputs *= domain_size(c.domains[static_cast<std::size_t>(p)]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string potential_prefix(const std::string& name) { return "potential/" + name; }

void init_potentials(ad::ParameterStore& store, std::span<const PotentialSpec> specs, std::size_t dim,
                     std::size_t hidden, Rng& rng) {
  for (const PotentialSpec& s : specs) {
    if (s.mention_arity == 0) throw DataError("potential '" + s.name + "' has no mention inputs");
    init_feed_forward(store, potential_prefix(s.name), s.mention_arity * dim, hidden, s.outputs, rng);
  }
}

void score_rules(GroundProgram& program, const RuleSet& rules, const ad::ParameterStore& potentials,
                 const ad::Tensor& embeddings, const std::set<std::string>& disabled) {
  std::map<std::pair<int, std::vector<int>>, ad::Tensor> cache;
  const std::size_t d = embeddings.cols();
  for (GroundClause& cl : program.weighted) {
    const Rule& rule = rules.rules.at(static_cast<std::size_t>(cl.rule));
    if (disabled.count(rule.potential)) {
      cl.weight = 0.0;
      continue;
    }
    auto key = std::make_pair(cl.rule, cl.mentions);
    auto it = cache.find(key);
    if (it == cache.end()) {
      ad::Tensor x(1, cl.mentions.size() * d);
      for (std::size_t k = 0; k < cl.mentions.size(); ++k) {
        const auto m = static_cast<std::size_t>(cl.mentions[k]);
        if (m >= embeddings.rows()) throw DataError("score_rules: no embedding for mention " + std::to_string(m));
        for (std::size_t j = 0; j < d; ++j) x(0, k * d + j) = embeddings(m, j);
      }
      ad::Tape tape;
      ad::Tensor logits = feed_forward(tape, potentials, potential_prefix(rule.potential), tape.constant(x)).value();
      it = cache.emplace(key, std::move(logits)).first;
    }
    std::size_t idx = 0;
    const CompiledRule c = compile_rule(rule);
    std::vector<int> binding(c.domains.size(), 0);
    for (std::size_t k = 0; k < c.label_vars.size(); ++k) {
      binding[static_cast<std::size_t>(c.label_vars[k])] = cl.labels[k];
    }
    idx = label_tuple_index(c, binding);
    cl.weight = it->second(0, idx);
  }
}

std::string_view solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::kAuto:
      return "auto";
    case SolverKind::kBranchAndBound:
      return "branch_and_bound";
    case SolverKind::kExhaustive:
      return "exhaustive";
  }
  return "auto";
}

SolverKind parse_solver(std::string_view name) {
  if (name == "auto") return SolverKind::kAuto;
  if (name == "branch_and_bound" || name == "bnb") return SolverKind::kBranchAndBound;
  if (name == "exhaustive") return SolverKind::kExhaustive;
  throw UsageError("unknown solver '" + std::string(name) + "' (expected auto|branch_and_bound|exhaustive)");
}

MapResult map_inference(const GroundProgram& program, SolverKind solver, std::size_t node_budget) {
  MapResult r;
  r.assignment.assign(program.num_variables, 0);
  for (const Component& c : split_components(program)) {
    const bool exhaustive = solver == SolverKind::kExhaustive ||
                            (solver == SolverKind::kAuto && c.vars.size() < kExhaustiveLimit);
    std::vector<int> local;
    if (exhaustive) {
      local = solve_exhaustive(c, &r.explored);
    } else {
      BranchAndBound bnb(c, node_budget);
      local = bnb.solve(&r.explored);
      if (bnb.exhausted()) ++r.unproven;
    }
    for (std::size_t k = 0; k < c.vars.size(); ++k) {
      r.assignment[static_cast<std::size_t>(c.vars[k])] = static_cast<std::uint8_t>(local[k]);
    }
  }
  r.objective = program.objective(r.assignment);
  return r;
}

PotentialTrainReport train_potentials(ad::ParameterStore& potentials, const RuleSet& rules,
                                      std::span<const StoryData> train, std::span<const StoryData> dev,
                                      const PotentialTrainConfig& config) {
  if (config.batch == 0 || config.patience == 0) throw UsageError("potential batch and patience must be positive");
  PotentialTrainReport report;
  Rng rng(config.seed);
  const KnowledgeBase kb = builtin_knowledge();
  for (const Rule& rule : rules.rules) {
    if (rule.kind != RuleKind::kWeighted) continue;
    const CompiledRule c = compile_rule(rule);
    const std::vector<std::vector<int>> tuples = label_tuples(c);
    auto collect = [&](std::span<const StoryData> stories, ad::Tensor* xs, ad::Tensor* ys) {
      std::vector<std::vector<double>> xrows, yrows;
      for (const StoryData& s : stories) {
        if (!s.doc) continue;
        enumerate_bindings(c, c.mention_vars.size(), s.context.mentions.size(), s.context, kb,
                           [&](const std::vector<int>& b) {
          std::vector<double> x;
          for (int p : c.mention_vars) {
            const auto row = s.embeddings.row(static_cast<std::size_t>(b[static_cast<std::size_t>(p)]));
            x.insert(x.end(), row.begin(), row.end());
          }
          std::vector<double> y(tuples.size(), 0.0);
          std::vector<int> full = b;
          for (std::size_t t = 0; t < tuples.size(); ++t) {
            for (std::size_t k = 0; k < c.label_vars.size(); ++k) {
              full[static_cast<std::size_t>(c.label_vars[k])] = tuples[t][k];
            }
            bool satisfied = false;
            for (std::size_t ai = 0; ai < c.predicted.size(); ++ai) {
              const CompiledAtom& a = c.predicted[ai];
              const StoryMention& m = s.context.mentions[static_cast<std::size_t>(arg_value(a.args[0], full))];
              const auto gold = gold_vector(*s.doc, static_cast<Task>(a.task), m.entity, m.sentence);
              if (!gold) return;  // unlabeled mention: no training row
              const bool atom = ((*gold)[static_cast<std::size_t>(arg_value(a.args[1], full))] != 0) != a.negated;
              satisfied = satisfied || (ai == c.head ? atom : !atom);
            }
            y[t] = satisfied ? 1.0 : 0.0;
          }
          xrows.push_back(std::move(x));
          yrows.push_back(std::move(y));
        });
      }
      const std::size_t in = xrows.empty() ? 0 : xrows.front().size();
      *xs = ad::Tensor(xrows.size(), in);
      *ys = ad::Tensor(yrows.size(), tuples.size());
      for (std::size_t i = 0; i < xrows.size(); ++i) {
        std::copy(xrows[i].begin(), xrows[i].end(), xs->row(i).begin());
        std::copy(yrows[i].begin(), yrows[i].end(), ys->row(i).begin());
      }
    };
    ad::Tensor xtr, ytr, xdev, ydev;
    collect(train, &xtr, &ytr);
    collect(dev, &xdev, &ydev);
    report.rows[rule.potential] = xtr.rows();
    if (xtr.rows() == 0) {
      report.disabled.insert(rule.potential);
      report.warnings.push_back("potential '" + rule.potential + "' has no training rows; its rules are disabled");
      continue;
    }
    const std::string prefix = potential_prefix(rule.potential);
    auto loss_on = [&](const ad::Tensor& x, const ad::Tensor& y) {
      ad::Tape tape;
      return node_loss_multilabel(feed_forward(tape, potentials, prefix, tape.constant(x)), y).value().item();
    };
    auto rows_of = [](const ad::Tensor& t, std::span<const std::size_t> idx) {
      ad::Tensor out(idx.size(), t.cols());
      for (std::size_t i = 0; i < idx.size(); ++i) std::copy(t.row(idx[i]).begin(), t.row(idx[i]).end(), out.row(i).begin());
      return out;
    };
    const bool use_dev = xdev.rows() > 0;
    std::vector<std::string> names = potentials.names_with_prefix(prefix + "/");
    std::map<std::string, ad::Tensor> best;
    for (const std::string& n : names) best[n] = potentials.value(n);
    double best_loss = loss_on(use_dev ? xdev : xtr, use_dev ? ydev : ytr);
    std::size_t stale = 0, epoch = 0;
    std::vector<std::size_t> order(xtr.rows());
    for (epoch = 1; epoch <= config.max_epochs; ++epoch) {
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order);
      for (std::size_t start = 0; start < order.size(); start += config.batch) {
        const std::size_t end = std::min(order.size(), start + config.batch);
        const std::span<const std::size_t> idx(order.data() + start, end - start);
        ad::Tape tape;
        ad::Var loss = node_loss_multilabel(feed_forward(tape, potentials, prefix, tape.constant(rows_of(xtr, idx))),
                                            rows_of(ytr, idx));
        ad::sgd_update(potentials, tape.backward(loss), config.lr);
      }
      const double l = loss_on(use_dev ? xdev : xtr, use_dev ? ydev : ytr);
      if (!std::isfinite(l)) throw NumericError("potential '" + rule.potential + "' diverged");
      if (l < best_loss) {
        best_loss = l;
        stale = 0;
        for (const std::string& n : names) best[n] = potentials.value(n);
      } else if (++stale >= config.patience) {
        break;
      }
    }
    for (const std::string& n : names) potentials.mutable_value(n) = best[n];
    report.epochs[rule.potential] = std::min(epoch, config.max_epochs);
    report.train_loss[rule.potential] = loss_on(xtr, ytr);
    if (use_dev) report.dev_loss[rule.potential] = loss_on(xdev, ydev);
  }
  return report;
}

std::map<Task, std::vector<std::vector<int>>> decode_assignment(const GroundProgram& program,
                                                                std::span<const std::uint8_t> assignment,
                                                                std::size_t mentions) {
  std::map<Task, std::vector<std::vector<int>>> out;
  for (std::size_t v = 0; v < program.keys.size(); ++v) {
    const VariableKey& k = program.keys[v];
    auto& per_mention = out[k.task];
    if (per_mention.size() < mentions) per_mention.resize(mentions);
    if (assignment[v]) per_mention[static_cast<std::size_t>(k.mention)].push_back(k.label);
  }
  return out;
}

ViolationCount count_violations(const std::map<Task, std::vector<std::vector<int>>>& labels,
                                const KnowledgeBase& kb) {
  ViolationCount v;
  auto get = [&labels](Task t) -> const std::vector<std::vector<int>>* {
    auto it = labels.find(t);
    return it == labels.end() ? nullptr : &it->second;
  };
  const auto* maslow = get(Task::kMaslow);
  const auto* reiss = get(Task::kReiss);
  if (maslow && reiss) {
    for (std::size_t m = 0; m < std::min(maslow->size(), reiss->size()); ++m) {
      for (int a : (*maslow)[m]) {
        for (int b : (*reiss)[m]) {
          if (!kb.align.aligned(label_vocabulary(Task::kMaslow)[static_cast<std::size_t>(a)],
                                label_vocabulary(Task::kReiss)[static_cast<std::size_t>(b)])) {
            ++v.alignment;
          }
        }
      }
    }
  }
  if (const auto* plut = get(Task::kPlutchik)) {
    for (const auto& active : *plut) {
      for (int a : active) {
        for (int b : active) {
          const auto& la = label_vocabulary(Task::kPlutchik)[static_cast<std::size_t>(a)];
          const auto& lb = label_vocabulary(Task::kPlutchik)[static_cast<std::size_t>(b)];
          if (kb.polarity.positive.count(la) && kb.polarity.negative.count(lb)) ++v.polarity;
        }
      }
    }
  }
  return v;
}

}  // namespace eng
