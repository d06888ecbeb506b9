// Copyright 2026 the udatalog authors
// SPDX-License-Identifier: Apache-2.0
//
// Static analysis over loaded programs: the predicate dependency graph, the
// canonical stratification, and goal admissibility (safety through query
// invocation).
//
// Stratification layers the rules so that every negative dependency points
// strictly downward while rules of one predicate stay together. The
// canonical choice here assigns every predicate the minimal legal level:
// extensional predicates sit at level 1 and an intensional predicate sits at
// the maximum over its dependencies of (their level, +1 for a negative
// edge). Quantified-tail literals count as negative dependencies because a
// tail is evaluated against completed lower strata. A program is
// stratifiable exactly when no dependency cycle carries a negative edge.
//
// Admissibility: every variable appearing in a rule head, in an update atom,
// in a negated body atom or free in a quantified tail must be bound, where
// bound means equal to a constant through the rule constraint, occurring in
// a positive body literal, or sitting at a head position that the goal ties
// to a constant. Only rules reachable from the goal make a goal
// inadmissible; unsafe unreachable rules are reported as warnings.

#pragma once

#include <stdexcept>

#include "udatalog/ast.hpp"
#include "udatalog/constraints.hpp"

namespace udatalog {

struct NotStratifiableError : std::runtime_error {
  explicit NotStratifiableError(const std::string& witness)
      : std::runtime_error("program is not stratifiable: " + witness) {}
};

struct SafetyViolation;

// Thrown when a goal is rejected because a reachable rule (or the goal
// itself) leaves a head, update, negated or quantified variable unbound.
struct SafetyError : std::runtime_error {
  explicit SafetyError(std::vector<SafetyViolation> violations);
  std::vector<SafetyViolation> violations;
};

// Predicate dependency graph; edge head -> body predicate, where an edge is
// negative if any rule reaches the body predicate through a negated literal
// or a quantified tail.
struct DependencyGraph {
  std::set<std::string> nodes;
  // from -> to -> {has positive edge, has negative edge}
  std::map<std::string, std::map<std::string, std::pair<bool, bool>>> edges;
};

inline DependencyGraph build_dependency_graph(const Database& db) {
  DependencyGraph g;
  for (const auto& [pred, arity] : db.arity) {
    (void)arity;
    g.nodes.insert(pred);
  }
  auto add = [&](const std::string& from, const std::string& to, bool negative) {
    auto& e = g.edges[from][to];
    (negative ? e.second : e.first) = true;
  };
  for (const Rule& r : db.rules) {
    for (const Literal& l : r.body) add(r.head.pred, l.atom.pred, !l.positive);
    if (r.tail)
      for (const auto& d : r.tail->matrix)
        for (const Literal& l : d.lits) add(r.head.pred, l.atom.pred, true);
  }
  return g;
}

// Rule layering plus predicate levels (1-based). Stratum k holds the indices
// into db.rules whose head predicate has level k; extensional predicates
// have level 1 and are completed there.
struct Stratification {
  std::map<std::string, int> level;
  std::vector<std::vector<std::size_t>> strata;

  int stratum_count() const { return static_cast<int>(strata.size()); }
  std::set<std::string> predicates_at(int stratum) const {
    std::set<std::string> out;
    for (const auto& [pred, lvl] : level)
      if (lvl == stratum) out.insert(pred);
    return out;
  }
};

namespace detail {

// Iterative Tarjan strongly-connected components. Components are emitted
// with all successors already emitted, so levels can be computed in order.
inline std::vector<std::vector<std::string>> scc_order(const DependencyGraph& g) {
  std::map<std::string, int> index, low;
  std::map<std::string, bool> on_stack;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> sccs;
  int next = 0;

  struct Frame {
    std::string node;
    std::vector<std::string> succs;
    std::size_t pos = 0;
  };
  for (const std::string& root : g.nodes) {
    if (index.count(root)) continue;
    std::vector<Frame> call;
    auto push_node = [&](const std::string& n) {
      index[n] = low[n] = next++;
      stack.push_back(n);
      on_stack[n] = true;
      Frame f;
      f.node = n;
      if (auto it = g.edges.find(n); it != g.edges.end())
        for (const auto& [to, kinds] : it->second) {
          (void)kinds;
          f.succs.push_back(to);
        }
      call.push_back(std::move(f));
    };
    push_node(root);
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.pos < f.succs.size()) {
        const std::string& to = f.succs[f.pos++];
        if (!index.count(to)) {
          push_node(to);
        } else if (on_stack[to]) {
          low[f.node] = std::min(low[f.node], index[to]);
        }
      } else {
        if (low[f.node] == index[f.node]) {
          std::vector<std::string> comp;
          while (true) {
            std::string n = stack.back();
            stack.pop_back();
            on_stack[n] = false;
            comp.push_back(n);
            if (n == f.node) break;
          }
          std::sort(comp.begin(), comp.end());
          sccs.push_back(std::move(comp));
        }
        std::string done = f.node;
        call.pop_back();
        if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[done]);
      }
    }
  }
  return sccs;
}

}  // namespace detail

inline Stratification stratify(const Database& db) {
  DependencyGraph g = build_dependency_graph(db);
  std::vector<std::vector<std::string>> sccs = detail::scc_order(g);
  std::map<std::string, std::size_t> comp_of;
  for (std::size_t i = 0; i < sccs.size(); ++i)
    for (const std::string& n : sccs[i]) comp_of[n] = i;

  // A negative edge inside one component witnesses an unstratifiable cycle.
  for (const auto& [from, outs] : g.edges)
    for (const auto& [to, kinds] : outs)
      if (kinds.second && comp_of.at(from) == comp_of.at(to)) {
        std::string cycle = from == to
                                ? "predicate '" + from + "' depends negatively on itself"
                                : "predicates '" + from + "' and '" + to +
                                      "' are mutually recursive through negation";
        throw NotStratifiableError(cycle + " (negative edge " + from + " -> " + to + ")");
      }

  Stratification s;
  std::map<std::size_t, int> comp_level;
  for (std::size_t i = 0; i < sccs.size(); ++i) {
    int lvl = 1;
    for (const std::string& n : sccs[i]) {
      auto it = g.edges.find(n);
      if (it == g.edges.end()) continue;
      for (const auto& [to, kinds] : it->second) {
        std::size_t tc = comp_of.at(to);
        if (tc == i) continue;  // intra-component edges are positive here
        int need = comp_level.at(tc) + (kinds.second ? 1 : 0);
        lvl = std::max(lvl, need);
      }
    }
    comp_level[i] = lvl;
    for (const std::string& n : sccs[i]) s.level[n] = lvl;
  }
  int max_level = 1;
  for (const auto& [pred, lvl] : s.level) max_level = std::max(max_level, lvl);
  s.strata.assign(static_cast<std::size_t>(max_level), {});
  for (std::size_t i = 0; i < db.rules.size(); ++i) {
    int lvl = s.level.at(db.rules[i].head.pred);
    s.strata[static_cast<std::size_t>(lvl - 1)].push_back(i);
  }
  return s;
}

// Checks the four layering conditions for any candidate stratification:
// levels cover every predicate, all rules of a predicate share its level,
// positive dependencies never point upward, negative dependencies point
// strictly downward. Used by tests that evaluate under alternative layers.
inline bool verify_stratification(const Database& db, const Stratification& s) {
  if (s.strata.empty()) return db.rules.empty();
  std::set<std::size_t> seen;
  for (std::size_t k = 0; k < s.strata.size(); ++k)
    for (std::size_t idx : s.strata[k]) {
      if (idx >= db.rules.size() || !seen.insert(idx).second) return false;
      auto it = s.level.find(db.rules[idx].head.pred);
      if (it == s.level.end() || it->second != static_cast<int>(k) + 1) return false;
    }
  if (seen.size() != db.rules.size()) return false;
  for (const std::string& pred : db.extensional) {
    auto it = s.level.find(pred);
    if (it != s.level.end() && it->second != 1) return false;
  }
  auto level_of = [&](const std::string& pred) {
    auto it = s.level.find(pred);
    return it == s.level.end() ? 1 : it->second;
  };
  for (const Rule& r : db.rules) {
    int hl = level_of(r.head.pred);
    if (hl < 1 || hl > static_cast<int>(s.strata.size())) return false;
    for (const Literal& l : r.body) {
      int bl = level_of(l.atom.pred);
      if (l.positive ? bl > hl : bl >= hl) return false;
    }
    if (r.tail)
      for (const auto& d : r.tail->matrix)
        for (const Literal& l : d.lits)
          if (level_of(l.atom.pred) >= hl) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Admissibility.

struct SafetyViolation {
  bool reachable = true;
  int rule_index = -1;  // -1 names the goal itself
  std::string variable;
  std::string context;  // "rule head", "update atom", "negated atom", "quantified tail"

  std::string render() const {
    std::string where = rule_index < 0 ? "goal" : "rule#" + std::to_string(rule_index + 1);
    std::string note = reachable ? "" : " (unreachable from the goal; warning only)";
    return "SAFETY " + where + " variable " + variable + ": only occurs in " + context + note;
  }
};

struct AdmissibilityReport {
  std::vector<SafetyViolation> violations;

  bool ok() const {
    for (const auto& v : violations)
      if (v.reachable) return false;
    return true;
  }
};

inline SafetyError::SafetyError(std::vector<SafetyViolation> vs)
    : std::runtime_error([&vs] {
        std::string msg = "goal rejected";
        for (const SafetyViolation& v : vs)
          if (v.reachable) msg += "\n  " + v.render();
        return msg;
      }()),
      violations(std::move(vs)) {}

namespace detail {

// Variables of `check` that are not bound: bound variables are those equal
// to a constant under `cstr`, in the same equality class as a seed variable,
// or seeds themselves.
inline std::set<std::string> unbound_vars(const Constraint& cstr,
                                          const std::set<std::string>& seeds,
                                          const std::set<std::string>& check) {
  auto anchored = [&](const std::string& v) {
    Term rep = cstr.resolve(Term::var(v));
    if (rep.is_const()) return true;
    if (seeds.count(v) || seeds.count(rep.name())) return true;
    // Any seed in the same class: classes are identified by representative.
    for (const std::string& s : seeds)
      if (cstr.resolve(Term::var(s)) == rep) return true;
    return false;
  };
  std::set<std::string> out;
  for (const std::string& v : check)
    if (!anchored(v)) out.insert(v);
  return out;
}

inline std::set<std::string> atom_vars(const Atom& a) {
  std::set<std::string> vs;
  for (const Term& t : a.args)
    if (t.is_var()) vs.insert(t.name());
  return vs;
}

// Violations are reported under the equality class representative, which for
// loaded programs is the source-level variable name rather than the fresh
// position variable the normalizer introduced.
inline std::set<std::string> violation_names(const Constraint& cstr,
                                             const std::set<std::string>& seeds,
                                             const std::set<std::string>& check) {
  std::set<std::string> names;
  for (const std::string& v : unbound_vars(cstr, seeds, check)) {
    Term rep = cstr.resolve(Term::var(v));
    names.insert(rep.is_var() ? rep.name() : v);
  }
  return names;
}

inline void check_rule_safety(const Rule& r, int index, bool reachable,
                              const std::set<int>& goal_bound_positions,
                              std::vector<SafetyViolation>* out) {
  std::set<std::string> seeds;
  for (const Literal& l : r.body)
    if (l.positive)
      for (const Term& t : l.atom.args)
        if (t.is_var()) seeds.insert(t.name());
  for (int pos : goal_bound_positions) {
    const Term& t = r.head.args[static_cast<std::size_t>(pos)];
    if (t.is_var()) seeds.insert(t.name());
  }

  auto report = [&](const std::set<std::string>& vars, const char* context) {
    for (const std::string& v : violation_names(r.cstr, seeds, vars))
      out->push_back({reachable, index, v, context});
  };

  report(atom_vars(r.head), "rule head");
  std::set<std::string> update_vars;
  for (const UpdateAtom& u : r.updates)
    for (const std::string& v : atom_vars(u.atom)) update_vars.insert(v);
  report(update_vars, "update atom");
  std::set<std::string> neg_vars;
  for (const Literal& l : r.body)
    if (!l.positive)
      for (const std::string& v : atom_vars(l.atom)) neg_vars.insert(v);
  report(neg_vars, "negated atom");
  if (r.tail) report(tail_free_vars(*r.tail), "quantified tail");
}

}  // namespace detail

inline AdmissibilityReport check_admissible(const Database& db, const Goal& goal) {
  AdmissibilityReport rep;

  // Head positions the goal ties to a constant, per predicate: position i of
  // predicate p counts only if every goal literal on p has a constant there.
  std::map<std::string, std::set<int>> bound_positions;
  std::map<std::string, int> goal_uses;
  for (const Literal& l : goal.body) {
    if (!l.positive) continue;
    ++goal_uses[l.atom.pred];
    std::set<int> here;
    for (std::size_t i = 0; i < l.atom.args.size(); ++i)
      if (goal.cstr.resolve(l.atom.args[i]).is_const()) here.insert(static_cast<int>(i));
    if (goal_uses[l.atom.pred] == 1) {
      bound_positions[l.atom.pred] = here;
    } else {
      std::set<int> merged;
      for (int p : bound_positions[l.atom.pred])
        if (here.count(p)) merged.insert(p);
      bound_positions[l.atom.pred] = merged;
    }
  }

  // Reachability over the dependency graph from the goal's predicates.
  DependencyGraph g = build_dependency_graph(db);
  std::set<std::string> reached;
  std::vector<std::string> work;
  auto visit = [&](const std::string& p) {
    if (reached.insert(p).second) work.push_back(p);
  };
  for (const Literal& l : goal.body) visit(l.atom.pred);
  for (const UpdateAtom& u : goal.updates) visit(u.atom.pred);
  while (!work.empty()) {
    std::string p = work.back();
    work.pop_back();
    if (auto it = g.edges.find(p); it != g.edges.end())
      for (const auto& [to, kinds] : it->second) {
        (void)kinds;
        visit(to);
      }
  }

  for (std::size_t i = 0; i < db.rules.size(); ++i) {
    const Rule& r = db.rules[i];
    bool reachable = reached.count(r.head.pred) > 0;
    std::set<int> positions;
    if (auto it = bound_positions.find(r.head.pred); it != bound_positions.end())
      positions = it->second;
    detail::check_rule_safety(r, static_cast<int>(i), reachable, positions, &rep.violations);
  }

  // The goal body is checked like a rule body with no head.
  std::set<std::string> seeds;
  for (const Literal& l : goal.body)
    if (l.positive)
      for (const Term& t : l.atom.args)
        if (t.is_var()) seeds.insert(t.name());
  std::set<std::string> goal_update_vars, goal_neg_vars;
  for (const UpdateAtom& u : goal.updates)
    for (const std::string& v : detail::atom_vars(u.atom)) goal_update_vars.insert(v);
  for (const Literal& l : goal.body)
    if (!l.positive)
      for (const std::string& v : detail::atom_vars(l.atom)) goal_neg_vars.insert(v);
  for (const std::string& v : detail::violation_names(goal.cstr, seeds, goal_update_vars))
    rep.violations.push_back({true, -1, v, "update atom"});
  for (const std::string& v : detail::violation_names(goal.cstr, seeds, goal_neg_vars))
    rep.violations.push_back({true, -1, v, "negated atom"});

  return rep;
}

}  // namespace udatalog
