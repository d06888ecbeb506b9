// Copyright 2026 the udatalog authors
// SPDX-License-Identifier: Apache-2.0
//
// Bottom-up evaluation. The evaluator works on interpretations: sets of
// constrained literals `L <- c, u` stored in a canonical form (head
// arguments _1.._k, update-only variables _u1.., constraint projected onto
// head and update variables). Alongside each stored literal we keep its
// ground instances over the declared universe: the pairs (argument tuple,
// consistent ground update set) it denotes. Instances drive redundancy
// pruning (a literal covered by a stored one is never added), fixpoint
// detection, and ground truth queries during quantified-tail evaluation.
//
// The derivation operator conjoins, for one rule and one matching stored
// literal per body literal (everything renamed apart), the rule constraint,
// the matched constraints, and the argument equalities, unions the update
// atoms, and keeps the head when constraint plus updates admit a consistent
// ground solution. Negative body literals match stored negative literals,
// which earlier strata produced as complements.
//
// Complements: after a stratum's fixpoint, each predicate completed there
// gets negative literals covering exactly the tuples with no consistent
// derivation. For a stored literal with updates, the derivable region is
// the projection of its constraint conjoined with each minimal
// update-consistency constraint; the complement is the conjunction of the
// negations of those regions across all stored literals, distributed into
// disjuncts and pruned.

#pragma once

#include <algorithm>
#include <functional>

#include "udatalog/analysis.hpp"
#include "udatalog/ast.hpp"
#include "udatalog/constraints.hpp"

namespace udatalog {

// One ground reading of a stored literal: argument constants plus the
// consistent ground update set this derivation would mark.
struct Instance {
  std::vector<std::string> args;
  std::vector<UpdateAtom> updates;  // ground, sorted, deduplicated

  auto operator<=>(const Instance&) const = default;
};

// Canonical member of an interpretation.
struct StoredLiteral {
  Literal lit;                      // arguments are the variables _1.._k
  Constraint cstr;                  // over head and update variables only
  std::vector<UpdateAtom> updates;  // sorted; always empty when !lit.positive
  std::set<Instance> instances;     // nonempty for every stored member
};

using GroundView = std::map<std::pair<std::string, bool>, std::set<Instance>>;

namespace detail {

inline void for_each_assignment(const std::vector<std::string>& vars, const Universe& u,
                                const std::function<void(const Assignment&)>& fn) {
  any_assignment(vars, u, [&](const Assignment& a) {
    fn(a);
    return false;
  });
}

inline std::vector<std::string> canonical_head_names(int arity) {
  std::vector<std::string> names;
  for (int i = 1; i <= arity; ++i) names.push_back("_" + std::to_string(i));
  return names;
}

inline std::vector<UpdateAtom> sorted_updates(std::vector<UpdateAtom> us) {
  std::sort(us.begin(), us.end());
  us.erase(std::unique(us.begin(), us.end()), us.end());
  return us;
}

// Renames variables through a plain map, leaving unmapped names alone.
inline Term map_term(const Term& t, const std::map<std::string, std::string>& m) {
  if (!t.is_var()) return t;
  auto it = m.find(t.name());
  return it == m.end() ? t : Term::var(it->second);
}

inline Atom map_atom(const Atom& a, const std::map<std::string, std::string>& m) {
  Atom out{a.pred, {}};
  for (const Term& t : a.args) out.args.push_back(map_term(t, m));
  return out;
}

inline Constraint map_constraint(const Constraint& c, const std::map<std::string, std::string>& m) {
  Constraint out;
  out.unsat = c.unsat;
  for (const auto& [v, t] : c.eqs) {
    Term lhs = map_term(Term::var(v), m);
    out.eqs[lhs.name()] = map_term(t, m);
  }
  for (const auto& [a, b] : c.neqs) {
    Term x = map_term(a, m), y = map_term(b, m);
    orient_neq(&x, &y);
    out.neqs.insert({x, y});
  }
  return out;
}

// Ground instances of a canonical literal: assignments over its variables
// satisfying the constraint whose update atoms ground consistently.
inline std::set<Instance> enumerate_instances(const std::vector<std::string>& head_names,
                                              const Constraint& cstr,
                                              const std::vector<UpdateAtom>& updates,
                                              const Universe& universe) {
  std::set<std::string> vs(head_names.begin(), head_names.end());
  collect_vars(cstr, &vs);
  for (const auto& u : updates) collect_vars(u, &vs);
  std::set<Instance> out;
  for_each_assignment(sorted_vars(vs), universe, [&](const Assignment& asg) {
    if (!satisfies(asg, cstr) || !consistent_ground(updates, asg)) return;
    Instance inst;
    for (const std::string& h : head_names) inst.args.push_back(asg.at(h));
    std::set<UpdateAtom> ground;
    for (const auto& u : updates) {
      Atom g{u.atom.pred, {}};
      for (const Term& t : u.atom.args) g.args.push_back(Term::constant(value_of(t, asg)));
      ground.insert(UpdateAtom{u.op, std::move(g)});
    }
    inst.updates.assign(ground.begin(), ground.end());
    out.insert(std::move(inst));
  });
  return out;
}

// Rewrites a constrained literal into canonical stored members. Projection
// onto head plus update variables can split into several disjuncts, so one
// input may yield several members; inputs with no consistent ground
// instance yield none.
inline std::vector<StoredLiteral> canonical_members(const ConstrainedLiteral& cl,
                                                    const Universe& universe) {
  int k = static_cast<int>(cl.lit.atom.args.size());
  // Tie each head position to a temporary variable; the _h prefix cannot
  // occur in parser or evaluator output, so no capture is possible.
  std::vector<ConstraintAtom> eqs;
  std::vector<std::string> temps;
  for (int i = 0; i < k; ++i) {
    temps.push_back("_h" + std::to_string(i + 1));
    eqs.push_back({Term::var(temps.back()), cl.lit.atom.args[static_cast<std::size_t>(i)], true});
  }
  Constraint base = conjoin(cl.cstr, conjoin_atoms(eqs, universe), universe);
  if (base.is_false()) return {};
  std::vector<UpdateAtom> upds = apply_bindings(cl.updates, base);

  std::set<std::string> keep(temps.begin(), temps.end());
  for (const auto& u : upds) collect_vars(u, &keep);
  DisjunctiveConstraint proj = project(base, keep, universe);

  std::vector<StoredLiteral> out;
  for (const Constraint& d0 : proj.disjuncts) {
    // A disjunct can pin further update variables; rebind and re-project
    // until the constraint mentions only head and update variables.
    Constraint d = d0;
    std::vector<UpdateAtom> us = upds;
    for (;;) {
      std::vector<UpdateAtom> rebound = apply_bindings(us, normalize(d, universe));
      std::set<std::string> keep2(temps.begin(), temps.end());
      for (const auto& u : rebound) collect_vars(u, &keep2);
      std::set<std::string> mentioned = vars_of(d);
      bool clean = std::all_of(mentioned.begin(), mentioned.end(),
                               [&](const std::string& v) { return keep2.count(v) > 0; });
      us = std::move(rebound);
      if (clean) break;
      DisjunctiveConstraint again = project(d, keep2, universe);
      if (again.disjuncts.size() != 1) {
        // Re-projection split; recurse through the front door per disjunct.
        for (const Constraint& dd : again.disjuncts) {
          ConstrainedLiteral sub{cl.lit, Constraint(), us};
          sub.cstr = dd;
          // Head positions are the temporaries now; build a literal over them.
          Atom h{cl.lit.atom.pred, {}};
          for (const std::string& t : temps) h.args.push_back(Term::var(t));
          sub.lit = Literal{cl.lit.positive, h};
          for (StoredLiteral& m : canonical_members(sub, universe)) out.push_back(std::move(m));
        }
        us.clear();
        d = Constraint::falsity();
        break;
      }
      d = again.disjuncts[0];
    }
    if (d.is_false()) continue;

    // Rename temporaries to _1.._k and update-only variables to _u1.. in
    // first-occurrence order over the sorted update vector.
    us = sorted_updates(std::move(us));
    std::map<std::string, std::string> rn;
    std::vector<std::string> head_names = canonical_head_names(k);
    for (int i = 0; i < k; ++i) rn[temps[static_cast<std::size_t>(i)]] = head_names[static_cast<std::size_t>(i)];
    int next_u = 1;
    for (const auto& u : us)
      for (const Term& t : u.atom.args)
        if (t.is_var() && !rn.count(t.name())) rn[t.name()] = "_u" + std::to_string(next_u++);

    StoredLiteral m;
    Atom head{cl.lit.atom.pred, {}};
    for (const std::string& h : head_names) head.args.push_back(Term::var(h));
    m.lit = Literal{cl.lit.positive, std::move(head)};
    m.cstr = normalize(map_constraint(d, rn), universe);
    std::vector<UpdateAtom> renamed;
    for (const auto& u : us) renamed.push_back(UpdateAtom{u.op, map_atom(u.atom, rn)});
    m.updates = sorted_updates(std::move(renamed));
    m.instances = enumerate_instances(head_names, m.cstr, m.updates, universe);
    if (!m.instances.empty()) out.push_back(std::move(m));
  }
  return out;
}

}  // namespace detail

// An interpretation: canonical constrained literals indexed by predicate and
// polarity, pruned so no member's instances are contained in another's.
class Interpretation {
 public:
  explicit Interpretation(Universe universe) : universe_(std::move(universe)) {}

  const Universe& universe() const { return universe_; }

  // Adds a constrained literal; returns true when the stored set changed.
  bool insert(const ConstrainedLiteral& cl) {
    bool changed = false;
    for (StoredLiteral& m : detail::canonical_members(cl, universe_))
      changed = merge(std::move(m)) || changed;
    return changed;
  }

  // Adds an already-canonical member; prunes in both directions.
  bool merge(StoredLiteral m) {
    if (m.instances.empty()) return false;
    auto& vec = by_key_[{m.lit.atom.pred, m.lit.positive}];
    for (const StoredLiteral& e : vec)
      if (std::includes(e.instances.begin(), e.instances.end(), m.instances.begin(),
                        m.instances.end()))
        return false;
    std::erase_if(vec, [&](const StoredLiteral& e) {
      return std::includes(m.instances.begin(), m.instances.end(), e.instances.begin(),
                           e.instances.end());
    });
    vec.push_back(std::move(m));
    return true;
  }

  const std::vector<StoredLiteral>& members(const std::string& pred, bool positive) const {
    static const std::vector<StoredLiteral> kEmpty;
    auto it = by_key_.find({pred, positive});
    return it == by_key_.end() ? kEmpty : it->second;
  }

  // Deterministic iteration over every member.
  std::vector<const StoredLiteral*> all() const {
    std::vector<const StoredLiteral*> out;
    for (const auto& [key, vec] : by_key_)
      for (const StoredLiteral& m : vec) out.push_back(&m);
    return out;
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [key, vec] : by_key_) n += vec.size();
    return n;
  }

  // True when some member of the given polarity admits these ground
  // arguments with a consistent update set.
  bool holds(const std::string& pred, bool positive, const std::vector<std::string>& args) const {
    for (const StoredLiteral& m : members(pred, positive))
      for (const Instance& inst : m.instances)
        if (inst.args == args) return true;
    return false;
  }

  // Merged ground instances per predicate and polarity; the semantic content
  // used by equivalence comparisons.
  GroundView ground_view() const {
    GroundView out;
    for (const auto& [key, vec] : by_key_) {
      auto& dst = out[key];
      for (const StoredLiteral& m : vec) dst.insert(m.instances.begin(), m.instances.end());
    }
    return out;
  }

 private:
  Universe universe_;
  std::map<std::pair<std::string, bool>, std::vector<StoredLiteral>> by_key_;
};

namespace detail {

// Truth of a quantified tail under a total assignment of its free
// variables, with quantified variables ranging over the universe.
inline bool tail_true(const Interpretation& I, const Tail& tail, Assignment asg,
                      std::size_t depth = 0) {
  const Universe& u = I.universe();
  if (depth < tail.prefix.size()) {
    const Tail::Quant& q = tail.prefix[depth];
    for (const std::string& c : u) {
      asg[q.var] = c;
      bool sub = tail_true(I, tail, asg, depth + 1);
      if (q.forall && !sub) return false;
      if (!q.forall && sub) return true;
    }
    return q.forall;  // forall over the whole universe held; exists failed
  }
  for (const Tail::Disjunct& d : tail.matrix) {
    if (!satisfies(asg, d.cstr)) continue;
    bool all = true;
    for (const Literal& l : d.lits) {
      std::vector<std::string> args;
      for (const Term& t : l.atom.args) args.push_back(value_of(t, asg));
      if (!I.holds(l.atom.pred, l.positive, args)) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

}  // namespace detail

// Answer constraints for a rule or goal body against an interpretation: one
// (constraint, updates) pair per selection of matching stored literals
// (renamed apart) whose combination is solvable with consistent updates.
// Quantified tails are checked per assignment of universe constants to
// their free variables; each passing assignment contributes its own answer.
inline std::vector<std::pair<Constraint, std::vector<UpdateAtom>>> body_answers(
    const Constraint& cstr, const std::vector<UpdateAtom>& updates,
    const std::vector<Literal>& body, const std::optional<Tail>& tail, const Interpretation& I,
    NameGen* gen) {
  const Universe& universe = I.universe();
  std::vector<std::pair<Constraint, std::vector<UpdateAtom>>> out;

  std::function<void(std::size_t, Constraint, std::vector<UpdateAtom>)> walk =
      [&](std::size_t i, Constraint c, std::vector<UpdateAtom> us) {
        if (i == body.size()) {
          if (!solvable(c, us, universe)) return;
          if (!tail) {
            out.push_back({std::move(c), detail::sorted_updates(std::move(us))});
            return;
          }
          std::set<std::string> frees = tail_free_vars(*tail);
          detail::for_each_assignment(sorted_vars(frees), universe, [&](const Assignment& asg) {
            std::vector<ConstraintAtom> pins;
            for (const auto& [v, val] : asg)
              pins.push_back({Term::var(v), Term::constant(val), true});
            Constraint cf = conjoin(c, conjoin_atoms(pins, universe), universe);
            if (cf.is_false() || !solvable(cf, us, universe)) return;
            if (!detail::tail_true(I, *tail, asg)) return;
            out.push_back({std::move(cf), detail::sorted_updates(us)});
          });
          return;
        }
        const Literal& l = body[i];
        for (const StoredLiteral& m : I.members(l.atom.pred, l.positive)) {
          ConstrainedLiteral r = rename_apart(
              ConstrainedLiteral{m.lit, m.cstr, m.updates}, gen);
          std::vector<ConstraintAtom> eqs;
          for (std::size_t j = 0; j < l.atom.args.size(); ++j)
            eqs.push_back({l.atom.args[j], r.lit.atom.args[j], true});
          Constraint next = conjoin(c, conjoin(r.cstr, conjoin_atoms(eqs, universe), universe),
                                    universe);
          if (next.is_false()) continue;
          std::vector<UpdateAtom> nus = us;
          nus.insert(nus.end(), r.updates.begin(), r.updates.end());
          walk(i + 1, std::move(next), std::move(nus));
        }
      };
  walk(0, cstr, updates);
  return out;
}

// One derivation round: applies every rule to the current interpretation
// and merges the heads. Returns true when the interpretation changed.
// Candidates are collected before any insertion, so one round reads a
// consistent snapshot.
inline bool tp_round(const std::vector<const Rule*>& rules, Interpretation* I, NameGen* gen) {
  std::vector<ConstrainedLiteral> heads;
  for (const Rule* rp : rules) {
    Rule r = rename_apart(*rp, gen);
    for (auto& [c, us] : body_answers(r.cstr, r.updates, r.body, r.tail, *I, gen))
      heads.push_back(ConstrainedLiteral{Literal{true, r.head}, std::move(c), std::move(us)});
  }
  bool changed = false;
  for (const ConstrainedLiteral& h : heads) changed = I->insert(h) || changed;
  return changed;
}

// Complement of one completed predicate: negative literals covering exactly
// the argument tuples with no consistent derivation among the stored
// positive literals. Negative literals never carry updates.
inline std::vector<StoredLiteral> complement_of(const Interpretation& I, const std::string& pred,
                                                int arity) {
  const Universe& universe = I.universe();
  std::vector<std::string> head_names = detail::canonical_head_names(arity);
  std::set<std::string> head_set(head_names.begin(), head_names.end());

  // Accumulated complement as a disjunction, starting from `true` and
  // conjoining the negation of every derivable region.
  std::vector<Constraint> acc{Constraint::truth()};
  for (const StoredLiteral& m : I.members(pred, true)) {
    // Derivable region of this member: constraint plus some consistent
    // update solution, projected onto the head tuple.
    std::vector<Constraint> region;
    for (const Constraint& s : sol(m.updates, universe).disjuncts) {
      Constraint with = conjoin(m.cstr, s, universe);
      if (with.is_false()) continue;
      for (const Constraint& d : project(with, head_set, universe).disjuncts)
        region.push_back(d);
    }
    region = prune_pairwise(std::move(region), universe);
    for (const Constraint& d : region) {
      std::vector<Constraint> next;
      for (const Constraint& a : acc)
        for (const Constraint& n : neg(d, universe).disjuncts) {
          Constraint cn = conjoin(a, n, universe);
          if (!cn.is_false() && solvable(cn, universe)) next.push_back(std::move(cn));
        }
      acc = prune_pairwise(std::move(next), universe);
      if (acc.empty()) return {};
    }
  }

  std::vector<StoredLiteral> out;
  for (const Constraint& a : acc) {
    StoredLiteral m;
    Atom head{pred, {}};
    for (const std::string& h : head_names) head.args.push_back(Term::var(h));
    m.lit = Literal{false, std::move(head)};
    m.cstr = normalize(a, universe);
    m.instances = detail::enumerate_instances(head_names, m.cstr, {}, universe);
    if (!m.instances.empty()) out.push_back(std::move(m));
  }
  return out;
}

// Stratified fixpoint: stratum by stratum, iterate the derivation round to
// a fixpoint, then complete the predicates whose defining stratum this is.
// Snapshots are cumulative; the final snapshot is the model.
struct FixpointResult {
  std::vector<Interpretation> strata;  // snapshot after each stratum
  std::vector<int> iterations;         // derivation rounds per stratum

  const Interpretation& fix() const { return strata.back(); }
};

inline FixpointResult stratified_fixpoint(const Database& db, const Stratification& strat,
                                          NameGen* gen, Universe universe = {}) {
  if (universe.empty()) universe = db.universe();
  Interpretation I(universe);
  int n = std::max(1, strat.stratum_count());

  FixpointResult res;
  for (int s = 1; s <= n; ++s) {
    if (s == 1)
      for (const Atom& f : db.facts) I.insert(ConstrainedLiteral{Literal{true, f}, {}, {}});

    std::vector<const Rule*> rules;
    if (s <= strat.stratum_count())
      for (std::size_t idx : strat.strata[static_cast<std::size_t>(s - 1)])
        rules.push_back(&db.rules[idx]);

    int rounds = 0;
    bool changed = true;
    while (changed) {
      changed = tp_round(rules, &I, gen);
      ++rounds;
    }

    for (const auto& [pred, arity] : db.arity) {
      auto it = strat.level.find(pred);
      int lvl = it == strat.level.end() ? 1 : it->second;
      if (lvl != s) continue;
      for (StoredLiteral& m : complement_of(I, pred, arity)) I.merge(std::move(m));
    }

    res.strata.push_back(I);
    res.iterations.push_back(rounds);
  }
  return res;
}

inline FixpointResult stratified_fixpoint(const Database& db, NameGen* gen,
                                          Universe universe = {}) {
  return stratified_fixpoint(db, stratify(db), gen, std::move(universe));
}

// ---------------------------------------------------------------------------
// Goal answers.

struct Solution {
  Constraint bindings;              // over the goal's source variables
  std::vector<UpdateAtom> updates;  // sorted; ground for admissible goals

  auto operator<=>(const Solution&) const = default;
};

// Every constant the goal mentions; evaluation universes must include them.
inline std::set<std::string> goal_constants(const Goal& g) {
  std::set<std::string> out;
  auto take = [&](const Term& t) {
    if (t.is_const()) out.insert(t.name());
  };
  for (const auto& [v, t] : g.cstr.eqs) take(t);
  for (const auto& [a, b] : g.cstr.neqs) {
    take(a);
    take(b);
  }
  for (const auto& u : g.updates)
    for (const Term& t : u.atom.args) take(t);
  for (const auto& l : g.body)
    for (const Term& t : l.atom.args) take(t);
  return out;
}

inline Universe evaluation_universe(const Database& db, const Goal& g) {
  std::set<std::string> s;
  for (const std::string& c : db.universe()) s.insert(c);
  for (const std::string& c : goal_constants(g)) s.insert(c);
  return Universe(s.begin(), s.end());
}

// Answer constraints for a goal over a computed model: match the goal body
// against stored literals, require solvability with consistent updates,
// restrict bindings to the goal's variables, and ground the update atoms
// through the combined constraint. The goal is renamed apart first so that
// stored-literal renaming can never capture its variables, and bindings are
// translated back to the goal's source names.
inline std::vector<Solution> answers(const Goal& goal, const Interpretation& I, NameGen* gen) {
  const Universe& universe = I.universe();
  Renaming rn(gen);
  Goal g;
  g.cstr = rn(goal.cstr);
  for (const auto& u : goal.updates) g.updates.push_back(rn(u));
  for (const auto& l : goal.body) g.body.push_back(rn(l));
  std::map<std::string, std::string> back;
  std::set<std::string> keep;
  for (const std::string& v : goal.vars) {
    std::string renamed = rn(Term::var(v)).name();
    keep.insert(renamed);
    back[renamed] = v;
  }

  std::set<Solution> dedup;
  for (auto& [c, us] : body_answers(g.cstr, g.updates, g.body, std::nullopt, I, gen)) {
    Constraint full = normalize(c, universe);
    std::vector<UpdateAtom> ground;
    for (const UpdateAtom& u : apply_bindings(us, full))
      ground.push_back(UpdateAtom{u.op, detail::map_atom(u.atom, back)});
    std::sort(ground.begin(), ground.end());
    for (const Constraint& d : project(full, keep, universe).disjuncts)
      dedup.insert(
          Solution{normalize(detail::map_constraint(d, back), universe), ground});
  }
  return std::vector<Solution>(dedup.begin(), dedup.end());
}

}  // namespace udatalog
