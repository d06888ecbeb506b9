// Copyright 2026 the udatalog authors
// SPDX-License-Identifier: Apache-2.0
//
// Constraint engine over a finite universe of constants: normal forms,
// solvability together with update consistency, entailment, projection onto a
// variable set, constraint negation, minimal update-consistency conditions
// (sol) and prenex-DNF conversion of quantified formulas. All decision
// procedures are relative to an explicit universe; with few variables and a
// handful of constants, enumeration is exact and cheap, so it is the
// reference implementation throughout.

#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "udatalog/ast.hpp"

namespace udatalog {

using Universe = std::vector<std::string>;

// ---------------------------------------------------------------------------
// Normalization.
//
// Solves the equality part into an idempotent substitution whose
// representatives are constants or shortlex-least variables, rewrites
// disequalities through it, discharges trivially true ones and detects
// direct contradictions. When a universe is supplied, a variable whose
// forbidden constants exhaust the universe makes the constraint false.
// A normalize() result of false means unsolvable; the converse needs
// solvable(), since variable/variable disequalities can be jointly
// unsatisfiable without any single variable being exhausted.

namespace detail {

// Disequalities keep a variable on the left; between two variables the
// shortlex-least one goes left. Callers discard constant/constant pairs
// before orienting.
inline void orient_neq(Term* a, Term* b) {
  if (a->is_const() || (b->is_var() && shortlex_less(b->name(), a->name()))) std::swap(*a, *b);
}

inline Constraint solve(const std::vector<std::pair<Term, Term>>& eqns,
                        const std::set<std::pair<Term, Term>>& neqs, const Universe& universe) {
  std::map<std::string, Term> repr;
  std::function<Term(Term)> find = [&](Term t) {
    while (t.is_var()) {
      auto it = repr.find(t.name());
      if (it == repr.end()) break;
      t = it->second;
    }
    return t;
  };

  Constraint out;
  for (const auto& [l, r] : eqns) {
    Term a = find(l);
    Term b = find(r);
    if (a == b) continue;
    if (a.is_const() && b.is_const()) return Constraint::falsity();
    if (term_prefer(a, b))
      repr.insert_or_assign(b.name(), a);
    else
      repr.insert_or_assign(a.name(), b);
  }
  for (const auto& [v, t] : repr) out.eqs[v] = find(Term::var(v));

  for (const auto& [l, r] : neqs) {
    Term a = out.resolve(l);
    Term b = out.resolve(r);
    if (a == b) return Constraint::falsity();
    if (a.is_const() && b.is_const()) continue;
    orient_neq(&a, &b);
    out.neqs.emplace(a, b);
  }

  if (!universe.empty()) {
    std::map<std::string, std::set<std::string>> banned;
    for (const auto& [a, b] : out.neqs)
      if (a.is_var() && b.is_const()) banned[a.name()].insert(b.name());
    for (const auto& [v, consts] : banned)
      if (consts.size() >= universe.size()) return Constraint::falsity();
  }
  return out;
}

}  // namespace detail

inline Constraint normalize(const Constraint& c, const Universe& universe = {}) {
  if (c.unsat) return Constraint::falsity();
  std::vector<std::pair<Term, Term>> eqns;
  for (const auto& [v, t] : c.eqs) eqns.emplace_back(Term::var(v), t);
  return detail::solve(eqns, c.neqs, universe);
}

inline Constraint conjoin(const Constraint& a, const Constraint& b, const Universe& universe = {}) {
  if (a.unsat || b.unsat) return Constraint::falsity();
  std::vector<std::pair<Term, Term>> eqns;
  std::set<std::pair<Term, Term>> neqs;
  for (const Constraint* c : {&a, &b}) {
    for (const auto& [v, t] : c->eqs) eqns.emplace_back(Term::var(v), t);
    neqs.insert(c->neqs.begin(), c->neqs.end());
  }
  return detail::solve(eqns, neqs, universe);
}

// Conjunction of raw source atoms into a normalized constraint.
inline Constraint conjoin_atoms(const std::vector<ConstraintAtom>& atoms,
                                const Universe& universe = {}) {
  std::vector<std::pair<Term, Term>> eqns;
  std::set<std::pair<Term, Term>> neqs;
  for (const auto& at : atoms) {
    if (at.eq)
      eqns.emplace_back(at.lhs, at.rhs);
    else
      neqs.emplace(at.lhs, at.rhs);
  }
  return detail::solve(eqns, neqs, universe);
}

// Disequality lhs != rhs with a variable on the left after normalization.
inline Constraint make_neq(Term a, Term b) {
  Constraint c;
  c.neqs.emplace(std::move(a), std::move(b));
  return normalize(c);
}

inline Constraint make_eq(Term a, Term b) {
  return conjoin_atoms({ConstraintAtom{std::move(a), std::move(b), true}});
}

// ---------------------------------------------------------------------------
// Ground evaluation and enumeration.

using Assignment = std::map<std::string, std::string>;

inline std::string value_of(const Term& t, const Assignment& asg) {
  if (t.is_const()) return t.name();
  auto it = asg.find(t.name());
  return it == asg.end() ? t.name() : it->second;
}

inline bool satisfies(const Assignment& asg, const Constraint& c) {
  if (c.unsat) return false;
  for (const auto& [v, t] : c.eqs)
    if (value_of(Term::var(v), asg) != value_of(t, asg)) return false;
  for (const auto& [a, b] : c.neqs)
    if (value_of(a, asg) == value_of(b, asg)) return false;
  return true;
}

// Ground update consistency: no tuple both inserted and deleted.
inline bool consistent_ground(const std::vector<UpdateAtom>& updates, const Assignment& asg) {
  std::set<Atom> ins, del;
  for (const auto& u : updates) {
    Atom g{u.atom.pred, {}};
    for (const Term& t : u.atom.args) g.args.push_back(Term::constant(value_of(t, asg)));
    (u.op == UpdateAtom::Op::kInsert ? ins : del).insert(std::move(g));
  }
  for (const Atom& a : ins)
    if (del.count(a)) return false;
  return true;
}

// Runs `fn` over every assignment of universe constants to `vars`; stops and
// returns true as soon as `fn` does. Empty universe admits only var-free
// calls.
inline bool any_assignment(const std::vector<std::string>& vars, const Universe& universe,
                           const std::function<bool(const Assignment&)>& fn) {
  Assignment asg;
  std::function<bool(std::size_t)> rec = [&](std::size_t i) {
    if (i == vars.size()) return fn(asg);
    for (const std::string& c : universe) {
      asg[vars[i]] = c;
      if (rec(i + 1)) return true;
    }
    asg.erase(vars[i]);
    return false;
  };
  if (!vars.empty() && universe.empty()) return false;
  return rec(0);
}

inline std::vector<std::string> sorted_vars(std::set<std::string> s) {
  return std::vector<std::string>(s.begin(), s.end());
}

// Satisfiability of a constraint together with consistency of the update
// atoms it grounds. Exact, but not by enumerating every variable: the solved
// equalities are substituted through everything by normalize, so only the
// disequalities and the update atoms of predicates written with both signs
// can still fail. Those split into connected components that share no
// variable, and each component is enumerated on its own.
inline bool solvable(const Constraint& c, const std::vector<UpdateAtom>& updates,
                     const Universe& universe) {
  Constraint n = normalize(c, universe);
  if (n.is_false()) return false;
  std::vector<UpdateAtom> us = apply_bindings(updates, n);

  std::set<std::string> clashable;
  {
    std::set<std::string> inserted, deleted;
    for (const auto& u : us)
      (u.op == UpdateAtom::Op::kInsert ? inserted : deleted).insert(u.atom.pred);
    for (const std::string& p : inserted)
      if (deleted.count(p)) clashable.insert(p);
  }

  // Union-find over variables plus one synthetic node per clashable
  // predicate, so even ground atoms of such a predicate meet in a component.
  std::map<std::string, std::string> parent;
  std::function<std::string(const std::string&)> find = [&](const std::string& x) {
    auto it = parent.find(x);
    if (it == parent.end() || it->second == x) {
      parent.emplace(x, x);
      return x;
    }
    return it->second = find(it->second);
  };
  auto join = [&](const std::string& a, const std::string& b) { parent[find(a)] = find(b); };

  for (const auto& [a, b] : n.neqs) {
    find(a.name());
    if (b.is_var()) join(a.name(), b.name());
  }
  std::vector<const UpdateAtom*> clash_atoms;
  for (const auto& u : us) {
    if (!clashable.count(u.atom.pred)) continue;
    clash_atoms.push_back(&u);
    std::string anchor = "#" + u.atom.pred;
    find(anchor);
    for (const Term& t : u.atom.args)
      if (t.is_var()) join(anchor, t.name());
  }

  std::map<std::string, std::vector<std::pair<Term, Term>>> comp_neqs;
  std::map<std::string, std::vector<UpdateAtom>> comp_atoms;
  std::map<std::string, std::set<std::string>> comp_vars;
  for (const auto& [a, b] : n.neqs) {
    std::string root = find(a.name());
    comp_neqs[root].emplace_back(a, b);
    comp_vars[root].insert(a.name());
    if (b.is_var()) comp_vars[root].insert(b.name());
  }
  for (const UpdateAtom* u : clash_atoms) {
    std::string root = find("#" + u->atom.pred);
    comp_atoms[root].push_back(*u);
    for (const Term& t : u->atom.args)
      if (t.is_var()) comp_vars[root].insert(t.name());
  }

  std::set<std::string> roots;
  for (const auto& [r, _] : comp_neqs) roots.insert(r);
  for (const auto& [r, _] : comp_atoms) roots.insert(r);
  for (const std::string& root : roots) {
    bool ok = any_assignment(sorted_vars(comp_vars[root]), universe, [&](const Assignment& a) {
      for (const auto& [l, r] : comp_neqs[root])
        if (value_of(l, a) == value_of(r, a)) return false;
      return consistent_ground(comp_atoms[root], a);
    });
    if (!ok) return false;
  }
  return true;
}

inline bool solvable(const Constraint& c, const Universe& universe) {
  return solvable(c, {}, universe);
}

// a entails b over the universe: every solution of a satisfies b.
inline bool entails(const Constraint& a, const Constraint& b, const Universe& universe) {
  Constraint na = normalize(a, universe);
  if (na.is_false()) return true;
  Constraint nb = normalize(b, universe);
  if (nb.is_false()) return !solvable(na, universe);
  std::set<std::string> vs = vars_of(na);
  collect_vars(nb, &vs);
  return !any_assignment(sorted_vars(vs), universe,
                         [&](const Assignment& x) { return satisfies(x, na) && !satisfies(x, nb); });
}

inline bool equivalent(const Constraint& a, const Constraint& b, const Universe& universe) {
  return entails(a, b, universe) && entails(b, a, universe);
}

// ---------------------------------------------------------------------------
// Disjunctions of constraints. An empty disjunct list is false.

struct DisjunctiveConstraint {
  std::vector<Constraint> disjuncts;

  bool is_false() const { return disjuncts.empty(); }
  bool is_true() const {
    return std::any_of(disjuncts.begin(), disjuncts.end(),
                       [](const Constraint& c) { return c.is_true(); });
  }
  auto operator<=>(const DisjunctiveConstraint&) const = default;
};

inline bool satisfies(const Assignment& asg, const DisjunctiveConstraint& d) {
  return std::any_of(d.disjuncts.begin(), d.disjuncts.end(),
                     [&](const Constraint& c) { return satisfies(asg, c); });
}

// c entails d1 or ... or dn over the universe.
inline bool entails_disjunction(const Constraint& c, const std::vector<Constraint>& ds,
                                const Universe& universe) {
  Constraint n = normalize(c, universe);
  if (n.is_false()) return true;
  std::set<std::string> vs = vars_of(n);
  for (const Constraint& d : ds) collect_vars(d, &vs);
  return !any_assignment(sorted_vars(vs), universe, [&](const Assignment& x) {
    if (!satisfies(x, n)) return false;
    for (const Constraint& d : ds)
      if (satisfies(x, d)) return false;
    return true;
  });
}

inline bool disj_entails(const DisjunctiveConstraint& a, const DisjunctiveConstraint& b,
                         const Universe& universe) {
  return std::all_of(a.disjuncts.begin(), a.disjuncts.end(), [&](const Constraint& c) {
    return entails_disjunction(c, b.disjuncts, universe);
  });
}

inline bool disj_equivalent(const DisjunctiveConstraint& a, const DisjunctiveConstraint& b,
                            const Universe& universe) {
  return disj_entails(a, b, universe) && disj_entails(b, a, universe);
}

// Deduplicates and drops disjuncts that entail another one (the weaker
// disjunct absorbs the stronger). Equivalent disjuncts keep the first in
// canonical order. The result is an antichain under entailment.
inline std::vector<Constraint> prune_pairwise(std::vector<Constraint> ds, const Universe& universe) {
  std::sort(ds.begin(), ds.end());
  ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
  std::vector<bool> drop(ds.size(), false);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.size() && !drop[i]; ++j) {
      if (i == j || drop[j]) continue;
      if (!entails(ds[i], ds[j], universe)) continue;
      if (entails(ds[j], ds[i], universe) && j > i) continue;  // equivalent, keep i
      drop[i] = true;
    }
  }
  std::vector<Constraint> out;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (!drop[i]) out.push_back(ds[i]);
  return out;
}

// Greedy joint minimization in canonical order: a disjunct already covered by
// the remaining disjunction is removed. Leaves no disjunct entailed by the
// others, the stronger condition needed by neg().
inline std::vector<Constraint> prune_joint(std::vector<Constraint> ds, const Universe& universe) {
  ds = prune_pairwise(std::move(ds), universe);
  for (std::size_t i = 0; i < ds.size();) {
    std::vector<Constraint> rest;
    for (std::size_t j = 0; j < ds.size(); ++j)
      if (j != i) rest.push_back(ds[j]);
    if (entails_disjunction(ds[i], rest, universe))
      ds.erase(ds.begin() + static_cast<std::ptrdiff_t>(i));
    else
      ++i;
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Negation. The complement of a normalized conjunction is the disjunction of
// the negated atomic pieces; unsolvable pieces are dropped and the rest is
// minimized so that no disjunct is entailed by the remaining disjunction.
// neg(false) = {true}; if nothing survives the result is the false
// disjunction.

inline DisjunctiveConstraint neg(const Constraint& c, const Universe& universe) {
  Constraint n = normalize(c, universe);
  if (n.is_false()) return DisjunctiveConstraint{{Constraint::truth()}};
  std::vector<Constraint> out;
  for (const auto& [v, t] : n.eqs) {
    Constraint d = make_neq(Term::var(v), t);
    d = normalize(d, universe);
    if (!d.is_false() && solvable(d, universe)) out.push_back(std::move(d));
  }
  for (const auto& [a, b] : n.neqs) {
    Constraint d = make_eq(a, b);
    if (!d.is_false() && solvable(d, universe)) out.push_back(std::move(d));
  }
  return DisjunctiveConstraint{prune_joint(std::move(out), universe)};
}

// ---------------------------------------------------------------------------
// Update consistency conditions. sol(u) is the set of weakest constraints
// each of which forces the update atoms to be conflict-free; their
// disjunction covers exactly the consistent region. Built as a CNF of
// per-pair non-clash clauses distributed into a pruned DNF.

inline DisjunctiveConstraint sol(const std::vector<UpdateAtom>& updates, const Universe& universe) {
  std::vector<std::vector<Constraint>> clauses;
  for (const auto& u1 : updates) {
    if (u1.op != UpdateAtom::Op::kInsert) continue;
    for (const auto& u2 : updates) {
      if (u2.op != UpdateAtom::Op::kDelete) continue;
      if (u1.atom.pred != u2.atom.pred || u1.atom.arity() != u2.atom.arity()) continue;
      // Clash iff all argument pairs are equal at once; a pair whose joint
      // argument equations are unsolvable can never clash. Otherwise the
      // non-clash clause is the disjunction of argument disequalities.
      std::vector<ConstraintAtom> arg_eqs;
      for (int k = 0; k < u1.atom.arity(); ++k)
        arg_eqs.push_back({u1.atom.args[static_cast<std::size_t>(k)],
                           u2.atom.args[static_cast<std::size_t>(k)], true});
      Constraint joint = conjoin_atoms(arg_eqs, universe);
      if (joint.is_false() || !solvable(joint, universe)) continue;
      std::vector<Constraint> clause;
      for (const auto& at : arg_eqs) {
        if (at.lhs == at.rhs) continue;  // this pair of args can never differ
        Constraint d = make_neq(at.lhs, at.rhs);
        if (!d.is_false() && solvable(d, universe)) clause.push_back(std::move(d));
      }
      if (clause.empty()) return DisjunctiveConstraint{};  // unavoidable clash
      clauses.push_back(prune_pairwise(std::move(clause), universe));
    }
  }

  std::vector<Constraint> partial{Constraint::truth()};
  for (const auto& clause : clauses) {
    std::vector<Constraint> next;
    for (const Constraint& p : partial)
      for (const Constraint& lit : clause) {
        Constraint c = conjoin(p, lit, universe);
        if (!c.is_false() && solvable(c, universe)) next.push_back(std::move(c));
      }
    partial = prune_pairwise(std::move(next), universe);
    if (partial.empty()) return DisjunctiveConstraint{};
  }
  return DisjunctiveConstraint{std::move(partial)};
}

// ---------------------------------------------------------------------------
// Projection onto a variable set: existential elimination of the rest.
// Equality-bound variables are substituted away; variables left only in
// disequalities are eliminated by domain reasoning, which may split the
// result into a disjunction. The false projection is the empty disjunction.

inline DisjunctiveConstraint project(const Constraint& c, const std::set<std::string>& keep,
                                     const Universe& universe) {
  Constraint n = normalize(c, universe);
  if (n.is_false()) return DisjunctiveConstraint{};

  // Regroup the equality classes so that every class is represented by a
  // constant or a kept variable whenever one exists.
  std::map<std::string, std::pair<std::vector<std::string>, Term>> classes;
  for (const std::string& v : vars_of(n)) {
    Term r = n.resolve(Term::var(v));
    std::string key = r.is_var() ? r.name() : "#" + r.name();
    auto& entry = classes[key];
    entry.first.push_back(v);
    if (r.is_const()) entry.second = r;
  }

  Constraint rebuilt;
  std::map<std::string, Term> subst;  // every var -> its new representative
  for (auto& [key, entry] : classes) {
    const auto& members = entry.first;
    bool has_const = !key.empty() && key[0] == '#';
    std::string best_kept;
    for (const std::string& m : members)
      if (keep.count(m) && (best_kept.empty() || shortlex_less(m, best_kept))) best_kept = m;
    Term rep;
    if (has_const)
      rep = entry.second;
    else if (!best_kept.empty())
      rep = Term::var(best_kept);
    else
      rep = Term::var(*std::min_element(members.begin(), members.end(),
                                        [](const std::string& a, const std::string& b) {
                                          return shortlex_less(a, b);
                                        }));
    for (const std::string& m : members) {
      subst[m] = rep;
      if (keep.count(m) && !(rep.is_var() && rep.name() == m)) rebuilt.eqs[m] = rep;
    }
  }
  auto apply = [&](const Term& t) {
    if (!t.is_var()) return t;
    auto it = subst.find(t.name());
    return it == subst.end() ? t : it->second;
  };
  for (const auto& [a, b] : n.neqs) {
    Term x = apply(a), y = apply(b);
    if (x == y) return DisjunctiveConstraint{};  // cannot happen post-normalize
    if (x.is_const() && y.is_const()) continue;
    detail::orient_neq(&x, &y);
    rebuilt.neqs.emplace(x, y);
  }

  // Eliminate remaining non-kept variables from the disequalities.
  std::function<std::vector<Constraint>(Constraint)> elim = [&](Constraint cur) {
    std::set<std::string> drop;
    for (const auto& [a, b] : cur.neqs) {
      if (a.is_var() && !keep.count(a.name())) drop.insert(a.name());
      if (b.is_var() && !keep.count(b.name())) drop.insert(b.name());
    }
    if (drop.empty()) {
      Constraint fin = normalize(cur, universe);
      if (fin.is_false() || !solvable(fin, universe)) return std::vector<Constraint>{};
      return std::vector<Constraint>{fin};
    }
    // Pick one variable; if it only faces constants, domain counting decides.
    std::string v = *drop.begin();
    std::set<std::string> faced_consts;
    bool faces_var = false;
    for (const auto& [a, b] : cur.neqs) {
      if (a.is_var() && a.name() == v) (b.is_const() ? void(faced_consts.insert(b.name())) : void(faces_var = true));
      if (b.is_var() && b.name() == v) (a.is_const() ? void(faced_consts.insert(a.name())) : void(faces_var = true));
    }
    if (!faces_var) {
      if (faced_consts.size() >= universe.size()) return std::vector<Constraint>{};
      Constraint rest = cur;
      std::erase_if(rest.neqs, [&](const auto& pr) {
        return (pr.first.is_var() && pr.first.name() == v) || (pr.second.is_var() && pr.second.name() == v);
      });
      return elim(std::move(rest));
    }
    // Expand over the universe.
    std::vector<Constraint> out;
    for (const std::string& cst : universe) {
      Constraint inst;
      inst.unsat = cur.unsat;
      inst.eqs = cur.eqs;
      bool dead = false;
      for (const auto& [a, b] : cur.neqs) {
        Term x = (a.is_var() && a.name() == v) ? Term::constant(cst) : a;
        Term y = (b.is_var() && b.name() == v) ? Term::constant(cst) : b;
        if (x == y) {
          dead = true;
          break;
        }
        if (x.is_const() && y.is_const()) continue;
        detail::orient_neq(&x, &y);
        inst.neqs.emplace(x, y);
      }
      if (dead) continue;
      for (Constraint& r : elim(std::move(inst))) out.push_back(std::move(r));
    }
    return out;
  };

  std::vector<Constraint> ds = prune_pairwise(elim(std::move(rebuilt)), universe);

  // Collapse a disjunction that covers every assignment of its variables to
  // the single true constraint. Bounded so large keep sets skip the check.
  if (!universe.empty() && !ds.empty() && !(ds.size() == 1 && ds[0].is_true())) {
    std::set<std::string> vs;
    for (const Constraint& d : ds)
      for (const std::string& v : vars_of(d)) vs.insert(v);
    double combos = 1;
    for (std::size_t i = 0; i < vs.size(); ++i) combos *= static_cast<double>(universe.size());
    if (combos <= 4096) {
      bool gap = any_assignment(sorted_vars(vs), universe, [&](const Assignment& asg) {
        for (const Constraint& d : ds)
          if (satisfies(asg, d)) return false;
        return true;
      });
      if (!gap) return DisjunctiveConstraint{{Constraint::truth()}};
    }
  }
  return DisjunctiveConstraint{std::move(ds)};
}

// ---------------------------------------------------------------------------
// Formula trees and prenex disjunctive normal form. Used to negate rule
// bodies during precompilation; the result type is the Tail stored on
// precompiled rules.

struct Formula {
  enum class Kind { kTrue, kFalse, kCstr, kLit, kAnd, kOr, kNot, kForall, kExists };

  Kind kind = Kind::kTrue;
  ConstraintAtom catom;        // kCstr
  Literal lit;                 // kLit
  std::vector<Formula> kids;   // kAnd, kOr: n-ary; kNot, quantifiers: 1
  std::string var;             // quantifier variable

  static Formula truth() { return {}; }
  static Formula falsity() { return with(Kind::kFalse); }
  static Formula cstr(ConstraintAtom a) {
    Formula f = with(Kind::kCstr);
    f.catom = std::move(a);
    return f;
  }
  static Formula literal(Literal l) {
    Formula f = with(Kind::kLit);
    f.lit = std::move(l);
    return f;
  }
  static Formula conj(std::vector<Formula> ks) { return nary(Kind::kAnd, std::move(ks)); }
  static Formula disj(std::vector<Formula> ks) { return nary(Kind::kOr, std::move(ks)); }
  static Formula negate(Formula f) {
    Formula n = with(Kind::kNot);
    n.kids.push_back(std::move(f));
    return n;
  }
  static Formula forall(std::string v, Formula f) { return quant(Kind::kForall, std::move(v), std::move(f)); }
  static Formula exists(std::string v, Formula f) { return quant(Kind::kExists, std::move(v), std::move(f)); }

 private:
  static Formula with(Kind k) {
    Formula f;
    f.kind = k;
    return f;
  }
  static Formula nary(Kind k, std::vector<Formula> ks) {
    Formula f = with(k);
    f.kids = std::move(ks);
    return f;
  }
  static Formula quant(Kind k, std::string v, Formula body) {
    Formula f = with(k);
    f.var = std::move(v);
    f.kids.push_back(std::move(body));
    return f;
  }
};

namespace detail {

// Negation normal form with standardized-apart quantifiers. `sub` renames
// bound variables; free variables pass through.
inline Formula nnf(const Formula& f, bool neg, std::map<std::string, std::string> sub,
                   NameGen* gen) {
  auto rename_term = [&](const Term& t) {
    if (t.is_var()) {
      auto it = sub.find(t.name());
      if (it != sub.end()) return Term::var(it->second);
    }
    return t;
  };
  switch (f.kind) {
    case Formula::Kind::kTrue:
      return neg ? Formula::falsity() : Formula::truth();
    case Formula::Kind::kFalse:
      return neg ? Formula::truth() : Formula::falsity();
    case Formula::Kind::kCstr: {
      ConstraintAtom a{rename_term(f.catom.lhs), rename_term(f.catom.rhs), f.catom.eq};
      if (neg) a.eq = !a.eq;
      return Formula::cstr(std::move(a));
    }
    case Formula::Kind::kLit: {
      Literal l = f.lit;
      for (Term& t : l.atom.args) t = rename_term(t);
      if (neg) l.positive = !l.positive;
      return Formula::literal(std::move(l));
    }
    case Formula::Kind::kAnd:
    case Formula::Kind::kOr: {
      bool conj = (f.kind == Formula::Kind::kAnd) != neg;
      std::vector<Formula> ks;
      ks.reserve(f.kids.size());
      for (const Formula& k : f.kids) ks.push_back(nnf(k, neg, sub, gen));
      return conj ? Formula::conj(std::move(ks)) : Formula::disj(std::move(ks));
    }
    case Formula::Kind::kNot:
      return nnf(f.kids[0], !neg, std::move(sub), gen);
    case Formula::Kind::kForall:
    case Formula::Kind::kExists: {
      bool forall = (f.kind == Formula::Kind::kForall) != neg;
      std::string fresh = gen->fresh();
      sub[f.var] = fresh;
      Formula body = nnf(f.kids[0], neg, std::move(sub), gen);
      return forall ? Formula::forall(fresh, std::move(body))
                    : Formula::exists(fresh, std::move(body));
    }
  }
  return Formula::truth();
}

// Pulls the (already standardized) quantifiers of an NNF formula into a
// prefix, preserving left-to-right occurrence order.
inline Formula pull_quants(const Formula& f, std::vector<Tail::Quant>* prefix) {
  switch (f.kind) {
    case Formula::Kind::kForall:
    case Formula::Kind::kExists:
      prefix->push_back({f.kind == Formula::Kind::kForall, f.var});
      return pull_quants(f.kids[0], prefix);
    case Formula::Kind::kAnd:
    case Formula::Kind::kOr: {
      std::vector<Formula> ks;
      for (const Formula& k : f.kids) ks.push_back(pull_quants(k, prefix));
      return f.kind == Formula::Kind::kAnd ? Formula::conj(std::move(ks))
                                           : Formula::disj(std::move(ks));
    }
    default:
      return f;
  }
}

struct RawDisjunct {
  std::vector<ConstraintAtom> atoms;
  std::vector<Literal> lits;
};

// Distributes a quantifier-free NNF matrix into disjuncts.
inline std::vector<RawDisjunct> dnf(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::kTrue:
      return {RawDisjunct{}};
    case Formula::Kind::kFalse:
      return {};
    case Formula::Kind::kCstr:
      return {RawDisjunct{{f.catom}, {}}};
    case Formula::Kind::kLit:
      return {RawDisjunct{{}, {f.lit}}};
    case Formula::Kind::kOr: {
      std::vector<RawDisjunct> out;
      for (const Formula& k : f.kids)
        for (RawDisjunct& d : dnf(k)) out.push_back(std::move(d));
      return out;
    }
    case Formula::Kind::kAnd: {
      std::vector<RawDisjunct> acc{RawDisjunct{}};
      for (const Formula& k : f.kids) {
        std::vector<RawDisjunct> part = dnf(k);
        std::vector<RawDisjunct> next;
        for (const RawDisjunct& a : acc)
          for (const RawDisjunct& b : part) {
            RawDisjunct m = a;
            m.atoms.insert(m.atoms.end(), b.atoms.begin(), b.atoms.end());
            m.lits.insert(m.lits.end(), b.lits.begin(), b.lits.end());
            next.push_back(std::move(m));
          }
        acc = std::move(next);
      }
      return acc;
    }
    default:
      return {};  // quantifiers are gone by now
  }
}

}  // namespace detail

// Converts a formula to a prenex tail: NNF, standardized quantifiers pulled
// left-to-right, matrix distributed to DNF, unsolvable disjuncts dropped and
// vacuous quantifiers removed.
inline Tail to_prenex_dnf(const Formula& f, NameGen* gen) {
  Formula n = detail::nnf(f, false, {}, gen);
  Tail tail;
  Formula matrix = detail::pull_quants(n, &tail.prefix);
  for (const detail::RawDisjunct& rd : detail::dnf(matrix)) {
    Tail::Disjunct d;
    d.cstr = conjoin_atoms(rd.atoms);
    if (d.cstr.is_false()) continue;
    std::set<Literal> lits(rd.lits.begin(), rd.lits.end());
    d.lits.assign(lits.begin(), lits.end());
    tail.matrix.push_back(std::move(d));
  }
  std::sort(tail.matrix.begin(), tail.matrix.end());
  tail.matrix.erase(std::unique(tail.matrix.begin(), tail.matrix.end()), tail.matrix.end());
  std::set<std::string> used;
  for (const auto& d : tail.matrix) {
    collect_vars(d.cstr, &used);
    for (const auto& l : d.lits) collect_vars(l, &used);
  }
  std::erase_if(tail.prefix, [&](const Tail::Quant& q) { return !used.count(q.var); });
  return tail;
}

inline std::string to_string(const DisjunctiveConstraint& d) {
  if (d.is_false()) return "false";
  std::string out;
  for (std::size_t i = 0; i < d.disjuncts.size(); ++i) {
    if (i) out += " ; ";
    out += to_string(d.disjuncts[i]);
  }
  return out;
}

}  // namespace udatalog
