// Copyright 2026 the udatalog authors
// SPDX-License-Identifier: Apache-2.0
//
// Precompilation by unfolding. A stratified program is rewritten, stratum by
// stratum, into rules whose bodies mention extensional predicates only:
//
//   1. Positive unfolding replaces every positive intensional body atom by
//      the bodies of its defining rules, iterated until no new rule shape
//      can change the answers over the declared finite universe. Negative
//      literals ride along untouched.
//   2. Negative unfolding replaces each rule's negated atoms by one
//      quantified tail: the negation of the disjunction of the defining
//      bodies, with update atoms contributing the constraints under which
//      they are consistent, put into prenex disjunctive normal form.
//
// The result contains no intensional literal at all, so it can be evaluated
// against any fact store over the same universe without touching the
// original rules.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "udatalog/analysis.hpp"
#include "udatalog/ast.hpp"
#include "udatalog/constraints.hpp"
#include "udatalog/eval.hpp"

namespace udatalog {

// Raised by the pure unfolding fixpoint when recursion keeps producing new
// rules; over an unbounded universe that process need not terminate.
struct BoundExceeded : std::runtime_error {
  explicit BoundExceeded(int rounds_)
      : std::runtime_error("unfolding produced new rules after " + std::to_string(rounds_) +
                           " rounds; the program is recursive and its unfolded form "
                           "is unbounded"),
        rounds(rounds_) {}
  int rounds;
};

// Raised when a negated predicate has no completed definition to negate:
// the stratum staging was given an incomplete rule set.
struct MissingDefinition : std::runtime_error {
  explicit MissingDefinition(const std::string& pred_)
      : std::runtime_error("no completed definition for negated predicate '" + pred_ + "'"),
        pred(pred_) {}
  std::string pred;
};

// Definition lookup for the unfolding steps: head predicate to the rules
// currently defining it. A predicate may be present with zero rules, which
// records a completed empty definition.
using Definitions = std::map<std::string, std::vector<Rule>>;

// Identity rules p(V1..Vk) :- p(V1..Vk) for the extensional predicates.
// Unfolding an extensional atom against its identity rule reproduces the
// atom, so extensional bodies pass through unchanged.
inline Definitions identity_rules(const Database& db) {
  Definitions defs;
  for (const std::string& pred : db.extensional) {
    Atom a{pred, {}};
    int arity = db.arity.at(pred);
    for (int i = 1; i <= arity; ++i) a.args.push_back(Term::var("V" + std::to_string(i)));
    Rule r;
    r.head = a;
    r.body.push_back(Literal{true, a});
    defs[pred].push_back(std::move(r));
  }
  return defs;
}

namespace detail {

// Term-valued substitution, used to push a negated atom's argument terms
// into the defining rule's body.
inline Term subst_term(const Term& t, const std::map<std::string, Term>& m) {
  if (t.is_var()) {
    auto it = m.find(t.name());
    if (it != m.end()) return it->second;
  }
  return t;
}

inline Atom subst_atom(const Atom& a, const std::map<std::string, Term>& m) {
  Atom out{a.pred, {}};
  for (const Term& t : a.args) out.args.push_back(subst_term(t, m));
  return out;
}

inline void map_tail(Tail* t, const std::map<std::string, std::string>& m) {
  for (auto& q : t->prefix) q.var = map_term(Term::var(q.var), m).name();
  for (auto& d : t->matrix) {
    d.cstr = map_constraint(d.cstr, m);
    for (auto& l : d.lits) l.atom = map_atom(l.atom, m);
  }
}

}  // namespace detail

// Canonical shape for rule-set comparison: equalities folded into argument
// positions, residual inequalities kept, updates and body sorted, variables
// renamed V1.. in occurrence order. Two unfoldings of the same derivation
// differ only in fresh names and ordering, so they canonicalize equal.
inline Rule canonical_rule(Rule r) {
  Constraint c = normalize(r.cstr);
  if (c.is_false()) {
    // A rule whose constraint cannot be satisfied derives nothing, so its
    // body carries no information: reduce every dead rule to its head shape.
    Rule dead;
    dead.head = r.head;
    std::map<std::string, std::string> m;
    for (Term& t : dead.head.args)
      if (t.is_var()) {
        auto it = m.emplace(t.name(), "V" + std::to_string(m.size() + 1)).first;
        t = Term::var(it->second);
      }
    dead.cstr = Constraint::falsity();
    return dead;
  }
  r.head = apply_bindings(r.head, c);
  r.updates = apply_bindings(r.updates, c);
  for (auto& l : r.body) l = apply_bindings(l, c);
  if (r.tail) {
    for (auto& d : r.tail->matrix) {
      Constraint dc;
      dc.unsat = d.cstr.unsat;
      for (const auto& [v, t] : d.cstr.eqs) {
        Term lhs = c.resolve(Term::var(v));
        Term rhs = c.resolve(t);
        if (lhs.is_var())
          dc.eqs[lhs.name()] = rhs;
        else if (rhs.is_var())
          dc.eqs[rhs.name()] = lhs;
        else if (lhs != rhs)
          dc.unsat = true;
      }
      for (auto [a, b] : d.cstr.neqs) {
        a = c.resolve(a);
        b = c.resolve(b);
        detail::orient_neq(&a, &b);
        dc.neqs.emplace(a, b);
      }
      d.cstr = dc;
      for (auto& l : d.lits) l = apply_bindings(l, c);
    }
  }
  Constraint residual;
  residual.neqs = c.neqs;
  r.cstr = residual;

  for (int pass = 0; pass < 4; ++pass) {
    std::sort(r.body.begin(), r.body.end());
    r.updates = detail::sorted_updates(std::move(r.updates));
    if (r.tail) std::sort(r.tail->matrix.begin(), r.tail->matrix.end());

    std::map<std::string, std::string> m;
    int n = 0;
    auto visit = [&](const Term& t) {
      if (t.is_var() && !m.count(t.name())) m[t.name()] = "V" + std::to_string(++n);
    };
    for (const Term& t : r.head.args) visit(t);
    for (const auto& l : r.body)
      for (const Term& t : l.atom.args) visit(t);
    for (const auto& u : r.updates)
      for (const Term& t : u.atom.args) visit(t);
    for (const auto& [a, b] : r.cstr.neqs) {
      visit(a);
      visit(b);
    }
    if (r.tail) {
      for (const auto& d : r.tail->matrix) {
        for (const auto& [v, t] : d.cstr.eqs) {
          visit(Term::var(v));
          visit(t);
        }
        for (const auto& [a, b] : d.cstr.neqs) {
          visit(a);
          visit(b);
        }
        for (const auto& l : d.lits)
          for (const Term& t : l.atom.args) visit(t);
      }
      for (const auto& q : r.tail->prefix) visit(Term::var(q.var));
    }

    bool identity = true;
    for (const auto& [from, to] : m)
      if (from != to) identity = false;
    if (identity) break;

    r.head = detail::map_atom(r.head, m);
    for (auto& l : r.body) l.atom = detail::map_atom(l.atom, m);
    std::vector<UpdateAtom> us;
    for (const auto& u : r.updates) us.push_back(UpdateAtom{u.op, detail::map_atom(u.atom, m)});
    r.updates = std::move(us);
    r.cstr = detail::map_constraint(r.cstr, m);
    if (r.tail) detail::map_tail(&*r.tail, m);
  }
  return r;
}

namespace detail {

// Conjunction of two prenex tails: prefixes concatenate (variables are
// globally fresh) and the matrices distribute.
inline Tail tail_and(const Tail& a, const Tail& b) {
  Tail out;
  out.prefix = a.prefix;
  out.prefix.insert(out.prefix.end(), b.prefix.begin(), b.prefix.end());
  for (const auto& da : a.matrix)
    for (const auto& db : b.matrix) {
      Tail::Disjunct d;
      d.cstr = conjoin(da.cstr, db.cstr);
      if (d.cstr.is_false()) continue;
      std::set<Literal> lits(da.lits.begin(), da.lits.end());
      lits.insert(db.lits.begin(), db.lits.end());
      d.lits.assign(lits.begin(), lits.end());
      out.matrix.push_back(std::move(d));
    }
  std::sort(out.matrix.begin(), out.matrix.end());
  out.matrix.erase(std::unique(out.matrix.begin(), out.matrix.end()), out.matrix.end());
  return out;
}

// One unfolding of one rule: every positive body atom is replaced by the
// body of a defining rule, in all combinations; constraints and updates
// conjoin and unsolvable results drop. Negative literals and tails ride
// along unchanged; defining rules may themselves carry tails, which conjoin
// into the result.
inline void unfold_rule(const Rule& target, const Definitions& defs, NameGen* gen,
                        const Universe& universe, std::vector<Rule>* out) {
  Rule r = rename_apart(target, gen);
  std::vector<Literal> negs;
  std::vector<Literal> pos;
  for (const Literal& l : r.body) (l.positive ? pos : negs).push_back(l);

  struct Partial {
    Constraint cstr;
    std::vector<UpdateAtom> updates;
    std::vector<Literal> body;
    std::optional<Tail> tail;
  };
  std::vector<Partial> acc{{r.cstr, r.updates, {}, r.tail}};
  for (const Literal& l : pos) {
    auto it = defs.find(l.atom.pred);
    const std::vector<Rule>* choices = it == defs.end() ? nullptr : &it->second;
    std::vector<Partial> next;
    if (choices) {
      for (const Rule& def : *choices) {
        Rule d = rename_apart(def, gen);
        std::vector<ConstraintAtom> eqs;
        for (std::size_t k = 0; k < l.atom.args.size(); ++k)
          eqs.push_back(ConstraintAtom{l.atom.args[k], d.head.args[k], true});
        Constraint link = conjoin_atoms(eqs);
        for (const Partial& p : acc) {
          Partial q = p;
          q.cstr = conjoin(conjoin(q.cstr, link), d.cstr);
          if (q.cstr.is_false()) continue;
          q.updates.insert(q.updates.end(), d.updates.begin(), d.updates.end());
          q.body.insert(q.body.end(), d.body.begin(), d.body.end());
          if (d.tail) q.tail = q.tail ? tail_and(*q.tail, *d.tail) : *d.tail;
          next.push_back(std::move(q));
        }
      }
    }
    acc = std::move(next);
    if (acc.empty()) return;
  }
  for (Partial& p : acc) {
    if (!solvable(p.cstr, p.updates, universe)) continue;
    Rule u;
    u.head = r.head;
    u.cstr = std::move(p.cstr);
    u.updates = std::move(p.updates);
    u.body = std::move(p.body);
    u.body.insert(u.body.end(), negs.begin(), negs.end());
    u.tail = std::move(p.tail);
    Rule canon = canonical_rule(std::move(u));
    if (!canon.cstr.is_false()) out->push_back(std::move(canon));
  }
}

}  // namespace detail

// The unfolding operator over whole programs: each rule of `targets`
// unfolded against `defs` in all ways.
inline std::vector<Rule> unfold(const std::vector<Rule>& targets, const Definitions& defs,
                                NameGen* gen, const Universe& universe = {}) {
  std::vector<Rule> out;
  for (const Rule& r : targets) detail::unfold_rule(r, defs, gen, universe, &out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Pure compositional fixpoint for negation-free programs: iterate unfolding
// against the accumulated set plus the extensional identities until the
// rule set stops changing. Recursion makes the set grow without bound, so a
// round limit guards the loop.
inline std::vector<Rule> tc_fixpoint(const Database& db, NameGen* gen, int bound = 32,
                                     const Universe& universe = {}) {
  for (const Rule& r : db.rules) {
    for (const Literal& l : r.body)
      if (!l.positive)
        throw std::invalid_argument("tc_fixpoint requires a negation-free program");
    if (r.tail) throw std::invalid_argument("tc_fixpoint requires rules without tails");
  }
  Definitions id = identity_rules(db);
  std::set<Rule> current;
  for (int round = 0; round < bound; ++round) {
    Definitions defs = id;
    for (const Rule& r : current) defs[r.head.pred].push_back(r);
    std::vector<Rule> stepped = unfold(db.rules, defs, gen, universe);
    std::set<Rule> next(stepped.begin(), stepped.end());
    if (next == current) return {current.begin(), current.end()};
    current = std::move(next);
  }
  throw BoundExceeded(bound);
}

namespace detail {

// Ground-cover redundancy over the finite universe: a candidate rule is
// redundant when each of its consistent ground instances is matched by some
// kept rule instance with the same head tuple, the same update set, and
// premises (positive and negative) contained in the candidate's. Containment
// of premises means any store deriving through the candidate also derives
// through the kept rule, so dropping the candidate never changes answers.
inline bool instance_covered(const Rule& cand, const Assignment& asg,
                             const std::vector<Rule>& kept, const Universe& universe) {
  auto ground_atom = [](const Atom& a, const Assignment& m) {
    Atom out{a.pred, {}};
    for (const Term& t : a.args) out.args.push_back(Term::constant(value_of(t, m)));
    return out;
  };
  Atom head = ground_atom(cand.head, asg);
  std::set<Atom> pos, neg;
  for (const Literal& l : cand.body) (l.positive ? pos : neg).insert(ground_atom(l.atom, asg));
  std::set<UpdateAtom> ups;
  for (const UpdateAtom& u : cand.updates) ups.insert(UpdateAtom{u.op, ground_atom(u.atom, asg)});

  for (const Rule& k : kept) {
    if (k.tail || k.head.pred != head.pred) continue;
    Assignment pinned;
    bool match = true;
    for (std::size_t i = 0; i < k.head.args.size() && match; ++i) {
      const Term& t = k.head.args[i];
      const std::string& v = head.args[i].name();
      if (t.is_const()) {
        match = t.name() == v;
      } else {
        auto it = pinned.find(t.name());
        if (it == pinned.end())
          pinned[t.name()] = v;
        else
          match = it->second == v;
      }
    }
    if (!match) continue;
    std::set<std::string> rest;
    collect_vars(k, &rest);
    for (const auto& [v, val] : pinned) rest.erase(v);
    bool found = any_assignment(sorted_vars(rest), universe, [&](const Assignment& free) {
      Assignment m = pinned;
      m.insert(free.begin(), free.end());
      if (!satisfies(m, k.cstr)) return false;
      std::set<UpdateAtom> kups;
      for (const UpdateAtom& u : k.updates) kups.insert(UpdateAtom{u.op, ground_atom(u.atom, m)});
      if (kups != ups) return false;
      for (const Literal& l : k.body) {
        Atom g = ground_atom(l.atom, m);
        if (!(l.positive ? pos : neg).count(g)) return false;
      }
      return true;
    });
    if (found) return true;
  }
  return false;
}

inline bool covered(const Rule& cand, const std::vector<Rule>& kept, const Universe& universe) {
  if (cand.tail || universe.empty()) return false;
  std::set<std::string> vars = vars_of(cand);
  double combos = 1;
  for (std::size_t i = 0; i < vars.size(); ++i) combos *= static_cast<double>(universe.size());
  if (combos > 65536) return false;
  return !any_assignment(sorted_vars(vars), universe, [&](const Assignment& asg) {
    if (!satisfies(asg, cand.cstr)) return false;
    if (!consistent_ground(cand.updates, asg)) return false;
    return !instance_covered(cand, asg, kept, universe);
  });
}

}  // namespace detail

struct UnfoldedStratum {
  int level = 1;
  std::vector<Rule> rules;
  int rounds = 0;
  bool saturated = true;
};

struct UnfoldResult {
  std::vector<UnfoldedStratum> strata;
  Universe universe;

  std::vector<Rule> rules() const {
    std::vector<Rule> out;
    for (const auto& s : strata) out.insert(out.end(), s.rules.begin(), s.rules.end());
    return out;
  }
};

struct UnfoldOptions {
  // Extra unfolding rounds allowed per stratum beyond the derived bound.
  int cap = 0;
};

namespace detail {

// Predicates of one stratum that can reach themselves through positive body
// atoms of the stratum's own rules. Only their unfoldings grow unboundedly;
// everything else stabilizes once its dependencies do.
inline std::set<std::string> recursive_heads(const std::vector<Rule>& targets) {
  std::set<std::string> heads;
  for (const Rule& r : targets) heads.insert(r.head.pred);
  std::map<std::string, std::set<std::string>> adj;
  for (const Rule& r : targets)
    for (const Literal& l : r.body)
      if (l.positive && heads.count(l.atom.pred)) adj[r.head.pred].insert(l.atom.pred);
  std::set<std::string> recursive;
  for (const std::string& p : heads) {
    std::set<std::string> seen;
    std::vector<std::string> work(adj[p].begin(), adj[p].end());
    while (!work.empty()) {
      std::string q = work.back();
      work.pop_back();
      if (!seen.insert(q).second) continue;
      if (q == p) {
        recursive.insert(p);
        break;
      }
      work.insert(work.end(), adj[q].begin(), adj[q].end());
    }
  }
  return recursive;
}

}  // namespace detail

// Positive unfolding with the finite-universe stopping rule: per stratum,
// iterate the unfolding operator until a round adds nothing. Candidates for
// recursive predicates are discarded when their ground instances are
// already covered by kept rules; that is what makes chain recursion stop,
// since chains longer than the universe revisit an element. Compositions
// through non-recursive predicates are kept in full. Rounds are capped at
// the universe size plus the stratum's predicate count.
inline UnfoldResult t_stable_pos(const Database& db, const Stratification& strat,
                                 const Universe& universe, NameGen* gen,
                                 const UnfoldOptions& options = {}) {
  UnfoldResult result;
  result.universe = universe;
  Definitions completed = identity_rules(db);
  for (int s = 1; s <= strat.stratum_count(); ++s) {
    UnfoldedStratum stratum;
    stratum.level = s;
    std::vector<Rule> targets;
    std::set<std::string> heads;
    for (std::size_t idx : strat.strata[static_cast<std::size_t>(s - 1)]) {
      targets.push_back(db.rules[idx]);
      heads.insert(db.rules[idx].head.pred);
    }
    std::set<std::string> recursive = detail::recursive_heads(targets);
    int cap = std::max(options.cap, static_cast<int>(universe.size()) +
                                        static_cast<int>(heads.size()) + 1);
    std::set<Rule> kept;
    std::vector<Rule> kept_vec;
    for (int round = 0; round < cap; ++round) {
      stratum.rounds = round + 1;
      Definitions defs = completed;
      for (const Rule& r : kept_vec) defs[r.head.pred].push_back(r);
      bool added = false;
      for (const Rule& cand : unfold(targets, defs, gen, universe)) {
        if (kept.count(cand)) continue;
        if (recursive.count(cand.head.pred) && detail::covered(cand, kept_vec, universe))
          continue;
        kept.insert(cand);
        kept_vec.push_back(cand);
        added = true;
      }
      if (!added) {
        stratum.saturated = true;
        break;
      }
      stratum.saturated = false;
    }
    std::sort(kept_vec.begin(), kept_vec.end());
    stratum.rules = kept_vec;
    for (const Rule& r : kept_vec) completed[r.head.pred].push_back(r);
    for (const std::string& h : heads) completed.try_emplace(h);
    result.strata.push_back(std::move(stratum));
  }
  return result;
}

namespace detail {

// A defining rule's body as a formula, with the head arguments replaced by
// the negated atom's terms, update atoms replaced by the constraints under
// which they are consistent, and local variables existentially quantified.
// The rule is canonicalized first so its equalities sit inside the atoms;
// otherwise every normalization variable would survive into the quantifier
// prefix of the negation.
inline Formula definition_formula(const Rule& def, const std::vector<Term>& args,
                                  NameGen* gen, const Universe& universe) {
  Rule d = canonical_rule(def);
  if (d.cstr.is_false()) return Formula::falsity();
  d = rename_apart(d, gen);
  std::map<std::string, Term> sub;
  std::vector<Formula> parts;
  for (std::size_t i = 0; i < d.head.args.size(); ++i) {
    const Term& h = d.head.args[i];
    if (h.is_var() && !sub.count(h.name())) {
      sub[h.name()] = args[i];
    } else {
      parts.push_back(Formula::cstr(ConstraintAtom{subst_term(h, sub), args[i], true}));
    }
  }
  for (const auto& [v, t] : d.cstr.eqs)
    parts.push_back(Formula::cstr(ConstraintAtom{subst_term(Term::var(v), sub),
                                                 subst_term(t, sub), true}));
  for (const auto& [a, b] : d.cstr.neqs)
    parts.push_back(Formula::cstr(ConstraintAtom{subst_term(a, sub), subst_term(b, sub), false}));

  if (!d.updates.empty()) {
    std::vector<UpdateAtom> us;
    for (const UpdateAtom& u : d.updates) us.push_back(UpdateAtom{u.op, subst_atom(u.atom, sub)});
    DisjunctiveConstraint sc = sol(us, universe);
    if (sc.is_false()) return Formula::falsity();
    std::vector<Formula> alts;
    for (const Constraint& c : sc.disjuncts) {
      std::vector<Formula> conj;
      for (const auto& [v, t] : c.eqs)
        conj.push_back(Formula::cstr(ConstraintAtom{Term::var(v), t, true}));
      for (const auto& [a, b] : c.neqs)
        conj.push_back(Formula::cstr(ConstraintAtom{a, b, false}));
      alts.push_back(Formula::conj(std::move(conj)));
    }
    parts.push_back(Formula::disj(std::move(alts)));
  }

  for (const Literal& l : d.body) {
    Literal sl{l.positive, subst_atom(l.atom, sub)};
    parts.push_back(Formula::literal(std::move(sl)));
  }

  std::set<std::string> quantified;
  if (d.tail) {
    std::vector<Formula> alts;
    for (const auto& disj : d.tail->matrix) {
      std::vector<Formula> conj;
      for (const auto& [v, t] : disj.cstr.eqs)
        conj.push_back(Formula::cstr(ConstraintAtom{subst_term(Term::var(v), sub),
                                                    subst_term(t, sub), true}));
      for (const auto& [a, b] : disj.cstr.neqs)
        conj.push_back(
            Formula::cstr(ConstraintAtom{subst_term(a, sub), subst_term(b, sub), false}));
      for (const Literal& l : disj.lits)
        conj.push_back(Formula::literal(Literal{l.positive, subst_atom(l.atom, sub)}));
      alts.push_back(Formula::conj(std::move(conj)));
    }
    Formula inner = Formula::disj(std::move(alts));
    for (auto it = d.tail->prefix.rbegin(); it != d.tail->prefix.rend(); ++it) {
      quantified.insert(it->var);
      inner = it->forall ? Formula::forall(it->var, std::move(inner))
                         : Formula::exists(it->var, std::move(inner));
    }
    parts.push_back(std::move(inner));
  }

  Formula body = Formula::conj(std::move(parts));
  std::set<std::string> locals = vars_of(d);
  for (const auto& [v, t] : sub) {
    (void)t;
    locals.erase(v);
  }
  for (const std::string& q : quantified) locals.erase(q);
  for (const std::string& v : locals) body = Formula::exists(v, std::move(body));
  return body;
}

// Predicates mentioned by literal nodes of a formula, with arities.
inline void formula_preds(const Formula& f, std::map<std::string, int>* out) {
  if (f.kind == Formula::Kind::kLit) (*out)[f.lit.atom.pred] = f.lit.atom.arity();
  for (const Formula& k : f.kids) formula_preds(k, out);
}

// Closed-world truth of a formula over an explicit ground fact set: a
// positive literal holds when its ground atom is present, a negative one
// when it is absent, and quantifiers range over the universe.
inline bool eval_formula(const Formula& f, const std::set<Atom>& facts,
                         const Universe& universe, Assignment* asg) {
  switch (f.kind) {
    case Formula::Kind::kTrue:
      return true;
    case Formula::Kind::kFalse:
      return false;
    case Formula::Kind::kCstr: {
      std::string l = value_of(f.catom.lhs, *asg);
      std::string r = value_of(f.catom.rhs, *asg);
      return f.catom.eq ? l == r : l != r;
    }
    case Formula::Kind::kLit: {
      Atom g{f.lit.atom.pred, {}};
      for (const Term& t : f.lit.atom.args) g.args.push_back(Term::constant(value_of(t, *asg)));
      return (facts.count(g) != 0) == f.lit.positive;
    }
    case Formula::Kind::kAnd:
      for (const Formula& k : f.kids)
        if (!eval_formula(k, facts, universe, asg)) return false;
      return true;
    case Formula::Kind::kOr:
      for (const Formula& k : f.kids)
        if (eval_formula(k, facts, universe, asg)) return true;
      return false;
    case Formula::Kind::kNot:
      return !eval_formula(f.kids[0], facts, universe, asg);
    case Formula::Kind::kForall:
    case Formula::Kind::kExists: {
      bool forall = f.kind == Formula::Kind::kForall;
      auto prev = asg->find(f.var);
      std::optional<std::string> saved;
      if (prev != asg->end()) saved = prev->second;
      bool result = forall;
      for (const std::string& c : universe) {
        (*asg)[f.var] = c;
        bool sub = eval_formula(f.kids[0], facts, universe, asg);
        if (forall && !sub) {
          result = false;
          break;
        }
        if (!forall && sub) {
          result = true;
          break;
        }
      }
      if (saved)
        (*asg)[f.var] = *saved;
      else
        asg->erase(f.var);
      return result;
    }
  }
  return true;
}

// Drops disjunction alternatives entailed by the remaining ones over every
// fact set of the mentioned predicates on the finite universe. A longer
// derivation chain, for instance, implies a shorter one wherever both exist,
// so its alternative adds nothing and its negation would only bloat the
// tail. Bounded: runs only when the predicates admit at most 512 fact sets,
// which covers one binary predicate over three constants.
inline void prune_entailed_alts(std::vector<Formula>* alts, const std::vector<Term>& args,
                                const Universe& universe) {
  if (alts->size() < 2 || alts->size() >= 64 || universe.empty()) return;
  std::map<std::string, int> preds;
  for (const Formula& f : *alts) formula_preds(f, &preds);
  double bits = 0;
  for (const auto& [p, n] : preds) {
    double tuples = 1;
    for (int i = 0; i < n; ++i) tuples *= static_cast<double>(universe.size());
    bits += tuples;
  }
  if (bits > 9) return;

  std::vector<Atom> ground;
  for (const auto& [p, n] : preds) {
    std::vector<std::string> slots;
    for (int i = 0; i < n; ++i) slots.push_back("#" + std::to_string(i));
    any_assignment(slots, universe, [&](const Assignment& a) {
      Atom g{p, {}};
      for (const std::string& v : slots) g.args.push_back(Term::constant(a.at(v)));
      ground.push_back(std::move(g));
      return false;
    });
  }

  std::set<std::string> frees;
  for (const Term& t : args) collect_vars(t, &frees);

  // Truth of every alternative per (fact set, free assignment) row.
  std::vector<std::uint64_t> rows;
  const std::uint32_t edbs = std::uint32_t{1} << ground.size();
  for (std::uint32_t mask = 0; mask < edbs; ++mask) {
    std::set<Atom> facts;
    for (std::size_t i = 0; i < ground.size(); ++i)
      if (mask & (std::uint32_t{1} << i)) facts.insert(ground[i]);
    any_assignment(sorted_vars(frees), universe, [&](const Assignment& outer) {
      Assignment asg = outer;
      std::uint64_t row = 0;
      for (std::size_t j = 0; j < alts->size(); ++j)
        if (eval_formula((*alts)[j], facts, universe, &asg)) row |= std::uint64_t{1} << j;
      rows.push_back(row);
      return false;
    });
  }

  // Greedy from the back, so later (longer) alternatives drop first.
  std::uint64_t kept = (std::uint64_t{1} << alts->size()) - 1;
  for (std::size_t j = alts->size(); j-- > 0;) {
    std::uint64_t bit = std::uint64_t{1} << j;
    std::uint64_t others = kept & ~bit;
    bool covered = std::all_of(rows.begin(), rows.end(), [&](std::uint64_t row) {
      return !(row & bit) || (row & others);
    });
    if (covered) kept = others;
  }
  std::vector<Formula> out;
  for (std::size_t j = 0; j < alts->size(); ++j)
    if (kept & (std::uint64_t{1} << j)) out.push_back(std::move((*alts)[j]));
  *alts = std::move(out);
}

// Matrix-level simplification: a disjunct drops when another one holds
// whenever it does (fewer literals, weaker constraint), and a disjunct with
// no literals and a true constraint makes the whole tail vacuous.
inline void simplify_tail(Tail* tail, const Universe& universe) {
  for (const auto& d : tail->matrix) {
    if (d.lits.empty() && d.cstr.is_true()) {
      tail->prefix.clear();
      tail->matrix = {Tail::Disjunct{}};
      return;
    }
  }
  std::vector<Tail::Disjunct> pruned;
  for (std::size_t i = 0; i < tail->matrix.size(); ++i) {
    const auto& di = tail->matrix[i];
    bool drop = false;
    for (std::size_t j = 0; j < tail->matrix.size() && !drop; ++j) {
      if (i == j) continue;
      const auto& dj = tail->matrix[j];
      if (j > i && dj == di) {
        drop = true;
        break;
      }
      bool lits_sub = std::includes(di.lits.begin(), di.lits.end(), dj.lits.begin(),
                                    dj.lits.end());
      if (lits_sub && !(dj == di) && entails(di.cstr, dj.cstr, universe)) drop = true;
    }
    if (!drop) pruned.push_back(di);
  }
  tail->matrix = std::move(pruned);
  std::set<std::string> used;
  for (const auto& d : tail->matrix) {
    collect_vars(d.cstr, &used);
    for (const auto& l : d.lits) collect_vars(l, &used);
  }
  std::erase_if(tail->prefix, [&](const Tail::Quant& q) { return !used.count(q.var); });
}

// Solvability of rule constraint, updates, and the constraint skeleton of a
// quantified tail: literals are ignored, making this a necessary condition
// for the rule ever to fire.
inline bool tail_skeleton_solvable(const Constraint& cstr, const std::vector<UpdateAtom>& us,
                                   const Tail& tail, const Universe& universe) {
  std::set<std::string> free = vars_of(cstr);
  for (const auto& u : us) collect_vars(u, &free);
  std::set<std::string> bound;
  for (const auto& q : tail.prefix) bound.insert(q.var);
  for (const auto& d : tail.matrix) {
    std::set<std::string> vs = vars_of(d.cstr);
    for (const std::string& v : vs)
      if (!bound.count(v)) free.insert(v);
  }
  std::function<bool(std::size_t, Assignment&)> quant = [&](std::size_t qi,
                                                            Assignment& asg) -> bool {
    if (qi == tail.prefix.size()) {
      for (const auto& d : tail.matrix)
        if (satisfies(asg, d.cstr)) return true;
      return false;
    }
    const auto& q = tail.prefix[qi];
    bool result = q.forall;
    for (const std::string& c : universe) {
      asg[q.var] = c;
      bool sub = quant(qi + 1, asg);
      asg.erase(q.var);
      if (q.forall && !sub) return false;
      if (!q.forall && sub) return true;
    }
    return result;
  };
  return any_assignment(sorted_vars(free), universe, [&](const Assignment& outer) {
    if (!satisfies(outer, cstr)) return false;
    if (!consistent_ground(us, outer)) return false;
    Assignment asg = outer;
    return quant(0, asg);
  });
}

}  // namespace detail

// Negation of a set of defining bodies, as used to unfold one negated atom:
// each definition contributes its body formula, the disjunction is negated,
// and the result is put in prenex disjunctive normal form and simplified.
// No definitions means nothing derives the atom, so the result is true.
inline Tail neg_c(const std::vector<Rule>& defs, const std::vector<Term>& args, NameGen* gen,
                  const Universe& universe) {
  std::vector<Formula> alts;
  for (const Rule& def : defs)
    alts.push_back(detail::definition_formula(def, args, gen, universe));
  detail::prune_entailed_alts(&alts, args, universe);
  Tail tail = to_prenex_dnf(Formula::negate(Formula::disj(std::move(alts))), gen);
  detail::simplify_tail(&tail, universe);
  return tail;
}

// Negative unfolding of one stratum: every rule's negated atoms become one
// conjoined quantified tail built from the completed definitions, and rules
// whose constraint-plus-tail skeleton cannot be satisfied drop. Tails carry
// no updates; update atoms of the negated definitions only contribute their
// consistency constraints.
inline std::vector<Rule> u_neg(const std::vector<Rule>& stratum, const Definitions& defs,
                               const Universe& universe, NameGen* gen) {
  std::vector<Rule> out;
  for (const Rule& source : stratum) {
    Rule r = rename_apart(source, gen);
    std::vector<Literal> negs;
    Rule kept;
    kept.head = r.head;
    kept.cstr = r.cstr;
    kept.updates = r.updates;
    kept.tail = r.tail;
    for (const Literal& l : r.body) {
      if (l.positive)
        kept.body.push_back(l);
      else
        negs.push_back(l);
    }
    bool solvable_rule = true;
    for (const Literal& n : negs) {
      auto it = defs.find(n.atom.pred);
      if (it == defs.end()) throw MissingDefinition(n.atom.pred);
      Tail t = neg_c(it->second, n.atom.args, gen, universe);
      if (t.matrix.empty()) {
        solvable_rule = false;
        break;
      }
      kept.tail = kept.tail ? detail::tail_and(*kept.tail, t) : std::move(t);
    }
    if (!solvable_rule) continue;
    if (kept.tail) {
      detail::simplify_tail(&*kept.tail, universe);
      if (kept.tail->matrix.empty()) continue;
      if (kept.tail->prefix.empty() && kept.tail->matrix.size() == 1 &&
          kept.tail->matrix[0].cstr.is_true() && kept.tail->matrix[0].lits.empty())
        kept.tail.reset();
    }
    if (kept.tail) {
      if (!detail::tail_skeleton_solvable(kept.cstr, kept.updates, *kept.tail, universe))
        continue;
    } else if (!solvable(kept.cstr, kept.updates, universe)) {
      continue;
    }
    Rule canon = canonical_rule(std::move(kept));
    if (!canon.cstr.is_false()) out.push_back(std::move(canon));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Full precompilation: positive unfolding per stratum, then negative
// unfolding against the cumulative completed definitions of the lower
// strata. The output mentions extensional predicates only.
inline UnfoldResult compose(const Database& db, const Stratification& strat,
                            const Universe& universe, NameGen* gen,
                            const UnfoldOptions& options = {}) {
  UnfoldResult pos = t_stable_pos(db, strat, universe, gen, options);
  UnfoldResult result;
  result.universe = universe;
  Definitions completed = identity_rules(db);
  for (const UnfoldedStratum& s : pos.strata) {
    UnfoldedStratum barred;
    barred.level = s.level;
    barred.rounds = s.rounds;
    barred.saturated = s.saturated;
    barred.rules = u_neg(s.rules, completed, universe, gen);
    // Heads come from the source stratum, not the unfolded rules: a predicate
    // whose rules all proved unsolvable still needs its (empty) definition
    // recorded so later strata can negate it.
    std::set<std::string> heads;
    for (std::size_t idx : strat.strata[static_cast<std::size_t>(s.level - 1)])
      heads.insert(db.rules[idx].head.pred);
    for (const Rule& r : barred.rules) completed[r.head.pred].push_back(r);
    for (const std::string& h : heads) completed.try_emplace(h);
    result.strata.push_back(std::move(barred));
  }
  return result;
}

inline UnfoldResult compose(const Database& db, NameGen* gen,
                            const UnfoldOptions& options = {}) {
  return compose(db, stratify(db), db.universe(), gen, options);
}

}  // namespace udatalog
