// Copyright 2026 the udatalog authors
// SPDX-License-Identifier: Apache-2.0
//
// Core syntax values: terms, atoms, literals, update atoms, conjunctive
// equality/disequality constraints, rules, goals and databases. Everything is
// a plain value with structural ordering, so any of it can live in std::set
// or std::map keys. Fresh-variable renaming and binding application are here
// too since every other header needs them.

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace udatalog {

// A term is a variable or a constant, identified by name. Source variables
// start with an upper-case letter; machine-made variables start with '_' and
// can therefore never collide with source names.
class Term {
 public:
  enum class Kind { kConst, kVar };

  Term() = default;
  static Term var(std::string name) { return Term(Kind::kVar, std::move(name)); }
  static Term constant(std::string name) { return Term(Kind::kConst, std::move(name)); }

  Kind kind() const { return kind_; }
  bool is_var() const { return kind_ == Kind::kVar; }
  bool is_const() const { return kind_ == Kind::kConst; }
  const std::string& name() const { return name_; }

  auto operator<=>(const Term&) const = default;

 private:
  Term(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  Kind kind_ = Kind::kConst;
  std::string name_;
};

// Shortlex order on names: length first, then lexicographic. Used whenever a
// deterministic representative must be picked from an equivalence class, so
// that user names ("X") win over generated ones ("_g12").
inline bool shortlex_less(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

// Picks the canonical side of a variable/variable pair: constants beat
// variables, otherwise the shortlex-smaller name.
inline bool term_prefer(const Term& a, const Term& b) {
  if (a.is_const() != b.is_const()) return a.is_const();
  return shortlex_less(a.name(), b.name());
}

struct Atom {
  std::string pred;
  std::vector<Term> args;

  int arity() const { return static_cast<int>(args.size()); }
  auto operator<=>(const Atom&) const = default;
};

struct Literal {
  bool positive = true;
  Atom atom;

  auto operator<=>(const Literal&) const = default;
};

// A deferred update: +p(t...) marks tuples for insertion, -p(t...) for
// deletion. Updates never take effect during marking; they are collected in
// answers and applied atomically afterwards.
struct UpdateAtom {
  enum class Op { kInsert, kDelete };

  Op op = Op::kInsert;
  Atom atom;

  auto operator<=>(const UpdateAtom&) const = default;
};

// Conjunction of equalities and disequalities over terms, or the
// distinguished unsatisfiable constraint. `eqs` is kept as an idempotent
// substitution (every binding target is fully resolved); `neqs` holds pairs
// whose left side is always a variable and, for variable/variable pairs, the
// shortlex-smaller one. normalize() in constraints.hpp establishes the
// invariants; raw mutation is only for building.
struct Constraint {
  bool unsat = false;
  std::map<std::string, Term> eqs;
  std::set<std::pair<Term, Term>> neqs;

  bool is_false() const { return unsat; }
  bool is_true() const { return !unsat && eqs.empty() && neqs.empty(); }

  // Follows the substitution from `t` to its representative. Normal forms
  // resolve in one step; the loop is a guard for un-normalized input.
  Term resolve(Term t) const {
    int guard = 0;
    while (t.is_var() && guard++ < 1024) {
      auto it = eqs.find(t.name());
      if (it == eqs.end()) break;
      t = it->second;
    }
    return t;
  }

  static Constraint truth() { return Constraint{}; }
  static Constraint falsity() {
    Constraint c;
    c.unsat = true;
    return c;
  }

  auto operator<=>(const Constraint&) const = default;
};

// One atomic constraint as written in source, before normalization.
struct ConstraintAtom {
  Term lhs;
  Term rhs;
  bool eq = true;

  auto operator<=>(const ConstraintAtom&) const = default;
};

// Prenex tail of a precompiled rule: a quantifier prefix over a disjunction
// of conjunctions, each conjunction mixing constraints and literals. Tails
// are pure tests; they never carry update atoms.
struct Tail {
  struct Quant {
    bool forall = true;
    std::string var;
    auto operator<=>(const Quant&) const = default;
  };
  struct Disjunct {
    Constraint cstr;
    std::vector<Literal> lits;
    auto operator<=>(const Disjunct&) const = default;
  };

  std::vector<Quant> prefix;
  std::vector<Disjunct> matrix;

  auto operator<=>(const Tail&) const = default;
};

// A rule after load-time normalization: every atom position (head, update,
// body) holds a distinct fresh variable, and all constants or repeated
// variables from the source live in `cstr`. `tail`, when present, makes this
// a precompiled rule.
struct Rule {
  Atom head;
  Constraint cstr;
  std::vector<UpdateAtom> updates;
  std::vector<Literal> body;
  std::optional<Tail> tail;

  auto operator<=>(const Rule&) const = default;
};

// A goal is a rule without a head. `vars` lists the source variables in
// first-occurrence order; answers are reported over exactly these.
struct Goal {
  Constraint cstr;
  std::vector<UpdateAtom> updates;
  std::vector<Literal> body;
  std::vector<std::string> vars;

  auto operator<=>(const Goal&) const = default;
};

// Element of an interpretation: a (possibly negative) literal that holds
// under a constraint, annotated with the updates its derivations marked.
// Negative literals never carry updates. Head arguments are distinct
// variables; canonical storage renames them to _1.._k.
struct ConstrainedLiteral {
  Literal lit;
  Constraint cstr;
  std::vector<UpdateAtom> updates;

  auto operator<=>(const ConstrainedLiteral&) const = default;
};

// A loaded program: intensional rules, ground extensional facts, and the
// declared universe. `extensional` also contains predicates that only occur
// in facts, update atoms or body positions; `arity` covers every predicate
// seen anywhere.
struct Database {
  std::vector<Rule> rules;
  std::vector<Atom> facts;
  std::set<std::string> extensional;
  std::set<std::string> domain_extra;
  std::map<std::string, int> arity;

  // Active constants of facts and rules plus #domain extras, sorted.
  std::vector<std::string> universe() const;

  auto operator<=>(const Database&) const = default;
};

// Fresh-variable source. One instance per evaluation session; names are
// "_g<n>" and never collide with source variables or canonical names.
class NameGen {
 public:
  explicit NameGen(std::uint64_t start = 0) : next_(start) {}
  std::string fresh() { return "_g" + std::to_string(next_++); }
  std::uint64_t counter() const { return next_; }

 private:
  std::uint64_t next_;
};

// ---------------------------------------------------------------------------
// Variable collection.

inline void collect_vars(const Term& t, std::set<std::string>* out) {
  if (t.is_var()) out->insert(t.name());
}

inline void collect_vars(const Atom& a, std::set<std::string>* out) {
  for (const Term& t : a.args) collect_vars(t, out);
}

inline void collect_vars(const Literal& l, std::set<std::string>* out) {
  collect_vars(l.atom, out);
}

inline void collect_vars(const UpdateAtom& u, std::set<std::string>* out) {
  collect_vars(u.atom, out);
}

inline void collect_vars(const Constraint& c, std::set<std::string>* out) {
  for (const auto& [v, t] : c.eqs) {
    out->insert(v);
    collect_vars(t, out);
  }
  for (const auto& [a, b] : c.neqs) {
    collect_vars(a, out);
    collect_vars(b, out);
  }
}

inline void collect_vars(const Tail& t, std::set<std::string>* out) {
  for (const auto& q : t.prefix) out->insert(q.var);
  for (const auto& d : t.matrix) {
    collect_vars(d.cstr, out);
    for (const Literal& l : d.lits) collect_vars(l, out);
  }
}

inline void collect_vars(const Rule& r, std::set<std::string>* out) {
  collect_vars(r.head, out);
  collect_vars(r.cstr, out);
  for (const auto& u : r.updates) collect_vars(u, out);
  for (const auto& l : r.body) collect_vars(l, out);
  if (r.tail) collect_vars(*r.tail, out);
}

inline void collect_vars(const Goal& g, std::set<std::string>* out) {
  collect_vars(g.cstr, out);
  for (const auto& u : g.updates) collect_vars(u, out);
  for (const auto& l : g.body) collect_vars(l, out);
}

inline void collect_vars(const ConstrainedLiteral& cl, std::set<std::string>* out) {
  collect_vars(cl.lit, out);
  collect_vars(cl.cstr, out);
  for (const auto& u : cl.updates) collect_vars(u, out);
}

template <class T>
std::set<std::string> vars_of(const T& x) {
  std::set<std::string> out;
  collect_vars(x, &out);
  return out;
}

// Free variables of a tail: matrix variables minus the quantified prefix.
inline std::set<std::string> tail_free_vars(const Tail& t) {
  std::set<std::string> all = vars_of(t);
  for (const auto& q : t.prefix) all.erase(q.var);
  return all;
}

// ---------------------------------------------------------------------------
// Renaming apart. Every variable of the value gets a fresh name; distinct
// calls can never produce overlapping variables.

class Renaming {
 public:
  explicit Renaming(NameGen* gen) : gen_(gen) {}

  Term operator()(const Term& t) {
    if (!t.is_var()) return t;
    auto [it, fresh] = map_.try_emplace(t.name());
    if (fresh) it->second = gen_->fresh();
    return Term::var(it->second);
  }

  Atom operator()(const Atom& a) {
    Atom out{a.pred, {}};
    out.args.reserve(a.args.size());
    for (const Term& t : a.args) out.args.push_back((*this)(t));
    return out;
  }

  Literal operator()(const Literal& l) { return Literal{l.positive, (*this)(l.atom)}; }

  UpdateAtom operator()(const UpdateAtom& u) { return UpdateAtom{u.op, (*this)(u.atom)}; }

  Constraint operator()(const Constraint& c) {
    Constraint out;
    out.unsat = c.unsat;
    for (const auto& [v, t] : c.eqs) out.eqs.emplace((*this)(Term::var(v)).name(), (*this)(t));
    for (const auto& [a, b] : c.neqs) out.neqs.emplace((*this)(a), (*this)(b));
    return out;
  }

  Tail operator()(const Tail& t) {
    Tail out;
    for (const auto& q : t.prefix) out.prefix.push_back({q.forall, (*this)(Term::var(q.var)).name()});
    for (const auto& d : t.matrix) {
      Tail::Disjunct nd;
      nd.cstr = (*this)(d.cstr);
      for (const Literal& l : d.lits) nd.lits.push_back((*this)(l));
      out.matrix.push_back(std::move(nd));
    }
    return out;
  }

  const std::map<std::string, std::string>& map() const { return map_; }

 private:
  NameGen* gen_;
  std::map<std::string, std::string> map_;
};

inline Rule rename_apart(const Rule& r, NameGen* gen) {
  Renaming rn(gen);
  Rule out;
  out.head = rn(r.head);
  out.cstr = rn(r.cstr);
  for (const auto& u : r.updates) out.updates.push_back(rn(u));
  for (const auto& l : r.body) out.body.push_back(rn(l));
  if (r.tail) out.tail = rn(*r.tail);
  return out;
}

inline ConstrainedLiteral rename_apart(const ConstrainedLiteral& cl, NameGen* gen) {
  Renaming rn(gen);
  return ConstrainedLiteral{rn(cl.lit), rn(cl.cstr), [&] {
                              std::vector<UpdateAtom> us;
                              for (const auto& u : cl.updates) us.push_back(rn(u));
                              return us;
                            }()};
}

// ---------------------------------------------------------------------------
// Binding application: replaces every variable by its representative under
// the constraint's equalities.

inline Atom apply_bindings(const Atom& a, const Constraint& c) {
  Atom out{a.pred, {}};
  out.args.reserve(a.args.size());
  for (const Term& t : a.args) out.args.push_back(c.resolve(t));
  return out;
}

inline Literal apply_bindings(const Literal& l, const Constraint& c) {
  return Literal{l.positive, apply_bindings(l.atom, c)};
}

inline UpdateAtom apply_bindings(const UpdateAtom& u, const Constraint& c) {
  return UpdateAtom{u.op, apply_bindings(u.atom, c)};
}

inline std::vector<UpdateAtom> apply_bindings(const std::vector<UpdateAtom>& us,
                                              const Constraint& c) {
  std::set<UpdateAtom> dedup;
  for (const auto& u : us) dedup.insert(apply_bindings(u, c));
  return std::vector<UpdateAtom>(dedup.begin(), dedup.end());
}

inline bool is_ground(const Atom& a) {
  for (const Term& t : a.args)
    if (t.is_var()) return false;
  return true;
}

inline bool is_ground(const UpdateAtom& u) { return is_ground(u.atom); }

// ---------------------------------------------------------------------------
// Plain structural printing. Program-level pretty printing (folding equality
// bindings back into atom positions) lives in parser.hpp.

inline std::string to_string(const Term& t) { return t.name(); }

inline std::string to_string(const Atom& a) {
  if (a.args.empty()) return a.pred;
  std::string out = a.pred + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ",";
    out += a.args[i].name();
  }
  return out + ")";
}

inline std::string to_string(const Literal& l) {
  return l.positive ? to_string(l.atom) : "not " + to_string(l.atom);
}

inline std::string to_string(const UpdateAtom& u) {
  return (u.op == UpdateAtom::Op::kInsert ? "+" : "-") + to_string(u.atom);
}

inline std::string to_string(const Constraint& c) {
  if (c.unsat) return "false";
  if (c.is_true()) return "true";
  std::string out;
  auto add = [&](const std::string& piece) {
    if (!out.empty()) out += ", ";
    out += piece;
  };
  for (const auto& [v, t] : c.eqs) add(v + "=" + t.name());
  for (const auto& [a, b] : c.neqs) add(a.name() + "!=" + b.name());
  return out;
}

inline std::vector<std::string> Database::universe() const {
  std::set<std::string> consts(domain_extra.begin(), domain_extra.end());
  auto from_term = [&](const Term& t) {
    if (t.is_const()) consts.insert(t.name());
  };
  auto from_atom = [&](const Atom& a) {
    for (const Term& t : a.args) from_term(t);
  };
  auto from_cstr = [&](const Constraint& c) {
    for (const auto& [v, t] : c.eqs) from_term(t);
    for (const auto& [a, b] : c.neqs) {
      from_term(a);
      from_term(b);
    }
  };
  for (const Atom& f : facts) from_atom(f);
  for (const Rule& r : rules) {
    from_atom(r.head);
    from_cstr(r.cstr);
    for (const auto& u : r.updates) from_atom(u.atom);
    for (const auto& l : r.body) from_atom(l.atom);
    if (r.tail)
      for (const auto& d : r.tail->matrix) {
        from_cstr(d.cstr);
        for (const auto& l : d.lits) from_atom(l.atom);
      }
  }
  return std::vector<std::string>(consts.begin(), consts.end());
}

}  // namespace udatalog
