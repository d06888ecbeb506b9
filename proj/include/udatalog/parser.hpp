// Copyright 2026 the udatalog authors
// SPDX-License-Identifier: Apache-2.0
//
// Concrete syntax for programs, fact stores and goals, plus the canonical
// pretty-printer. Conventions: lowercase identifiers are constants and
// predicate names, uppercase or underscore-initial identifiers are variables,
// bare integers are constants. ':-' separates head and body, '+'/'-' mark
// update atoms, 'not' negates a body literal, '=' and '!=' write constraints,
// '%' starts a line comment, and every clause ends with '.'. Directives:
// '#domain c1, ..., cn.' declares extra universe constants and
// '#extensional p/2.' declares an extensional predicate. Precompiled rules
// carry a quantified tail after '|>': 'forall'/'exists' prefixes and a
// parenthesized ';'-separated disjunction.
//
// Loading is all-or-nothing: any error throws ParseError with line/column.
// Rules are normalized on the way in: every head, update and body atom
// position becomes a distinct fresh variable and the original terms move
// into the rule constraint as equalities. The printer folds single-use
// equalities back into argument positions, so print-then-parse is identity
// up to fresh-variable numbering.

#pragma once

#include <cctype>
#include <sstream>
#include <stdexcept>

#include "udatalog/ast.hpp"
#include "udatalog/constraints.hpp"

namespace udatalog {

struct ParseError : std::runtime_error {
  int line;
  int col;
  ParseError(int line_, int col_, const std::string& msg)
      : std::runtime_error(std::to_string(line_) + ":" + std::to_string(col_) + ": " + msg),
        line(line_),
        col(col_) {}
};

namespace detail {

enum class Tok {
  kIdent,    // lowercase identifier: constant or predicate
  kVar,      // uppercase or underscore identifier
  kNumber,   // integer constant
  kLParen,
  kRParen,
  kComma,
  kDot,
  kColonDash,  // :-
  kQueryDash,  // ?-
  kPlus,
  kMinus,
  kEq,
  kNeq,    // !=
  kSemi,   // ;
  kDiamond,  // |>
  kSlash,
  kDirDomain,       // #domain
  kDirExtensional,  // #extensional
  kNot,
  kForall,
  kExists,
  kTrue,
  kFalse,
  kEnd,
};

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  int line = 1;
  int col = 1;
};

inline const char* token_name(Tok t) {
  switch (t) {
    case Tok::kIdent: return "identifier";
    case Tok::kVar: return "variable";
    case Tok::kNumber: return "number";
    case Tok::kLParen: return "'('";
    case Tok::kRParen: return "')'";
    case Tok::kComma: return "','";
    case Tok::kDot: return "'.'";
    case Tok::kColonDash: return "':-'";
    case Tok::kQueryDash: return "'?-'";
    case Tok::kPlus: return "'+'";
    case Tok::kMinus: return "'-'";
    case Tok::kEq: return "'='";
    case Tok::kNeq: return "'!='";
    case Tok::kSemi: return "';'";
    case Tok::kDiamond: return "'|>'";
    case Tok::kSlash: return "'/'";
    case Tok::kDirDomain: return "'#domain'";
    case Tok::kDirExtensional: return "'#extensional'";
    case Tok::kNot: return "'not'";
    case Tok::kForall: return "'forall'";
    case Tok::kExists: return "'exists'";
    case Tok::kTrue: return "'true'";
    case Tok::kFalse: return "'false'";
    case Tok::kEnd: return "end of input";
  }
  return "?";
}

inline std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i + k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '%') {
      std::size_t j = i;
      while (j < text.size() && text[j] != '\n') ++j;
      advance(j - i);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      t.text = text.substr(i, j - i);
      if (t.text == "not")
        t.kind = Tok::kNot;
      else if (t.text == "forall")
        t.kind = Tok::kForall;
      else if (t.text == "exists")
        t.kind = Tok::kExists;
      else if (t.text == "true")
        t.kind = Tok::kTrue;
      else if (t.text == "false")
        t.kind = Tok::kFalse;
      else if (std::isupper(static_cast<unsigned char>(c)) || c == '_')
        t.kind = Tok::kVar;
      else
        t.kind = Tok::kIdent;
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      t.kind = Tok::kNumber;
      t.text = text.substr(i, j - i);
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    auto two = [&](char a, char b) {
      return c == a && i + 1 < text.size() && text[i + 1] == b;
    };
    if (two(':', '-')) {
      t.kind = Tok::kColonDash;
      advance(2);
    } else if (two('?', '-')) {
      t.kind = Tok::kQueryDash;
      advance(2);
    } else if (two('!', '=')) {
      t.kind = Tok::kNeq;
      advance(2);
    } else if (two('|', '>')) {
      t.kind = Tok::kDiamond;
      advance(2);
    } else if (c == '#') {
      std::size_t j = i + 1;
      while (j < text.size() &&
             std::isalpha(static_cast<unsigned char>(text[j])))
        ++j;
      std::string word = text.substr(i + 1, j - i - 1);
      if (word == "domain")
        t.kind = Tok::kDirDomain;
      else if (word == "extensional")
        t.kind = Tok::kDirExtensional;
      else
        throw ParseError(line, col, "unknown directive '#" + word + "'");
      advance(j - i);
    } else {
      switch (c) {
        case '(': t.kind = Tok::kLParen; break;
        case ')': t.kind = Tok::kRParen; break;
        case ',': t.kind = Tok::kComma; break;
        case '.': t.kind = Tok::kDot; break;
        case '+': t.kind = Tok::kPlus; break;
        case '-': t.kind = Tok::kMinus; break;
        case '=': t.kind = Tok::kEq; break;
        case ';': t.kind = Tok::kSemi; break;
        case '/': t.kind = Tok::kSlash; break;
        default:
          throw ParseError(line, col, std::string("unexpected character '") + c + "'");
      }
      advance(1);
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::kEnd;
  end.line = line;
  end.col = col;
  out.push_back(std::move(end));
  return out;
}

// One clause body item, before assembly into a rule or goal.
struct BodyParts {
  std::vector<ConstraintAtom> catoms;
  bool falsity = false;
  std::vector<UpdateAtom> updates;
  std::vector<Literal> lits;
};

class Parser {
 public:
  Parser(const std::string& text, NameGen* gen, bool facts_only)
      : tokens_(lex(text)), gen_(gen), facts_only_(facts_only) {}

  Database program() {
    while (peek().kind != Tok::kEnd) {
      if (peek().kind == Tok::kDirDomain)
        domain_directive();
      else if (peek().kind == Tok::kDirExtensional)
        extensional_directive();
      else
        clause();
    }
    finish_checks();
    return std::move(db_);
  }

  Goal goal() {
    if (peek().kind == Tok::kQueryDash) next();
    Goal g;
    BodyParts parts = body(&g.vars);
    if (peek().kind == Tok::kDot) next();
    expect(Tok::kEnd, "end of goal");
    g.cstr = conjoin_atoms(parts.catoms);
    if (parts.falsity) g.cstr = Constraint::falsity();
    g.updates = std::move(parts.updates);
    g.body = std::move(parts.lits);
    return g;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t j = pos_ + ahead;
    return tokens_[std::min(j, tokens_.size() - 1)];
  }
  const Token& next() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }
  [[noreturn]] void fail(const Token& at, const std::string& msg) const {
    throw ParseError(at.line, at.col, msg);
  }
  const Token& expect(Tok kind, const std::string& what) {
    if (peek().kind != kind)
      fail(peek(), "expected " + what + ", found " + token_name(peek().kind) +
                       (peek().text.empty() ? "" : " '" + peek().text + "'"));
    return next();
  }

  Term term(std::vector<std::string>* var_order) {
    const Token& t = peek();
    if (t.kind == Tok::kVar) {
      next();
      if (var_order &&
          std::find(var_order->begin(), var_order->end(), t.text) == var_order->end())
        var_order->push_back(t.text);
      return Term::var(t.text);
    }
    if (t.kind == Tok::kIdent || t.kind == Tok::kNumber) {
      next();
      return Term::constant(t.text);
    }
    fail(t, "expected a term (variable, constant or number)");
  }

  Atom atom(std::vector<std::string>* var_order) {
    const Token& name = expect(Tok::kIdent, "a predicate name");
    Atom a{name.text, {}};
    if (peek().kind == Tok::kLParen) {
      next();
      a.args.push_back(term(var_order));
      while (peek().kind == Tok::kComma) {
        next();
        a.args.push_back(term(var_order));
      }
      expect(Tok::kRParen, "')' or ','");
    }
    declare_arity(a.pred, a.arity(), name);
    return a;
  }

  void declare_arity(const std::string& pred, int arity, const Token& at) {
    auto [it, inserted] = db_.arity.emplace(pred, arity);
    if (!inserted && it->second != arity)
      fail(at, "arity clash for predicate '" + pred + "': " + std::to_string(arity) +
                   " here, " + std::to_string(it->second) + " before");
  }

  // Replaces every argument by a distinct fresh variable, emitting the
  // equalities that tie the fresh variables to the source terms.
  Atom normalized(const Atom& a, std::vector<ConstraintAtom>* eqs) {
    Atom out{a.pred, {}};
    for (const Term& t : a.args) {
      Term v = Term::var(gen_->fresh());
      eqs->push_back({v, t, true});
      out.args.push_back(std::move(v));
    }
    return out;
  }

  BodyParts body(std::vector<std::string>* var_order) {
    BodyParts parts;
    while (true) {
      const Token& t = peek();
      switch (t.kind) {
        case Tok::kTrue:
          next();
          break;
        case Tok::kFalse:
          next();
          parts.falsity = true;
          break;
        case Tok::kPlus:
        case Tok::kMinus: {
          bool ins = t.kind == Tok::kPlus;
          next();
          Atom a = atom(var_order);
          update_pos_.emplace(a.pred, t);
          parts.updates.push_back(
              {ins ? UpdateAtom::Op::kInsert : UpdateAtom::Op::kDelete,
               normalized(a, &parts.catoms)});
          break;
        }
        case Tok::kNot: {
          next();
          parts.lits.push_back({false, normalized(atom(var_order), &parts.catoms)});
          break;
        }
        case Tok::kIdent:
          if (peek(1).kind == Tok::kEq || peek(1).kind == Tok::kNeq) {
            constraint_item(&parts, var_order);
          } else {
            parts.lits.push_back({true, normalized(atom(var_order), &parts.catoms)});
          }
          break;
        case Tok::kVar:
        case Tok::kNumber:
          constraint_item(&parts, var_order);
          break;
        default:
          fail(t, "expected a body item (atom, 'not', '+', '-', constraint or 'true')");
      }
      if (peek().kind != Tok::kComma) break;
      next();
    }
    return parts;
  }

  void constraint_item(BodyParts* parts, std::vector<std::string>* var_order) {
    Term lhs = term(var_order);
    bool eq;
    if (peek().kind == Tok::kEq)
      eq = true;
    else if (peek().kind == Tok::kNeq)
      eq = false;
    else
      fail(peek(), "expected '=' or '!=' after a term");
    next();
    Term rhs = term(var_order);
    parts->catoms.push_back({std::move(lhs), std::move(rhs), eq});
  }

  Tail tail(std::vector<std::string>* var_order) {
    Tail t;
    while (peek().kind == Tok::kForall || peek().kind == Tok::kExists) {
      bool fa = peek().kind == Tok::kForall;
      next();
      const Token& v = expect(Tok::kVar, "a quantified variable");
      t.prefix.push_back({fa, v.text});
    }
    bool parens = peek().kind == Tok::kLParen;
    if (parens) next();
    t.matrix.push_back(tail_disjunct(var_order));
    while (parens && peek().kind == Tok::kSemi) {
      next();
      t.matrix.push_back(tail_disjunct(var_order));
    }
    if (parens) expect(Tok::kRParen, "')' or ';'");
    return t;
  }

  Tail::Disjunct tail_disjunct(std::vector<std::string>* var_order) {
    Tail::Disjunct d;
    std::vector<ConstraintAtom> catoms;
    bool falsity = false;
    while (true) {
      const Token& t = peek();
      switch (t.kind) {
        case Tok::kTrue:
          next();
          break;
        case Tok::kFalse:
          next();
          falsity = true;
          break;
        case Tok::kNot:
          next();
          d.lits.push_back({false, atom(var_order)});
          break;
        case Tok::kIdent:
          if (peek(1).kind == Tok::kEq || peek(1).kind == Tok::kNeq) {
            Term lhs = term(var_order);
            bool eq = next().kind == Tok::kEq;
            catoms.push_back({std::move(lhs), term(var_order), eq});
          } else {
            d.lits.push_back({true, atom(var_order)});
          }
          break;
        case Tok::kVar:
        case Tok::kNumber: {
          Term lhs = term(var_order);
          if (peek().kind != Tok::kEq && peek().kind != Tok::kNeq)
            fail(peek(), "expected '=' or '!=' after a term");
          bool eq = next().kind == Tok::kEq;
          catoms.push_back({std::move(lhs), term(var_order), eq});
          break;
        }
        default:
          fail(t, "expected a tail item (literal, constraint or 'true')");
      }
      if (peek().kind != Tok::kComma) break;
      next();
    }
    d.cstr = falsity ? Constraint::falsity() : conjoin_atoms(catoms);
    return d;
  }

  void clause() {
    const Token& start = peek();
    Atom head = atom(nullptr);
    if (peek().kind == Tok::kDot) {
      next();
      if (!is_ground(head))
        fail(start, "fact '" + head.pred + "' must be ground");
      db_.facts.push_back(head);
      db_.extensional.insert(head.pred);
      fact_pos_.emplace(head.pred, start);
      return;
    }
    if (facts_only_)
      fail(peek(), "fact store may contain only ground facts, found a rule for '" +
                       head.pred + "'");
    expect(Tok::kColonDash, "'.' or ':-'");
    Rule r;
    std::vector<ConstraintAtom> eqs;
    r.head = normalized(head, &eqs);
    BodyParts parts = body(nullptr);
    eqs.insert(eqs.end(), parts.catoms.begin(), parts.catoms.end());
    r.updates = std::move(parts.updates);
    r.body = std::move(parts.lits);
    if (peek().kind == Tok::kDiamond) {
      next();
      r.tail = tail(nullptr);
    }
    expect(Tok::kDot, "'.'");
    r.cstr = conjoin_atoms(eqs);
    if (parts.falsity) r.cstr = Constraint::falsity();
    intensional_pos_.emplace(head.pred, start);
    db_.rules.push_back(std::move(r));
  }

  void domain_directive() {
    next();
    while (true) {
      const Token& t = peek();
      if (t.kind != Tok::kIdent && t.kind != Tok::kNumber)
        fail(t, "expected a constant in #domain");
      db_.domain_extra.insert(t.text);
      next();
      if (peek().kind != Tok::kComma) break;
      next();
    }
    expect(Tok::kDot, "'.'");
  }

  void extensional_directive() {
    next();
    const Token& name = expect(Tok::kIdent, "a predicate name");
    expect(Tok::kSlash, "'/'");
    const Token& n = expect(Tok::kNumber, "an arity");
    expect(Tok::kDot, "'.'");
    declare_arity(name.text, std::stoi(n.text), name);
    db_.extensional.insert(name.text);
    fact_pos_.emplace(name.text, name);
  }

  void finish_checks() {
    std::set<std::string> intensional;
    for (const auto& [pred, tok] : intensional_pos_) {
      intensional.insert(pred);
      if (db_.extensional.count(pred))
        fail(fact_pos_.count(pred) ? fact_pos_.at(pred) : tok,
             "predicate '" + pred + "' is both extensional (facts or directives) and "
             "defined by rules");
    }
    for (const auto& [pred, tok] : update_pos_) {
      if (intensional.count(pred))
        fail(tok, "update atom on intensional predicate '" + pred + "'");
      db_.extensional.insert(pred);
    }
    // Predicates that occur only in body or tail positions are extensional
    // with an empty fact set.
    for (const Rule& r : db_.rules) {
      auto classify = [&](const Atom& a) {
        if (!intensional.count(a.pred)) db_.extensional.insert(a.pred);
      };
      for (const Literal& l : r.body) classify(l.atom);
      if (r.tail)
        for (const auto& d : r.tail->matrix)
          for (const Literal& l : d.lits) classify(l.atom);
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  NameGen* gen_;
  bool facts_only_;
  Database db_;
  std::map<std::string, Token> fact_pos_;
  std::map<std::string, Token> intensional_pos_;
  std::map<std::string, Token> update_pos_;
};

}  // namespace detail

// Loads a full program. Fresh normalization variables come from `gen`;
// callers that evaluate afterwards should pass their session generator so
// names stay unique across the session.
inline Database parse_program(const std::string& text, NameGen* gen = nullptr) {
  NameGen local;
  return detail::Parser(text, gen ? gen : &local, /*facts_only=*/false).program();
}

// Loads a saved fact store: ground facts and directives only.
inline Database parse_fact_store(const std::string& text) {
  NameGen local;
  return detail::Parser(text, &local, /*facts_only=*/true).program();
}

inline Goal parse_goal(const std::string& text, NameGen* gen = nullptr) {
  NameGen local;
  return detail::Parser(text, gen ? gen : &local, /*facts_only=*/false).goal();
}

// ---------------------------------------------------------------------------
// Canonical source rendering. Equalities introduced by load-time
// normalization are folded back into argument positions via the constraint's
// substitution; equalities on variables that appear in no atom are printed
// explicitly, as are all disequalities.

namespace detail {

inline std::string render_term(const Term& t, const Constraint& cstr) {
  return cstr.resolve(t).name();
}

inline std::string render_atom(const Atom& a, const Constraint& cstr) {
  std::string out = a.pred;
  if (!a.args.empty()) {
    out += "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      if (i) out += ",";
      out += render_term(a.args[i], cstr);
    }
    out += ")";
  }
  return out;
}

// Body items shared by rules and goals: residual constraints, then updates,
// then literals.
inline std::vector<std::string> render_items(const Constraint& cstr,
                                             const std::vector<UpdateAtom>& updates,
                                             const std::vector<Literal>& lits,
                                             const std::set<std::string>& atom_vars) {
  std::vector<std::string> items;
  if (cstr.is_false()) {
    items.push_back("false");
    return items;
  }
  for (const auto& [v, t] : cstr.eqs)
    if (!atom_vars.count(v)) items.push_back(v + "=" + t.name());
  for (const auto& [a, b] : cstr.neqs) items.push_back(a.name() + "!=" + b.name());
  for (const UpdateAtom& u : updates)
    items.push_back((u.op == UpdateAtom::Op::kInsert ? "+" : "-") +
                    render_atom(u.atom, cstr));
  for (const Literal& l : lits)
    items.push_back((l.positive ? "" : "not ") + render_atom(l.atom, cstr));
  return items;
}

// Variables appearing in atom positions of the rule or goal; equalities on
// these fold into the positions and need no explicit rendering.
template <typename Obj>
std::set<std::string> atom_position_vars(const Obj& o) {
  std::set<std::string> vs;
  auto add = [&](const Atom& a) {
    for (const Term& t : a.args)
      if (t.is_var()) vs.insert(t.name());
  };
  for (const UpdateAtom& u : o.updates) add(u.atom);
  for (const Literal& l : o.body) add(l.atom);
  return vs;
}

inline std::string render_tail(const Tail& t, const Constraint& outer) {
  std::string out;
  for (const auto& q : t.prefix) out += (q.forall ? "forall " : "exists ") + q.var + " ";
  out += "(";
  for (std::size_t i = 0; i < t.matrix.size(); ++i) {
    if (i) out += " ; ";
    const auto& d = t.matrix[i];
    std::vector<std::string> items;
    if (d.cstr.is_false()) {
      items.push_back("false");
    } else {
      for (const auto& [v, tm] : d.cstr.eqs) items.push_back(v + "=" + tm.name());
      for (const auto& [a, b] : d.cstr.neqs) items.push_back(a.name() + "!=" + b.name());
    }
    for (const Literal& l : d.lits)
      items.push_back((l.positive ? "" : "not ") + render_atom(l.atom, outer));
    if (items.empty()) items.push_back("true");
    for (std::size_t k = 0; k < items.size(); ++k) {
      if (k) out += ", ";
      out += items[k];
    }
  }
  out += ")";
  return out;
}

}  // namespace detail

inline std::string to_source(const Term& t) { return t.name(); }

inline std::string to_source(const Atom& a) {
  return detail::render_atom(a, Constraint::truth());
}

inline std::string to_source(const Literal& l) {
  return (l.positive ? "" : "not ") + to_source(l.atom);
}

inline std::string to_source(const UpdateAtom& u) {
  return (u.op == UpdateAtom::Op::kInsert ? "+" : "-") + to_source(u.atom);
}

inline std::string to_source(const Rule& r) {
  std::set<std::string> atom_vars = detail::atom_position_vars(r);
  for (const Term& t : r.head.args)
    if (t.is_var()) atom_vars.insert(t.name());
  std::vector<std::string> items = detail::render_items(r.cstr, r.updates, r.body, atom_vars);
  std::string out = detail::render_atom(r.head, r.cstr) + " :- ";
  if (items.empty()) items.push_back("true");
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  if (r.tail) out += " |> " + detail::render_tail(*r.tail, r.cstr);
  return out + ".";
}

inline std::string to_source(const Goal& g) {
  std::set<std::string> atom_vars = detail::atom_position_vars(g);
  std::vector<std::string> items = detail::render_items(g.cstr, g.updates, g.body, atom_vars);
  if (items.empty()) items.push_back("true");
  std::string out = "?- ";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out + ".";
}

// Display form of a stored constrained literal: variables renamed to V1,V2...
// in first-occurrence order (head, then constraint, then updates), constants
// folded into positions.
inline std::string to_source(const ConstrainedLiteral& cl) {
  std::map<std::string, Term> display;
  int n = 0;
  auto disp = [&](const Term& t) {
    if (t.is_const()) return t;
    auto [it, fresh] = display.emplace(t.name(), Term::var(""));
    if (fresh) it->second = Term::var("V" + std::to_string(++n));
    return it->second;
  };
  const Constraint& c = cl.cstr;
  std::set<std::string> position_vars;
  for (const Term& t : cl.lit.atom.args)
    if (t.is_var()) position_vars.insert(t.name());
  for (const UpdateAtom& u : cl.updates)
    for (const Term& t : u.atom.args)
      if (t.is_var()) position_vars.insert(t.name());

  Atom head_atom = cl.lit.atom;
  for (Term& t : head_atom.args) t = disp(c.resolve(t));
  std::vector<std::string> items;
  if (c.is_false()) items.push_back("false");
  for (const auto& [v, t] : c.eqs) {
    if (c.is_false()) break;
    if (position_vars.count(v)) continue;  // folded into a position
    Term lhs = disp(Term::var(v));
    items.push_back(lhs.name() + "=" + disp(t).name());
  }
  if (!c.is_false())
    for (const auto& [a, b] : c.neqs)
      items.push_back(disp(a).name() + "!=" + disp(b).name());
  for (const UpdateAtom& u : cl.updates) {
    Atom ua = u.atom;
    for (Term& t : ua.args) t = disp(c.resolve(t));
    items.push_back((u.op == UpdateAtom::Op::kInsert ? "+" : "-") +
                    detail::render_atom(ua, Constraint::truth()));
  }
  std::string head = (cl.lit.positive ? "" : "not ") +
                     detail::render_atom(head_atom, Constraint::truth());
  if (items.empty()) return head + ".";
  std::string out = head + " :- ";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out + ".";
}

// Full program rendering: universe directive, extensional declarations,
// sorted facts, rules in definition order.
inline std::string to_source(const Database& db) {
  std::ostringstream out;
  std::vector<std::string> universe = db.universe();
  if (!universe.empty()) {
    out << "#domain ";
    for (std::size_t i = 0; i < universe.size(); ++i) {
      if (i) out << ", ";
      out << universe[i];
    }
    out << ".\n";
  }
  for (const std::string& pred : db.extensional)
    out << "#extensional " << pred << "/" << db.arity.at(pred) << ".\n";
  std::vector<Atom> facts = db.facts;
  std::sort(facts.begin(), facts.end());
  for (const Atom& f : facts) out << to_source(f) << ".\n";
  for (const Rule& r : db.rules) out << to_source(r) << "\n";
  return out.str();
}

}  // namespace udatalog
