// Copyright 2026 the udatalog authors
// SPDX-License-Identifier: Apache-2.0

#include "udatalog/parser.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <fstream>

namespace udatalog {
namespace {

TEST_CASE("facts parse ground and extensional") {
  Database db = parse_program("p(a,a).\nq(2).\n");
  REQUIRE(db.facts.size() == 2);
  CHECK(db.facts[0] == (Atom{"p", {Term::constant("a"), Term::constant("a")}}));
  CHECK(db.facts[1] == (Atom{"q", {Term::constant("2")}}));
  CHECK(db.extensional.count("p"));
  CHECK(db.arity.at("p") == 2);
  CHECK(db.universe() == std::vector<std::string>{"2", "a"});
}

TEST_CASE("rule atoms are normalized onto fresh variables") {
  Database db = parse_program("rem_man(X,Y) :- -dep_A(Y), emp_man(X,Y).");
  REQUIRE(db.rules.size() == 1);
  const Rule& r = db.rules[0];
  // Every atom position is a distinct variable.
  std::set<std::string> positions;
  auto note = [&](const Atom& a) {
    for (const Term& t : a.args) {
      REQUIRE(t.is_var());
      CHECK(positions.insert(t.name()).second);
    }
  };
  note(r.head);
  for (const auto& u : r.updates) note(u.atom);
  for (const auto& l : r.body) note(l.atom);
  // The constraint ties head X to body X and update Y to head and body Y.
  Constraint c = r.cstr;
  CHECK(c.resolve(r.head.args[0]) == c.resolve(r.body[0].atom.args[0]));
  CHECK(c.resolve(r.head.args[1]) == c.resolve(r.body[0].atom.args[1]));
  CHECK(c.resolve(r.head.args[1]) == c.resolve(r.updates[0].atom.args[0]));
  CHECK(c.resolve(r.head.args[0]) != c.resolve(r.head.args[1]));
}

TEST_CASE("repeated head variables and constants move into the constraint") {
  Database db = parse_program("p(X,X) :- q(X).\nr(a) :- q(a).");
  const Rule& same = db.rules[0];
  CHECK(same.cstr.resolve(same.head.args[0]) == same.cstr.resolve(same.head.args[1]));
  const Rule& con = db.rules[1];
  CHECK(con.cstr.resolve(con.head.args[0]) == Term::constant("a"));
}

TEST_CASE("negated self-dependency is a parse-level non-event") {
  Database db = parse_program("q(X) :- not q(X).");
  REQUIRE(db.rules.size() == 1);
  CHECK_FALSE(db.rules[0].body[0].positive);
}

TEST_CASE("goals collect source variables in first-occurrence order") {
  Goal g = parse_goal("?- rem_man(B,Y), not dep_B(Y), B=b.");
  CHECK(g.vars == std::vector<std::string>{"B", "Y"});
  CHECK(g.body.size() == 2);
  Goal u = parse_goal("?- +p(a).");
  CHECK(u.vars.empty());
  CHECK(u.body.empty());
  REQUIRE(u.updates.size() == 1);
  CHECK(u.updates[0].op == UpdateAtom::Op::kInsert);
}

TEST_CASE("directives extend the universe and declare predicates") {
  Database db = parse_program("#domain d, 7.\n#extensional p/2.\nq(a).");
  CHECK(db.universe() == std::vector<std::string>{"7", "a", "d"});
  CHECK(db.extensional.count("p"));
  CHECK(db.arity.at("p") == 2);
}

TEST_CASE("body-only predicates are extensional") {
  Database db = parse_program("p(X) :- q(X).");
  CHECK(db.extensional.count("q"));
  CHECK_FALSE(db.extensional.count("p"));
}

TEST_CASE("load errors") {
  CHECK_THROWS_AS(parse_program("p(X)."), ParseError);  // non-ground fact
  CHECK_THROWS_AS(parse_program("p(a,b).\np(a)."), ParseError);  // arity clash
  CHECK_THROWS_AS(parse_program("p(a).\np(X) :- q(X)."), ParseError);  // overlap
  CHECK_THROWS_AS(parse_program("#extensional p/1.\np(X) :- q(X)."), ParseError);
  CHECK_THROWS_AS(parse_program("p(X) :- +q(X).\nq(X) :- r(X)."), ParseError);
  CHECK_THROWS_AS(parse_program("#frobnicate a."), ParseError);
  CHECK_THROWS_AS(parse_program("p(a"), ParseError);
  CHECK_THROWS_AS(parse_goal("?- p(X), ."), ParseError);

  try {
    parse_program("p(a).\nq(b) :- r(b), s(b)\nw(c).");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);  // the missing '.' is noticed at 'w'
    CHECK(std::string(e.what()).find("expected") != std::string::npos);
  }
}

TEST_CASE("fact stores reject rules") {
  Database db = parse_fact_store("#domain d.\np(a).\n");
  CHECK(db.facts.size() == 1);
  CHECK_THROWS_AS(parse_fact_store("p(a).\nq(X) :- p(X)."), ParseError);
}

TEST_CASE("canonical printing folds normalization equalities back") {
  Database db = parse_program(
      "rem_man(X,Y) :- -dep_A(Y), emp_man(X,Y).\n"
      "p(X,X) :- q(X).\n"
      "r(a) :- true.\n"
      "s(X) :- X!=a, q(X).\n");
  CHECK(to_source(db.rules[0]) == "rem_man(X,Y) :- -dep_A(Y), emp_man(X,Y).");
  CHECK(to_source(db.rules[1]) == "p(X,X) :- q(X).");
  CHECK(to_source(db.rules[2]) == "r(a) :- true.");
  CHECK(to_source(db.rules[3]) == "s(X) :- X!=a, q(X).");
}

TEST_CASE("extended rules with quantified tails round-trip") {
  std::string text =
      "change_man(X) :- X=Y, +emp_man(X,Y), dep_B(X) "
      "|> forall Z (X=Z ; not emp_man(X,Z)).";
  Database db = parse_program(text);
  REQUIRE(db.rules.size() == 1);
  const Rule& r = db.rules[0];
  REQUIRE(r.tail.has_value());
  REQUIRE(r.tail->prefix.size() == 1);
  CHECK(r.tail->prefix[0].forall);
  CHECK(r.tail->prefix[0].var == "Z");
  REQUIRE(r.tail->matrix.size() == 2);
  CHECK(r.tail->matrix[0].lits.empty());
  CHECK(r.tail->matrix[1].lits.size() == 1);
  CHECK_FALSE(r.tail->matrix[1].lits[0].positive);
  // Tail predicates count as body occurrences for classification.
  CHECK(db.extensional.count("emp_man"));

  std::string once = to_source(db);
  NameGen g1, g2;
  Database again = parse_program(once, &g1);
  CHECK(to_source(again) == once);
  Database sample = parse_program(
      "#domain d.\nemp_man(b,c).\nrem_man(X,Y) :- -dep_A(Y), emp_man(X,Y).\n", &g2);
  std::string s1 = to_source(sample);
  CHECK(to_source(parse_program(s1)) == s1);
}

TEST_CASE("goal printing is parseable") {
  Goal g = parse_goal("?- ins_man(X).");
  CHECK(to_source(g) == "?- ins_man(X).");
  Goal h = parse_goal("?- rem_man(b,Y), not dep_B(Y).");
  CHECK(to_source(h) == "?- rem_man(b,Y), not dep_B(Y).");
}

TEST_CASE("constrained literal display renames to V1,V2") {
  ConstrainedLiteral cl;
  cl.lit = {true, Atom{"ins_man", {Term::var("_1")}}};
  cl.cstr = conjoin_atoms({{Term::var("_1"), Term::constant("b"), true}});
  cl.updates = {{UpdateAtom::Op::kInsert, Atom{"dep_A", {Term::constant("b")}}},
                {UpdateAtom::Op::kDelete, Atom{"dep_A", {Term::constant("c")}}}};
  CHECK(to_source(cl) == "ins_man(b) :- +dep_A(b), -dep_A(c).");

  ConstrainedLiteral neg;
  neg.lit = {false, Atom{"dep_A", {Term::var("_1")}}};
  neg.cstr = conjoin_atoms({{Term::var("_1"), Term::constant("b"), false},
                            {Term::var("_1"), Term::constant("c"), false}});
  CHECK(to_source(neg) == "not dep_A(V1) :- V1!=b, V1!=c.");
}

TEST_CASE("sample programs load") {
  // Paths are relative to the repository root, where ctest runs.
  for (const char* path : {"samples/departments.udl", "samples/departments_neg.udl"}) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    Database db = parse_program(buf.str());
    CHECK(db.facts.size() == 5);
    CHECK(db.rules.size() >= 3);
  }
}

}  // namespace
}  // namespace udatalog
