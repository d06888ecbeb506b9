// Copyright 2026 the udatalog authors
// SPDX-License-Identifier: Apache-2.0
//
// Update-phase tests: pooling solution updates, the global consistency
// check, atomic commit/abort against the fact store, order independence of
// a consistent application, and fact-store persistence.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <random>

#include "udatalog/parser.hpp"
#include "udatalog/transaction.hpp"

using namespace udatalog;

namespace {

Atom atom(const std::string& pred, const std::vector<std::string>& args) {
  Atom a{pred, {}};
  for (const auto& c : args) a.args.push_back(Term::constant(c));
  return a;
}

UpdateAtom ins(const std::string& pred, const std::vector<std::string>& args) {
  return {UpdateAtom::Op::kInsert, atom(pred, args)};
}

UpdateAtom del(const std::string& pred, const std::vector<std::string>& args) {
  return {UpdateAtom::Op::kDelete, atom(pred, args)};
}

const char* kDepartments = R"(
emp_man(b, b).
emp_man(b, c).
dep_A(b).
dep_A(c).
dep_B(b).
rem_man(X, Y) :- -dep_A(Y), emp_man(X, Y).
rem_man(X, Y) :- -dep_A(Y), emp_man(X, Z), rem_man(Z, Y).
ins_man(X) :- +dep_A(X), rem_man(X, Y).
)";

}  // namespace

TEST_CASE("manager reassignment commits and rewrites the department store") {
  NameGen gen;
  Database db = parse_program(kDepartments, &gen);
  Goal g = parse_goal("?- ins_man(X).", &gen);
  TransactionOutcome out = apply_transaction(g, &db, &gen);

  REQUIRE(out.committed());
  REQUIRE(out.solutions.size() == 1);
  CHECK(out.updates == std::vector<UpdateAtom>{ins("dep_A", {"b"}), del("dep_A", {"c"})});
  std::vector<Atom> want = {atom("dep_A", {"b"}), atom("dep_B", {"b"}),
                            atom("emp_man", {"b", "b"}), atom("emp_man", {"b", "c"})};
  std::sort(want.begin(), want.end());
  CHECK(out.new_edb == want);
  std::vector<Atom> facts = db.facts;
  std::sort(facts.begin(), facts.end());
  CHECK(facts == want);
}

TEST_CASE("a goal with no solutions commits with an empty update set") {
  NameGen gen;
  Database db = parse_program("p(a).\nq(X) :- +p(X), r(X).\n", &gen);
  std::string before = render_edb(db);
  Goal g = parse_goal("?- q(X).", &gen);
  TransactionOutcome out = apply_transaction(g, &db, &gen);
  CHECK(out.committed());
  CHECK(out.solutions.empty());
  CHECK(out.updates.empty());
  CHECK(render_edb(db) == before);
}

TEST_CASE("solutions that clash jointly abort and leave the store untouched") {
  NameGen gen;
  // Each solution of p is consistent alone; pooled they insert and delete
  // q(a) at once.
  Database db = parse_program(R"(
r(a).
r(b).
p(X) :- X = a, +q(a), r(X).
p(X) :- X = b, -q(a), r(X).
)",
                              &gen);
  std::string before = render_edb(db);

  NameGen probe;
  Database probe_db = parse_program(R"(
r(a).
r(b).
p(X) :- X = a, +q(a), r(X).
p(X) :- X = b, -q(a), r(X).
)",
                                    &probe);
  FixpointResult fr = stratified_fixpoint(probe_db, &probe);
  Goal pg = parse_goal("?- p(X).", &probe);
  std::vector<Solution> sols = answers(pg, fr.fix(), &probe);
  REQUIRE(sols.size() == 2);
  for (const Solution& s : sols) CHECK(consistent_ground(s.updates, Assignment{}));

  Goal g = parse_goal("?- p(X).", &gen);
  TransactionOutcome out = apply_transaction(g, &db, &gen);
  CHECK_FALSE(out.committed());
  CHECK(out.reason == TransactionOutcome::AbortReason::kInconsistent);
  CHECK(out.solutions.empty());
  CHECK(render_edb(db) == before);

  // Aborting is stable: the same goal on the unchanged store aborts again.
  TransactionOutcome again = apply_transaction(g, &db, &gen);
  CHECK(again.reason == TransactionOutcome::AbortReason::kInconsistent);
  CHECK(render_edb(db) == before);
}

TEST_CASE("committed update sets never contain an insert/delete pair") {
  NameGen gen;
  Database db = parse_program(kDepartments, &gen);
  Goal g = parse_goal("?- ins_man(X).", &gen);
  TransactionOutcome out = apply_transaction(g, &db, &gen);
  REQUIRE(out.committed());
  for (const UpdateAtom& u : out.updates) {
    UpdateAtom flipped{u.op == UpdateAtom::Op::kInsert ? UpdateAtom::Op::kDelete
                                                       : UpdateAtom::Op::kInsert,
                       u.atom};
    CHECK(std::find(out.updates.begin(), out.updates.end(), flipped) == out.updates.end());
  }
}

TEST_CASE("consistent ground updates apply the same in any order") {
  std::vector<Atom> facts = {atom("p", {"a"}), atom("p", {"b"}), atom("q", {"a", "b"})};
  std::vector<UpdateAtom> u = {del("p", {"a"}), ins("p", {"c"}), del("q", {"a", "b"}),
                               ins("q", {"b", "b"}), ins("p", {"b"}), del("r", {"a"})};
  std::vector<Atom> want = apply_updates(facts, u);

  std::mt19937 rng(7);
  for (int round = 0; round < 32; ++round) {
    std::vector<UpdateAtom> shuffled = u;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::set<Atom> state(facts.begin(), facts.end());
    for (const UpdateAtom& ua : shuffled) detail::apply_one(&state, ua);
    CHECK(std::vector<Atom>(state.begin(), state.end()) == want);
  }
}

TEST_CASE("settle rejects non-ground update sets defensively") {
  Solution s;
  s.bindings = Constraint::truth();
  s.updates = {UpdateAtom{UpdateAtom::Op::kInsert, Atom{"p", {Term::var("X")}}}};
  TransactionOutcome out = settle({s}, {atom("q", {"a"})});
  CHECK_FALSE(out.committed());
  CHECK(out.reason == TransactionOutcome::AbortReason::kNonGround);
  CHECK(out.new_edb == std::vector<Atom>{atom("q", {"a"})});
  CHECK(out.solutions.empty());
}

TEST_CASE("analysis failures surface as errors before the update phase") {
  NameGen gen;
  SECTION("unstratifiable program") {
    Database db = parse_program("p(X) :- q(X), not p(X).\nq(a).\n", &gen);
    Goal g = parse_goal("?- p(X).", &gen);
    CHECK_THROWS_AS(apply_transaction(g, &db, &gen), NotStratifiableError);
  }
  SECTION("inadmissible goal") {
    Database db = parse_program("#extensional q/1.\np(X) :- +q(Y), r(X).\nr(a).\n", &gen);
    std::string before = render_edb(db);
    Goal g = parse_goal("?- p(X).", &gen);
    CHECK_THROWS_AS(apply_transaction(g, &db, &gen), SafetyError);
    CHECK(render_edb(db) == before);
  }
}

TEST_CASE("insertions may introduce new constants and predicates") {
  NameGen gen;
  Database db = parse_program("p(a).\nq(X) :- +s(X, e), p(X).\n", &gen);
  Goal g = parse_goal("?- q(X).", &gen);
  TransactionOutcome out = apply_transaction(g, &db, &gen);
  REQUIRE(out.committed());
  CHECK(out.new_edb == std::vector<Atom>{atom("p", {"a"}), atom("s", {"a", "e"})});
  CHECK(db.arity.at("s") == 2);
  CHECK(db.universe() == Universe{"a", "e"});
}

TEST_CASE("fact stores round-trip through save and load") {
  NameGen gen;
  Database db = parse_program(R"(
#domain d.
emp_man(b, b).
dep_A(b).
dep_A(c).
)",
                              &gen);
  const std::string path = "/tmp/udatalog_tx_roundtrip.udl";
  save_edb(db, path);
  Database back = load_edb(path);
  std::remove(path.c_str());

  std::vector<Atom> want = db.facts;
  std::sort(want.begin(), want.end());
  std::vector<Atom> got = back.facts;
  std::sort(got.begin(), got.end());
  CHECK(got == want);
  CHECK(back.universe() == db.universe());
  CHECK(back.rules.empty());
  CHECK(back.arity.at("emp_man") == 2);
}

TEST_CASE("the saved universe survives deletions of its last witnesses") {
  NameGen gen;
  Database db = parse_program("p(a).\np(b).\n", &gen);
  const std::string path = "/tmp/udatalog_tx_pinned.udl";
  Goal g = parse_goal("?- -p(b), p(a).", &gen);
  TransactionOutcome out = apply_transaction(g, &db, &gen);
  REQUIRE(out.committed());
  // b no longer occurs in any fact, yet the store pins it.
  REQUIRE(db.universe() == Universe{"a"});
  db.domain_extra.insert("b");
  save_edb(db, path);
  Database back = load_edb(path);
  std::remove(path.c_str());
  CHECK(back.universe() == Universe{"a", "b"});
  CHECK(back.facts == std::vector<Atom>{atom("p", {"a"})});
}

TEST_CASE("loading a file with rules is a fact-store error") {
  const std::string path = "/tmp/udatalog_tx_rules.udl";
  {
    std::ofstream f(path);
    f << "p(a).\nq(X) :- p(X).\n";
  }
  CHECK_THROWS_AS(load_edb(path), ParseError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_edb("/tmp/udatalog_no_such_file.udl"), std::runtime_error);
}

TEST_CASE("empty stores save and load as empty") {
  Database db;
  const std::string path = "/tmp/udatalog_tx_empty.udl";
  save_edb(db, path);
  Database back = load_edb(path);
  std::remove(path.c_str());
  CHECK(back.facts.empty());
  CHECK(back.universe().empty());
}
