// Copyright 2026 the udatalog authors
// SPDX-License-Identifier: Apache-2.0
//
// Stratification and admissibility tests.

#include <catch2/catch_amalgamated.hpp>

#include "udatalog/analysis.hpp"
#include "udatalog/parser.hpp"

using namespace udatalog;

namespace {

// The department management program: rule 1/2 derive manager removals
// (directly and through management chains), rule 3 inserts the removed
// manager into department A, rules 4/5 reassign or self-assign a manager.
const char* kDepartments = R"(
#domain d.
emp_man(b, b).
emp_man(b, c).
dep_A(b).
dep_A(c).
dep_B(b).

rem_man(X, Y) :- -dep_A(Y), emp_man(X, Y).
rem_man(X, Y) :- -dep_A(Y), emp_man(X, Z), rem_man(Z, Y).
ins_man(X) :- +dep_A(X), rem_man(X, Y).
change_man(X) :- -emp_man(X, Y), dep_B(X), dep_A(Y).
change_man(X) :- X = Y, +emp_man(X, Y), dep_B(X), not ins_man(X).
)";

}  // namespace

TEST_CASE("negation-free programs form a single stratum") {
  Database db = parse_program(R"(
p(X) :- q(X).
q(a).
r(X) :- p(X), q(X).
)");
  Stratification s = stratify(db);
  REQUIRE(s.stratum_count() == 1);
  CHECK(s.level.at("p") == 1);
  CHECK(s.level.at("q") == 1);
  CHECK(s.level.at("r") == 1);
  CHECK(s.strata[0].size() == 2);
  CHECK(verify_stratification(db, s));
}

TEST_CASE("canonical levels are minimal") {
  Database db = parse_program(kDepartments);
  Stratification s = stratify(db);
  // Only change_man sits above its negated dependency ins_man; everything
  // else stays at the bottom because minimal levels merge strata that the
  // negation does not force apart.
  REQUIRE(s.stratum_count() == 2);
  CHECK(s.level.at("emp_man") == 1);
  CHECK(s.level.at("dep_A") == 1);
  CHECK(s.level.at("dep_B") == 1);
  CHECK(s.level.at("rem_man") == 1);
  CHECK(s.level.at("ins_man") == 1);
  CHECK(s.level.at("change_man") == 2);
  CHECK(s.strata[0] == std::vector<std::size_t>{0, 1, 2});
  CHECK(s.strata[1] == std::vector<std::size_t>{3, 4});
  CHECK(verify_stratification(db, s));
}

TEST_CASE("negative self-dependency is rejected with a witness") {
  Database db = parse_program("p(X) :- not p(X), q(X).\nq(a).\n");
  try {
    stratify(db);
    FAIL("expected NotStratifiableError");
  } catch (const NotStratifiableError& e) {
    std::string msg = e.what();
    CHECK(msg.find("not stratifiable") != std::string::npos);
    CHECK(msg.find("p -> p") != std::string::npos);
  }
}

TEST_CASE("negative cycle through two predicates is rejected") {
  Database db = parse_program(R"(
p(X) :- not q(X), base(X).
q(X) :- p(X).
base(a).
)");
  CHECK_THROWS_AS(stratify(db), NotStratifiableError);
}

TEST_CASE("quantified tails count as negative dependencies") {
  Database db = parse_program(R"(
base(a).
p(X) :- base(X) |> forall Y (Y = X ; not base(Y)).
)");
  Stratification s = stratify(db);
  CHECK(s.level.at("base") == 1);
  CHECK(s.level.at("p") == 2);

  Database bad = parse_program(R"(
base(a).
p(X) :- base(X) |> exists Y (p(Y)).
)");
  CHECK_THROWS_AS(stratify(bad), NotStratifiableError);
}

TEST_CASE("verify_stratification accepts coarser legal layerings") {
  Database db = parse_program(kDepartments);
  // Alternative three-level layering: rem_man alone, then ins_man, then
  // change_man. Legal because every negative edge still descends.
  Stratification alt;
  alt.level = {{"emp_man", 1}, {"dep_A", 1}, {"dep_B", 1}, {"rem_man", 1},
               {"ins_man", 2}, {"change_man", 3}};
  alt.strata = {{0, 1}, {2}, {3, 4}};
  CHECK(verify_stratification(db, alt));

  // Broken layering: the negated dependency no longer descends.
  Stratification bad;
  bad.level = {{"emp_man", 1}, {"dep_A", 1}, {"dep_B", 1}, {"rem_man", 1},
               {"ins_man", 3}, {"change_man", 2}};
  bad.strata = {{0, 1}, {3, 4}, {2}};
  CHECK_FALSE(verify_stratification(db, bad));

  // Positive dependencies may not point upward either.
  Stratification up;
  up.level = {{"emp_man", 1}, {"dep_A", 1}, {"dep_B", 1}, {"rem_man", 3},
              {"ins_man", 2}, {"change_man", 3}};
  up.strata = {{}, {2}, {0, 1, 3, 4}};
  CHECK_FALSE(verify_stratification(db, up));

  // Rule assignments must agree with the level map.
  Stratification skew = alt;
  skew.strata = {{0, 1, 2}, {}, {3, 4}};
  CHECK_FALSE(verify_stratification(db, skew));
}

TEST_CASE("admissible goal over the departments program") {
  Database db = parse_program(kDepartments);
  AdmissibilityReport rep = check_admissible(db, parse_goal("?- ins_man(X)."));
  CHECK(rep.ok());
  CHECK(rep.violations.empty());
}

TEST_CASE("update variable outside the body is flagged") {
  Database db = parse_program(R"(
q(a).
p(X) :- +q(Y), q(X).
)");
  AdmissibilityReport rep = check_admissible(db, parse_goal("?- p(a)."));
  REQUIRE_FALSE(rep.ok());
  REQUIRE(rep.violations.size() == 1);
  const SafetyViolation& v = rep.violations[0];
  CHECK(v.reachable);
  CHECK(v.rule_index == 0);
  CHECK(v.variable == "Y");
  CHECK(v.context == "update atom");
  CHECK(v.render() == "SAFETY rule#1 variable Y: only occurs in update atom");
}

TEST_CASE("negated atom with an unbound variable is flagged") {
  Database db = parse_program(R"(
q(a).
r(a).
p(X) :- q(X), not r(Y).
)");
  AdmissibilityReport rep = check_admissible(db, parse_goal("?- p(X)."));
  REQUIRE_FALSE(rep.ok());
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations[0].variable == "Y");
  CHECK(rep.violations[0].context == "negated atom");
  CHECK(rep.violations[0].rule_index == 0);
  CHECK(rep.violations[0].render() ==
        "SAFETY rule#1 variable Y: only occurs in negated atom");
}

TEST_CASE("goal constants bind head positions one level deep") {
  Database db = parse_program(R"(
#extensional q/1.
p(X) :- +q(X).
)");
  // Unbound goal: X reaches the head and the update with no binding anywhere.
  AdmissibilityReport open = check_admissible(db, parse_goal("?- p(X)."));
  CHECK_FALSE(open.ok());
  // Constant goal: position 1 of p is tied to a constant, so the head
  // variable standing there is bound.
  AdmissibilityReport closed = check_admissible(db, parse_goal("?- p(a)."));
  CHECK(closed.ok());
}

TEST_CASE("goal constants intersect across repeated goal literals") {
  Database db = parse_program(R"(
#extensional q/1.
p(X) :- +q(X).
)");
  // The second p literal leaves position 1 open, so X is not bound.
  AdmissibilityReport rep = check_admissible(db, parse_goal("?- p(a), p(W)."));
  CHECK_FALSE(rep.ok());
}

TEST_CASE("unreachable unsafe rules only warn") {
  Database db = parse_program(R"(
q(a).
p(X) :- q(X).
stray(X) :- +q(Y), q(X).
)");
  AdmissibilityReport rep = check_admissible(db, parse_goal("?- p(X)."));
  CHECK(rep.ok());
  REQUIRE(rep.violations.size() == 1);
  CHECK_FALSE(rep.violations[0].reachable);
  CHECK(rep.violations[0].render().find("warning only") != std::string::npos);
}

TEST_CASE("goal updates and negations are themselves checked") {
  Database db = parse_program("q(a).\n");
  AdmissibilityReport bad_update = check_admissible(db, parse_goal("?- +q(Y), q(X)."));
  REQUIRE_FALSE(bad_update.ok());
  REQUIRE(bad_update.violations.size() == 1);
  CHECK(bad_update.violations[0].rule_index == -1);
  CHECK(bad_update.violations[0].render() ==
        "SAFETY goal variable Y: only occurs in update atom");

  AdmissibilityReport ok_update = check_admissible(db, parse_goal("?- +q(X), q(X)."));
  CHECK(ok_update.ok());

  AdmissibilityReport bad_neg = check_admissible(db, parse_goal("?- not q(Y)."));
  CHECK_FALSE(bad_neg.ok());
}

TEST_CASE("constraint equalities bind variables") {
  Database db = parse_program(R"(
#extensional q/1.
p(X) :- X = a, +q(X).
)");
  AdmissibilityReport rep = check_admissible(db, parse_goal("?- p(X)."));
  CHECK(rep.ok());
}

TEST_CASE("free tail variables must be bound") {
  Database db = parse_program(R"(
base(a).
other(a).
p(X) :- base(X) |> forall Y (Y = Z ; not other(Y)).
)");
  AdmissibilityReport rep = check_admissible(db, parse_goal("?- p(X)."));
  REQUIRE_FALSE(rep.ok());
  bool found = false;
  for (const auto& v : rep.violations)
    if (v.context == "quantified tail" && v.variable == "Z") found = true;
  CHECK(found);
}
