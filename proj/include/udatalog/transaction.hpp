// Copyright 2026 the udatalog authors
// SPDX-License-Identifier: Apache-2.0
//
// The update phase. A goal's solutions each carry a consistent update set;
// the transaction pools them into one global set u. If u is consistent (no
// fact is both inserted and deleted) and ground, the new fact store is
// (facts \ deletions) ∪ insertions, applied atomically; otherwise the
// transaction aborts and the store is left exactly as it was.
//
// The fact store persists as plain source: a #domain line pinning the full
// universe at save time (so complements do not silently shrink when facts
// holding the last occurrence of a constant are deleted), #extensional
// declarations keeping arities of empty relations, then the facts sorted,
// one per line.

#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "udatalog/analysis.hpp"
#include "udatalog/ast.hpp"
#include "udatalog/eval.hpp"
#include "udatalog/parser.hpp"

namespace udatalog {

struct TransactionOutcome {
  enum class Status { kCommit, kAbort };
  enum class AbortReason { kNone, kInconsistent, kNonGround };

  std::vector<Solution> solutions;  // empty on abort
  std::vector<UpdateAtom> updates;  // the pooled set u
  std::vector<Atom> new_edb;        // sorted; equals the prior facts on abort
  Status status = Status::kCommit;
  AbortReason reason = AbortReason::kNone;

  bool committed() const { return status == Status::kCommit; }
};

inline std::string to_string(TransactionOutcome::AbortReason r) {
  switch (r) {
    case TransactionOutcome::AbortReason::kInconsistent: return "inconsistent";
    case TransactionOutcome::AbortReason::kNonGround: return "non-ground";
    default: return "none";
  }
}

// Union of the solutions' update sets. Duplicates across solutions collapse;
// an insert and a delete of the same fact stay distinct and are caught by
// the consistency check.
inline std::vector<UpdateAtom> collect_updates(const std::vector<Solution>& sols) {
  std::set<UpdateAtom> u;
  for (const Solution& s : sols) u.insert(s.updates.begin(), s.updates.end());
  return {u.begin(), u.end()};
}

namespace detail {

inline bool all_ground(const std::vector<UpdateAtom>& u) {
  for (const UpdateAtom& ua : u)
    for (const Term& t : ua.atom.args)
      if (t.is_var()) return false;
  return true;
}

// One elementary update against a fact set. Inserting a present fact and
// deleting an absent one are no-ops, so applications of a consistent ground
// set commute.
inline void apply_one(std::set<Atom>* facts, const UpdateAtom& u) {
  if (u.op == UpdateAtom::Op::kInsert)
    facts->insert(u.atom);
  else
    facts->erase(u.atom);
}

}  // namespace detail

// New fact set for a consistent ground update set, deletions first.
inline std::vector<Atom> apply_updates(const std::vector<Atom>& facts,
                                       const std::vector<UpdateAtom>& u) {
  std::set<Atom> out(facts.begin(), facts.end());
  for (const UpdateAtom& ua : u)
    if (ua.op == UpdateAtom::Op::kDelete) detail::apply_one(&out, ua);
  for (const UpdateAtom& ua : u)
    if (ua.op == UpdateAtom::Op::kInsert) detail::apply_one(&out, ua);
  return {out.begin(), out.end()};
}

// Commit/abort decision over already-computed solutions. The pooled update
// set must be ground and free of insert/delete clashes; otherwise the
// outcome carries the prior facts unchanged and no bindings.
inline TransactionOutcome settle(std::vector<Solution> sols, std::vector<Atom> prior) {
  TransactionOutcome out;
  out.solutions = std::move(sols);
  out.updates = collect_updates(out.solutions);
  std::sort(prior.begin(), prior.end());
  if (!detail::all_ground(out.updates)) {
    out.status = TransactionOutcome::Status::kAbort;
    out.reason = TransactionOutcome::AbortReason::kNonGround;
  } else if (!consistent_ground(out.updates, Assignment{})) {
    out.status = TransactionOutcome::Status::kAbort;
    out.reason = TransactionOutcome::AbortReason::kInconsistent;
  }
  if (!out.committed()) {
    out.solutions.clear();
    out.new_edb = std::move(prior);
    return out;
  }
  out.new_edb = apply_updates(prior, out.updates);
  return out;
}

// Runs a goal as a transaction: analysis, marking evaluation, global
// consistency check, atomic application. Stratification and safety problems
// are thrown before any evaluation; they are program or goal errors, not
// transaction aborts. On commit db->facts is replaced wholesale; on abort it
// is untouched.
inline TransactionOutcome apply_transaction(const Goal& goal, Database* db, NameGen* gen) {
  Stratification strat = stratify(*db);
  AdmissibilityReport rep = check_admissible(*db, goal);
  if (!rep.ok()) throw SafetyError(rep.violations);

  Universe universe = evaluation_universe(*db, goal);
  FixpointResult fix = stratified_fixpoint(*db, strat, gen, universe);

  TransactionOutcome out = settle(answers(goal, fix.fix(), gen), db->facts);
  if (out.committed()) {
    db->facts = out.new_edb;
    for (const Atom& f : db->facts) {
      db->extensional.insert(f.pred);
      db->arity.emplace(f.pred, static_cast<int>(f.args.size()));
    }
  }
  return out;
}

// Fact-store text: full universe pinned, declarations, sorted facts.
inline std::string render_edb(const Database& db) {
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
  return out.str();
}

inline void save_edb(const Database& db, const std::string& path) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  file << render_edb(db);
  if (!file.flush()) throw std::runtime_error("write to '" + path + "' failed");
}

// Reads a fact store back. Rules in the file are a load error; the result
// carries facts, declarations and the pinned universe only.
inline Database load_edb(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream text;
  text << file.rdbuf();
  return parse_fact_store(text.str());
}

}  // namespace udatalog
