// Copyright 2026 the udatalog authors
// SPDX-License-Identifier: Apache-2.0
//
// Command line front end. Batch subcommands cover the whole pipeline
// (analysis, query, transaction, precompilation, fixpoint dumps) and `repl`
// runs an interactive session where every goal is a transaction.
//
// Exit codes: 0 success or Commit, 1 Abort, 2 analysis error (safety,
// stratification, precompilation bound), 3 usage or parse error.

#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "udatalog/udatalog.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using namespace udatalog;

struct Flags {
  std::string domain;  // comma separated extra constants
  int unfold_cap = 0;
  bool verbose = false;
  bool no_color = false;
};

const char* color(const Flags& f, const char* code) {
  static const bool tty = isatty(1);
  return (f.no_color || !tty) ? "" : code;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

NameGen make_gen() {
  const char* seed = std::getenv("UDATALOG_SEED");
  return NameGen(seed ? std::strtoull(seed, nullptr, 10) : 0);
}

Database load_program(const std::string& path, const Flags& f, NameGen* gen) {
  Database db = parse_program(read_file(path), gen);
  if (!f.domain.empty()) {
    std::stringstream ss(f.domain);
    std::string c;
    while (std::getline(ss, c, ','))
      if (!c.empty()) db.domain_extra.insert(c);
  }
  return db;
}

struct AnalysisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Goal predicates must be declared by a rule head, a fact or a declaration;
// a typo would otherwise just evaluate to an empty answer set.
void require_known_predicates(const Database& db, const Goal& g) {
  for (const Literal& l : g.body)
    if (!db.arity.count(l.atom.pred))
      throw AnalysisError("goal uses unknown predicate '" + l.atom.pred + "'");
  for (const UpdateAtom& u : g.updates)
    if (!db.arity.count(u.atom.pred))
      throw AnalysisError("goal updates unknown predicate '" + u.atom.pred + "'");
}

std::string show_solution(const Solution& s, const std::vector<std::string>& vars,
                          bool with_updates) {
  std::vector<std::string> parts;
  for (const std::string& v : vars) {
    Term t = s.bindings.resolve(Term::var(v));
    if (t.is_const() || t.name() != v) parts.push_back(v + "=" + t.name());
  }
  for (const auto& [a, b] : s.bindings.neqs) parts.push_back(a.name() + "!=" + b.name());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
  if (parts.empty()) out = "true";
  if (with_updates && !s.updates.empty()) {
    out += "  [updates:";
    for (const UpdateAtom& u : s.updates) out += " " + to_source(u);
    out += "]";
  }
  return out;
}

void dump_fixpoint(const Database& db, NameGen* gen, std::ostream& os) {
  Stratification strat = stratify(db);
  FixpointResult fix = stratified_fixpoint(db, strat, gen, db.universe());
  for (std::size_t i = 0; i < fix.strata.size(); ++i) {
    os << "M" << (i + 1) << " (" << fix.iterations[i] << " rounds):\n";
    std::vector<std::string> lines;
    for (const StoredLiteral* m : fix.strata[i].all())
      lines.push_back(to_source(ConstrainedLiteral{m->lit, m->cstr, m->updates}));
    std::sort(lines.begin(), lines.end());
    lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
    for (const std::string& l : lines) os << "  " << l << "\n";
  }
}

void print_strata(const Database& db, std::ostream& os) {
  Stratification strat = stratify(db);
  os << "stratifiable: " << strat.stratum_count() << " strata\n";
  for (int s = 1; s <= strat.stratum_count(); ++s) {
    os << "  stratum " << s << ":";
    for (const std::string& p : strat.predicates_at(s)) os << " " << p;
    os << "\n";
  }
}

int cmd_check(const std::string& file, const Flags& f) {
  NameGen gen = make_gen();
  Database db = load_program(file, f, &gen);
  std::cout << "parsed: " << db.rules.size() << " rules, " << db.facts.size() << " facts, "
            << db.arity.size() << " predicates\n";
  std::cout << "safe.\n";
  print_strata(db, std::cout);
  return 0;
}

int cmd_query(const std::string& file, const std::string& goal_text, const Flags& f) {
  NameGen gen = make_gen();
  Database db = load_program(file, f, &gen);
  Goal goal = parse_goal(goal_text, &gen);
  require_known_predicates(db, goal);
  AdmissibilityReport rep = check_admissible(db, goal);
  if (!rep.ok()) throw SafetyError(rep.violations);

  Stratification strat = stratify(db);
  Universe universe = evaluation_universe(db, goal);
  FixpointResult fix = stratified_fixpoint(db, strat, &gen, universe);
  std::vector<Solution> sols = answers(goal, fix.fix(), &gen);

  std::cout << sols.size() << (sols.size() == 1 ? " solution\n" : " solutions\n");
  for (const Solution& s : sols)
    std::cout << "  " << show_solution(s, goal.vars, f.verbose) << "\n";
  return 0;
}

int cmd_tx(const std::string& file, const std::string& goal_text, const std::string& save,
           const Flags& f) {
  NameGen gen = make_gen();
  Database db = load_program(file, f, &gen);
  Goal goal = parse_goal(goal_text, &gen);
  require_known_predicates(db, goal);

  TransactionOutcome out = apply_transaction(goal, &db, &gen);
  if (!out.committed()) {
    std::cout << color(f, "\033[31m") << "ABORT (" << to_string(out.reason) << " updates)"
              << color(f, "\033[0m") << "\n";
    return 1;
  }
  if (out.solutions.empty()) {
    std::cout << "0 answers, committed\n";
  } else {
    std::cout << out.solutions.size()
              << (out.solutions.size() == 1 ? " solution\n" : " solutions\n");
    for (const Solution& s : out.solutions)
      std::cout << "  " << show_solution(s, goal.vars, f.verbose) << "\n";
  }
  std::cout << color(f, "\033[32m") << "COMMIT" << color(f, "\033[0m") << "\n";
  std::cout << render_edb(db);
  if (!save.empty()) {
    save_edb(db, save);
    std::cout << "saved " << save << "\n";
  }
  return 0;
}

int cmd_precompile(const std::string& file, const std::string& out_path, const Flags& f) {
  NameGen gen = make_gen();
  Database db = load_program(file, f, &gen);
  UnfoldResult u = compose(db, &gen, UnfoldOptions{f.unfold_cap});

  Database composed = db;
  composed.rules = u.rules();
  for (const std::string& c : u.universe) composed.domain_extra.insert(c);

  std::ostringstream text;
  text << "% udatalog " << kVersion << " precompiled program\n";
  text << "% universe:";
  for (const std::string& c : u.universe) text << " " << c;
  text << "\n";
  text << to_source(composed);

  std::ofstream os(out_path);
  if (!os) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  os << text.str();
  if (!os.flush()) throw std::runtime_error("write to '" + out_path + "' failed");
  std::cout << "wrote " << out_path << " (" << composed.rules.size() << " rules)\n";
  return 0;
}

int cmd_dump_fixpoint(const std::string& file, const Flags& f) {
  NameGen gen = make_gen();
  Database db = load_program(file, f, &gen);
  dump_fixpoint(db, &gen, std::cout);
  return 0;
}

int cmd_repl(const std::string& file, const Flags& f) {
  NameGen gen = make_gen();
  Database db = load_program(file, f, &gen);
  std::vector<Atom> snapshot = db.facts;
  std::cout << "udatalog " << kVersion << "; :quit leaves, goals run as transactions\n";

  std::string line;
  while (std::cout << "udl> " << std::flush, std::getline(std::cin, line)) {
    std::size_t a = line.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    std::size_t b = line.find_last_not_of(" \t");
    line = line.substr(a, b - a + 1);

    try {
      if (line == ":quit" || line == ":q") break;
      if (line == ":fixpoint") {
        dump_fixpoint(db, &gen, std::cout);
        continue;
      }
      if (line == ":strata") {
        print_strata(db, std::cout);
        continue;
      }
      if (line == ":edb") {
        std::cout << render_edb(db);
        continue;
      }
      if (line.rfind(":save", 0) == 0) {
        std::string path = line.size() > 5 ? line.substr(6) : "";
        if (path.empty()) {
          std::cout << "usage: :save FILE\n";
          continue;
        }
        save_edb(db, path);
        std::cout << "saved " << path << "\n";
        continue;
      }
      if (line == ":undo") {
        db.facts = snapshot;
        std::cout << "restored " << db.facts.size() << " facts\n";
        continue;
      }
      if (line[0] == ':') {
        std::cout << "unknown command " << line << "\n";
        continue;
      }

      Goal goal = parse_goal(line, &gen);
      require_known_predicates(db, goal);
      std::vector<Atom> before = db.facts;
      TransactionOutcome out = apply_transaction(goal, &db, &gen);
      if (out.committed()) {
        snapshot = before;
        if (out.solutions.empty()) {
          std::cout << "0 answers, committed\n";
        } else {
          for (const Solution& s : out.solutions)
            std::cout << "  " << show_solution(s, goal.vars, f.verbose) << "\n";
        }
        std::cout << color(f, "\033[32m") << "COMMIT" << color(f, "\033[0m") << "\n";
      } else {
        std::cout << color(f, "\033[31m") << "ABORT (" << to_string(out.reason) << " updates)"
                  << color(f, "\033[0m") << "\n";
      }
    } catch (const std::exception& e) {
      std::cout << "error: " << e.what() << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"U-Datalog interpreter and precompiler"};
  app.fallthrough();

  Flags f;
  app.add_option("--domain", f.domain, "extra universe constants, comma separated");
  app.add_option("--unfold-cap", f.unfold_cap, "extra unfolding rounds per stratum");
  app.add_flag("--verbose", f.verbose, "print update sets per solution");
  app.add_flag("--no-color", f.no_color, "plain status lines");

  std::string file, goal, out_path, save;

  CLI::App* check = app.add_subcommand("check", "report safety and stratification");
  check->add_option("file", file)->required();

  CLI::App* query = app.add_subcommand("query", "evaluate a goal, no update phase");
  query->add_option("file", file)->required();
  query->add_option("goal", goal)->required();

  CLI::App* tx = app.add_subcommand("tx", "run a goal as a transaction");
  tx->add_option("file", file)->required();
  tx->add_option("goal", goal)->required();
  tx->add_option("--save", save, "write the resulting fact store to this path");

  CLI::App* pre = app.add_subcommand("precompile", "unfold a program into extensional-only form");
  pre->add_option("file", file)->required();
  pre->add_option("-o,--output", out_path, "output path")->required();

  CLI::App* dump = app.add_subcommand("dump-fixpoint", "print each stratum's model");
  dump->add_option("file", file)->required();

  CLI::App* repl = app.add_subcommand("repl", "interactive session");
  repl->add_option("file", file)->required();

  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  try {
    if (check->parsed()) return cmd_check(file, f);
    if (query->parsed()) return cmd_query(file, goal, f);
    if (tx->parsed()) return cmd_tx(file, goal, save, f);
    if (pre->parsed()) return cmd_precompile(file, out_path, f);
    if (dump->parsed()) return cmd_dump_fixpoint(file, f);
    if (repl->parsed()) return cmd_repl(file, f);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const SafetyError& e) {
    std::cerr << "analysis error: " << e.what() << "\n";
    return 2;
  } catch (const NotStratifiableError& e) {
    std::cerr << "analysis error: " << e.what() << "\n";
    return 2;
  } catch (const BoundExceeded& e) {
    std::cerr << "analysis error: " << e.what() << "\n";
    return 2;
  } catch (const AnalysisError& e) {
    std::cerr << "analysis error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
