// stratum: command-line front end.
//
// Exit codes: 0 accepted / holds, 1 rejected / violated, 2 inconclusive,
// 3 lattice over the size cap, 64 usage, 65 malformed input, 66 missing
// file, 70 internal error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "stratum/selftest.hpp"

#ifndef STRATUM_FIXTURES
#define STRATUM_FIXTURES "fixtures"
#endif

using namespace stratum;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kNo = 1, kUnknown = 2, kTooLarge = 3, kUsage = 64, kData = 65, kNoInput = 66, kInternal = 70 };

struct NoInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::size_t cap = Model::default_cap();
  std::string format = "text";
  std::string term, automaton, deriv, emit = "-", out = ".", tree;
  std::vector<std::string> states, suites;
  std::size_t depth = 12, fuel = 100000;
  std::string mode = "pessimistic";
  std::string fixtures = STRATUM_FIXTURES;
  std::uint64_t seed = 1;

  bool machine() const { return format == "machine"; }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NoInput("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Input {
  Program program;
  WAA automaton;
};

Input load(const Options& o) {
  Program p = parse_program(slurp(o.term));
  if (!p.term->type().is_base()) throw TypeError("the term has type " + p.term->type().str() + ", expected o");
  return {p, parse_waa(slurp(o.automaton), p.signature)};
}

// Selected state indices, sorted by name.
std::vector<int> selected(const WAA& a, const std::vector<std::string>& names) {
  std::vector<int> out;
  if (names.empty())
    for (int q = 0; q < a.size(); ++q) out.push_back(q);
  else
    for (const std::string& n : names) out.push_back(a.state(n));
  std::sort(out.begin(), out.end(), [&](int x, int y) { return a.name(x) < a.name(y); });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string states_str(const WAA& a, StateSet s) { return a.set_str(s); }

int cmd_bohm(const Options& o) {
  Program p = parse_program(slurp(o.term));
  BohmPrefix b = bohm_prefix(p.term, o.depth, o.fuel);
  if (o.machine())
    std::cout << json{{"prefix", to_string(b)}, {"complete", b.complete()}}.dump() << "\n";
  else
    std::cout << to_string(b) << "\n";
  return kOk;
}

int cmd_eval(const Options& o) {
  Input in = load(o);
  Model m(in.automaton, o.cap);
  StateSet acc = m.accept(in.program.term);
  std::vector<int> qs = selected(in.automaton, o.states);
  if (o.states.empty()) qs = {in.automaton.initial()};
  bool all = true;
  for (int q : qs) all = all && (acc >> q & 1);
  if (o.machine()) {
    json j{{"accepting", json::array()}};
    for (int q = 0; q < in.automaton.size(); ++q)
      if (acc >> q & 1) j["accepting"].push_back(in.automaton.name(q));
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "accepting: " << states_str(in.automaton, acc) << "\n";
  }
  return all ? kOk : kNo;
}

int cmd_check(const Options& o) {
  Input in = load(o);
  const WAA& a = in.automaton;
  Prover prover(a, o.cap);
  std::vector<int> qs = selected(a, o.states);
  std::string stem = std::filesystem::path(o.term).stem().string();
  std::filesystem::create_directories(o.out);
  bool all = true;
  json report = json::array();
  for (int q : qs) {
    Verdict v = prover.decide(in.program.term, q);
    CheckResult r = check_derivation(v.certificate, a);
    if (!r.ok) throw std::logic_error("generated certificate rejected at @" + r.term_path + ": " + r.message);
    std::string file =
        (std::filesystem::path(o.out) / (stem + "." + a.name(q) + (v.accepted ? ".geq" : ".ngeq") + ".deriv")).string();
    std::ofstream(file, std::ios::binary) << write_certificate(v.certificate);
    if (!o.states.empty() || q == a.initial()) all = all && v.accepted;
    if (o.machine())
      report.push_back({{"state", a.name(q)},
                        {"verdict", v.accepted ? "accept" : "reject"},
                        {"certificate", file},
                        {"nodes", v.certificate.root.size()}});
    else
      std::cout << a.name(q) << ": " << (v.accepted ? "Accept" : "Reject") << "  certificate " << file << " ("
                << v.certificate.root.size() << " nodes, verified)\n";
  }
  if (o.machine()) std::cout << report.dump() << "\n";
  return all ? kOk : kNo;
}

int cmd_derive(const Options& o) {
  Input in = load(o);
  const WAA& a = in.automaton;
  Prover prover(a, o.cap);
  int q = o.states.empty() ? a.initial() : a.state(o.states.front());
  Verdict v = prover.decide(in.program.term, q);
  std::string text = write_certificate(v.certificate);
  if (o.emit == "-")
    std::cout << text;
  else
    std::ofstream(o.emit, std::ios::binary) << text;
  return v.accepted ? kOk : kNo;
}

int cmd_verify(const Options& o) {
  std::string text = slurp(o.deriv);
  WAA a = parse_waa(slurp(o.automaton), certificate_signature(text));
  Certificate c = read_certificate(text, a);
  CheckResult r = check_derivation(c, a);
  if (o.machine()) {
    json j{{"ok", r.ok}};
    if (!r.ok)
      j.update({{"rule", rule_name(r.rule)}, {"node", r.node}, {"term_path", r.term_path}, {"line", r.line}, {"message", r.message}});
    std::cout << j.dump() << "\n";
  } else if (r.ok) {
    std::cout << "ok (" << c.root.size() << " nodes)\n";
  } else {
    std::cout << "invalid: " << rule_name(r.rule) << " at line " << r.line << " (node " << (r.node.empty() ? "root" : r.node)
              << ", @" << r.term_path << "): " << r.message << "\n";
  }
  return r.ok ? kOk : kNo;
}

int cmd_oracle(const Options& o) {
  Input in = load(o);
  const WAA& a = in.automaton;
  Model m(a, o.cap);
  StateSet model = m.accept(in.program.term);
  int q = o.states.empty() ? a.initial() : a.state(o.states.front());
  std::string source;
  int verdict = kUnknown;
  if (!o.tree.empty()) {
    RegularTree t = parse_regular_tree(slurp(o.tree), in.program.signature);
    verdict = solve_regular(a, t)[0] >> q & 1 ? kOk : kNo;
    source = "regular tree";
  } else {
    BohmPrefix b = bohm_prefix(in.program.term, o.depth, o.fuel);
    source = o.mode + " prefix at depth " + std::to_string(o.depth);
    if (o.mode == "exact") {
      try {
        verdict = accept_prefix(a, b, PrefixMode::Exact).win >> q & 1 ? kOk : kNo;
      } catch (const InconclusiveError&) {
        verdict = kUnknown;
      }
    } else if (o.mode == "pessimistic") {
      if (accept_prefix(a, b, PrefixMode::Pessimistic).win >> q & 1) verdict = kOk;
    } else {
      if (!(accept_prefix(a, b, PrefixMode::Optimistic).win >> q & 1)) verdict = kNo;
    }
  }
  bool by_model = model >> q & 1;
  bool agree = verdict == kUnknown || (verdict == kOk) == by_model;
  const char* names[] = {"accept", "reject", "inconclusive"};
  if (o.machine())
    std::cout << json{{"state", a.name(q)}, {"oracle", names[verdict]}, {"source", source}, {"model", by_model ? "accept" : "reject"}, {"agree", agree}}.dump()
              << "\n";
  else
    std::cout << a.name(q) << ": " << names[verdict] << " by " << source << "; model says " << (by_model ? "accept" : "reject")
              << (agree ? "" : "  DISAGREE") << "\n";
  if (!agree) return kInternal;
  return verdict;
}

int cmd_selftest(const Options& o) {
  SelftestOptions so{o.fixtures, o.seed, o.cap};
  std::vector<std::string> names = o.suites.empty() ? selftest_suites() : o.suites;
  bool ok = true;
  json report = json::array();
  for (const std::string& n : names) {
    SuiteResult r = run_suite(n, so);
    ok = ok && r.ok;
    if (o.machine())
      report.push_back({{"suite", r.name}, {"ok", r.ok}, {"cases", r.cases}, {"seconds", r.seconds}, {"failure", r.failure}});
    else {
      std::cout << (r.ok ? "PASS " : "FAIL ") << r.name << "  " << r.cases << " cases, " << r.seconds << " s\n";
      if (!r.ok) std::cout << "  " << r.failure << "\n";
    }
  }
  if (o.machine()) std::cout << report.dump() << "\n";
  return ok ? kOk : kNo;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Weak alternating automata on λY-terms: evaluation, typing certificates, oracles"};
  app.require_subcommand(1);
  app.add_option("--cap", o.cap, "lattice size cap")->envname("STRATUM_CAP")->check(CLI::PositiveNumber);
  app.add_option("--format", o.format, "report format")->check(CLI::IsMember({"text", "machine"}));

  auto term_aut = [&](CLI::App* c) {
    c->add_option("term", o.term, "term file")->required();
    c->add_option("automaton", o.automaton, "automaton file")->required();
  };
  auto* bohm = app.add_subcommand("bohm", "print a Böhm tree prefix");
  bohm->add_option("term", o.term, "term file")->required();
  bohm->add_option("--depth", o.depth)->check(CLI::PositiveNumber);
  bohm->add_option("--fuel", o.fuel)->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("eval", "states accepting the Böhm tree, by evaluation in the model");
  term_aut(eval);
  eval->add_option("--state", o.states);

  auto* check = app.add_subcommand("check", "decide every state and write verified certificates");
  term_aut(check);
  check->add_option("--state", o.states);
  check->add_option("--out", o.out, "certificate directory");

  auto* derive = app.add_subcommand("derive", "emit the certificate for one state");
  term_aut(derive);
  derive->add_option("--state", o.states)->expected(1);
  derive->add_option("--emit", o.emit, "output file, - for stdout");

  auto* verify = app.add_subcommand("verify", "check a derivation file");
  verify->add_option("derivation", o.deriv)->required();
  verify->add_option("automaton", o.automaton)->required();

  auto* oracle = app.add_subcommand("oracle", "game-based acceptance on a prefix or a regular tree");
  term_aut(oracle);
  oracle->add_option("--state", o.states)->expected(1);
  oracle->add_option("--depth", o.depth)->check(CLI::PositiveNumber);
  oracle->add_option("--fuel", o.fuel)->check(CLI::PositiveNumber);
  oracle->add_option("--mode", o.mode)->check(CLI::IsMember({"exact", "optimistic", "pessimistic"}));
  oracle->add_option("--tree", o.tree, "regular tree file for the term's Böhm tree");

  auto* selftest = app.add_subcommand("selftest", "run the property suites");
  selftest->add_option("--suite", o.suites)->check(CLI::IsMember(selftest_suites()));
  selftest->add_option("--fixtures", o.fixtures);
  selftest->add_option("--seed", o.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*bohm) return cmd_bohm(o);
    if (*eval) return cmd_eval(o);
    if (*check) return cmd_check(o);
    if (*derive) return cmd_derive(o);
    if (*verify) return cmd_verify(o);
    if (*oracle) return cmd_oracle(o);
    if (*selftest) return cmd_selftest(o);
  } catch (const NoInput& e) {
    std::cerr << "stratum: " << e.what() << "\n";
    return kNoInput;
  } catch (const LatticeTooLarge& e) {
    std::cerr << "stratum: " << e.what() << " (raise --cap or STRATUM_CAP)\n";
    return kTooLarge;
  } catch (const ParseError& e) {
    std::cerr << "stratum: parse error: " << e.what() << "\n";
    return kData;
  } catch (const TypeError& e) {
    std::cerr << "stratum: type error: " << e.what() << "\n";
    return kData;
  } catch (const AutomatonError& e) {
    std::cerr << "stratum: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "stratum: internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
