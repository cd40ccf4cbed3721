// One PASS/FAIL line per acceptance criterion. Exit status 0 iff all pass.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <sys/wait.h>

#include "oracles.hpp"
#include "stratum/selftest.hpp"

using namespace stratum;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Report {
  int failures = 0;

  void line(int n, const std::string& title, const std::function<std::string()>& body) {
    std::string problem;
    try {
      problem = body();
    } catch (const std::exception& e) {
      problem = std::string("exception: ") + e.what();
    }
    if (!problem.empty()) ++failures;
    std::cout << (problem.empty() ? "PASS " : "FAIL ") << n << " " << title << (problem.empty() ? "" : "  -- " + problem)
              << std::endl;
  }
};

int run_cli(const std::string& args) {
  std::string cmd = std::string(STRATUM_CLI) + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string fx(const std::string& f) { return std::string(STRATUM_FIXTURES) + "/" + f; }

// Generated certificate survives verification and a write/read cycle.
std::string certify(const Prover& p, const TermPtr& m, int q, bool want) {
  const WAA& a = p.automaton();
  Verdict v = p.decide(m, q);
  if (v.accepted != want) return a.name(q) + ": wrong verdict";
  CheckResult r = check_derivation(v.certificate, a);
  if (!r.ok) return a.name(q) + ": certificate rejected: " + r.message;
  std::string text = write_certificate(v.certificate);
  if (write_certificate(read_certificate(text, a)) != text) return a.name(q) + ": certificate does not round-trip";
  return "";
}

}  // namespace

int main() {
  Report rep;
  std::filesystem::path out = std::filesystem::temp_directory_path() / "stratum-acceptance";
  std::filesystem::create_directories(out);

  rep.line(1, "tower terms accepted under A1 with verified certificates; prefix oracle agrees", [&]() -> std::string {
    WAA a = parse_waa(oracle::fixture("a1.waa"), corpus_signature());
    Prover p(a);
    int q = a.state("q");
    for (int i = 1; i <= 3; ++i) {
      auto start = Clock::now();
      std::string f = "tower" + std::to_string(i) + ".lam";
      TermPtr m = parse_term(to_string(parse_program(oracle::fixture(f)).term), corpus_signature());
      if (std::string e = certify(p, m, q, true); !e.empty()) return f + " " + e;
      std::size_t depth = (std::size_t{1} << (std::size_t{1} << (i - 1))) + 2;
      BohmPrefix bt = bohm_prefix(m, depth, 1000000);
      if (!(accept_prefix(a, bt, PrefixMode::Pessimistic).win >> q & 1)) return f + ": pessimistic prefix oracle inconclusive";
      if (!oracle::eve_wins_finite(a, q, bt)) return f + ": brute-force game disagrees";
      if (run_cli("check " + fx(f) + " " + fx("a1.waa") + " --state q --out " + out.string()) != 0) return f + ": cli check";
      std::string cert = (out / ("tower" + std::to_string(i) + ".q.geq.deriv")).string();
      if (run_cli("verify " + cert + " " + fx("a1.waa")) != 0) return f + ": cli verify";
      if (run_cli("oracle " + fx(f) + " " + fx("a1.waa") + " --mode pessimistic --depth " + std::to_string(depth)) != 0)
        return f + ": cli oracle";
      if (since(start) >= 5) return f + ": slower than 5 s";
    }
    return "";
  });

  rep.line(2, "(Y F.N) a accepted under A2 at q1 and q2; transcribed derivation verifies", [&]() -> std::string {
    auto start = Clock::now();
    WAA a = parse_waa(oracle::fixture("a2.waa"), corpus_signature());
    Prover p(a);
    TermPtr m = parse_term(to_string(parse_program(oracle::fixture("yfn.lam")).term), corpus_signature());
    for (const char* q : {"q1", "q2"})
      if (std::string e = certify(p, m, a.state(q), true); !e.empty()) return e;
    if (run_cli("check " + fx("yfn.lam") + " " + fx("a2.waa") + " --state q2 --out " + out.string()) != 0) return "cli check q2";
    if (run_cli("check " + fx("yfn.lam") + " " + fx("a2.waa") + " --state q1 --out " + out.string()) != 0) return "cli check q1";
    std::string text = oracle::fixture("example2.deriv");
    WAA a2 = parse_waa(oracle::fixture("a2.waa"), certificate_signature(text));
    Certificate c = read_certificate(text, a2);
    std::string want_s = "{{{q1,q2}->q2,{q1}->q1}->q2}", want_t = "{{{q1}->q1}->q1}";
    if (c.root.premises.at(0).types.str() != want_s) return "fixture root does not use S";
    if (c.root.premises.at(0).premises.at(0).premises.at(1).types.str() != want_t) return "fixture fixpoint does not use T";
    if (!check_derivation(c, a2).ok) return "fixture rejected by the checker";
    if (run_cli("verify " + fx("example2.deriv") + " " + fx("a2.waa")) != 0) return "cli verify";
    if (since(start) >= 5) return "slower than 5 s";
    return "";
  });

  rep.line(3, "first 12 letters of BT((Y F.N) a) are a b a a b a a a a b a a", [&]() -> std::string {
    TermPtr m = parse_program(oracle::fixture("yfn.lam")).term;
    std::string got = to_string(bohm_prefix(m, 12, 100000));
    return got == "a b a a b a a a a b a a" ? "" : "got " + got;
  });

  rep.line(4, "⟦Y x.x⟧ is {q2} under A2 and ∅ under A1", [&]() -> std::string {
    WAA a1 = parse_waa(oracle::fixture("a1.waa"), corpus_signature());
    WAA a2 = parse_waa(oracle::fixture("a2.waa"), corpus_signature());
    TermPtr omega = parse_term("Y x:o. x", corpus_signature());
    StateSet v2 = Model(a2).accept(omega), v1 = Model(a1).accept(omega);
    if (v2 != StateSet{1} << a2.state("q2")) return "A2 gives " + a2.set_str(v2);
    if (v1 != 0) return "A1 gives " + a1.set_str(v1);
    return "";
  });

  rep.line(5, "property suites", [&]() -> std::string {
    auto start = Clock::now();
    SelftestOptions opt;
    opt.fixtures = STRATUM_FIXTURES;
    std::ostringstream detail;
    std::string problem;
    for (const std::string& name : selftest_suites()) {
      SuiteResult r = run_suite(name, opt);
      detail << "     " << (r.ok ? "ok   " : "fail ") << name << ": " << r.cases << " cases, " << r.seconds << " s\n";
      if (!r.ok && problem.empty()) problem = name + ": " + r.failure;
      if (r.ok && r.cases < 200) problem = name + ": only " + std::to_string(r.cases) + " cases";
    }
    // triangle leg against the test-side parity game solver
    std::size_t agree = 0;
    for (const char* pair : {"aloop", "bloop", "chain", "abloop", "mixed"}) {
      std::string base = std::string("regular/") + pair;
      TermPtr t = parse_term(to_string(parse_program(oracle::fixture(base + ".lam")).term), corpus_signature());
      RegularTree tree = parse_regular_tree(oracle::fixture(base + ".tree"), corpus_signature());
      for (const char* file : {"a1.waa", "a2.waa", "a3.waa"}) {
        WAA a = parse_waa(oracle::fixture(file), corpus_signature());
        if (Model(a).accept(t) != oracle::solve_by_parity(a, tree)[0] && problem.empty())
          problem = std::string(pair) + " under " + file + ": model and parity game disagree";
        ++agree;
      }
    }
    detail << "     ok   parity-game leg: " << agree << " pairs\n";
    std::cout << detail.str();
    if (since(start) >= 60) problem = "slower than 60 s";
    return problem;
  });

  std::cout << (rep.failures ? "FAILED " : "ALL PASSED ") << rep.failures << " failing criteria" << std::endl;
  return rep.failures ? 1 : 0;
}
