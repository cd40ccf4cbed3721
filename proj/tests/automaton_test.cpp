#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "stratum/automaton.hpp"

using namespace stratum;

namespace {

Signature corpus_sig(bool with_g = false) {
  Signature s;
  SimpleType o = SimpleType::base(), oo = SimpleType::arrow(o, o);
  s.add("a", oo);
  s.add("b", oo);
  s.add("c", o);
  if (with_g) s.add("g", SimpleType::arrow(o, oo));
  return s;
}

WAA load(const std::string& f, bool with_g = false) {
  return parse_waa(oracle::fixture(f), corpus_sig(with_g));
}

BohmPrefix node(std::string l, std::vector<BohmPrefix> kids = {}) {
  return {BohmPrefix::Kind::Node, std::move(l), std::move(kids)};
}

RegularTree tree(const std::string& text, bool with_g = false) {
  return parse_regular_tree(text, corpus_sig(with_g));
}

// Random regular trees over {a,b,c,g}.
RegularTree random_tree(std::mt19937& rng, int n) {
  RegularTree t;
  const char* labels[] = {"a", "b", "c", "g"};
  for (int v = 0; v < n; ++v) {
    RegularTree::Vertex x;
    x.name = "v" + std::to_string(v);
    x.label = labels[rng() % 4];
    int ar = x.label == "c" ? 0 : x.label == "g" ? 2 : 1;
    for (int j = 0; j < ar; ++j) x.succ.push_back(static_cast<int>(rng() % n));
    t.vertices.push_back(x);
  }
  return t;
}

// Random weak automaton over the g signature.
WAA random_waa(std::mt19937& rng) {
  int n = 1 + static_cast<int>(rng() % 3);
  std::vector<std::string> names;
  std::vector<int> ranks;
  for (int q = 0; q < n; ++q) {
    names.push_back("s" + std::to_string(q));
    ranks.push_back(static_cast<int>(rng() % 3));
  }
  WAA a(corpus_sig(true), names, ranks, 0);
  for (int q = 0; q < n; ++q) {
    StateSet allowed = a.rank_le(a.rank(q));
    for (const auto& [c, ty] : a.signature().entries()) {
      int ar = ty.arity();
      std::vector<Tuple> alts;
      if (ar == 0) {
        if (rng() % 2) alts.push_back({});
      } else {
        int k = static_cast<int>(rng() % 3);
        for (int i = 0; i < k; ++i) {
          Tuple t;
          for (int j = 0; j < ar; ++j) t.push_back(static_cast<StateSet>(rng()) & allowed);
          alts.push_back(t);
        }
      }
      a.set_delta(q, c, alts);
    }
  }
  return a;
}

}  // namespace

TEST(Waa, ParsesFixtures) {
  WAA a1 = load("a1.waa");
  EXPECT_EQ(a1.max_rank(), 1);
  EXPECT_EQ(a1.delta(0, "a"), std::vector<Tuple>{Tuple{1}});
  EXPECT_EQ(a1.delta(0, "c"), std::vector<Tuple>{Tuple{}});
  EXPECT_TRUE(a1.delta(0, "b").empty());
  WAA a2 = load("a2.waa");
  EXPECT_EQ(a2.max_rank(), 2);
  EXPECT_EQ(a2.name(a2.initial()), "q2");
  EXPECT_EQ(a2.delta(a2.state("q1"), "b"), std::vector<Tuple>{Tuple{0}});
  EXPECT_EQ(a2.delta(a2.state("q2"), "a"), std::vector<Tuple>{Tuple{3}});
  EXPECT_EQ(a2.rank_eq(0), 0u);
  EXPECT_EQ(a2.rank_le(1), 1u);
  EXPECT_EQ(parse_waa(a2.str(), corpus_sig()), a2);
  WAA a3 = load("a3.waa", true);
  EXPECT_EQ(a3.delta(a3.state("q"), "g").size(), 2u);
}

TEST(Waa, RejectsBadInput) {
  Signature s = corpus_sig();
  EXPECT_THROW(parse_waa("states: q1@1 q2@2\ninitial: q1\nq1 a -> ({q2})\n", s), ParseError);
  EXPECT_THROW(parse_waa("states: q@1\ninitial: q\nq z -> ()\n", s), ParseError);
  EXPECT_THROW(parse_waa("states: q@1\ninitial: q\nq a -> ()\n", s), ParseError);
  EXPECT_THROW(parse_waa("states: q@1\ninitial: q\nq c -> ({q})\n", s), ParseError);
  EXPECT_THROW(parse_waa("states: q@1\ninitial: r\n", s), ParseError);
  try {
    parse_waa("states: q1@1 q2@2\ninitial: q1\n\nq1 a -> ({q2})\n", s);
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4);
    EXPECT_NE(std::string(e.what()).find("weakness"), std::string::npos);
  }
}

TEST(Waa, MonotoneCompletion) {
  WAA a2 = load("a2.waa");
  WAA m = monotone_completion(a2);
  int q1 = a2.state("q1"), q2 = a2.state("q2");
  EXPECT_EQ(m.delta(q2, "a"), a2.delta(q2, "a"));
  EXPECT_EQ(m.delta(q1, "b"), (std::vector<Tuple>{Tuple{0}, Tuple{1}}));
  EXPECT_EQ(m.delta(q2, "b"), (std::vector<Tuple>{Tuple{2}, Tuple{3}}));
  WAA a1 = load("a1.waa");
  EXPECT_EQ(monotone_completion(a1), a1);
}

TEST(Waa, Dualize) {
  WAA a1 = load("a1.waa");
  WAA d = dualize(a1);
  EXPECT_EQ(d.rank(0), 2);
  EXPECT_TRUE(d.delta(0, "c").empty());
  EXPECT_EQ(d.delta(0, "a"), std::vector<Tuple>{Tuple{1}});
  EXPECT_EQ(d.delta(0, "b"), (std::vector<Tuple>{Tuple{0}, Tuple{1}}));
  RegularTree aloop = tree("v0: a v0\n");
  EXPECT_EQ(solve_regular(d, aloop)[0], 1u);
  EXPECT_EQ(solve_regular(a1, aloop)[0], 0u);
}

TEST(Prefix, Examples) {
  WAA a1 = load("a1.waa"), a2 = load("a2.waa");
  BohmPrefix aac = node("a", {node("a", {node("c")})});
  EXPECT_EQ(accept_prefix(a1, aac, PrefixMode::Exact).win, 1u);
  BohmPrefix abx = node("a", {node("b", {BohmPrefix::cutoff()})});
  StateSet pess = accept_prefix(a2, abx, PrefixMode::Pessimistic).win;
  EXPECT_TRUE(pess >> a2.state("q1") & 1);
  EXPECT_EQ(accept_prefix(a1, BohmPrefix::omega(), PrefixMode::Exact).win, 0u);
  EXPECT_EQ(accept_prefix(a2, BohmPrefix::omega(), PrefixMode::Exact).win, 2u);
  EXPECT_THROW(accept_prefix(a2, abx, PrefixMode::Exact), InconclusiveError);
  EXPECT_EQ(accept_prefix(a2, abx, PrefixMode::Optimistic).win, 3u);
}

TEST(Regular, Examples) {
  WAA a1 = load("a1.waa"), a2 = load("a2.waa");
  EXPECT_EQ(solve_regular(a2, tree("v0: a v0\n"))[0], 0u);
  EXPECT_EQ(solve_regular(a2, tree("v0: b v0\n"))[0], 3u);
  EXPECT_EQ(solve_regular(a1, tree("v0: a v1\nv1: c\n"))[0], 1u);
  EXPECT_EQ(solve_regular(a2, tree("v0: a v1\nv1: b v0\n"))[0], 3u);
  EXPECT_THROW(tree("v0: a\n"), ParseError);
  EXPECT_THROW(tree("v0: a v9\n"), ParseError);
}

TEST(Regular, AgreesWithParityOracleOnRandomInstances) {
  std::mt19937 rng(7);
  for (int i = 0; i < 300; ++i) {
    WAA a = random_waa(rng);
    RegularTree t = random_tree(rng, 1 + static_cast<int>(rng() % 5));
    ASSERT_EQ(solve_regular(a, t), oracle::solve_by_parity(a, t)) << a.str();
  }
}

TEST(Regular, CompletionAndDualityProperties) {
  std::mt19937 rng(11);
  for (int i = 0; i < 300; ++i) {
    WAA a = random_waa(rng);
    RegularTree t = random_tree(rng, 1 + static_cast<int>(rng() % 5));
    auto w = solve_regular(a, t);
    EXPECT_EQ(solve_regular(monotone_completion(a), t), w);
    auto d = solve_regular(dualize(a), t);
    for (std::size_t v = 0; v < w.size(); ++v) EXPECT_EQ(w[v] ^ d[v], a.all()) << a.str();
    EXPECT_EQ(solve_regular(dualize(dualize(a)), t), w);
  }
}

TEST(Prefix, AcyclicTreesMatchExactAndOracle) {
  std::mt19937 rng(5);
  int checked = 0;
  for (int i = 0; checked < 200 && i < 5000; ++i) {
    RegularTree t = random_tree(rng, 1 + static_cast<int>(rng() % 6));
    // keep acyclic instances only: successors point forward
    bool acyclic = true;
    for (std::size_t v = 0; v < t.vertices.size(); ++v)
      for (int s : t.vertices[v].succ) acyclic = acyclic && s > static_cast<int>(v);
    if (!acyclic) continue;
    ++checked;
    WAA a = random_waa(rng);
    BohmPrefix p = unfold(t, t.vertices.size() + 1);
    ASSERT_TRUE(p.complete());
    StateSet exact = accept_prefix(a, p, PrefixMode::Exact).win;
    EXPECT_EQ(exact, solve_regular(a, t)[0]);
    StateSet brute = 0;
    for (int q = 0; q < a.size(); ++q)
      if (oracle::eve_wins_finite(a, q, p)) brute |= StateSet{1} << q;
    EXPECT_EQ(exact, brute);
  }
  EXPECT_EQ(checked, 200);
}

TEST(Prefix, ModesAreOrderedAndSound) {
  std::mt19937 rng(3);
  for (int i = 0; i < 300; ++i) {
    WAA a = random_waa(rng);
    RegularTree t = random_tree(rng, 1 + static_cast<int>(rng() % 4));
    StateSet truth = solve_regular(a, t)[0];
    for (std::size_t d = 0; d < 7; ++d) {
      BohmPrefix p = unfold(t, d);
      StateSet pess = accept_prefix(a, p, PrefixMode::Pessimistic).win;
      StateSet opt = accept_prefix(a, p, PrefixMode::Optimistic).win;
      EXPECT_TRUE(subset(pess, opt));
      EXPECT_TRUE(subset(pess, truth));
      EXPECT_TRUE(subset(truth, opt));
    }
  }
}
