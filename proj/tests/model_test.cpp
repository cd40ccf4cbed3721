#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "stratum/model.hpp"

using namespace stratum;

namespace {

const SimpleType o = SimpleType::base();
const SimpleType oo = SimpleType::arrow(o, o);
const SimpleType ooo = SimpleType::arrow(oo, o);

Signature corpus_sig(bool with_g = false) {
  Signature s;
  s.add("a", oo);
  s.add("b", oo);
  s.add("c", o);
  if (with_g) s.add("g", SimpleType::arrow(o, oo));
  return s;
}

WAA load(const std::string& f, bool with_g = false) {
  return parse_waa(oracle::fixture(f), corpus_sig(with_g));
}

TermPtr term(const std::string& src) { return parse_term(src, corpus_sig(true)); }

// D^k_{o->o} straight from the definition: every map P(Q_{≤k}) -> P(Q_{≤k}),
// kept when monotone and when its ↓-restriction is a member one stratum down.
using Map = std::map<StateSet, StateSet>;

std::vector<StateSet> subsets(StateSet u) {
  std::vector<StateSet> out;
  for (StateSet s = u;; s = (s - 1) & u) {
    out.push_back(s);
    if (!s) break;
  }
  return out;
}

std::set<Map> brute_unary(const WAA& a, int k) {
  StateSet u = a.rank_le(k);
  std::vector<StateSet> pts = subsets(u);
  std::set<Map> low;
  if (k > 0) low = brute_unary(a, k - 1);
  std::set<Map> out;
  std::vector<std::size_t> digit(pts.size(), 0);
  for (;;) {
    Map f;
    for (std::size_t i = 0; i < pts.size(); ++i) f[pts[i]] = pts[digit[i]];
    bool mono = true;
    for (auto [x, fx] : f)
      for (auto [y, fy] : f)
        if (subset(x, y) && !subset(fx, fy)) mono = false;
    if (mono) {
      bool ok = k == 0;
      if (k > 0) {
        StateSet lu = a.rank_le(k - 1);
        Map r;
        bool consistent = true;
        for (auto [x, fx] : f) {
          auto [it, fresh] = r.emplace(x & lu, fx & lu);
          if (!fresh && it->second != (fx & lu)) consistent = false;
        }
        ok = consistent && low.count(r);
      }
      if (ok) out.insert(f);
    }
    std::size_t i = 0;
    while (i < digit.size() && ++digit[i] == pts.size()) digit[i++] = 0;
    if (i == digit.size()) break;
  }
  return out;
}

}  // namespace

TEST(Lattice, BaseSizes) {
  WAA a1 = load("a1.waa"), a2 = load("a2.waa");
  Model m1(a1), m2(a2);
  EXPECT_EQ(m2.lattice(1, o).size, 2u);
  EXPECT_EQ(m1.lattice(0, o).size, 1u);
  EXPECT_EQ(m2.lattice(2, o).size, 4u);
  EXPECT_EQ(m2.lattice(0, ooo).size, 1u);
}

TEST(Lattice, UnaryFunctionSpacesMatchDefinition) {
  for (auto [file, g] : {std::pair{"a1.waa", false}, {"a2.waa", false}, {"a3.waa", true}}) {
    WAA a = load(file, g);
    Model m(a);
    for (int k = 0; k <= a.max_rank(); ++k) {
      if (a.rank_le(k) == a.all() && a.size() == 3 && k == 2) continue;  // 8^8 maps
      std::set<Map> want = brute_unary(a, k);
      const Lattice& l = m.lattice(k, oo);
      const Lattice& dom = m.lattice(k, o);
      std::set<Map> got;
      for (std::size_t i = 0; i < l.size; ++i) {
        Map f;
        for (std::size_t j = 0; j < dom.size; ++j) f[dom.at(j)[0]] = l.at(i)[j];
        got.insert(f);
      }
      EXPECT_EQ(got, want) << file << " k=" << k;
    }
  }
}

TEST(Lattice, SortedAsLinearExtension) {
  Model m(load("a3.waa", true));
  const Lattice& l = m.lattice(2, oo);
  for (std::size_t i = 0; i < l.size; ++i)
    for (std::size_t j = 0; j < i; ++j) EXPECT_FALSE(l.leq(static_cast<int>(i), static_cast<int>(j)) && i != j);
  EXPECT_EQ(m.index_of(m.bottom(2, oo)), l.bottom());
  EXPECT_EQ(m.index_of(m.top(2, oo)), l.top());
}

TEST(Lattice, CapIsEnforced) {
  Model m(load("a3.waa", true), 20);
  EXPECT_THROW(m.lattice(2, oo), LatticeTooLarge);
}

TEST(Ops, BaseExamples) {
  WAA a2 = load("a2.waa");
  Model m(a2);
  Value q1 = m.base(2, 1), q2 = m.base(2, 2);
  EXPECT_EQ(m.join(q1, q2).set(), 3u);
  EXPECT_EQ(m.meet(q1, q1).set(), 1u);
  Value d = m.project_down(m.base(2, 3));
  EXPECT_EQ(d.level(), 1);
  EXPECT_EQ(d.set(), 1u);
  EXPECT_EQ(m.lift_sup(m.base(1, 1)).set(), 3u);
  EXPECT_EQ(m.lift_inf(m.base(1, 1)).set(), 1u);
  EXPECT_EQ(m.bar(m.base(2, 3)).set(), 2u);
  EXPECT_EQ(m.bar(m.bar(m.base(2, 3))).set(), 2u);
  EXPECT_EQ(m.project_down(m.top(2, o)).set(), m.top(1, o).set());
  EXPECT_THROW(m.project_down(m.base(0, 0)), ModelError);
  EXPECT_THROW(m.bar(m.base(0, 0)), ModelError);
  EXPECT_THROW(m.lift_sup(m.base(2, 0)), ModelError);
  EXPECT_THROW(m.join(m.base(1, 0), m.base(2, 0)), ModelError);
}

TEST(Ops, StepFunctions) {
  Model m(load("a2.waa"));
  Value s = m.step(m.base(2, 1), m.base(2, 2));
  EXPECT_EQ(m.apply(s, m.base(2, 3)).set(), 2u);
  EXPECT_EQ(m.apply(s, m.base(2, 0)).set(), 0u);
  EXPECT_GE(m.index_of(s), 0);
  Value c = m.costep(m.base(2, 1), m.base(2, 2));
  EXPECT_EQ(m.apply(c, m.base(2, 0)).set(), 2u);
  EXPECT_EQ(m.apply(c, m.base(2, 2)).set(), 3u);
}

TEST(Ops, MaterializeAndPrint) {
  Model m(load("a2.waa"));
  Value id = m.eval(term("\\x:o. x"), nullptr, 2);
  Value t = m.materialize(id);
  EXPECT_TRUE(t.is_table());
  EXPECT_EQ(m.str(t), "[{}↦{}, {q1}↦{q1}, {q2}↦{q2}, {q1,q2}↦{q1,q2}]");
  EXPECT_TRUE(m.equal(m.materialize(t), t));
  EXPECT_EQ(m.str(m.materialize(t)), m.str(t));
}

TEST(Fixpoint, IdentityFollowsRankParity) {
  Model m2(load("a2.waa")), m1(load("a1.waa"));
  auto id = [](const Model& m, int k) { return m.closure(k, oo, [](const Value& v) { return v; }); };
  EXPECT_EQ(m2.fixpoint(2, o, id(m2, 2)).set(), 2u);
  EXPECT_EQ(m2.fixpoint(1, o, id(m2, 1)).set(), 0u);
  EXPECT_EQ(m1.fixpoint(1, o, id(m1, 1)).set(), 0u);
  EXPECT_EQ(m2.eval(mk_omega(o), nullptr, 2).set(), 2u);
  EXPECT_EQ(m1.eval(mk_omega(o), nullptr, 1).set(), 0u);
  for (int k = 0; k <= 2; ++k) {
    Value c = m2.top(k, o);
    Value f = m2.closure(k, oo, [c](const Value&) { return c; });
    EXPECT_EQ(m2.fixpoint(k, o, f).set(), c.set());
  }
}

TEST(ConstSem, Examples) {
  WAA a2 = load("a2.waa"), a1 = load("a1.waa");
  Model m2(a2), m1(a1);
  Value a = m2.const_sem("a", 2);
  EXPECT_EQ(m2.apply(a, m2.base(2, 0)).set(), 0u);
  EXPECT_EQ(m2.apply(a, m2.base(2, 1)).set(), 1u);
  EXPECT_EQ(m2.apply(a, m2.base(2, 2)).set(), 0u);
  EXPECT_EQ(m2.apply(a, m2.base(2, 3)).set(), 3u);
  EXPECT_EQ(m1.const_sem("c", 1).set(), 1u);
  Value b = m2.const_sem("b", 1);
  for (StateSet p : {0u, 1u}) EXPECT_EQ(m2.apply(b, m2.base(1, p)).set(), 1u);
  EXPECT_THROW(m2.const_sem("zz", 1), ModelError);
  Model m3(load("a3.waa", true));
  for (int k = 0; k <= 1; ++k) EXPECT_GE(m3.index_of(m3.const_sem("g", k)), 0);
  WAA a3 = load("a3.waa", true);
  Value g = m3.const_sem("g", 2);
  Value pq = m3.base(2, a3.rank_le(1));
  EXPECT_EQ(m3.apply(m3.apply(g, pq), m3.base(2, 0)).set(), StateSet{1} << a3.state("q"));
  EXPECT_EQ(m3.apply(m3.apply(g, m3.base(2, 4)), pq).set(), 6u);
}

TEST(Eval, Examples) {
  Model m1(load("a1.waa")), m2(load("a2.waa"));
  TermPtr t2 = parse_program(oracle::fixture("tower2.lam")).term;
  EXPECT_EQ(m1.eval(t2, nullptr, 1).set(), 1u);
  TermPtr t3 = parse_program(oracle::fixture("tower3.lam")).term;
  EXPECT_EQ(m1.accept(t3), 1u);
  TermPtr yfn = parse_program(oracle::fixture("yfn.lam")).term;
  EXPECT_EQ(m2.accept(yfn), 3u);
  EXPECT_EQ(m2.eval(yfn, nullptr, 1).set(), 1u);
  EXPECT_EQ(m1.accept(mk_omega(o)), 0u);
  EXPECT_THROW(m1.eval(mk_var("x", o), nullptr, 1), ModelError);
}

TEST(Eval, RedexMatchesAppliedTable) {
  Model m(load("a2.waa"));
  Value g1 = m.materialize(m.eval(term("\\f:o->o. \\x:o. f (f x)"), nullptr, 2));
  Value lhs = m.materialize(m.apply(g1, m.const_sem("a", 2)));
  Value rhs = m.eval(term("(\\f:o->o. \\x:o. f (f x)) a"), nullptr, 2);
  EXPECT_TRUE(m.equal(lhs, rhs));
  EXPECT_TRUE(m.equal(rhs, m.eval(term("\\x:o. a (a x)"), nullptr, 2)));
}

TEST(Eval, ModelMatchesRegularOracle) {
  for (const char* name : {"aloop", "bloop", "chain", "abloop", "mixed"}) {
    std::string base = std::string("regular/") + name;
    TermPtr tm = parse_term(to_string(parse_program(oracle::fixture(base + ".lam")).term), corpus_sig(true));
    RegularTree t = parse_regular_tree(oracle::fixture(base + ".tree"), corpus_sig(true));
    for (const char* aut : {"a1.waa", "a2.waa", "a3.waa"}) {
      WAA a = load(aut, true);
      Model m(a);
      EXPECT_EQ(m.accept(tm), oracle::solve_by_parity(a, t)[0]) << name << " " << aut;
      Model md(dualize(a));
      EXPECT_EQ(m.accept(tm) ^ md.accept(tm), a.all()) << name << " " << aut;
    }
  }
}
