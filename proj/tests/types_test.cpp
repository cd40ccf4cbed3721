#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stratum/selftest.hpp"
#include "stratum/types.hpp"

using namespace stratum;

namespace {

const SimpleType o = SimpleType::base();
const SimpleType oo = SimpleType::arrow(o, o);
const SimpleType ooo = SimpleType::arrow(oo, o);

WAA load(const std::string& f) { return parse_waa(oracle::fixture(f), corpus_signature()); }

ITypeSet ts(const char* text, const SimpleType& t, const WAA& a) { return parse_typeset(text, t, a); }

}  // namespace

TEST(Types, PrintingAndStrata) {
  WAA a = load("a2.waa");
  ITypeSet s = ts("{{q1}->q1, {q1,q2} -> q2}", oo, a);
  EXPECT_EQ(s.str(), "{{q1,q2}->q2,{q1}->q1}");
  EXPECT_EQ(max_stratum(s, a), 2);
  EXPECT_FALSE(within_tau(s, 2, a));
  EXPECT_EQ(restrict_to(s, 1, a).str(), "{{q1}->q1}");
  EXPECT_EQ(ts("{{q1}→q1}", oo, a), restrict_to(s, 1, a));
  EXPECT_EQ(s.items()[0], IType::arrow(a, state_set(a, 3), IType::state(a, 1)));
  EXPECT_THROW(ts("{{q2}->q1}", oo, a), ParseError);
  EXPECT_THROW(ts("{q3}", o, a), ParseError);
  EXPECT_THROW(ts("{q1", o, a), ParseError);
  EXPECT_THROW(ITypeSet(o).insert(s.items()[0]), TypeError);
}

TEST(Types, SubsumeExamples) {
  WAA a = load("a2.waa");
  EXPECT_TRUE(subsume(ts("{q1}", o, a), ts("{q1,q2}", o, a)));
  EXPECT_FALSE(subsume(ts("{q1,q2}", o, a), ts("{q1}", o, a)));
  EXPECT_TRUE(subsume(ts("{{q1,q2}->q2}", oo, a), ts("{{q1,q2}->q2,{q1}->q1}", oo, a)));
  // contravariant in the premise: a larger premise is the weaker requirement
  EXPECT_TRUE(subsume(ts("{{q1,q2}->q2}", oo, a), ts("{{q1}->q2}", oo, a)));
  EXPECT_FALSE(subsume(ts("{{q1}->q2}", oo, a), ts("{{q1,q2}->q2}", oo, a)));
  EXPECT_THROW(subsume(ts("{q1}", o, a), ts("{}", oo, a)), TypeError);
}

TEST(Types, ApplicationExamples) {
  WAA a1 = load("a1.waa"), a2 = load("a2.waa");
  EXPECT_EQ(type_apply(ts("{{q}->q}", oo, a1), ts("{q}", o, a1)).str(), "{q}");
  ITypeSet s = ts("{{{q1}->q1,{q1,q2}->q2}->q2}", ooo, a2);
  EXPECT_EQ(type_apply(s, ts("{{q1}->q1,{q1,q2}->q2}", oo, a2)).str(), "{q2}");
  EXPECT_TRUE(type_apply(s, ts("{{q1}->q1}", oo, a2)).empty());
  EXPECT_TRUE(type_apply(ts("{{q1}->q1,{q1,q2}->q2}", oo, a2), ts("{}", o, a2)).empty());
  EXPECT_THROW(type_apply(ts("{q1}", o, a2), ts("{q1}", o, a2)), TypeError);
}

TEST(Types, InterpretationExamples) {
  WAA a = load("a2.waa");
  Model m(a);
  EXPECT_EQ(interp(m, ts("{q1,q2}", o, a), 2).set(), 3u);
  EXPECT_EQ(interp(m, ts("{q2}", o, a), 1).set(), 0u);
  EXPECT_EQ(dual_interp(m, ts("{q2}", o, a), 2).set(), 1u);
  EXPECT_EQ(dual_interp(m, ts("{}", o, a), 2).set(), 3u);
  // step function by hand: {q1}->q1 sends P to {q1} iff q1 ∈ P
  Value f = interp(m, ts("{{q1}->q1}", oo, a), 2);
  for (StateSet p = 0; p < 4; ++p) EXPECT_EQ(m.apply(f, m.base(2, p)).set(), (p & 1) ? 1u : 0u);
  Value g = dual_interp(m, ts("{{q1}->q1}", oo, a), 2);
  for (StateSet p = 0; p < 4; ++p) EXPECT_EQ(m.apply(g, m.base(2, p)).set(), subset(p, 2) ? 2u : 3u);
}

TEST(Types, RepresentExamples) {
  WAA a = load("a2.waa");
  Model m(a);
  EXPECT_EQ(represent(m, m.base(2, 2)).str(), "{q2}");
  ITypeSet s = represent(m, m.const_sem("a", 2));
  EXPECT_TRUE(m.equal(interp(m, s, 2), interp(m, ts("{{q1}->q1,{q1,q2}->q2}", oo, a), 2))) << s.str();
  EXPECT_TRUE(subsume(s, ts("{{q1}->q1,{q1,q2}->q2}", oo, a))) << s.str();
  EXPECT_TRUE(subsume(ts("{{q1}->q1,{q1,q2}->q2}", oo, a), s)) << s.str();
}

// Order and application agreement, round trip, invisibility of high strata.
TEST(Types, PropertySuite) {
  SelftestOptions opt;
  opt.fixtures = STRATUM_FIXTURES;
  SuiteResult r = run_suite("types", opt);
  EXPECT_TRUE(r.ok) << r.failure;
  EXPECT_GE(r.cases, 200u);
}
