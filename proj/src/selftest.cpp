#include "stratum/selftest.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>

namespace stratum {

namespace {

struct Failed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Ctx {
  const SelftestOptions& opt;
  SuiteResult& res;

  void expect(bool cond, const std::function<std::string()>& what) {
    ++res.cases;
    if (!cond) throw Failed(what());
  }

  std::string read(const std::string& rel) const {
    std::ifstream in(opt.fixtures + "/" + rel);
    if (!in) throw std::runtime_error("cannot open fixture " + opt.fixtures + "/" + rel);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  WAA load(const std::string& f) const { return parse_waa(read(f), corpus_signature()); }
};

const SimpleType kO = SimpleType::base();
const SimpleType kOO = SimpleType::arrow(kO, kO);
const SimpleType kOOO = SimpleType::arrow(kOO, kO);

std::vector<Value> elements(const Model& m, int k, const SimpleType& t) {
  const Lattice& l = m.lattice(k, t);
  std::vector<Value> out;
  out.reserve(l.size);
  for (std::size_t i = 0; i < l.size; ++i) out.push_back(m.element(l, static_cast<int>(i)));
  return out;
}

// Lattices of A at every stratum, skipping those over the cap.
template <class F>
void each_lattice(const Model& m, const std::vector<SimpleType>& types, F&& f) {
  for (const SimpleType& t : types)
    for (int k = 0; k <= m.max_level(); ++k) {
      std::vector<Value> xs;
      try {
        xs = elements(m, k, t);
      } catch (const LatticeTooLarge&) {
        continue;
      }
      f(k, t, xs);
    }
}

std::string show(const Model& m, const Value& v) { return m.str(m.materialize(v)); }

// ---- galois -----------------------------------------------------------------

void suite_galois(Ctx& cx) {
  for (const char* file : {"a1.waa", "a2.waa"}) {
    WAA a = cx.load(file);
    Model m(a, cx.opt.cap);
    each_lattice(m, {kO, kOO, kOOO}, [&](int k, const SimpleType& t, const std::vector<Value>& es) {
      for (const Value& e : es) {
        if (k == 0) continue;
        Value low = m.project_down(e);
        cx.expect(m.equal(e, m.join(m.lift_inf(low), m.bar(e))), [&] { return std::string(file) + " decomposition fails at " + show(m, e); });
      }
      if (k == 0) return;
      std::vector<Value> ds = elements(m, k - 1, t);
      for (const Value& d : ds) {
        cx.expect(m.equal(m.project_down(m.lift_inf(d)), d) && m.equal(m.project_down(m.lift_sup(d)), d),
                  [&] { return std::string(file) + " lift then project changes " + show(m, d); });
        for (const Value& e : es) {
          Value low = m.project_down(e);
          cx.expect(m.leq(m.lift_inf(d), e) == m.leq(d, low), [&] {
            return std::string(file) + " ↑inf ⊣ ↓ fails at d=" + show(m, d) + " e=" + show(m, e);
          });
          cx.expect(m.leq(e, m.lift_sup(d)) == m.leq(low, d), [&] {
            return std::string(file) + " ↓ ⊣ ↑sup fails at d=" + show(m, d) + " e=" + show(m, e);
          });
        }
      }
    });
    // application commutes with ↓ and ↑inf
    each_lattice(m, {kOO, kOOO}, [&](int k, const SimpleType& t, const std::vector<Value>& fs) {
      if (k == 0) return;
      std::vector<Value> xs = elements(m, k, t.arg());
      for (const Value& f : fs)
        for (const Value& x : xs) {
          Value lhs = m.project_down(m.apply(f, x));
          Value rhs = m.apply(m.project_down(f), m.project_down(x));
          cx.expect(m.equal(lhs, rhs), [&] { return std::string(file) + " (f x)↓ ≠ f↓(x↓) at f=" + show(m, f) + " x=" + show(m, x); });
        }
      for (const Value& f : elements(m, k - 1, t))
        for (const Value& x : xs) {
          Value lhs = m.apply(m.lift_inf(f), x);
          Value rhs = m.lift_inf(m.apply(f, m.project_down(x)));
          cx.expect(m.equal(lhs, rhs), [&] { return std::string(file) + " f↑inf(x) ≠ (f(x↓))↑inf at f=" + show(m, f); });
        }
    });
  }
}

// ---- fixpoint ---------------------------------------------------------------

std::vector<ITypeRef> all_types(const WAA& a, const SimpleType& t, int k, std::size_t width);

// fix^k at type t against the extremal refinement characterization.
void check_fixpoint(Ctx& cx, const Model& m, const std::string& file, int k, const SimpleType& t, const Value& f,
                    const std::vector<Value>& ds) {
  Value x = m.fixpoint(k, t, f);
  cx.expect(m.equal(m.apply(f, x), x), [&] { return file + " f(fix f) ≠ fix f at f=" + show(m, f); });
  if (k == 0) return;
  Value low = m.fixpoint(k - 1, t, m.project_down(f));
  bool even = k % 2 == 0;
  Value acc = even ? m.bottom(k, t) : m.top(k, t);
  for (const Value& d : ds) {
    if (!m.equal(m.project_down(d), low)) continue;
    Value fd = m.apply(f, d);
    if (even && m.leq(d, fd)) acc = m.join(acc, d);
    if (!even && m.leq(fd, d)) acc = m.meet(acc, d);
  }
  cx.expect(m.equal(acc, x), [&] {
    return file + " fixpoint at k=" + std::to_string(k) + " is not the extremal refinement for f=" + show(m, f);
  });
}

void suite_fixpoint(Ctx& cx) {
  for (const char* file : {"a1.waa", "a2.waa"}) {
    WAA a = cx.load(file);
    Model m(a, cx.opt.cap);
    for (const SimpleType& t : {kO, kOO}) {
      SimpleType ft = SimpleType::arrow(t, t);
      each_lattice(m, {ft}, [&](int k, const SimpleType&, const std::vector<Value>& fs) {
        std::vector<Value> ds = elements(m, k, t);
        for (const Value& f : fs) check_fixpoint(cx, m, file, k, t, f, ds);
      });
    }
    // function spaces too large to enumerate: joins of random step functions
    std::mt19937_64 rng(cx.opt.seed);
    int top = a.max_rank();
    SimpleType ft = SimpleType::arrow(kOO, kOO);
    std::vector<ITypeRef> steps = all_types(a, ft, top, 2);
    for (int k = 0; k <= top; ++k) {
      std::vector<Value> ds = elements(m, k, kOO);
      for (int n = 0; n < 100; ++n) {
        ITypeSet s(ft);
        for (std::size_t i = 1 + rng() % 3; i > 0; --i) s.insert(steps[rng() % steps.size()]);
        check_fixpoint(cx, m, file, k, kOO, interp(m, s, k), ds);
      }
    }
    TermPtr omega = mk_omega(kO);
    StateSet want = 0;
    for (int q = 0; q < a.size(); ++q)
      if (a.rank(q) % 2 == 0) want |= StateSet{1} << q;
    cx.expect(m.accept(omega) == want, [&] { return std::string(file) + ": ⟦Y x.x⟧ does not follow rank parity"; });
  }
}

// ---- types ------------------------------------------------------------------

// Every type of simple type t within Types^k, built from premise sets of at
// most `width` members.
std::vector<ITypeRef> all_types(const WAA& a, const SimpleType& t, int k, std::size_t width) {
  std::vector<ITypeRef> out;
  if (t.is_base()) {
    for (int q = 0; q < a.size(); ++q)
      if (a.rank(q) <= k) out.push_back(IType::state(a, q));
    return out;
  }
  std::vector<ITypeRef> targets = all_types(a, t.result(), k, width);
  std::vector<ITypeRef> prem = all_types(a, t.arg(), k, width);
  for (ITypeRef s : targets) {
    int l = s->stratum(a);
    std::vector<ITypeRef> ok;
    for (ITypeRef p : prem)
      if (p->stratum(a) <= l) ok.push_back(p);
    std::function<void(std::size_t, ITypeSet)> go = [&](std::size_t i, ITypeSet cur) {
      if (i == ok.size()) {
        out.push_back(IType::arrow(a, cur, s));
        return;
      }
      go(i + 1, cur);
      if (cur.size() < width) {
        cur.insert(ok[i]);
        go(i + 1, cur);
      }
    };
    go(0, ITypeSet(t.arg()));
  }
  return out;
}

void suite_types(Ctx& cx) {
  for (const char* file : {"a1.waa", "a2.waa"}) {
    WAA a = cx.load(file);
    Model m(a, cx.opt.cap);
    int top = a.max_rank();
    for (const SimpleType& t : {kO, kOO, kOOO}) {
      std::vector<ITypeRef> ts = all_types(a, t, top, 2);
      for (ITypeRef s : ts)
        for (ITypeRef u : ts) {
          bool syn = subsume(s, u);
          bool sem = m.leq(interp(m, ITypeSet(t, {s}), top), interp(m, ITypeSet(t, {u}), top));
          cx.expect(syn == sem, [&] { return std::string(file) + ": " + s->str() + " ⊑ " + u->str() + " disagrees with the model"; });
        }
    }
    for (const SimpleType& t : {kOO, kOOO}) {
      std::vector<ITypeRef> fs = all_types(a, t, top, 2);
      std::vector<ITypeRef> xs = all_types(a, t.arg(), top, 2);
      for (std::size_t i = 0; i < fs.size(); ++i)
        for (std::size_t j = i; j < fs.size(); j += 3) {
          ITypeSet s(t, {fs[i], fs[j]});
          for (std::size_t x = 0; x <= xs.size(); ++x)
            for (std::size_t y = x; y <= xs.size(); y += 2) {
              ITypeSet arg(t.arg());
              if (x < xs.size()) arg.insert(xs[x]);
              if (y < xs.size()) arg.insert(xs[y]);
              for (int k = 0; k <= top; ++k) {
                Value lhs = interp(m, type_apply(s, arg), k);
                Value rhs = m.apply(interp(m, s, k), interp(m, arg, k));
                cx.expect(m.equal(lhs, rhs), [&] {
                  return std::string(file) + ": ⟦S(T)⟧ ≠ ⟦S⟧(⟦T⟧) for S=" + s.str() + " T=" + arg.str() + " k=" + std::to_string(k);
                });
              }
            }
        }
    }
    Representer rep(m);
    each_lattice(m, {kO, kOO, kOOO}, [&](int k, const SimpleType& t, const std::vector<Value>& ds) {
      std::vector<ITypeRef> above;
      for (ITypeRef x : all_types(a, t, top, 1))
        if (x->stratum(a) > k) above.push_back(x);
      for (const Value& d : ds) {
        ITypeSet s = rep.represent(d);
        cx.expect(within_types(s, k, a) && m.equal(interp(m, s, k), d),
                  [&] { return std::string(file) + ": represent(" + show(m, d) + ") = " + s.str() + " does not interpret back"; });
        for (ITypeRef x : above) {
          ITypeSet wider = s;
          wider.insert(x);
          cx.expect(m.equal(interp(m, wider, k), d), [&] { return std::string(file) + ": " + x->str() + " is visible at k=" + std::to_string(k); });
        }
      }
    });
  }
}

// ---- beta -------------------------------------------------------------------

void suite_beta(Ctx& cx) {
  WAA a1 = cx.load("a1.waa"), a2 = cx.load("a2.waa");
  Model m1(a1, cx.opt.cap), m2(a2, cx.opt.cap);
  std::mt19937_64 rng(cx.opt.seed);
  std::vector<TermPtr> corpus;
  for (const std::string& s : base_corpus()) corpus.push_back(parse_term(s, corpus_signature()));
  std::size_t steps = 0;
  TermPtr cur;
  while (steps < 100) {
    if (!cur || cur->size() > 400) cur = corpus[rng() % corpus.size()];
    std::vector<std::string> rs = redex_paths(cur);
    if (rs.empty()) {
      cur = nullptr;
      continue;
    }
    TermPtr next = contract_at(cur, rs[rng() % rs.size()]);
    for (const Model* m : {&m1, &m2})
      cx.expect(m->accept(cur) == m->accept(next), [&] { return "reduction changes the value: " + to_string(cur) + " → " + to_string(next); });
    cur = next;
    ++steps;
  }
}

// ---- duality ----------------------------------------------------------------

void suite_duality(Ctx& cx) {
  for (const char* file : {"a1.waa", "a2.waa"})
    for (bool dual : {false, true}) {
      WAA a = dual ? dualize(cx.load(file)) : cx.load(file);
      std::string name = std::string(dual ? "dual " : "") + file;
      Prover p(a, cx.opt.cap);
      for (const std::string& src : base_corpus()) {
        TermPtr m = parse_term(src, corpus_signature());
        for (const Verdict& v : p.decide(m)) {
          CheckResult r = check_derivation(v.certificate, a);
          cx.expect(r.ok, [&] { return name + " " + src + " at " + a.name(v.state) + ": " + r.message; });
          ITypeSet s = state_set(a, StateSet{1} << v.state);
          bool other = true;
          try {
            if (v.accepted)
              p.derive_dual({}, m, s);
            else
              p.derive({}, m, s);
          } catch (const NotDerivable&) {
            other = false;
          }
          cx.expect(!other, [&] { return name + " " + src + " at " + a.name(v.state) + ": both judgments derivable"; });
        }
        // M ≥ F and M ≱ Q−F for F the accepting set
        StateSet f = p.model().accept(m);
        CheckResult pos = check_derivation(p.derive({}, m, state_set(a, f)), a);
        CheckResult neg = check_derivation(p.derive_dual({}, m, state_set(a, a.all() & ~f)), a);
        cx.expect(pos.ok, [&] { return name + " " + src + " ≥ accepting set: " + pos.message; });
        cx.expect(neg.ok, [&] { return name + " " + src + " ≱ rejecting set: " + neg.message; });
      }
    }
}

// ---- oracles ----------------------------------------------------------------

void suite_oracles(Ctx& cx) {
  for (const char* pair : {"aloop", "bloop", "chain", "abloop", "mixed"}) {
    std::string base = std::string("regular/") + pair;
    TermPtr t = parse_term(to_string(parse_program(cx.read(base + ".lam")).term), corpus_signature());
    RegularTree tree = parse_regular_tree(cx.read(base + ".tree"), corpus_signature());
    for (const char* file : {"a1.waa", "a2.waa", "a3.waa"}) {
      WAA a = cx.load(file);
      Model m(a, cx.opt.cap);
      StateSet by_model = m.accept(t);
      StateSet by_game = solve_regular(a, tree)[0];
      cx.expect(by_model == by_game, [&] { return std::string(pair) + " under " + file + ": model and game disagree"; });
      for (std::size_t depth = 1; depth <= 20; ++depth) {
        BohmPrefix bt = bohm_prefix(t, depth, 10000);
        StateSet lo = accept_prefix(a, bt, PrefixMode::Pessimistic).win;
        StateSet hi = accept_prefix(a, bt, PrefixMode::Optimistic).win;
        cx.expect(subset(lo, by_model) && subset(by_model, hi), [&] {
          return std::string(pair) + " under " + file + ": prefix bounds at depth " + std::to_string(depth) + " exclude the model's answer";
        });
      }
    }
  }
}

// ---- fuzz -------------------------------------------------------------------

struct Sample {
  std::shared_ptr<WAA> a;
  Certificate c;
};

void suite_fuzz(Ctx& cx) {
  std::vector<Sample> pool;
  std::vector<std::string> terms = base_corpus();
  terms.push_back("(\\f:o->o. \\x:o. f (f x)) (\\y:o. b (a y)) c");
  terms.push_back("(\\h:(o->o)->o->o. h a (h b c)) (\\f:o->o. \\x:o. f (f x))");
  terms.push_back("(Y F:o->o. \\x:o. g (a x) (F (b x))) c");
  terms.push_back("g (Y x:o. a x) (Y y:o. b y)");
  for (const char* file : {"a1.waa", "a2.waa", "a3.waa"})
    for (bool dual : {false, true}) {
      auto a = std::make_shared<WAA>(dual ? dualize(cx.load(file)) : cx.load(file));
      Prover p(*a, cx.opt.cap);
      for (const std::string& src : terms) {
        std::vector<Verdict> vs;
        try {
          vs = p.decide(parse_term(src, corpus_signature()));
        } catch (const LatticeTooLarge&) {
          continue;
        }
        for (Verdict& v : vs) pool.push_back({a, std::move(v.certificate)});
      }
    }
  if (pool.size() < 100) throw Failed("only " + std::to_string(pool.size()) + " derivations in the pool");
  std::mt19937_64 rng(cx.opt.seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(100);
  for (const Sample& s : pool) {
    CheckResult r = check_derivation(s.c, *s.a);
    cx.expect(r.ok, [&] { return "generated derivation rejected: " + r.message + "\n" + write_certificate(s.c); });
  }
  std::size_t done = 0;
  while (done < 300) {
    const Sample& s = pool[rng() % pool.size()];
    Certificate c = s.c;
    auto kind = static_cast<Mutation>(rng() % 4);
    if (!mutate(c, *s.a, kind, rng())) continue;
    CheckResult r = check_derivation(c, *s.a);
    cx.expect(!r.ok, [&] { return "mutated derivation accepted:\n" + write_certificate(c); });
    ++done;
  }
}

}  // namespace

// ---- corpus and helpers -----------------------------------------------------

Signature corpus_signature() {
  Signature s;
  s.add("a", kOO);
  s.add("b", kOO);
  s.add("c", kO);
  s.add("g", SimpleType::arrow(kO, kOO));
  return s;
}

const std::vector<std::string>& base_corpus() {
  static const std::vector<std::string> terms = {
      "c",
      "a c",
      "Y x:o. a x",
      "Y x:o. b x",
      "Y x:o. a (b x)",
      "Y x:o. x",
      "(\\f:o->o. \\x:o. f (f x)) a c",
      "(Y F:(o->o)->o. \\g:o->o. g (b (F (\\x:o. g (g x))))) a",
      "(Y F:o->o. \\x:o. a (F (b x))) c",
      "(\\f:o->o. Y x:o. f x) b",
  };
  return terms;
}

std::vector<std::string> redex_paths(const TermPtr& t) {
  std::vector<std::string> out;
  std::function<void(const TermPtr&, const std::string&)> go = [&](const TermPtr& u, const std::string& p) {
    switch (u->kind()) {
      case TermKind::Var:
      case TermKind::Const:
        return;
      case TermKind::App:
        if (u->fun()->kind() == TermKind::Abs) out.push_back(p);
        go(u->fun(), p + "0");
        go(u->arg(), p + "1");
        return;
      case TermKind::Abs:
        go(u->body(), p + "b");
        return;
      case TermKind::Fix:
        out.push_back(p);
        go(u->body(), p + "b");
        return;
    }
  };
  go(t, "");
  return out;
}

TermPtr contract_at(const TermPtr& t, const std::string& path) {
  if (path.empty()) {
    if (t->kind() == TermKind::Fix) return substitute(t->body(), {{t->name(), t}});
    if (t->kind() == TermKind::App && t->fun()->kind() == TermKind::Abs)
      return substitute(t->fun()->body(), {{t->fun()->name(), t->arg()}});
    throw std::invalid_argument("no redex at this position");
  }
  std::string rest = path.substr(1);
  switch (path[0]) {
    case '0':
      return mk_app(contract_at(t->fun(), rest), t->arg());
    case '1':
      return mk_app(t->fun(), contract_at(t->arg(), rest));
    case 'b':
      if (t->kind() == TermKind::Abs) return mk_abs(t->name(), t->binder_type(), contract_at(t->body(), rest));
      return mk_fix(t->name(), t->binder_type(), contract_at(t->body(), rest));
  }
  throw std::invalid_argument("bad redex path");
}

namespace {

void nodes(Derivation& d, bool root, std::vector<std::pair<Derivation*, bool>>& out) {
  out.emplace_back(&d, root);
  for (Derivation& p : d.premises) nodes(p, false, out);
}

// A type of simple type t outside s, if one exists.
ITypeRef fresh_type(const WAA& a, const SimpleType& t, const ITypeSet& s) {
  if (t.is_base()) {
    for (int q = 0; q < a.size(); ++q)
      if (!s.contains(IType::state(a, q))) return IType::state(a, q);
    return nullptr;
  }
  std::vector<ITypeRef> cands;
  std::function<void(const SimpleType&, std::vector<ITypeRef>&)> finals = [&](const SimpleType& u, std::vector<ITypeRef>& acc) {
    if (u.is_base()) {
      for (int q = 0; q < a.size(); ++q) acc.push_back(IType::state(a, q));
      return;
    }
    std::vector<ITypeRef> inner;
    finals(u.result(), inner);
    for (ITypeRef x : inner) acc.push_back(IType::arrow(a, ITypeSet(u.arg()), x));
  };
  finals(t, cands);
  for (ITypeRef x : cands)
    if (!s.contains(x)) return x;
  return nullptr;
}

Rule swapped(const Derivation& d) {
  switch (d.rule) {
    case Rule::Axiom: return Rule::App;
    case Rule::Intersect: return d.premises.empty() ? Rule::App : Rule::Axiom;
    case Rule::Subsume: return Rule::Axiom;
    case Rule::ConstNullary: return Rule::ConstTrans;
    case Rule::ConstTrans: return Rule::ConstNullary;
    case Rule::App: return Rule::Abs;
    case Rule::Abs: return Rule::App;
    case Rule::YOdd: return Rule::Abs;
    case Rule::YEven: return Rule::YOdd;
  }
  return Rule::App;
}

}  // namespace

bool mutate(Certificate& c, const WAA& a, Mutation kind, std::size_t pick) {
  std::vector<std::pair<Derivation*, bool>> all;
  nodes(c.root, true, all);
  std::vector<Derivation*> ok;
  for (auto [d, root] : all) {
    switch (kind) {
      case Mutation::AddType:
        if (d->rule != Rule::Subsume && fresh_type(a, d->types.type(), d->types)) ok.push_back(d);
        break;
      case Mutation::MovePath:
        if (!root) ok.push_back(d);
        break;
      case Mutation::SwapRule:
        ok.push_back(d);
        break;
      case Mutation::BumpStratum:
        if (d->witness.rfind("k=", 0) == 0) ok.push_back(d);
        break;
    }
  }
  if (ok.empty()) return false;
  Derivation* d = ok[pick % ok.size()];
  switch (kind) {
    case Mutation::AddType:
      d->types.insert(fresh_type(a, d->types.type(), d->types));
      break;
    case Mutation::MovePath:
      d->path += d->path.size() % 2 ? "0" : "1";
      break;
    case Mutation::SwapRule:
      d->rule = swapped(*d);
      break;
    case Mutation::BumpStratum:
      d->witness = "k=" + std::to_string(std::stoi(d->witness.substr(2)) + 1);
      break;
  }
  return true;
}

const std::vector<std::string>& selftest_suites() {
  static const std::vector<std::string> names = {"galois", "fixpoint", "types", "beta", "duality", "oracles", "fuzz"};
  return names;
}

SuiteResult run_suite(const std::string& name, const SelftestOptions& opt) {
  static const std::map<std::string, void (*)(Ctx&)> table = {
      {"galois", suite_galois}, {"fixpoint", suite_fixpoint}, {"types", suite_types},   {"beta", suite_beta},
      {"duality", suite_duality}, {"oracles", suite_oracles}, {"fuzz", suite_fuzz},
  };
  auto it = table.find(name);
  if (it == table.end()) throw std::invalid_argument("unknown suite " + name);
  SuiteResult res;
  res.name = name;
  Ctx cx{opt, res};
  auto start = std::chrono::steady_clock::now();
  try {
    it->second(cx);
  } catch (const Failed& e) {
    res.ok = false;
    res.failure = e.what();
  } catch (const std::exception& e) {
    res.ok = false;
    res.failure = std::string("error: ") + e.what();
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace stratum
