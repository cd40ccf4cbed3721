#include "stratum/model.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <numeric>

namespace stratum {

LatticeTooLarge::LatticeTooLarge(const std::string& where, std::size_t estimate)
    : std::runtime_error("lattice " + where + " exceeds the size cap (at least " +
                         std::to_string(estimate) + " elements)"),
      estimate_(estimate) {}

StateSet Value::set() const {
  if (!is_base()) throw ModelError("not a base value");
  return base_;
}

Env bind(Env env, std::string name, Value v) {
  return std::make_shared<const EnvNode>(EnvNode{std::move(name), std::move(v), std::move(env)});
}

// ---- lattices ---------------------------------------------------------------

namespace {

std::string key_of(const StateSet* p, std::size_t n) {
  return std::string(reinterpret_cast<const char*>(p), n * sizeof(StateSet));
}

std::string where(int k, const SimpleType& t) { return "D^" + std::to_string(k) + "_" + t.str(); }

}  // namespace

bool Lattice::leq(int i, int j) const {
  const StateSet *a = at(i), *b = at(j);
  for (std::size_t t = 0; t < leafcount; ++t)
    if (!subset(a[t], b[t])) return false;
  return true;
}

int Lattice::find(const StateSet* p) const {
  auto it = index_.find(key_of(p, leafcount));
  return it == index_.end() ? -1 : it->second;
}

const std::vector<int>& Lattice::lower_covers(int i) const {
  std::call_once(covers_once_, [this] {
    covers_.assign(size, {});
    for (std::size_t x = 0; x < size; ++x) {
      // maximal elements strictly below x; larger indices first
      for (std::size_t y = x; y-- > 0;) {
        if (!leq(static_cast<int>(y), static_cast<int>(x))) continue;
        bool dominated = false;
        for (int c : covers_[x])
          if (leq(static_cast<int>(y), c)) {
            dominated = true;
            break;
          }
        if (!dominated) covers_[x].push_back(static_cast<int>(y));
      }
    }
  });
  return covers_.at(i);
}

std::size_t Model::default_cap() {
  if (const char* e = std::getenv("STRATUM_CAP")) {
    char* end = nullptr;
    unsigned long v = std::strtoul(e, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  return 50000;
}

Model::Model(WAA automaton, std::size_t cap) : a_(std::move(automaton)), cap_(cap) {
  if (cap_ == 0) throw ModelError("cap must be positive");
}

const Lattice& Model::lattice(int k, const SimpleType& type) const {
  if (k < 0 || k > max_level()) throw ModelError("stratum " + std::to_string(k) + " out of range");
  std::lock_guard<std::recursive_mutex> lock(mu_);
  auto key = std::make_pair(k, type.str());
  auto it = lattices_.find(key);
  if (it != lattices_.end()) return *it->second;
  auto l = build(k, type);
  return *lattices_.emplace(key, std::move(l)).first->second;
}

std::size_t Model::leafcount(int k, const SimpleType& type) const {
  if (type.is_base()) return 1;
  return lattice(k, type.arg()).size * leafcount(k, type.result());
}

std::unique_ptr<Lattice> Model::build(int k, const SimpleType& type) const {
  auto l = std::make_unique<Lattice>();
  l->k = k;
  l->type = type;
  l->leafcount = leafcount(k, type);
  std::size_t lc = l->leafcount;

  std::vector<StateSet> raw;
  std::vector<int> raw_down;
  std::size_t count = 0;

  if (type.is_base()) {
    StateSet u = universe(k);
    if (popcount(u) >= 63 || (std::size_t{1} << popcount(u)) > cap_)
      throw LatticeTooLarge(where(k, type), std::size_t{1} << std::min(popcount(u), 63));
    StateSet sub = u;
    for (;;) {
      raw.push_back(sub);
      ++count;
      if (sub == 0) break;
      sub = (sub - 1) & u;
    }
    if (k > 0) {
      const Lattice& low = lattice(k - 1, type);
      StateSet lu = universe(k - 1);
      for (StateSet s : raw) {
        StateSet d = s & lu;
        raw_down.push_back(low.find(&d));
      }
    }
  } else {
    const Lattice& lx = lattice(k, type.arg());
    const Lattice& ly = lattice(k, type.result());
    std::size_t n = lx.size, lcy = ly.leafcount;
    std::vector<int> all(ly.size);
    std::iota(all.begin(), all.end(), 0);
    std::vector<const std::vector<int>*> cand(n, &all);
    std::vector<int> choice(n, 0);
    for (std::size_t i = 0; i < n; ++i) lx.lower_covers(static_cast<int>(i));

    auto enumerate = [&](int f1) {
      auto rec = [&](auto& self, std::size_t i) -> void {
        if (i == n) {
          if (++count > cap_) throw LatticeTooLarge(where(k, type), count);
          for (std::size_t t = 0; t < n; ++t) raw.insert(raw.end(), ly.at(choice[t]), ly.at(choice[t]) + lcy);
          if (f1 >= 0) raw_down.push_back(f1);
          return;
        }
        for (int r : *cand[i]) {
          bool mono = true;
          for (int c : lx.lower_covers(static_cast<int>(i)))
            if (!ly.leq(choice[c], r)) {
              mono = false;
              break;
            }
          if (!mono) continue;
          choice[i] = r;
          self(self, i + 1);
        }
      };
      rec(rec, 0);
    };

    if (k == 0) {
      enumerate(-1);
    } else {
      const Lattice& lp = lattice(k - 1, type);
      const Lattice& lyd = lattice(k - 1, type.result());
      for (std::size_t p = 0; p < lp.size; ++p) {
        for (std::size_t i = 0; i < n; ++i) {
          int t = lyd.find(lp.at(p) + static_cast<std::size_t>(lx.down[i]) * lyd.leafcount);
          if (t < 0) throw ModelError("corrupt lower lattice " + where(k - 1, type));
          cand[i] = &ly.classes.at(t);
        }
        enumerate(static_cast<int>(p));
      }
    }
  }

  // sort into a linear extension
  std::vector<int> pop(count, 0), order(count);
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t t = 0; t < lc; ++t) pop[i] += popcount(raw[i * lc + t]);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    if (pop[x] != pop[y]) return pop[x] < pop[y];
    return std::lexicographical_compare(raw.begin() + x * lc, raw.begin() + (x + 1) * lc,
                                        raw.begin() + y * lc, raw.begin() + (y + 1) * lc);
  });
  l->size = count;
  l->leaves = std::make_shared<std::vector<StateSet>>();
  l->leaves->reserve(count * lc);
  for (int x : order) {
    l->leaves->insert(l->leaves->end(), raw.begin() + x * lc, raw.begin() + (x + 1) * lc);
    if (k > 0) l->down.push_back(raw_down[x]);
  }
  for (std::size_t i = 0; i < count; ++i) l->index_.emplace(key_of(l->at(i), lc), static_cast<int>(i));
  if (k > 0) {
    const Lattice& low = lattice(k - 1, type);
    l->classes.assign(low.size, {});
    for (std::size_t i = 0; i < count; ++i) l->classes.at(l->down[i]).push_back(static_cast<int>(i));
    for (const auto& c : l->classes)
      if (c.empty()) throw ModelError("empty refinement class in " + where(k, type));
  }
  return l;
}

// ---- values -----------------------------------------------------------------

Value Model::base(int k, StateSet s) const {
  if (!subset(s, universe(k))) throw ModelError("state set " + a_.set_str(s) + " outside stratum " + std::to_string(k));
  Value v;
  v.k_ = k;
  v.base_ = s;
  return v;
}

Value Model::closure(int k, const SimpleType& type, std::function<Value(const Value&)> fn) const {
  if (type.is_base()) throw ModelError("closure at base type");
  Value v;
  v.k_ = k;
  v.type_ = type;
  v.fn_ = std::make_shared<const Value::Fn>(std::move(fn));
  return v;
}

Value Model::table(int k, const SimpleType& type, std::shared_ptr<const std::vector<StateSet>> buf,
                   std::size_t off) const {
  if (type.is_base()) return base(k, (*buf)[off]);
  Value v;
  v.k_ = k;
  v.type_ = type;
  v.buf_ = std::move(buf);
  v.off_ = off;
  return v;
}

Value Model::element(const Lattice& l, int i) const {
  if (i < 0 || static_cast<std::size_t>(i) >= l.size) throw ModelError("lattice index out of range");
  return table(l.k, l.type, l.leaves, static_cast<std::size_t>(i) * l.leafcount);
}

Value Model::slice(const Value& t, std::size_t i) const {
  const SimpleType& b = t.type().result();
  return table(t.level(), b, t.buf_, t.off_ + i * leafcount(t.level(), b));
}

const StateSet* Model::leaves(const Value& v) const {
  if (v.is_base()) return &v.base_;
  if (!v.buf_) throw ModelError("value is not materialised");
  return v.buf_->data() + v.off_;
}

Value Model::top(int k, const SimpleType& type) const {
  if (type.is_base()) return base(k, universe(k));
  Value r = top(k, type.result());
  return closure(k, type, [r](const Value&) { return r; });
}

Value Model::bottom(int k, const SimpleType& type) const {
  if (type.is_base()) return base(k, 0);
  Value r = bottom(k, type.result());
  return closure(k, type, [r](const Value&) { return r; });
}

Value Model::apply(const Value& f, const Value& x) const {
  if (f.is_base()) throw ModelError("applying a base value");
  if (f.type().arg() != x.type() || f.level() != x.level())
    throw ModelError("argument " + x.type().str() + "@" + std::to_string(x.level()) +
                     " does not fit " + f.type().str() + "@" + std::to_string(f.level()));
  if (f.fn_) return (*f.fn_)(x);
  int i = index_of(x);
  if (i < 0) throw ModelError("argument outside " + where(x.level(), x.type()));
  return slice(f, static_cast<std::size_t>(i));
}

Value Model::materialize(const Value& v) const {
  if (!v.fn_) return v;
  const Lattice& lx = lattice(v.level(), v.type().arg());
  std::size_t lcb = leafcount(v.level(), v.type().result());
  auto buf = std::make_shared<std::vector<StateSet>>();
  buf->reserve(lx.size * lcb);
  for (std::size_t i = 0; i < lx.size; ++i) {
    Value r = materialize(apply(v, element(lx, static_cast<int>(i))));
    const StateSet* p = leaves(r);
    buf->insert(buf->end(), p, p + lcb);
  }
  return table(v.level(), v.type(), std::move(buf), 0);
}

std::vector<StateSet> Model::leaf_vector(const Value& v) const {
  if (v.is_base()) return {v.base_};
  Value m = materialize(v);
  const StateSet* p = leaves(m);
  return std::vector<StateSet>(p, p + leafcount(v.level(), v.type()));
}

int Model::index_of(const Value& v) const {
  Value m = materialize(v);
  return lattice(v.level(), v.type()).find(leaves(m));
}

namespace {

void same_ctx(const Value& a, const Value& b) {
  if (a.level() != b.level() || a.type() != b.type())
    throw ModelError("context mismatch: " + a.type().str() + "@" + std::to_string(a.level()) +
                     " vs " + b.type().str() + "@" + std::to_string(b.level()));
}

}  // namespace

bool Model::leq(const Value& a, const Value& b) const {
  same_ctx(a, b);
  if (a.is_base()) return subset(a.base_, b.base_);
  Value x = materialize(a), y = materialize(b);
  const StateSet *p = leaves(x), *q = leaves(y);
  std::size_t n = leafcount(a.level(), a.type());
  for (std::size_t i = 0; i < n; ++i)
    if (!subset(p[i], q[i])) return false;
  return true;
}

bool Model::equal(const Value& a, const Value& b) const {
  same_ctx(a, b);
  if (a.is_base()) return a.base_ == b.base_;
  Value x = materialize(a), y = materialize(b);
  std::size_t n = leafcount(a.level(), a.type());
  return std::memcmp(leaves(x), leaves(y), n * sizeof(StateSet)) == 0;
}

Value Model::leafwise(const Value& a, const Value& b, bool is_join) const {
  same_ctx(a, b);
  if (a.is_base()) return base(a.level(), is_join ? a.base_ | b.base_ : a.base_ & b.base_);
  if (a.fn_ || b.fn_)
    return closure(a.level(), a.type(), [this, a, b, is_join](const Value& h) {
      return leafwise(apply(a, h), apply(b, h), is_join);
    });
  std::size_t n = leafcount(a.level(), a.type());
  const StateSet *p = leaves(a), *q = leaves(b);
  auto buf = std::make_shared<std::vector<StateSet>>(n);
  for (std::size_t i = 0; i < n; ++i) (*buf)[i] = is_join ? p[i] | q[i] : p[i] & q[i];
  return table(a.level(), a.type(), std::move(buf), 0);
}

Value Model::join(const Value& a, const Value& b) const { return leafwise(a, b, true); }
Value Model::meet(const Value& a, const Value& b) const { return leafwise(a, b, false); }

// ---- Galois maps ------------------------------------------------------------

Value Model::project_down(const Value& d) const {
  int k = d.level();
  if (k == 0) throw ModelError("projection below stratum 0");
  if (d.is_base()) return base(k - 1, d.base_ & universe(k - 1));
  if (d.buf_) return project_table(d);
  return closure(k - 1, d.type(),
                 [this, d](const Value& e1) { return project_down(apply(d, lift_inf(e1))); });
}

Value Model::project_table(const Value& d) const {
  int k = d.level();
  const Lattice& lxd = lattice(k - 1, d.type().arg());
  const Lattice& lx = lattice(k, d.type().arg());
  std::size_t lcb = leafcount(k - 1, d.type().result());
  auto buf = std::make_shared<std::vector<StateSet>>();
  buf->reserve(lxd.size * lcb);
  for (std::size_t j = 0; j < lxd.size; ++j) {
    Value r = project_down(slice(d, static_cast<std::size_t>(lx.lift_inf(static_cast<int>(j)))));
    const StateSet* p = leaves(r);
    buf->insert(buf->end(), p, p + lcb);
  }
  return table(k - 1, d.type(), std::move(buf), 0);
}

Value Model::lift_table(const Value& d, bool sup) const {
  int k = d.level() + 1;
  const Lattice& lx = lattice(k, d.type().arg());
  std::size_t lcb = leafcount(k, d.type().result());
  auto buf = std::make_shared<std::vector<StateSet>>();
  buf->reserve(lx.size * lcb);
  for (std::size_t i = 0; i < lx.size; ++i) {
    Value s = slice(d, static_cast<std::size_t>(lx.down[i]));
    Value r = sup ? lift_sup(s) : lift_inf(s);
    const StateSet* p = leaves(r);
    buf->insert(buf->end(), p, p + lcb);
  }
  return table(k, d.type(), std::move(buf), 0);
}

Value Model::lift_inf(const Value& d) const {
  int k = d.level() + 1;
  if (k > max_level()) throw ModelError("lift above the top stratum");
  if (d.is_base()) return base(k, d.base_);
  if (d.buf_) return lift_table(d, false);
  return closure(k, d.type(), [this, d](const Value& e) { return lift_inf(apply(d, project_down(e))); });
}

Value Model::lift_sup(const Value& d) const {
  int k = d.level() + 1;
  if (k > max_level()) throw ModelError("lift above the top stratum");
  if (d.is_base()) return base(k, d.base_ | a_.rank_eq(k));
  if (d.buf_) return lift_table(d, true);
  return closure(k, d.type(), [this, d](const Value& e) { return lift_sup(apply(d, project_down(e))); });
}

Value Model::bar(const Value& d) const {
  int k = d.level();
  if (k == 0) throw ModelError("bar at stratum 0");
  StateSet qk = a_.rank_eq(k);
  if (d.is_base()) return base(k, d.base_ & qk);
  if (d.fn_) return closure(k, d.type(), [this, d](const Value& e) { return bar(apply(d, e)); });
  std::size_t n = leafcount(k, d.type());
  const StateSet* p = leaves(d);
  auto buf = std::make_shared<std::vector<StateSet>>(n);
  for (std::size_t i = 0; i < n; ++i) (*buf)[i] = p[i] & qk;
  return table(k, d.type(), std::move(buf), 0);
}

Value Model::top_bar(int k, const SimpleType& type) const { return bar(top(k, type)); }

std::pair<Value, Value> Model::decompose(const Value& d) const { return {project_down(d), bar(d)}; }

Value Model::step(const Value& d, const Value& e) const {
  if (d.level() != e.level()) throw ModelError("step across strata");
  SimpleType t = SimpleType::arrow(d.type(), e.type());
  Value bot = bottom(e.level(), e.type());
  return closure(d.level(), t, [this, d, e, bot](const Value& h) { return leq(d, h) ? e : bot; });
}

Value Model::costep(const Value& d, const Value& e) const {
  if (d.level() != e.level()) throw ModelError("co-step across strata");
  SimpleType t = SimpleType::arrow(d.type(), e.type());
  Value tp = top(e.level(), e.type());
  return closure(d.level(), t, [this, d, e, tp](const Value& h) { return leq(h, d) ? e : tp; });
}

// ---- fixpoints and evaluation -----------------------------------------------

Value Model::fixpoint(int k, const SimpleType& type, const Value& f) const {
  if (f.level() != k || f.type() != SimpleType::arrow(type, type))
    throw ModelError("fixpoint of a value of type " + f.type().str());
  Value x;
  if (k == 0) {
    x = materialize(top(0, type));
  } else {
    Value low = fixpoint(k - 1, type, project_down(f));
    x = materialize(k % 2 == 0 ? lift_sup(low) : lift_inf(low));
  }
  // a monotone chain in a finite lattice is at most (leaves * states) long
  std::size_t guard = leafcount(k, type) * (a_.size() + 1) + 2;
  for (std::size_t n = 0; n < guard; ++n) {
    Value y = materialize(apply(f, x));
    if (equal(x, y)) return x;
    x = y;
  }
  throw ModelError("fixpoint iteration did not stabilise; argument outside D^" + std::to_string(k));
}

Value Model::const_sem(const std::string& name, int k) const {
  const Signature& sig = a_.signature();
  if (!sig.contains(name)) throw ModelError("unknown constant " + name);
  if (k < 0 || k > max_level()) throw ModelError("stratum out of range");
  int ar = sig.arity(name);
  auto result = [this, name, k](const std::vector<StateSet>& args) {
    StateSet s = 0;
    StateSet u = universe(k);
    for (int q = 0; q < a_.size(); ++q)
      if ((u >> q & 1) && eve_moves(a_, q, name, args)) s |= StateSet{1} << q;
    return base(k, s);
  };
  if (ar == 0) return result({});
  struct Builder {
    const Model* m;
    int k, ar;
    std::function<Value(const std::vector<StateSet>&)> result;
    Value make(std::vector<StateSet> args, SimpleType t) const {
      if (static_cast<int>(args.size()) == ar) return result(args);
      Builder self = *this;
      return m->closure(k, t, [self, args, t](const Value& p) {
        auto next = args;
        next.push_back(p.set());
        return self.make(std::move(next), t.result());
      });
    }
  };
  Builder b{this, k, ar, result};
  return b.make({}, sig.type_of(name));
}

Value Model::eval(const TermPtr& m, const Env& env, int k) const {
  switch (m->kind()) {
    case TermKind::Var:
      for (const EnvNode* e = env.get(); e; e = e->next.get())
        if (e->name == m->name()) {
          if (e->value.type() != m->type() || e->value.level() != k)
            throw ModelError("environment value for " + m->name() + " has the wrong context");
          return e->value;
        }
      throw ModelError("unbound variable " + m->name());
    case TermKind::Const:
      return const_sem(m->name(), k);
    case TermKind::App:
      return apply(eval(m->fun(), env, k), eval(m->arg(), env, k));
    case TermKind::Abs:
      return closure(k, m->type(), [this, m, env, k](const Value& v) {
        return eval(m->body(), bind(env, m->name(), v), k);
      });
    case TermKind::Fix: {
      SimpleType a = m->binder_type();
      Value f = closure(k, SimpleType::arrow(a, a), [this, m, env, k](const Value& v) {
        return eval(m->body(), bind(env, m->name(), v), k);
      });
      return fixpoint(k, a, f);
    }
  }
  throw ModelError("corrupt term");
}

StateSet Model::accept(const TermPtr& m) const {
  if (!m->free_vars().empty()) throw ModelError("term is not closed");
  if (!m->type().is_base()) throw ModelError("term is not of type o");
  return eval(m, nullptr, max_level()).set();
}

std::string Model::str(const Value& v) const {
  if (v.is_base()) return a_.set_str(v.base_);
  Value t = materialize(v);
  const Lattice& lx = lattice(v.level(), v.type().arg());
  std::string out = "[";
  for (std::size_t i = 0; i < lx.size; ++i) {
    if (i) out += ", ";
    out += str(element(lx, static_cast<int>(i))) + "↦" + str(slice(t, i));
  }
  return out + "]";
}

}  // namespace stratum
