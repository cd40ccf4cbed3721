#include "stratum/types.hpp"

#include <algorithm>
#include <cctype>
#include <memory>
#include <mutex>
#include <unordered_map>

namespace stratum {

struct ITypeTable {
  std::mutex mu;
  std::unordered_map<std::string, std::unique_ptr<IType>> by_key;

  static ITypeTable& get() {
    static ITypeTable t;
    return t;
  }

  ITypeRef intern(const std::string& key, SimpleType type, int q, ITypeSet prem, ITypeRef target,
                  std::string printed) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = by_key.find(key);
    if (it != by_key.end()) return it->second.get();
    std::size_t id = by_key.size();
    auto node = std::unique_ptr<IType>(new IType(std::move(type), q, std::move(prem), target, std::move(printed), id));
    ITypeRef r = node.get();
    by_key.emplace(key, std::move(node));
    return r;
  }
};

namespace {

bool before(ITypeRef x, ITypeRef y) {
  if (x->str() != y->str()) return x->str() < y->str();
  return x->id() < y->id();
}

}  // namespace

ITypeSet::ITypeSet(SimpleType type, std::vector<ITypeRef> items) : type_(std::move(type)) {
  for (ITypeRef t : items) insert(t);
}

bool ITypeSet::contains(ITypeRef t) const {
  auto it = std::lower_bound(items_.begin(), items_.end(), t, before);
  return it != items_.end() && *it == t;
}

void ITypeSet::insert(ITypeRef t) {
  if (t->type() != type_) throw TypeError("type " + t->str() + " is not of simple type " + type_.str());
  auto it = std::lower_bound(items_.begin(), items_.end(), t, before);
  if (it == items_.end() || *it != t) items_.insert(it, t);
}

ITypeSet ITypeSet::unite(const ITypeSet& other) const {
  if (other.type_ != type_) throw TypeError("union of " + type_.str() + " and " + other.type_.str() + " sets");
  ITypeSet r(type_);
  std::set_union(items_.begin(), items_.end(), other.items_.begin(), other.items_.end(),
                 std::back_inserter(r.items_), before);
  return r;
}

std::string ITypeSet::str() const {
  std::string out = "{";
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (i) out += ",";
    out += items_[i]->str();
  }
  return out + "}";
}

bool operator<(const ITypeSet& a, const ITypeSet& b) {
  if (a.type_ != b.type_) return a.type_ < b.type_;
  return std::lexicographical_compare(a.items_.begin(), a.items_.end(), b.items_.begin(), b.items_.end(), before);
}

ITypeRef IType::state(const WAA& a, int q) {
  if (q < 0 || q >= a.size()) throw TypeError("no state " + std::to_string(q));
  SimpleType o = SimpleType::base();
  return ITypeTable::get().intern("o|" + std::to_string(q) + ":" + a.name(q), o, q, ITypeSet(o), nullptr,
                                  a.name(q));
}

ITypeRef IType::arrow(const WAA& a, const ITypeSet& premises, ITypeRef target) {
  int l = target->stratum(a);
  for (ITypeRef p : premises.items())
    if (p->stratum(a) > l)
      throw TypeError("premise " + p->str() + " lies above the stratum of " + target->str());
  SimpleType t = SimpleType::arrow(premises.type(), target->type());
  std::string key = t.str() + "|";
  for (ITypeRef p : premises.items()) key += std::to_string(p->id()) + ",";
  key += ">" + std::to_string(target->id());
  return ITypeTable::get().intern(key, t, -1, premises, target, premises.str() + "->" + target->str());
}

int IType::stratum(const WAA& a) const {
  const IType* t = this;
  while (!t->is_state()) t = t->target_;
  return a.rank(t->state_);
}

int max_stratum(const ITypeSet& s, const WAA& a) {
  int m = -1;
  for (ITypeRef t : s.items()) m = std::max(m, t->stratum(a));
  return m;
}

bool within_tau(const ITypeSet& s, int k, const WAA& a) {
  for (ITypeRef t : s.items())
    if (t->stratum(a) != k) return false;
  return true;
}

bool within_types(const ITypeSet& s, int k, const WAA& a) { return max_stratum(s, a) <= k; }

ITypeSet restrict_to(const ITypeSet& s, int k, const WAA& a) {
  ITypeSet r(s.type());
  for (ITypeRef t : s.items())
    if (t->stratum(a) <= k) r.insert(t);
  return r;
}

ITypeSet arrows(const WAA& a, const ITypeSet& premises, const ITypeSet& targets) {
  ITypeSet r(SimpleType::arrow(premises.type(), targets.type()));
  for (ITypeRef t : targets.items()) r.insert(IType::arrow(a, premises, t));
  return r;
}

ITypeSet state_set(const WAA& a, StateSet s) {
  ITypeSet r(SimpleType::base());
  for (int q = 0; q < a.size(); ++q)
    if (s >> q & 1) r.insert(IType::state(a, q));
  return r;
}

// ---- order ------------------------------------------------------------------

namespace {

struct SubsumeMemo {
  std::mutex mu;
  std::unordered_map<std::uint64_t, bool> known;
};

SubsumeMemo& memo() {
  static SubsumeMemo m;
  return m;
}

}  // namespace

bool subsume(ITypeRef s, ITypeRef t) {
  if (s == t) return true;
  if (s->type() != t->type()) throw TypeError("subsumption between " + s->type().str() + " and " + t->type().str());
  if (s->is_state()) return false;
  std::uint64_t key = (static_cast<std::uint64_t>(s->id()) << 32) | t->id();
  {
    std::lock_guard<std::mutex> lock(memo().mu);
    auto it = memo().known.find(key);
    if (it != memo().known.end()) return it->second;
  }
  bool r = subsume(s->target(), t->target()) && subsume(t->premises(), s->premises());
  std::lock_guard<std::mutex> lock(memo().mu);
  memo().known.emplace(key, r);
  return r;
}

bool subsume(const ITypeSet& s, const ITypeSet& t) {
  if (s.type() != t.type()) throw TypeError("subsumption between " + s.type().str() + " and " + t.type().str());
  for (ITypeRef x : s.items()) {
    bool found = false;
    for (ITypeRef y : t.items())
      if (subsume(x, y)) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

ITypeSet type_apply(const ITypeSet& s, const ITypeSet& t) {
  if (s.type().is_base() || s.type().arg() != t.type())
    throw TypeError("cannot apply " + s.type().str() + " types to " + t.type().str() + " types");
  ITypeSet r(s.type().result());
  for (ITypeRef u : s.items())
    if (subsume(u->premises(), t)) r.insert(u->target());
  return r;
}

// ---- parsing ----------------------------------------------------------------

namespace {

struct TypeParser {
  std::string_view src;
  std::size_t pos = 0;
  const WAA& a;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, 1, static_cast<int>(pos) + 1); }

  void skip() {
    while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t')) ++pos;
  }

  bool eat(std::string_view tok) {
    skip();
    if (src.substr(pos, tok.size()) == tok) {
      pos += tok.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view tok) {
    if (!eat(tok)) fail("expected '" + std::string(tok) + "'");
  }

  ITypeSet set(const SimpleType& t) {
    expect("{");
    ITypeSet r(t);
    if (eat("}")) return r;
    do r.insert(type(t));
    while (eat(","));
    expect("}");
    return r;
  }

  ITypeRef type(const SimpleType& t) {
    skip();
    if (t.is_base()) {
      std::size_t start = pos;
      while (pos < src.size() && (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_' || src[pos] == '\''))
        ++pos;
      if (start == pos) fail("expected a state name");
      std::string name(src.substr(start, pos - start));
      try {
        return IType::state(a, a.state(name));
      } catch (const AutomatonError&) {
        pos = start;
        fail("unknown state " + name);
      }
    }
    ITypeSet prem = set(t.arg());
    if (!eat("->") && !eat("→")) fail("expected '->'");
    std::size_t at = pos;
    ITypeRef target = type(t.result());
    try {
      return IType::arrow(a, prem, target);
    } catch (const TypeError& e) {
      pos = at;
      fail(e.what());
    }
  }
};

}  // namespace

ITypeSet parse_typeset(std::string_view text, const SimpleType& type, const WAA& a) {
  TypeParser p{text, 0, a};
  ITypeSet r = p.set(type);
  p.skip();
  if (p.pos != text.size()) p.fail("trailing input");
  return r;
}

// ---- interpretation ---------------------------------------------------------

namespace {

Value interp_one(const Model& m, ITypeRef t, int k, bool dual) {
  const WAA& a = m.automaton();
  if (t->is_state()) {
    StateSet q = StateSet{1} << t->state();
    if (dual) return m.base(k, m.universe(k) & ~q);
    return m.base(k, a.rank(t->state()) <= k ? q : 0);
  }
  Value d = m.materialize(dual ? dual_interp(m, t->premises(), k) : interp(m, t->premises(), k));
  Value e = interp_one(m, t->target(), k, dual);
  return dual ? m.costep(d, e) : m.step(d, e);
}

Value fold(const Model& m, const ITypeSet& s, int k, bool dual) {
  if (s.empty()) return dual ? m.top(k, s.type()) : m.bottom(k, s.type());
  Value v = interp_one(m, s.items()[0], k, dual);
  for (std::size_t i = 1; i < s.size(); ++i) {
    Value w = interp_one(m, s.items()[i], k, dual);
    v = dual ? m.meet(v, w) : m.join(v, w);
  }
  return v;
}

}  // namespace

Value interp(const Model& m, const ITypeSet& s, int k) { return fold(m, s, k, false); }
Value dual_interp(const Model& m, const ITypeSet& s, int k) { return fold(m, s, k, true); }

// ---- representation ---------------------------------------------------------

ITypeSet Representer::represent(const Value& d) {
  int k = d.level();
  auto key = std::make_tuple(k, d.type().str(), m_.leaf_vector(d));
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  ITypeSet r(d.type());
  if (k > 0) r = represent(m_.project_down(d));
  r = r.unite(top_part(k == 0 ? d : m_.bar(d)));
  cache_.emplace(std::move(key), r);
  return r;
}

ITypeSet Representer::top_part(const Value& x) {
  int k = x.level();
  const WAA& a = m_.automaton();
  if (x.is_base()) return state_set(a, x.set() & a.rank_eq(k));
  const Lattice& lx = m_.lattice(k, x.type().arg());
  std::vector<ITypeSet> parts;
  parts.reserve(lx.size);
  for (std::size_t i = 0; i < lx.size; ++i) {
    Value y = m_.apply(x, m_.element(lx, static_cast<int>(i)));
    parts.push_back(top_part(k == 0 ? y : m_.bar(y)));
  }
  ITypeSet r(x.type());
  for (std::size_t i = 0; i < lx.size; ++i) {
    ITypeSet fresh(x.type().result());
    for (ITypeRef t : parts[i].items()) {
      bool seen = false;
      for (int c : lx.lower_covers(static_cast<int>(i))) seen = seen || parts[c].contains(t);
      if (!seen) fresh.insert(t);
    }
    if (fresh.empty()) continue;
    ITypeSet p = represent(m_.element(lx, static_cast<int>(i)));
    r = r.unite(arrows(a, p, fresh));
  }
  return r;
}

ITypeSet represent(const Model& m, const Value& d) {
  Representer r(m);
  return r.represent(d);
}

}  // namespace stratum
