#include "stratum/derivation.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace stratum {

namespace {

constexpr const char* kRuleNames[] = {"Axiom", "Intersect", "Subsume", "ConstNullary", "ConstTrans",
                                      "App",   "Abs",       "YOdd",    "YEven"};

const char* symbol(Polarity p) { return p == Polarity::Geq ? "≥" : "≱"; }

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, std::string_view sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t at = s.find(sep, start);
    if (at == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, at - start));
    start = at + sep.size();
  }
}

const Binding* lookup(const Context& g, const std::string& name) {
  for (const Binding& b : g)
    if (b.name == name) return &b;
  return nullptr;
}

// Types of the free variables of t.
void free_types(const TermPtr& t, std::vector<std::string>& bound, std::map<std::string, SimpleType>& out) {
  switch (t->kind()) {
    case TermKind::Var:
      if (std::find(bound.begin(), bound.end(), t->name()) == bound.end()) out.emplace(t->name(), t->type());
      return;
    case TermKind::Const:
      return;
    case TermKind::App:
      free_types(t->fun(), bound, out);
      free_types(t->arg(), bound, out);
      return;
    case TermKind::Abs:
    case TermKind::Fix:
      bound.push_back(t->name());
      free_types(t->body(), bound, out);
      bound.pop_back();
      return;
  }
}

std::string tuple_str(const WAA& a, const Tuple& t) {
  std::string out = "(";
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (j) out += ",";
    out += a.set_str(t[j]);
  }
  return out + ")";
}

// Final state and premise sets of S1 -> ... -> Sn -> q.
ITypeRef unpack_const_type(ITypeRef t, std::vector<StateSet>& sets) {
  while (!t->is_state()) {
    StateSet s = 0;
    for (ITypeRef p : t->premises().items()) s |= StateSet{1} << p->state();
    sets.push_back(s);
    t = t->target();
  }
  return t;
}

ITypeRef const_type(const WAA& a, int q, const Tuple& tuple) {
  ITypeRef t = IType::state(a, q);
  for (std::size_t j = tuple.size(); j-- > 0;) t = IType::arrow(a, state_set(a, tuple[j]), t);
  return t;
}

}  // namespace

const char* rule_name(Rule r) { return kRuleNames[static_cast<int>(r)]; }

std::optional<Rule> parse_rule(std::string_view s) {
  for (int i = 0; i < 9; ++i)
    if (s == kRuleNames[i]) return static_cast<Rule>(i);
  return std::nullopt;
}

Context extend(const Context& g, const std::string& name, const SimpleType& type, const ITypeSet& types) {
  if (types.type() != type) throw TypeError("binding of " + name + " mixes simple types");
  Context r;
  for (const Binding& b : g)
    if (b.name != name) r.push_back(b);
  r.push_back({name, type, types});
  return r;
}

std::size_t Derivation::size() const {
  std::size_t n = 1;
  for (const Derivation& p : premises) n += p.size();
  return n;
}

TermPtr subterm(const TermPtr& t, const std::string& path) {
  TermPtr cur = t;
  for (char c : path) {
    switch (c) {
      case '0':
      case '1':
        if (cur->kind() != TermKind::App) throw std::invalid_argument("step " + std::string(1, c) + " into a non-application");
        cur = c == '0' ? cur->fun() : cur->arg();
        break;
      case 'b':
        if (cur->kind() != TermKind::Abs && cur->kind() != TermKind::Fix)
          throw std::invalid_argument("step b into a non-binder");
        cur = cur->body();
        break;
      case 'L':
        if (cur->kind() != TermKind::Fix) throw std::invalid_argument("step L into a non-fixpoint");
        cur = mk_abs(cur->name(), cur->binder_type(), cur->body());
        break;
      default:
        throw std::invalid_argument("unknown path step '" + std::string(1, c) + "'");
    }
  }
  return cur;
}

// ---- text format ------------------------------------------------------------

namespace {

std::string gamma_str(const Context& g, Polarity pol) {
  if (g.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) out += "; ";
    out += g[i].name + ":" + g[i].type.str() + " " + symbol(pol) + " " + g[i].types.str();
  }
  return out;
}

void write_node(std::ostringstream& out, const Derivation& d, Polarity pol, int depth) {
  out << std::string(2 * depth, ' ') << rule_name(d.rule) << " | " << gamma_str(d.gamma, pol) << " | ⊢ @" << d.path
      << " " << symbol(pol) << " " << d.types.str() << " | " << d.witness << "\n";
  for (const Derivation& p : d.premises) write_node(out, p, pol, depth + 1);
}

struct Line {
  int number;
  int depth;
  std::string text;
};

}  // namespace

std::string write_certificate(const Certificate& c) {
  std::ostringstream out;
  out << "signature: " << c.signature.str() << "\n";
  out << "term: " << to_string(c.term) << "\n";
  write_node(out, c.root, c.polarity, 0);
  return out.str();
}

Signature certificate_signature(std::string_view text) {
  int n = 0;
  for (const std::string& raw : split(text, "\n")) {
    ++n;
    std::string line = trim(raw);
    if (line.rfind("signature:", 0) != 0) continue;
    Signature sig;
    std::string body = trim(std::string_view(line).substr(10));
    if (body.empty()) return sig;
    for (const std::string& entry : split(body, ",")) {
      std::size_t colon = entry.find(':');
      if (colon == std::string::npos) throw ParseError("signature entry without ':'", n, 1);
      try {
        sig.add(trim(std::string_view(entry).substr(0, colon)), parse_type(trim(std::string_view(entry).substr(colon + 1))));
      } catch (const ParseError& e) {
        throw ParseError(std::string("bad signature type: ") + e.what(), n, 1);
      } catch (const TypeError& e) {
        throw ParseError(e.what(), n, 1);
      }
    }
    return sig;
  }
  throw ParseError("missing 'signature:' line", 1, 1);
}

Certificate read_certificate(std::string_view text, const WAA& a) {
  Certificate c;
  c.signature = certificate_signature(text);
  std::vector<Line> nodes;
  int n = 0;
  bool have_term = false;
  for (const std::string& raw : split(text, "\n")) {
    ++n;
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.rfind("signature:", 0) == 0) continue;
    if (t.rfind("term:", 0) == 0) {
      try {
        c.term = parse_term(t.substr(5), c.signature);
      } catch (const ParseError& e) {
        throw ParseError(std::string("in term: ") + e.what(), n, 1);
      }
      have_term = true;
      continue;
    }
    std::size_t sp = 0;
    while (sp < line.size() && line[sp] == ' ') ++sp;
    if (sp % 2) throw ParseError("odd indentation", n, 1);
    nodes.push_back({n, static_cast<int>(sp / 2), trim(line)});
  }
  if (!have_term) throw ParseError("missing 'term:' line", 1, 1);
  if (nodes.empty()) throw ParseError("no derivation", n, 1);

  std::optional<Polarity> pol;
  auto parse_node = [&](const Line& ln) {
    auto fields = split(ln.text, " | ");
    if (fields.size() != 4) throw ParseError("expected 'RULE | Γ | ⊢ @path ≥ {..} | witness'", ln.number, 1);
    Derivation d;
    d.line = ln.number;
    auto rule = parse_rule(trim(fields[0]));
    if (!rule) throw ParseError("unknown rule '" + trim(fields[0]) + "'", ln.number, 1);
    d.rule = *rule;
    d.witness = trim(fields[3]);

    std::string judg = trim(fields[2]);
    const std::string turn = "⊢ @";
    if (judg.rfind(turn, 0) != 0) throw ParseError("judgment must start with '⊢ @'", ln.number, 1);
    std::size_t sp = judg.find(' ', turn.size());
    if (sp == std::string::npos) throw ParseError("judgment without a type set", ln.number, 1);
    d.path = judg.substr(turn.size(), sp - turn.size());
    std::string rest = trim(std::string_view(judg).substr(sp));
    Polarity here;
    if (rest.rfind("≥", 0) == 0) {
      here = Polarity::Geq;
      rest = trim(std::string_view(rest).substr(std::string("≥").size()));
    } else if (rest.rfind("≱", 0) == 0) {
      here = Polarity::NotGeq;
      rest = trim(std::string_view(rest).substr(std::string("≱").size()));
    } else {
      throw ParseError("expected ≥ or ≱", ln.number, 1);
    }
    if (pol && *pol != here) throw ParseError("mixed ≥ and ≱ judgments", ln.number, 1);
    pol = here;
    TermPtr sub;
    try {
      sub = subterm(c.term, d.path);
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("bad path: ") + e.what(), ln.number, 1);
    }
    try {
      d.types = parse_typeset(rest, sub->type(), a);
    } catch (const ParseError& e) {
      throw ParseError(std::string("in type set: ") + e.what(), ln.number, 1);
    }

    std::string g = trim(fields[1]);
    if (g != "-") {
      for (const std::string& entry : split(g, "; ")) {
        std::string sym = std::string(" ") + symbol(here) + " ";
        std::size_t at = entry.find(sym);
        std::size_t colon = entry.find(':');
        if (at == std::string::npos || colon == std::string::npos || colon > at)
          throw ParseError("environment entry must read 'x:A " + std::string(symbol(here)) + " {..}'", ln.number, 1);
        Binding b{trim(std::string_view(entry).substr(0, colon)), SimpleType::base(), ITypeSet()};
        try {
          b.type = parse_type(trim(std::string_view(entry).substr(colon + 1, at - colon - 1)));
          b.types = parse_typeset(trim(std::string_view(entry).substr(at + sym.size())), b.type, a);
        } catch (const ParseError& e) {
          throw ParseError(std::string("in environment: ") + e.what(), ln.number, 1);
        }
        if (lookup(d.gamma, b.name)) throw ParseError("variable " + b.name + " bound twice", ln.number, 1);
        d.gamma.push_back(std::move(b));
      }
    }
    return d;
  };

  std::size_t i = 0;
  auto build = [&](auto& self, int depth) -> Derivation {
    const Line& ln = nodes[i++];
    if (ln.depth != depth) throw ParseError("unexpected indentation", ln.number, 1);
    Derivation d = parse_node(ln);
    while (i < nodes.size() && nodes[i].depth > depth) d.premises.push_back(self(self, depth + 1));
    return d;
  };
  c.root = build(build, 0);
  if (i != nodes.size()) throw ParseError("more than one root", nodes[i].number, 1);
  c.polarity = *pol;
  return c;
}

// ---- checker ----------------------------------------------------------------

namespace {

struct Checker {
  const WAA& a;
  const Certificate& c;
  CheckResult res;

  bool fail(const Derivation& d, const std::string& node, const std::string& msg) {
    res.ok = false;
    res.rule = d.rule;
    res.node = node;
    res.term_path = d.path;
    res.line = d.line;
    res.message = msg;
    return false;
  }

  std::optional<int> stratum_witness(const std::string& w) const {
    if (w.rfind("k=", 0) != 0 || w.size() < 3) return std::nullopt;
    int k = 0;
    for (std::size_t i = 2; i < w.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(w[i])) || k > 1000) return std::nullopt;
      k = k * 10 + (w[i] - '0');
    }
    if (k > a.max_rank()) return std::nullopt;
    return k;
  }

  bool same_context(const Derivation& d, const std::string& node, std::size_t count, const std::vector<std::string>& paths) {
    if (d.premises.size() != count)
      return fail(d, node, "expected " + std::to_string(count) + " premises, found " + std::to_string(d.premises.size()));
    for (std::size_t i = 0; i < count; ++i) {
      if (d.premises[i].path != paths[i])
        return fail(d, node, "premise " + std::to_string(i) + " is about @" + d.premises[i].path + ", expected @" + paths[i]);
      if (d.premises[i].gamma != d.gamma) return fail(d, node, "premise " + std::to_string(i) + " changes the environment");
    }
    return true;
  }

  bool no_witness(const Derivation& d, const std::string& node) {
    return d.witness == "-" || fail(d, node, "unexpected witness '" + d.witness + "'");
  }

  bool visit(const Derivation& d, const std::string& node) {
    TermPtr t;
    try {
      t = subterm(c.term, d.path);
    } catch (const std::invalid_argument& e) {
      return fail(d, node, std::string("bad path: ") + e.what());
    }
    if (d.types.type() != t->type())
      return fail(d, node, "type set of simple type " + d.types.type().str() + " for a term of type " + t->type().str());
    for (std::size_t i = 0; i < d.gamma.size(); ++i) {
      if (d.gamma[i].types.type() != d.gamma[i].type) return fail(d, node, "binding of " + d.gamma[i].name + " mixes simple types");
      for (std::size_t j = 0; j < i; ++j)
        if (d.gamma[j].name == d.gamma[i].name) return fail(d, node, "variable " + d.gamma[i].name + " bound twice");
    }
    std::vector<std::string> bound;
    std::map<std::string, SimpleType> fv;
    free_types(t, bound, fv);
    for (const auto& [x, ty] : fv) {
      const Binding* b = lookup(d.gamma, x);
      if (!b) return fail(d, node, "free variable " + x + " is not in the environment");
      if (b->type != ty) return fail(d, node, "variable " + x + " has type " + ty.str() + " but is bound at " + b->type.str());
    }
    bool geq = c.polarity == Polarity::Geq;
    const std::string& p = d.path;

    switch (d.rule) {
      case Rule::Axiom: {
        if (t->kind() != TermKind::Var) return fail(d, node, "subject is not a variable");
        if (!d.premises.empty()) return fail(d, node, "an axiom has no premises");
        if (!no_witness(d, node)) return false;
        if (lookup(d.gamma, t->name())->types != d.types)
          return fail(d, node, "axiom must repeat the environment's " + lookup(d.gamma, t->name())->types.str());
        break;
      }
      case Rule::Intersect: {
        if (!no_witness(d, node)) return false;
        if (!same_context(d, node, d.premises.size(), std::vector<std::string>(d.premises.size(), p))) return false;
        ITypeSet u(d.types.type());
        for (const Derivation& q : d.premises) u = u.unite(q.types);
        if (u != d.types) return fail(d, node, "conclusion is not the union " + u.str() + " of the premises");
        break;
      }
      case Rule::Subsume: {
        if (!no_witness(d, node) || !same_context(d, node, 1, {p})) return false;
        if (!subsume(d.types, d.premises[0].types))
          return fail(d, node, d.types.str() + " is not below " + d.premises[0].types.str());
        break;
      }
      case Rule::ConstNullary: {
        if (t->kind() != TermKind::Const || !t->type().is_base()) return fail(d, node, "subject is not a nullary constant");
        if (!d.premises.empty()) return fail(d, node, "a constant rule has no premises");
        if (!no_witness(d, node)) return false;
        StateSet s = 0;
        for (int q = 0; q < a.size(); ++q)
          if (a.delta(q, t->name()).empty() != geq) s |= StateSet{1} << q;
        if (state_set(a, s) != d.types) return fail(d, node, "constant rule gives " + state_set(a, s).str());
        break;
      }
      case Rule::ConstTrans: {
        if (t->kind() != TermKind::Const || t->type().is_base()) return fail(d, node, "subject is not a constant of positive arity");
        if (!d.premises.empty()) return fail(d, node, "a constant rule has no premises");
        if (d.types.size() != 1) return fail(d, node, "constant rule concludes a single type");
        std::vector<StateSet> sets;
        int q = unpack_const_type(d.types.items()[0], sets)->state();
        const auto& alts = a.delta(q, t->name());
        if (geq) {
          std::string want = a.name(q) + " ";
          const Tuple* hit = nullptr;
          for (const Tuple& alt : alts)
            if (d.witness == want + tuple_str(a, alt)) hit = &alt;
          if (!hit) return fail(d, node, "witness '" + d.witness + "' is not a transition of " + a.name(q) + " on " + t->name());
          for (std::size_t j = 0; j < sets.size(); ++j)
            if (!subset((*hit)[j], sets[j])) return fail(d, node, "premise " + std::to_string(j + 1) + " misses states of the transition");
        } else {
          if (!no_witness(d, node)) return false;
          for (const Tuple& alt : alts) {
            bool hits = false;
            for (std::size_t j = 0; j < sets.size(); ++j) hits = hits || (alt[j] & sets[j]);
            if (!hits) return fail(d, node, "transition " + tuple_str(a, alt) + " of " + a.name(q) + " is not hit");
          }
        }
        break;
      }
      case Rule::App: {
        if (t->kind() != TermKind::App) return fail(d, node, "subject is not an application");
        if (!no_witness(d, node) || !same_context(d, node, 2, {p + "0", p + "1"})) return false;
        ITypeSet r = type_apply(d.premises[0].types, d.premises[1].types);
        if (r != d.types) return fail(d, node, "application gives " + r.str());
        break;
      }
      case Rule::Abs: {
        if (t->kind() != TermKind::Abs) return fail(d, node, "subject is not an abstraction");
        if (d.premises.size() != 1) return fail(d, node, "abstraction has one premise");
        auto k = stratum_witness(d.witness);
        if (!k) return fail(d, node, "witness must be k=<stratum>");
        const Derivation& q = d.premises[0];
        if (q.path != p + "b") return fail(d, node, "premise must be about @" + p + "b");
        if (q.gamma.empty() || q.gamma.back().name != t->name() || q.gamma.back().type != t->binder_type())
          return fail(d, node, "premise must bind " + t->name() + " last");
        const ITypeSet& u = q.gamma.back().types;
        if (q.gamma != extend(d.gamma, t->name(), t->binder_type(), u))
          return fail(d, node, "premise environment is not an extension by " + t->name());
        if (!within_tau(q.types, *k, a)) return fail(d, node, "targets not all of stratum " + std::to_string(*k));
        if (!within_types(u, *k, a)) return fail(d, node, "premise set exceeds stratum " + std::to_string(*k));
        if (arrows(a, u, q.types) != d.types) return fail(d, node, "conclusion is not " + arrows(a, u, q.types).str());
        break;
      }
      case Rule::YOdd:
      case Rule::YEven: {
        if (t->kind() != TermKind::Fix) return fail(d, node, "subject is not a fixpoint");
        if (!same_context(d, node, 2, {p + "L", p})) return false;
        const ITypeSet& u = d.premises[0].types;
        const ITypeSet& tt = d.premises[1].types;
        bool stratified = (d.rule == Rule::YEven) == geq;
        if (!stratified) {
          if (!no_witness(d, node)) return false;
          if (type_apply(u, tt) != d.types) return fail(d, node, "fixpoint step gives " + type_apply(u, tt).str());
          break;
        }
        auto k = stratum_witness(d.witness);
        if (!k) return fail(d, node, "witness must be k=<stratum>");
        if (*k % 2 != (geq ? 0 : 1)) return fail(d, node, std::string("stratum must be ") + (geq ? "even" : "odd"));
        ITypeSet top(d.types.type());
        for (ITypeRef s : d.types.items())
          if (s->stratum(a) == *k) top.insert(s);
        if (!within_types(tt, *k - 1, a)) return fail(d, node, "strata condition: " + tt.str() + " must lie below stratum " + std::to_string(*k));
        if (top.unite(tt) != d.types) return fail(d, node, "conclusion is not " + top.unite(tt).str());
        if (arrows(a, top.unite(tt), top) != u) return fail(d, node, "first premise must be " + arrows(a, top.unite(tt), top).str());
        break;
      }
    }
    for (std::size_t i = 0; i < d.premises.size(); ++i)
      if (!visit(d.premises[i], node.empty() ? std::to_string(i) : node + "." + std::to_string(i))) return false;
    return true;
  }
};

}  // namespace

CheckResult check_derivation(const Certificate& c, const WAA& a) {
  Checker ch{a, c, {}};
  if (!c.root.path.empty()) {
    ch.fail(c.root, "", "root must be about the whole term");
    return ch.res;
  }
  try {
    ch.visit(c.root, "");
  } catch (const TypeError& e) {
    ch.res.ok = false;
    ch.res.message = e.what();
  }
  return ch.res;
}

// ---- generator --------------------------------------------------------------

namespace {

struct Generator {
  const Model& m;
  const WAA& a;
  Representer rep;

  Derivation node(Rule r, const Context& g, const std::string& path, ITypeSet s, std::string witness = "-",
                  std::vector<Derivation> prem = {}) {
    Derivation d;
    d.rule = r;
    d.gamma = g;
    d.path = path;
    d.types = std::move(s);
    d.witness = std::move(witness);
    d.premises = std::move(prem);
    return d;
  }

  Derivation weaken(Derivation d, const ITypeSet& s) {
    if (d.types == s) return d;
    if (!subsume(s, d.types)) throw std::logic_error("generator produced " + d.types.str() + ", not above " + s.str());
    Context g = d.gamma;
    std::string path = d.path;
    std::vector<Derivation> prem;
    prem.push_back(std::move(d));
    return node(Rule::Subsume, g, path, s, "-", std::move(prem));
  }

  Env env(const Context& g, int k) {
    Env e;
    for (const Binding& b : g) e = bind(e, b.name, interp(m, b.types, k));
    return e;
  }

  Value value(const Context& g, const TermPtr& t, int k) { return m.eval(t, env(g, k), k); }

  Derivation run(const Context& g, const TermPtr& t, const std::string& path, const ITypeSet& s, int k) {
    if (s.empty()) return node(Rule::Intersect, g, path, s);
    switch (t->kind()) {
      case TermKind::Var:
        return weaken(node(Rule::Axiom, g, path, lookup(g, t->name())->types), s);
      case TermKind::Const:
        return constant(g, t, path, s);
      case TermKind::App:
        return app(g, t, path, s, k);
      case TermKind::Abs:
        return abs(g, t, path, s, k);
      case TermKind::Fix:
        return k % 2 == 0 ? fix_even(g, t, path, s, k) : fix_odd(g, t, path, s, k);
    }
    throw std::logic_error("corrupt term");
  }

  Derivation constant(const Context& g, const TermPtr& t, const std::string& path, const ITypeSet& s) {
    const std::string& c = t->name();
    if (t->type().is_base()) {
      StateSet acc = 0;
      for (int q = 0; q < a.size(); ++q)
        if (!a.delta(q, c).empty()) acc |= StateSet{1} << q;
      return weaken(node(Rule::ConstNullary, g, path, state_set(a, acc)), s);
    }
    std::vector<std::pair<ITypeRef, std::string>> axioms;
    for (int q = 0; q < a.size(); ++q)
      for (const Tuple& alt : a.delta(q, c)) axioms.emplace_back(const_type(a, q, alt), a.name(q) + " " + tuple_str(a, alt));
    std::vector<Derivation> used;
    ITypeSet got(t->type());
    for (ITypeRef want : s.items()) {
      bool found = false;
      for (const auto& [ty, w] : axioms)
        if (subsume(want, ty)) {
          if (!got.contains(ty)) {
            got.insert(ty);
            used.push_back(node(Rule::ConstTrans, g, path, ITypeSet(t->type(), {ty}), w));
          }
          found = true;
          break;
        }
      if (!found) throw std::logic_error("no transition covers " + want->str());
    }
    if (used.size() == 1) return weaken(std::move(used[0]), s);
    return weaken(node(Rule::Intersect, g, path, got, "-", std::move(used)), s);
  }

  Derivation app(const Context& g, const TermPtr& t, const std::string& path, const ITypeSet& s, int k) {
    std::map<int, ITypeSet> by_stratum;
    for (ITypeRef x : s.items()) {
      auto [it, fresh] = by_stratum.try_emplace(x->stratum(a), s.type());
      it->second.insert(x);
    }
    ITypeSet v(t->arg()->type()), u(t->fun()->type());
    for (const auto& [l, targets] : by_stratum) {
      ITypeSet vl = rep.represent(value(g, t->arg(), l));
      v = v.unite(vl);
      u = u.unite(arrows(a, vl, targets));
    }
    std::vector<Derivation> prem;
    prem.push_back(run(g, t->fun(), path + "0", u, k));
    prem.push_back(run(g, t->arg(), path + "1", v, k));
    return weaken(node(Rule::App, g, path, type_apply(u, v), "-", std::move(prem)), s);
  }

  Derivation abs(const Context& g, const TermPtr& t, const std::string& path, const ITypeSet& s, int k) {
    std::map<std::pair<ITypeSet, int>, ITypeSet> groups;
    for (ITypeRef x : s.items()) {
      auto key = std::make_pair(x->premises(), x->target()->stratum(a));
      auto [it, fresh] = groups.try_emplace(key, s.type().result());
      it->second.insert(x->target());
    }
    std::vector<Derivation> parts;
    for (const auto& [key, targets] : groups) {
      Context inner = extend(g, t->name(), t->binder_type(), key.first);
      std::vector<Derivation> prem;
      prem.push_back(run(inner, t->body(), path + "b", targets, k));
      parts.push_back(node(Rule::Abs, g, path, arrows(a, key.first, targets), "k=" + std::to_string(key.second), std::move(prem)));
    }
    if (parts.size() == 1) return std::move(parts[0]);
    return node(Rule::Intersect, g, path, s, "-", std::move(parts));
  }

  static TermPtr as_lambda(const TermPtr& t) { return mk_abs(t->name(), t->binder_type(), t->body()); }

  // Y x.M ≥ S∪T from λx.M ≥ (S∪T)→S and, one stratum down, Y x.M ≥ T.
  Derivation fix_even(const Context& g, const TermPtr& t, const std::string& path, const ITypeSet& s, int k) {
    ITypeSet r = rep.represent(value(g, t, k));
    ITypeSet top(t->type());
    for (ITypeRef x : r.items())
      if (x->stratum(a) == k) top.insert(x);
    ITypeSet low = restrict_to(r, k - 1, a);
    std::vector<Derivation> prem;
    prem.push_back(run(g, as_lambda(t), path + "L", arrows(a, top.unite(low), top), k));
    prem.push_back(run(g, t, path, low, k - 1));
    return weaken(node(Rule::YEven, g, path, r, "k=" + std::to_string(k), std::move(prem)), s);
  }

  // Iterates U(T), U(U(T)), ... from the fixpoint one stratum down.
  Derivation fix_odd(const Context& g, const TermPtr& t, const std::string& path, const ITypeSet& s, int k) {
    ITypeSet low = restrict_to(rep.represent(value(g, t, k)), k - 1, a);
    Derivation cur = run(g, t, path, low, k - 1);
    if (subsume(s, low)) return weaken(std::move(cur), s);
    TermPtr lam = as_lambda(t);
    ITypeSet u = rep.represent(value(g, lam, k));
    std::vector<ITypeSet> chain{low};
    while (!subsume(s, chain.back())) {
      ITypeSet next = type_apply(u, chain.back());
      if (next == chain.back()) throw std::logic_error("fixpoint iteration stalled below " + s.str());
      chain.push_back(next);
    }
    ITypeSet fired(u.type());
    for (ITypeRef x : u.items())
      if (subsume(x->premises(), chain.back())) fired.insert(x);
    Derivation fun = run(g, lam, path + "L", fired, k);
    for (std::size_t n = 1; n < chain.size(); ++n) {
      std::vector<Derivation> prem;
      prem.push_back(fun);
      prem.push_back(std::move(cur));
      cur = node(Rule::YOdd, g, path, chain[n], "-", std::move(prem));
    }
    return weaken(std::move(cur), s);
  }
};

void check_subject(const Context& g, const TermPtr& m, const ITypeSet& s) {
  if (s.type() != m->type()) throw TypeError("type set of simple type " + s.type().str() + " for a term of type " + m->type().str());
  std::vector<std::string> bound;
  std::map<std::string, SimpleType> fv;
  free_types(m, bound, fv);
  for (const auto& [x, ty] : fv) {
    const Binding* b = lookup(g, x);
    if (!b || b->type != ty) throw TypeError("environment does not cover " + x + ":" + ty.str());
  }
}

Env env_of(const Model& m, const Context& g, int k) {
  Env e;
  for (const Binding& b : g) e = bind(e, b.name, interp(m, b.types, k));
  return e;
}

void to_dual(Derivation& d) {
  auto lower = [](const std::string& w) { return "k=" + std::to_string(std::stoi(w.substr(2)) - 1); };
  switch (d.rule) {
    case Rule::Abs:
      d.witness = lower(d.witness);
      break;
    case Rule::YEven:
      d.rule = Rule::YOdd;
      d.witness = lower(d.witness);
      break;
    case Rule::YOdd:
      d.rule = Rule::YEven;
      break;
    case Rule::ConstTrans:
      d.witness = "-";
      break;
    default:
      break;
  }
  for (Derivation& p : d.premises) to_dual(p);
}

}  // namespace

Prover::Prover(const WAA& a, std::size_t cap) : model_(a, cap), dual_(dualize(a), cap) {}

Certificate Prover::derive(const Context& g, const TermPtr& m, const ITypeSet& s) const {
  check_subject(g, m, s);
  int k = model_.max_level();
  Value v = model_.eval(m, env_of(model_, g, k), k);
  if (!model_.leq(interp(model_, s, k), v))
    throw NotDerivable("the value of the term is not above " + s.str());
  Generator gen{model_, model_.automaton(), Representer(model_)};
  return {model_.automaton().signature(), m, Polarity::Geq, gen.run(g, m, "", s, k)};
}

Certificate Prover::derive_dual(const Context& g, const TermPtr& m, const ITypeSet& s) const {
  check_subject(g, m, s);
  int k = dual_.max_level();
  Value v = dual_.eval(m, env_of(dual_, g, k), k);
  if (!dual_.leq(interp(dual_, s, k), v))
    throw NotDerivable("the value of the term is not below the dual reading of " + s.str());
  Generator gen{dual_, dual_.automaton(), Representer(dual_)};
  Derivation root = gen.run(g, m, "", s, k);
  to_dual(root);
  return {model_.automaton().signature(), m, Polarity::NotGeq, std::move(root)};
}

Verdict Prover::decide(const TermPtr& m, int q) const {
  const WAA& a = automaton();
  StateSet acc = model_.accept(m);
  ITypeSet s = state_set(a, StateSet{1} << q);
  Verdict v;
  v.state = q;
  v.accepted = acc >> q & 1;
  v.certificate = v.accepted ? derive({}, m, s) : derive_dual({}, m, s);
  return v;
}

std::vector<Verdict> Prover::decide(const TermPtr& m) const {
  std::vector<Verdict> out;
  for (int q = 0; q < automaton().size(); ++q) out.push_back(decide(m, q));
  return out;
}

}  // namespace stratum
