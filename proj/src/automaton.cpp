#include "stratum/automaton.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

namespace stratum {

// ---- WAA --------------------------------------------------------------------

WAA::WAA(Signature sig, std::vector<std::string> names, std::vector<int> ranks, int initial)
    : sig_(std::move(sig)), names_(std::move(names)), ranks_(std::move(ranks)), initial_(initial) {
  if (names_.empty()) throw AutomatonError("automaton without states");
  if (names_.size() > 64) throw AutomatonError("more than 64 states");
  if (names_.size() != ranks_.size()) throw AutomatonError("rank list length mismatch");
  if (initial_ < 0 || initial_ >= size()) throw AutomatonError("initial state out of range");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!seen.insert(names_[i]).second) throw AutomatonError("duplicate state " + names_[i]);
    if (ranks_[i] < 0) throw AutomatonError("negative rank for " + names_[i]);
    max_rank_ = std::max(max_rank_, ranks_[i]);
  }
}

int WAA::state(const std::string& name) const {
  for (int q = 0; q < size(); ++q)
    if (names_[q] == name) return q;
  throw AutomatonError("unknown state " + name);
}

StateSet WAA::rank_eq(int k) const {
  StateSet s = 0;
  for (int q = 0; q < size(); ++q)
    if (ranks_[q] == k) s |= StateSet{1} << q;
  return s;
}

StateSet WAA::rank_le(int k) const {
  StateSet s = 0;
  for (int q = 0; q < size(); ++q)
    if (ranks_[q] <= k) s |= StateSet{1} << q;
  return s;
}

const std::vector<Tuple>& WAA::delta(int q, const std::string& a) const {
  static const std::vector<Tuple> none;
  auto it = delta_.find({q, a});
  return it == delta_.end() ? none : it->second;
}

void WAA::set_delta(int q, const std::string& a, std::vector<Tuple> alts) {
  if (q < 0 || q >= size()) throw AutomatonError("state out of range");
  int ar = sig_.arity(a);
  StateSet allowed = rank_le(ranks_[q]);
  for (const auto& t : alts) {
    if (static_cast<int>(t.size()) != ar)
      throw AutomatonError("arity mismatch in " + names_[q] + " " + a + ": expected " +
                           std::to_string(ar) + " components");
    for (StateSet s : t)
      if (!subset(s, allowed))
        throw AutomatonError("weakness violation in " + names_[q] + " " + a + ": " +
                             set_str(s & ~allowed) + " above rank " + std::to_string(ranks_[q]));
  }
  std::sort(alts.begin(), alts.end());
  alts.erase(std::unique(alts.begin(), alts.end()), alts.end());
  if (alts.empty())
    delta_.erase({q, a});
  else
    delta_[{q, a}] = std::move(alts);
}

void WAA::validate() const {
  for (const auto& [key, alts] : delta_) {
    int ar = sig_.arity(key.second);
    StateSet allowed = rank_le(ranks_[key.first]);
    for (const auto& t : alts) {
      if (static_cast<int>(t.size()) != ar) throw AutomatonError("arity mismatch");
      for (StateSet s : t)
        if (!subset(s, allowed)) throw AutomatonError("weakness violation");
    }
  }
}

std::string WAA::set_str(StateSet s) const {
  std::string out = "{";
  bool first = true;
  for (int q = 0; q < size(); ++q)
    if (s >> q & 1) {
      if (!first) out += ",";
      out += names_[q];
      first = false;
    }
  return out + "}";
}

std::string WAA::str() const {
  std::ostringstream os;
  os << "states:";
  for (int q = 0; q < size(); ++q) os << ' ' << names_[q] << '@' << ranks_[q];
  os << "\ninitial: " << names_[initial_] << '\n';
  for (int q = 0; q < size(); ++q)
    for (const auto& [a, ty] : sig_.entries()) {
      const auto& alts = delta(q, a);
      if (alts.empty()) continue;
      os << names_[q] << ' ' << a << " ->";
      for (std::size_t i = 0; i < alts.size(); ++i) {
        os << (i ? " | (" : " (");
        for (std::size_t j = 0; j < alts[i].size(); ++j) os << (j ? "," : "") << set_str(alts[i][j]);
        os << ')';
      }
      os << '\n';
    }
  return os.str();
}

bool operator==(const WAA& a, const WAA& b) {
  return a.names_ == b.names_ && a.ranks_ == b.ranks_ && a.initial_ == b.initial_ &&
         a.delta_ == b.delta_ && a.sig_.entries() == b.sig_.entries();
}

// ---- parsing ----------------------------------------------------------------

namespace {

struct LineCursor {
  std::string_view s;
  int line;
  std::size_t pos = 0;

  void ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(std::string_view tok) {
    ws();
    if (s.substr(pos, tok.size()) != tok) return false;
    pos += tok.size();
    return true;
  }
  void need(std::string_view tok) {
    if (!eat(tok)) fail("expected '" + std::string(tok) + "'");
  }
  bool done() {
    ws();
    return pos >= s.size();
  }
  std::string ident() {
    ws();
    std::size_t b = pos;
    while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_' ||
                              s[pos] == '\''))
      ++pos;
    if (b == pos) fail("expected a name");
    return std::string(s.substr(b, pos - b));
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line, static_cast<int>(pos) + 1);
  }
};

std::vector<std::pair<std::string_view, int>> content_lines(std::string_view text) {
  std::vector<std::pair<std::string_view, int>> out;
  int no = 0;
  std::size_t b = 0;
  while (b <= text.size()) {
    std::size_t e = text.find('\n', b);
    if (e == std::string_view::npos) e = text.size();
    ++no;
    std::string_view l = text.substr(b, e - b);
    if (auto h = l.find('#'); h != std::string_view::npos) l = l.substr(0, h);
    if (l.find_first_not_of(" \t\r") != std::string_view::npos) out.emplace_back(l, no);
    b = e + 1;
  }
  return out;
}

}  // namespace

WAA parse_waa(std::string_view text, const Signature& sig) {
  std::vector<std::string> names;
  std::vector<int> ranks;
  std::string initial;
  int initial_line = 0;
  struct Pending {
    std::string q, a;
    int line;
    std::vector<std::vector<std::vector<std::string>>> sets;
  };
  std::vector<Pending> pending;

  for (auto [l, no] : content_lines(text)) {
    LineCursor c{l, no};
    if (c.eat("states:")) {
      while (!c.done()) {
        names.push_back(c.ident());
        c.need("@");
        c.ws();
        std::size_t b = c.pos;
        while (c.pos < l.size() && std::isdigit(static_cast<unsigned char>(l[c.pos]))) ++c.pos;
        if (b == c.pos) c.fail("expected a rank");
        ranks.push_back(std::stoi(std::string(l.substr(b, c.pos - b))));
      }
      continue;
    }
    if (c.eat("initial:")) {
      initial = c.ident();
      initial_line = no;
      if (!c.done()) c.fail("trailing input");
      continue;
    }
    Pending p;
    p.line = no;
    p.q = c.ident();
    p.a = c.ident();
    if (!sig.contains(p.a)) c.fail("unknown constant " + p.a);
    c.need("->");
    do {
      c.need("(");
      std::vector<std::vector<std::string>> tuple;
      if (!c.eat(")")) {
        do {
          c.need("{");
          std::vector<std::string> set;
          if (!c.eat("}")) {
            do set.push_back(c.ident());
            while (c.eat(","));
            c.need("}");
          }
          tuple.push_back(std::move(set));
        } while (c.eat(","));
        c.need(")");
      }
      if (static_cast<int>(tuple.size()) != sig.arity(p.a))
        c.fail("arity mismatch: " + p.a + " takes " + std::to_string(sig.arity(p.a)) +
               " components");
      p.sets.push_back(std::move(tuple));
    } while (c.eat("|"));
    if (!c.done()) c.fail("trailing input");
    pending.push_back(std::move(p));
  }
  if (names.empty()) throw ParseError("missing 'states:' line", 1, 1);
  if (initial.empty()) throw ParseError("missing 'initial:' line", 1, 1);

  auto index = [&](const std::string& n, int line) {
    auto it = std::find(names.begin(), names.end(), n);
    if (it == names.end()) throw ParseError("unknown state " + n, line, 1);
    return static_cast<int>(it - names.begin());
  };
  WAA a(sig, names, ranks, index(initial, initial_line));
  std::map<std::pair<int, std::string>, std::vector<Tuple>> merged;
  for (auto& p : pending) {
    int q = index(p.q, p.line);
    auto& alts = merged[{q, p.a}];
    for (const auto& tuple : p.sets) {
      Tuple t;
      for (const auto& set : tuple) {
        StateSet s = 0;
        for (const auto& n : set) s |= StateSet{1} << index(n, p.line);
        t.push_back(s);
      }
      alts.push_back(std::move(t));
    }
  }
  for (auto& [key, alts] : merged) {
    try {
      a.set_delta(key.first, key.second, std::move(alts));
    } catch (const AutomatonError& e) {
      int line = 0;
      for (const auto& p : pending)
        if (p.q == a.name(key.first) && p.a == key.second) line = p.line;
      throw ParseError(e.what(), line, 1);
    }
  }
  return a;
}

// ---- completion and duality -------------------------------------------------

namespace {

// Calls f on every subset of `universe` that contains `base`.
template <class F>
void for_supersets(StateSet base, StateSet universe, F&& f) {
  StateSet free = universe & ~base;
  StateSet sub = free;
  for (;;) {
    f(base | sub);
    if (sub == 0) break;
    sub = (sub - 1) & free;
  }
}

template <class F>
void for_tuples(const std::vector<StateSet>& lower, StateSet universe, F&& f) {
  Tuple cur(lower.size());
  auto rec = [&](auto& self, std::size_t j) -> void {
    if (j == lower.size()) {
      f(cur);
      return;
    }
    for_supersets(lower[j], universe, [&](StateSet s) {
      cur[j] = s;
      self(self, j + 1);
    });
  };
  rec(rec, 0);
}

double tuple_space(int free_bits, int arity) { return std::ldexp(1.0, free_bits * arity); }

}  // namespace

WAA monotone_completion(const WAA& a, std::size_t bound) {
  WAA out = a;
  for (int q = 0; q < a.size(); ++q) {
    StateSet universe = a.rank_le(a.rank(q));
    for (const auto& [name, ty] : a.signature().entries()) {
      const auto& alts = a.delta(q, name);
      if (alts.empty() || ty.arity() == 0) continue;
      std::set<Tuple> closed;
      for (const auto& t : alts) {
        int free_bits = 0;
        for (StateSet s : t) free_bits += popcount(universe & ~s);
        if (std::ldexp(1.0, free_bits) > static_cast<double>(bound))
          throw AutomatonError("monotone completion of " + a.name(q) + " " + name +
                               " exceeds the tuple bound");
        for_tuples(t, universe, [&](const Tuple& u) { closed.insert(u); });
        if (closed.size() > bound)
          throw AutomatonError("monotone completion of " + a.name(q) + " " + name +
                               " exceeds the tuple bound");
      }
      out.set_delta(q, name, {closed.begin(), closed.end()});
    }
  }
  return out;
}

WAA dualize(const WAA& a, std::size_t bound) {
  std::vector<std::string> names;
  std::vector<int> ranks;
  for (int q = 0; q < a.size(); ++q) {
    names.push_back(a.name(q));
    ranks.push_back(a.rank(q) + 1);
  }
  WAA out(a.signature(), names, ranks, a.initial());
  for (int q = 0; q < a.size(); ++q) {
    StateSet universe = a.rank_le(a.rank(q));
    for (const auto& [name, ty] : a.signature().entries()) {
      const auto& alts = a.delta(q, name);
      int ar = ty.arity();
      if (ar == 0) {
        if (alts.empty()) out.set_delta(q, name, {Tuple{}});
        continue;
      }
      if (tuple_space(popcount(universe), ar) > static_cast<double>(bound))
        throw AutomatonError("dual transition space of " + a.name(q) + " " + name +
                             " exceeds the tuple bound");
      std::vector<Tuple> dual;
      for_tuples(std::vector<StateSet>(ar, 0), universe, [&](const Tuple& t) {
        for (const auto& s : alts) {
          bool hit = false;
          for (int j = 0; j < ar && !hit; ++j) hit = (t[j] & s[j]) != 0;
          if (!hit) return;
        }
        dual.push_back(t);
      });
      out.set_delta(q, name, std::move(dual));
    }
  }
  return out;
}

bool eve_moves(const WAA& a, int q, const std::string& label, const std::vector<StateSet>& children) {
  for (const auto& t : a.delta(q, label)) {
    bool fits = true;
    for (std::size_t j = 0; j < t.size() && fits; ++j) fits = subset(t[j], children[j]);
    if (fits) return true;
  }
  return false;
}

// ---- regular trees ----------------------------------------------------------

RegularTree parse_regular_tree(std::string_view text, const Signature& sig) {
  RegularTree t;
  std::vector<std::vector<std::string>> succ_names;
  std::vector<int> lines;
  for (auto [l, no] : content_lines(text)) {
    LineCursor c{l, no};
    RegularTree::Vertex v;
    v.name = c.ident();
    c.need(":");
    v.label = c.ident();
    if (!sig.contains(v.label)) c.fail("unknown constant " + v.label);
    std::vector<std::string> s;
    while (!c.done()) s.push_back(c.ident());
    if (static_cast<int>(s.size()) != sig.arity(v.label))
      c.fail("arity mismatch: " + v.label + " takes " + std::to_string(sig.arity(v.label)) +
             " successors");
    for (const auto& u : t.vertices)
      if (u.name == v.name) c.fail("duplicate vertex " + v.name);
    t.vertices.push_back(std::move(v));
    succ_names.push_back(std::move(s));
    lines.push_back(no);
  }
  if (t.vertices.empty()) throw ParseError("empty tree", 1, 1);
  for (std::size_t i = 0; i < t.vertices.size(); ++i)
    for (const auto& n : succ_names[i]) {
      auto it = std::find_if(t.vertices.begin(), t.vertices.end(),
                             [&](const RegularTree::Vertex& v) { return v.name == n; });
      if (it == t.vertices.end()) throw ParseError("unknown vertex " + n, lines[i], 1);
      t.vertices[i].succ.push_back(static_cast<int>(it - t.vertices.begin()));
    }
  return t;
}

BohmPrefix unfold(const RegularTree& t, std::size_t depth) {
  auto rec = [&](auto& self, int v, std::size_t d) -> BohmPrefix {
    if (d == 0) return BohmPrefix::cutoff();
    BohmPrefix p{BohmPrefix::Kind::Node, t.vertices[v].label, {}};
    for (int s : t.vertices[v].succ) p.children.push_back(self(self, s, d - 1));
    return p;
  };
  return rec(rec, 0, depth);
}

// ---- games ------------------------------------------------------------------

PrefixWin accept_prefix(const WAA& a, const BohmPrefix& p, PrefixMode mode) {
  PrefixWin w;
  switch (p.kind) {
    case BohmPrefix::Kind::Cutoff:
      if (mode == PrefixMode::Exact) throw InconclusiveError("cutoff leaf in exact mode");
      w.win = mode == PrefixMode::Optimistic ? a.all() : 0;
      return w;
    case BohmPrefix::Kind::Omega:
      for (int q = 0; q < a.size(); ++q)
        if (a.rank(q) % 2 == 0) w.win |= StateSet{1} << q;
      return w;
    case BohmPrefix::Kind::Node:
      break;
  }
  const Signature& sig = a.signature();
  if (!sig.contains(p.label) || sig.arity(p.label) != static_cast<int>(p.children.size()))
    throw AutomatonError("prefix label " + p.label + " does not fit the signature");
  std::vector<StateSet> kids;
  for (const auto& c : p.children) {
    w.children.push_back(accept_prefix(a, c, mode));
    kids.push_back(w.children.back().win);
  }
  for (int q = 0; q < a.size(); ++q)
    if (eve_moves(a, q, p.label, kids)) w.win |= StateSet{1} << q;
  return w;
}

std::vector<StateSet> solve_regular(const WAA& a, const RegularTree& t) {
  const Signature& sig = a.signature();
  for (const auto& v : t.vertices)
    if (!sig.contains(v.label) || sig.arity(v.label) != static_cast<int>(v.succ.size()))
      throw AutomatonError("vertex label " + v.label + " does not fit the signature");
  std::size_t n = t.vertices.size();
  std::vector<StateSet> win(n, 0);
  for (int k = 0; k <= a.max_rank(); ++k) {
    StateSet slice = a.rank_eq(k);
    if (!slice) continue;
    // gfp on even ranks, lfp on odd; lower ranks are already final
    if (k % 2 == 0)
      for (auto& w : win) w |= slice;
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t v = 0; v < n; ++v) {
        std::vector<StateSet> kids;
        for (int s : t.vertices[v].succ) kids.push_back(win[s]);
        StateSet next = win[v] & ~slice;
        for (int q = 0; q < a.size(); ++q)
          if ((slice >> q & 1) && eve_moves(a, q, t.vertices[v].label, kids))
            next |= StateSet{1} << q;
        if (next != win[v]) {
          win[v] = next;
          changed = true;
        }
      }
    }
  }
  return win;
}

}  // namespace stratum
