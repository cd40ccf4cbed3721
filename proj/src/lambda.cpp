#include "stratum/lambda.hpp"

#include <algorithm>
#include <cctype>
#include <iterator>
#include <set>
#include <unordered_map>

namespace stratum {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

}  // namespace

// ---- SimpleType -------------------------------------------------------------

SimpleType SimpleType::base() {
  static const SimpleType o(std::make_shared<Node>(Node{true, std::nullopt, std::nullopt, 0x51}));
  return o;
}

SimpleType SimpleType::arrow(SimpleType arg, SimpleType result) {
  auto n = std::make_shared<Node>();
  n->base = false;
  n->hash = mix(mix(0xa7, arg.hash()), result.hash());
  n->arg = std::move(arg);
  n->result = std::move(result);
  return SimpleType(std::move(n));
}

const SimpleType& SimpleType::arg() const {
  if (node_->base) throw TypeError("base type has no argument");
  return *node_->arg;
}

const SimpleType& SimpleType::result() const {
  if (node_->base) throw TypeError("base type has no result");
  return *node_->result;
}

int SimpleType::order() const {
  if (is_base()) return 0;
  return std::max(1 + arg().order(), result().order());
}

int SimpleType::arity() const {
  int n = 0;
  for (const SimpleType* t = this; !t->is_base(); t = &t->result()) ++n;
  return n;
}

std::string SimpleType::str() const {
  if (is_base()) return "o";
  std::string a = arg().str();
  if (!arg().is_base()) a = "(" + a + ")";
  return a + "->" + result().str();
}

bool operator==(const SimpleType& a, const SimpleType& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash() || a.is_base() != b.is_base()) return false;
  if (a.is_base()) return true;
  return a.arg() == b.arg() && a.result() == b.result();
}

bool operator<(const SimpleType& a, const SimpleType& b) {
  if (a.node_ == b.node_) return false;
  if (a.is_base() != b.is_base()) return a.is_base();
  if (a.is_base()) return false;
  if (a.arg() != b.arg()) return a.arg() < b.arg();
  return a.result() < b.result();
}

// ---- errors, signature ------------------------------------------------------

ParseError::ParseError(const std::string& msg, int line, int column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
      line_(line),
      column_(column) {}

void Signature::add(const std::string& name, SimpleType type) {
  if (type.order() > 1) throw TypeError("constant " + name + " has order > 1");
  auto [it, fresh] = consts_.emplace(name, type);
  if (!fresh && it->second != type) throw TypeError("constant " + name + " declared twice");
}

const SimpleType& Signature::type_of(const std::string& name) const {
  auto it = consts_.find(name);
  if (it == consts_.end()) throw TypeError("unknown constant " + name);
  return it->second;
}

std::string Signature::str() const {
  std::string out;
  for (const auto& [n, t] : consts_) {
    if (!out.empty()) out += ", ";
    out += n + ":" + t.str();
  }
  return out;
}

// ---- terms ------------------------------------------------------------------

bool Term::has_free(const std::string& v) const {
  return std::binary_search(free_.begin(), free_.end(), v);
}

struct TermFactory {
  static std::shared_ptr<Term> make(TermKind k, SimpleType type) {
    return std::shared_ptr<Term>(new Term(k, type));
  }

  static TermPtr binder(TermKind k, SimpleType result, std::string var, SimpleType type,
                        TermPtr body) {
    auto t = make(k, result);
    t->binder_type_ = type;
    for (const auto& v : body->free_)
      if (v != var) t->free_.push_back(v);
    t->size_ = 1 + body->size_;
    t->name_ = std::move(var);
    t->left_ = std::move(body);
    return t;
  }

  static TermPtr var(std::string name, SimpleType type) {
    auto t = make(TermKind::Var, type);
    t->free_.push_back(name);
    t->name_ = std::move(name);
    return t;
  }

  static TermPtr constant(std::string name, SimpleType type) {
    auto t = make(TermKind::Const, type);
    t->name_ = std::move(name);
    return t;
  }

  static TermPtr app(TermPtr fun, TermPtr arg) {
    auto t = make(TermKind::App, fun->type().result());
    std::set_union(fun->free_.begin(), fun->free_.end(), arg->free_.begin(), arg->free_.end(),
                   std::back_inserter(t->free_));
    t->size_ = 1 + fun->size_ + arg->size_;
    t->left_ = std::move(fun);
    t->right_ = std::move(arg);
    return t;
  }
};

TermPtr mk_var(std::string name, SimpleType type) { return TermFactory::var(std::move(name), type); }

TermPtr mk_const(std::string name, SimpleType type) {
  return TermFactory::constant(std::move(name), type);
}

TermPtr mk_app(TermPtr fun, TermPtr arg) {
  const SimpleType& ft = fun->type();
  if (ft.is_base()) throw TypeError("applying a term of base type: " + to_string(fun));
  if (ft.arg() != arg->type())
    throw TypeError("type mismatch: argument " + to_string(arg) + " has type " +
                    arg->type().str() + ", expected " + ft.arg().str());
  return TermFactory::app(std::move(fun), std::move(arg));
}

TermPtr mk_abs(std::string var, SimpleType type, TermPtr body) {
  SimpleType res = SimpleType::arrow(type, body->type());
  return TermFactory::binder(TermKind::Abs, res, std::move(var), type, std::move(body));
}

TermPtr mk_fix(std::string var, SimpleType type, TermPtr body) {
  if (body->type() != type)
    throw TypeError("fixpoint body has type " + body->type().str() + ", expected " + type.str());
  return TermFactory::binder(TermKind::Fix, type, std::move(var), type, std::move(body));
}

TermPtr mk_omega(SimpleType type) { return mk_fix("x", type, mk_var("x", type)); }

namespace {

void print(const TermPtr& t, std::string& out) {
  switch (t->kind()) {
    case TermKind::Var:
    case TermKind::Const:
      out += t->name();
      return;
    case TermKind::Abs:
    case TermKind::Fix:
      out += t->kind() == TermKind::Abs ? "\\" : "Y ";
      out += t->name() + ":" + t->binder_type().str() + ". ";
      print(t->body(), out);
      return;
    case TermKind::App: {
      bool pf = t->fun()->kind() == TermKind::Abs || t->fun()->kind() == TermKind::Fix;
      bool pa = t->arg()->kind() != TermKind::Var && t->arg()->kind() != TermKind::Const;
      if (pf) out += "(";
      print(t->fun(), out);
      if (pf) out += ")";
      out += " ";
      if (pa) out += "(";
      print(t->arg(), out);
      if (pa) out += ")";
      return;
    }
  }
}

}  // namespace

std::string to_string(const TermPtr& t) {
  std::string out;
  print(t, out);
  return out;
}

// ---- parsing ----------------------------------------------------------------

namespace {

enum class Tok { Ident, Lambda, Colon, Dot, LParen, RParen, Arrow, End };

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : src_(s) { advance(); }

  const Token& peek() const { return cur_; }

  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

  // Second token of lookahead, used to tell `Y x:A. M` from `Y M`.
  Token peek2() const {
    Lexer copy = *this;
    copy.advance();
    return copy.cur_;
  }

  Token expect(Tok k, const char* what) {
    if (cur_.kind != k) fail(std::string("expected ") + what);
    return take();
  }

  [[noreturn]] void fail(const std::string& msg) const {
    std::string got = cur_.kind == Tok::End ? "end of input" : "'" + cur_.text + "'";
    throw ParseError(msg + ", got " + got, cur_.line, cur_.col);
  }

 private:
  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  bool starts(std::string_view p) const { return src_.substr(pos_, p.size()) == p; }

  void advance() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) bump();
      if (pos_ < src_.size() && src_[pos_] == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
        continue;
      }
      break;
    }
    cur_.line = line_;
    cur_.col = col_;
    if (pos_ >= src_.size()) {
      cur_.kind = Tok::End;
      cur_.text.clear();
      return;
    }
    auto single = [&](Tok k, std::size_t len) {
      cur_.kind = k;
      cur_.text = std::string(src_.substr(pos_, len));
      pos_ += len;
      col_ += 1;
    };
    char c = src_[pos_];
    if (c == '\\') return single(Tok::Lambda, 1);
    if (starts("\xce\xbb")) return single(Tok::Lambda, 2);  // λ
    if (c == ':') return single(Tok::Colon, 1);
    if (c == '.') return single(Tok::Dot, 1);
    if (c == '(') return single(Tok::LParen, 1);
    if (c == ')') return single(Tok::RParen, 1);
    if (starts("->")) {
      single(Tok::Arrow, 2);
      ++col_;
      return;
    }
    if (starts("\xe2\x86\x92")) return single(Tok::Arrow, 3);  // →
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' ||
              src_[pos_] == '\''))
        bump();
      cur_.kind = Tok::Ident;
      cur_.text = std::string(src_.substr(start, pos_ - start));
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token cur_{Tok::End, "", 1, 1};
};

class Parser {
 public:
  Parser(Lexer& lx, const Signature* sig) : lx_(lx), sig_(sig) {}

  SimpleType type() {
    SimpleType a = atype();
    if (lx_.peek().kind == Tok::Arrow) {
      lx_.take();
      return SimpleType::arrow(a, type());
    }
    return a;
  }

  TermPtr term() {
    const Token& t = lx_.peek();
    if (t.kind == Tok::Lambda) return binder(TermKind::Abs);
    if (is_y_binder()) return binder(TermKind::Fix);
    return application();
  }

 private:
  SimpleType atype() {
    if (lx_.peek().kind == Tok::LParen) {
      lx_.take();
      SimpleType t = type();
      lx_.expect(Tok::RParen, "')'");
      return t;
    }
    if (lx_.peek().kind == Tok::Ident && lx_.peek().text == "o") {
      lx_.take();
      return SimpleType::base();
    }
    lx_.fail("expected type");
  }

  bool is_y_binder() const {
    if (lx_.peek().kind != Tok::Ident || lx_.peek().text != "Y") return false;
    Lexer probe = lx_;
    probe.take();
    return probe.peek().kind == Tok::Ident && probe.peek2().kind == Tok::Colon;
  }

  TermPtr binder(TermKind k) {
    Token kw = lx_.take();
    Token v = lx_.expect(Tok::Ident, "variable");
    lx_.expect(Tok::Colon, "':'");
    SimpleType ty = type();
    lx_.expect(Tok::Dot, "'.'");
    scope_.emplace_back(v.text, ty);
    TermPtr body = term();
    scope_.pop_back();
    try {
      return k == TermKind::Abs ? mk_abs(v.text, ty, body) : mk_fix(v.text, ty, body);
    } catch (const TypeError& e) {
      throw ParseError(e.what(), kw.line, kw.col);
    }
  }

  bool atom_start() const {
    const Token& t = lx_.peek();
    return t.kind == Tok::Ident || t.kind == Tok::LParen || t.kind == Tok::Lambda;
  }

  TermPtr application() {
    Token first = lx_.peek();
    TermPtr f = atom();
    while (atom_start()) {
      Token at = lx_.peek();
      // a trailing binder extends to the right as far as possible
      TermPtr a = (at.kind == Tok::Lambda || is_y_binder()) ? term() : atom();
      try {
        f = mk_app(f, a);
      } catch (const TypeError& e) {
        throw ParseError(e.what(), at.line, at.col);
      }
    }
    (void)first;
    return f;
  }

  TermPtr atom() {
    Token t = lx_.peek();
    if (t.kind == Tok::LParen) {
      lx_.take();
      TermPtr m = term();
      lx_.expect(Tok::RParen, "')'");
      return m;
    }
    if (t.kind == Tok::Lambda) return term();
    if (t.kind != Tok::Ident) lx_.fail("expected term");
    if (t.text == "Y") {
      if (is_y_binder()) return term();
      lx_.take();
      return y_apply(atom(), t);
    }
    lx_.take();
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->first == t.text) return mk_var(t.text, it->second);
    if (sig_ && sig_->contains(t.text)) return mk_const(t.text, sig_->type_of(t.text));
    throw ParseError("unbound variable " + t.text, t.line, t.col);
  }

  // Y M  ~>  Y x.(M x)
  TermPtr y_apply(const TermPtr& m, const Token& at) {
    const SimpleType& ty = m->type();
    if (ty.is_base() || ty.arg() != ty.result())
      throw ParseError("Y applied to a term of type " + ty.str(), at.line, at.col);
    std::string x = "x";
    while (m->has_free(x)) x += "'";
    return mk_fix(x, ty.arg(), mk_app(m, mk_var(x, ty.arg())));
  }

  Lexer& lx_;
  const Signature* sig_;
  std::vector<std::pair<std::string, SimpleType>> scope_;
};

}  // namespace

SimpleType parse_type(std::string_view text) {
  Lexer lx(text);
  Parser p(lx, nullptr);
  SimpleType t = p.type();
  if (lx.peek().kind != Tok::End) lx.fail("trailing input after type");
  return t;
}

TermPtr parse_term(std::string_view text, const Signature& sig) {
  Lexer lx(text);
  Parser p(lx, &sig);
  TermPtr t = p.term();
  if (lx.peek().kind != Tok::End) lx.fail("trailing input after term");
  return t;
}

Program parse_program(std::string_view text) {
  Lexer lx(text);
  Program prog;
  while (lx.peek().kind == Tok::Ident && lx.peek().text == "const") {
    lx.take();
    Token name = lx.expect(Tok::Ident, "constant name");
    lx.expect(Tok::Colon, "':'");
    Parser tp(lx, nullptr);
    SimpleType ty = tp.type();
    try {
      prog.signature.add(name.text, ty);
    } catch (const TypeError& e) {
      throw ParseError(e.what(), name.line, name.col);
    }
  }
  Parser p(lx, &prog.signature);
  prog.term = p.term();
  if (lx.peek().kind != Tok::End) lx.fail("trailing input after term");
  return prog;
}

// ---- typing -----------------------------------------------------------------

SimpleType infer_simple_type(const TermPtr& t) {
  std::vector<std::pair<std::string, SimpleType>> bound;
  std::map<std::string, SimpleType> free;
  auto go = [&](auto& self, const TermPtr& m) -> SimpleType {
    switch (m->kind()) {
      case TermKind::Var: {
        for (auto it = bound.rbegin(); it != bound.rend(); ++it)
          if (it->first == m->name()) {
            if (it->second != m->type())
              throw TypeError("variable annotation conflict for " + m->name());
            return m->type();
          }
        auto [it, fresh] = free.emplace(m->name(), m->type());
        if (!fresh && it->second != m->type())
          throw TypeError("variable annotation conflict for " + m->name());
        return m->type();
      }
      case TermKind::Const:
        return m->type();
      case TermKind::App: {
        SimpleType f = self(self, m->fun());
        SimpleType a = self(self, m->arg());
        if (f.is_base() || f.arg() != a) throw TypeError("type mismatch in application");
        return f.result();
      }
      case TermKind::Abs:
      case TermKind::Fix: {
        bound.emplace_back(m->name(), m->binder_type());
        SimpleType b = self(self, m->body());
        bound.pop_back();
        if (m->kind() == TermKind::Abs) return SimpleType::arrow(m->binder_type(), b);
        if (b != m->binder_type()) throw TypeError("fixpoint body type mismatch");
        return b;
      }
    }
    throw TypeError("corrupt term");
  };
  return go(go, t);
}

// ---- substitution -----------------------------------------------------------

namespace {

using Bindings = std::map<std::string, TermPtr>;

TermPtr subst(const TermPtr& m, const Bindings& b) {
  bool touched = false;
  for (const auto& v : m->free_vars())
    if (b.count(v)) {
      touched = true;
      break;
    }
  if (!touched) return m;
  switch (m->kind()) {
    case TermKind::Var:
      return b.at(m->name());
    case TermKind::Const:
      return m;
    case TermKind::App:
      return TermFactory::app(subst(m->fun(), b), subst(m->arg(), b));
    case TermKind::Abs:
    case TermKind::Fix: {
      const std::string& x = m->name();
      Bindings inner;
      bool capture = false;
      for (const auto& [v, r] : b) {
        if (v == x || !m->body()->has_free(v)) continue;
        inner.emplace(v, r);
        capture = capture || r->has_free(x);
      }
      std::string nx = x;
      if (capture) {
        auto clash = [&](const std::string& n) {
          if (m->body()->has_free(n) || inner.count(n)) return true;
          for (const auto& [v, r] : inner)
            if (r->has_free(n)) return true;
          return false;
        };
        while (clash(nx)) nx += "'";
        inner.emplace(x, mk_var(nx, m->binder_type()));
      }
      TermPtr body = subst(m->body(), inner);
      return TermFactory::binder(m->kind(), m->type(), nx, m->binder_type(), body);
    }
  }
  return m;
}

}  // namespace

TermPtr substitute(const TermPtr& m, const std::map<std::string, TermPtr>& bindings) {
  for (const auto& [v, r] : bindings) {
    // free occurrences carry their own annotation
    auto check = [&](auto& self, const TermPtr& t, bool shadowed) -> void {
      if (shadowed || !t->has_free(v)) return;
      switch (t->kind()) {
        case TermKind::Var:
          if (t->type() != r->type())
            throw TypeError("type mismatch substituting " + to_string(r) + " for " + v);
          return;
        case TermKind::Const:
          return;
        case TermKind::App:
          self(self, t->fun(), false);
          self(self, t->arg(), false);
          return;
        case TermKind::Abs:
        case TermKind::Fix:
          self(self, t->body(), t->name() == v);
          return;
      }
    };
    check(check, m, false);
  }
  return subst(m, bindings);
}

// ---- alpha equivalence ------------------------------------------------------

namespace {

int bound_index(const std::vector<const std::string*>& env, const std::string& n) {
  for (std::size_t i = env.size(); i-- > 0;)
    if (*env[i] == n) return static_cast<int>(env.size() - 1 - i);
  return -1;
}

bool alpha_eq(const TermPtr& a, const TermPtr& b, std::vector<const std::string*>& ea,
              std::vector<const std::string*>& eb) {
  if (a->kind() != b->kind() || a->size() != b->size()) return false;
  switch (a->kind()) {
    case TermKind::Var: {
      if (a->type() != b->type()) return false;
      int ia = bound_index(ea, a->name()), ib = bound_index(eb, b->name());
      if (ia != ib) return false;
      return ia >= 0 || a->name() == b->name();
    }
    case TermKind::Const:
      return a->name() == b->name();
    case TermKind::App:
      return alpha_eq(a->fun(), b->fun(), ea, eb) && alpha_eq(a->arg(), b->arg(), ea, eb);
    case TermKind::Abs:
    case TermKind::Fix: {
      if (a->binder_type() != b->binder_type()) return false;
      ea.push_back(&a->name());
      eb.push_back(&b->name());
      bool r = alpha_eq(a->body(), b->body(), ea, eb);
      ea.pop_back();
      eb.pop_back();
      return r;
    }
  }
  return false;
}

std::size_t ahash(const TermPtr& t, std::vector<const std::string*>& env) {
  std::hash<std::string> hs;
  switch (t->kind()) {
    case TermKind::Var: {
      int i = bound_index(env, t->name());
      return i >= 0 ? mix(0x11, static_cast<std::size_t>(i)) : mix(0x13, hs(t->name()));
    }
    case TermKind::Const:
      return mix(0x17, hs(t->name()));
    case TermKind::App:
      return mix(mix(0x19, ahash(t->fun(), env)), ahash(t->arg(), env));
    case TermKind::Abs:
    case TermKind::Fix: {
      env.push_back(&t->name());
      std::size_t h = ahash(t->body(), env);
      env.pop_back();
      return mix(mix(t->kind() == TermKind::Abs ? 0x1d : 0x1f, t->binder_type().hash()), h);
    }
  }
  return 0;
}

}  // namespace

bool alpha_equal(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  std::vector<const std::string*> ea, eb;
  return alpha_eq(a, b, ea, eb);
}

std::size_t alpha_hash(const TermPtr& t) {
  std::vector<const std::string*> env;
  return ahash(t, env);
}

// ---- head reduction ---------------------------------------------------------

namespace {

struct Spine {
  std::vector<TermPtr> binders;  // Abs nodes of the leading prefix
  TermPtr head;
  std::vector<TermPtr> args;
};

Spine unwind(const TermPtr& t) {
  Spine s;
  TermPtr m = t;
  while (m->kind() == TermKind::Abs) {
    s.binders.push_back(m);
    m = m->body();
  }
  while (m->kind() == TermKind::App) {
    s.args.push_back(m->arg());
    m = m->fun();
  }
  std::reverse(s.args.begin(), s.args.end());
  s.head = m;
  return s;
}

TermPtr rewind(const Spine& s, TermPtr head, std::size_t first_arg) {
  TermPtr m = std::move(head);
  for (std::size_t i = first_arg; i < s.args.size(); ++i) m = TermFactory::app(m, s.args[i]);
  for (std::size_t i = s.binders.size(); i-- > 0;)
    m = TermFactory::binder(TermKind::Abs, s.binders[i]->type(), s.binders[i]->name(),
                            s.binders[i]->binder_type(), m);
  return m;
}

}  // namespace

std::optional<TermPtr> head_step(const TermPtr& t) {
  Spine s = unwind(t);
  const TermPtr& h = s.head;
  if (h->kind() == TermKind::Abs && !s.args.empty())
    return rewind(s, subst(h->body(), {{h->name(), s.args[0]}}), 1);
  if (h->kind() == TermKind::Fix) {
    TermPtr lam = TermFactory::binder(TermKind::Abs, SimpleType::arrow(h->type(), h->type()),
                                      h->name(), h->binder_type(), h->body());
    return rewind(s, TermFactory::app(lam, h), 0);
  }
  return std::nullopt;
}

HeadResult head_normal_form(const TermPtr& t, std::size_t fuel) {
  HeadResult r;
  std::unordered_multimap<std::size_t, TermPtr> seen;
  TermPtr cur = t;
  seen.emplace(alpha_hash(cur), cur);
  for (;;) {
    Spine s = unwind(cur);
    bool redex = s.head->kind() == TermKind::Fix || (s.head->kind() == TermKind::Abs && !s.args.empty());
    if (!redex) {
      r.status = HeadResult::Status::Hnf;
      for (const auto& b : s.binders) r.binders.emplace_back(b->name(), b->binder_type());
      r.head = s.head;
      r.args = std::move(s.args);
      return r;
    }
    if (r.steps == fuel) {
      r.status = HeadResult::Status::Exhausted;
      return r;
    }
    cur = *head_step(cur);
    ++r.steps;
    std::size_t h = alpha_hash(cur);
    auto [lo, hi] = seen.equal_range(h);
    for (auto it = lo; it != hi; ++it)
      if (alpha_equal(it->second, cur)) {
        r.status = HeadResult::Status::Diverges;
        return r;
      }
    seen.emplace(h, cur);
  }
}

// ---- Böhm prefixes ----------------------------------------------------------

bool BohmPrefix::complete() const {
  if (kind == Kind::Cutoff) return false;
  return std::all_of(children.begin(), children.end(), [](const BohmPrefix& c) { return c.complete(); });
}

std::size_t BohmPrefix::depth() const {
  if (kind != Kind::Node) return 0;
  std::size_t d = 0;
  for (const auto& c : children) d = std::max(d, c.depth());
  return d + 1;
}

BohmPrefix bohm_prefix(const TermPtr& t, std::size_t depth, std::size_t fuel) {
  if (!t->type().is_base()) throw std::invalid_argument("Böhm prefix needs a term of type o");
  if (depth == 0) return BohmPrefix::cutoff();
  HeadResult h = head_normal_form(t, fuel);
  switch (h.status) {
    case HeadResult::Status::Exhausted:
      return BohmPrefix::cutoff();
    case HeadResult::Status::Diverges:
      return BohmPrefix::omega();
    case HeadResult::Status::Hnf:
      break;
  }
  if (h.head->kind() != TermKind::Const)
    throw std::invalid_argument("Böhm prefix needs a closed term; free variable " + h.head->name());
  BohmPrefix p{BohmPrefix::Kind::Node, h.head->name(), {}};
  for (const auto& a : h.args) p.children.push_back(bohm_prefix(a, depth - 1, fuel));
  return p;
}

BohmPrefix truncate(const BohmPrefix& p, std::size_t depth) {
  if (p.kind != BohmPrefix::Kind::Node) return p;
  if (depth == 0) return BohmPrefix::cutoff();
  BohmPrefix q{p.kind, p.label, {}};
  for (const auto& c : p.children) q.children.push_back(truncate(c, depth - 1));
  return q;
}

namespace {

void print(const BohmPrefix& p, std::string& out) {
  switch (p.kind) {
    case BohmPrefix::Kind::Cutoff:
      out += "?";
      return;
    case BohmPrefix::Kind::Omega:
      out += "Ω";
      return;
    case BohmPrefix::Kind::Node:
      break;
  }
  out += p.label;
  if (p.children.size() == 1) {
    if (p.children[0].kind == BohmPrefix::Kind::Cutoff) return;
    out += " ";
    print(p.children[0], out);
  } else if (!p.children.empty()) {
    out += "(";
    for (std::size_t i = 0; i < p.children.size(); ++i) {
      if (i) out += ", ";
      print(p.children[i], out);
    }
    out += ")";
  }
}

}  // namespace

std::string to_string(const BohmPrefix& p) {
  std::string out;
  print(p, out);
  return out;
}

}  // namespace stratum
