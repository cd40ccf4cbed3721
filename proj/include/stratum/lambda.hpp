#pragma once

// Simply typed lambda-Y terms: syntax, typing, substitution, head reduction
// and Böhm-tree prefixes.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stratum {

class SimpleType {
 public:
  static SimpleType base();
  static SimpleType arrow(SimpleType arg, SimpleType result);

  bool is_base() const;
  const SimpleType& arg() const;
  const SimpleType& result() const;

  /// order(o) = 0, order(A->B) = max(1 + order(A), order(B))
  int order() const;
  /// Number of leading arrows.
  int arity() const;
  std::size_t hash() const;
  std::string str() const;

  friend bool operator==(const SimpleType& a, const SimpleType& b);
  friend bool operator!=(const SimpleType& a, const SimpleType& b) { return !(a == b); }
  friend bool operator<(const SimpleType& a, const SimpleType& b);

 private:
  struct Node;
  explicit SimpleType(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct SimpleType::Node {
  bool base = true;
  std::optional<SimpleType> arg, result;
  std::size_t hash = 0;
};

inline bool SimpleType::is_base() const { return node_->base; }
inline std::size_t SimpleType::hash() const { return node_->hash; }

class TypeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_, column_;
};

/// Tree signature: constants of order at most one.
class Signature {
 public:
  void add(const std::string& name, SimpleType type);
  bool contains(const std::string& name) const { return consts_.count(name) != 0; }
  const SimpleType& type_of(const std::string& name) const;
  int arity(const std::string& name) const { return type_of(name).arity(); }
  const std::map<std::string, SimpleType>& entries() const { return consts_; }
  std::string str() const;

 private:
  std::map<std::string, SimpleType> consts_;
};

enum class TermKind { Var, Const, App, Abs, Fix };

class Term;
using TermPtr = std::shared_ptr<const Term>;

/// Immutable term node. Abs and Fix are binders: `name` is the bound variable,
/// `binder_type` its annotation and `left` the body. Fix(x:A, M) denotes
/// Y(λx:A.M). Every node carries its simple type and free-variable names.
class Term {
 public:
  TermKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const SimpleType& type() const { return type_; }
  const SimpleType& binder_type() const { return binder_type_; }
  const TermPtr& fun() const { return left_; }
  const TermPtr& arg() const { return right_; }
  const TermPtr& body() const { return left_; }
  const std::vector<std::string>& free_vars() const { return free_; }
  bool has_free(const std::string& v) const;
  std::size_t size() const { return size_; }

  friend struct TermFactory;

 private:
  Term(TermKind k, SimpleType type) : kind_(k), type_(type), binder_type_(type) {}
  TermKind kind_;
  std::string name_;
  SimpleType type_;
  SimpleType binder_type_;
  TermPtr left_, right_;
  std::vector<std::string> free_;
  std::size_t size_ = 1;
};

TermPtr mk_var(std::string name, SimpleType type);
TermPtr mk_const(std::string name, SimpleType type);
/// Throws TypeError when the argument type does not match.
TermPtr mk_app(TermPtr fun, TermPtr arg);
TermPtr mk_abs(std::string var, SimpleType type, TermPtr body);
/// Throws TypeError unless body has the binder's type.
TermPtr mk_fix(std::string var, SimpleType type, TermPtr body);
/// Ω^A, encoded as Y x:A. x
TermPtr mk_omega(SimpleType type);

std::string to_string(const TermPtr& t);

SimpleType parse_type(std::string_view text);
/// Parses a closed term; constants are resolved against `sig`.
TermPtr parse_term(std::string_view text, const Signature& sig);

/// A term file: `const name : type` declaration lines followed by a term.
struct Program {
  Signature signature;
  TermPtr term;
};
Program parse_program(std::string_view text);

/// Re-checks the whole term: binder/occurrence annotations agree, free
/// variables are used at one type, applications are well typed.
SimpleType infer_simple_type(const TermPtr& t);

/// Simultaneous capture-avoiding substitution.
TermPtr substitute(const TermPtr& m, const std::map<std::string, TermPtr>& bindings);

bool alpha_equal(const TermPtr& a, const TermPtr& b);
/// Hash invariant under renaming of bound variables.
std::size_t alpha_hash(const TermPtr& t);

/// One leftmost head beta- or delta-step under the leading lambda prefix;
/// nullopt when the head is a variable or a constant. A delta step unfolds
/// Y x.M into (λx.M)(Y x.M).
std::optional<TermPtr> head_step(const TermPtr& t);

struct HeadResult {
  enum class Status { Hnf, Exhausted, Diverges };
  Status status = Status::Exhausted;
  std::vector<std::pair<std::string, SimpleType>> binders;
  TermPtr head;
  std::vector<TermPtr> args;
  std::size_t steps = 0;
};

/// Iterates head_step at most `fuel` times. Diverges is reported only when a
/// term recurs (up to alpha-equivalence) along the reduction sequence.
HeadResult head_normal_form(const TermPtr& t, std::size_t fuel);

struct BohmPrefix {
  enum class Kind { Node, Omega, Cutoff };
  Kind kind = Kind::Cutoff;
  std::string label;
  std::vector<BohmPrefix> children;

  static BohmPrefix cutoff() { return {}; }
  static BohmPrefix omega() { return {Kind::Omega, {}, {}}; }
  bool complete() const;
  std::size_t depth() const;
  friend bool operator==(const BohmPrefix&, const BohmPrefix&) = default;
};

/// Unfolds BT(t) to `depth` constant levels. `fuel` bounds each head
/// normalisation; Exhausted gives a Cutoff leaf, Diverges an Omega leaf.
BohmPrefix bohm_prefix(const TermPtr& t, std::size_t depth, std::size_t fuel);

/// Replaces every subtree at `depth` levels below the root by Cutoff.
BohmPrefix truncate(const BohmPrefix& p, std::size_t depth);

/// `a b a` for unary spines (trailing cutoff omitted), `g(a, c)` otherwise.
std::string to_string(const BohmPrefix& p);

}  // namespace stratum
