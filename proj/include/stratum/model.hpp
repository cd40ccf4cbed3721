#pragma once

// The stratified finite model D^k over a weak automaton: lattices of monotone
// functions, the Galois maps between strata, alternating fixpoints and term
// evaluation.

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "stratum/automaton.hpp"
#include "stratum/lambda.hpp"

namespace stratum {

class LatticeTooLarge : public std::runtime_error {
 public:
  LatticeTooLarge(const std::string& where, std::size_t estimate);
  std::size_t estimate() const { return estimate_; }

 private:
  std::size_t estimate_;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Model;

/// Element of D^k_A. Base values carry a state set. Arrow values are either
/// tables (leaf vectors laid out over the argument lattice, see Lattice) or
/// unevaluated closures. Values refer to their Model and must not outlive it.
class Value {
 public:
  Value() = default;

  int level() const { return k_; }
  const SimpleType& type() const { return type_; }
  bool is_base() const { return type_.is_base(); }
  bool is_table() const { return !is_base() && buf_ != nullptr; }
  bool is_closure() const { return fn_ != nullptr; }
  /// Only for base values.
  StateSet set() const;

 private:
  friend class Model;
  using Fn = std::function<Value(const Value&)>;

  int k_ = 0;
  SimpleType type_ = SimpleType::base();
  StateSet base_ = 0;
  std::shared_ptr<const std::vector<StateSet>> buf_;
  std::size_t off_ = 0;
  std::shared_ptr<const Fn> fn_;
};

/// All elements of D^k_A, sorted by total leaf popcount then lexicographically
/// (a linear extension of the order). An element of an arrow lattice is the
/// concatenation of its results over the argument lattice's elements.
struct Lattice {
  int k = 0;
  SimpleType type = SimpleType::base();
  std::size_t leafcount = 1;
  std::size_t size = 0;
  std::shared_ptr<std::vector<StateSet>> leaves;
  /// index in the stratum k-1 lattice of each element's projection
  std::vector<int> down;
  /// members of L^k(d) for each d of the stratum k-1 lattice, ascending
  std::vector<std::vector<int>> classes;

  const StateSet* at(std::size_t i) const { return leaves->data() + i * leafcount; }
  int bottom() const { return 0; }
  int top() const { return static_cast<int>(size) - 1; }
  int lift_inf(int j) const { return classes.at(j).front(); }
  int lift_sup(int j) const { return classes.at(j).back(); }
  bool leq(int i, int j) const;
  /// -1 when absent
  int find(const StateSet* leaves) const;
  const std::vector<int>& lower_covers(int i) const;

 private:
  friend class Model;
  std::map<std::string, int> index_;
  mutable std::once_flag covers_once_;
  mutable std::vector<std::vector<int>> covers_;
};

struct EnvNode;
using Env = std::shared_ptr<const EnvNode>;
struct EnvNode {
  std::string name;
  Value value;
  Env next;
};
Env bind(Env env, std::string name, Value v);

class Model {
 public:
  /// Cap from STRATUM_CAP when set, else 50000.
  static std::size_t default_cap();

  explicit Model(WAA automaton, std::size_t cap = default_cap());
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const WAA& automaton() const { return a_; }
  int max_level() const { return a_.max_rank(); }
  std::size_t cap() const { return cap_; }
  /// States of D^k_o: Q_{≤k}.
  StateSet universe(int k) const { return a_.rank_le(k); }

  /// Memoised; throws LatticeTooLarge beyond the cap.
  const Lattice& lattice(int k, const SimpleType& type) const;
  /// Number of base leaves of a table of this type.
  std::size_t leafcount(int k, const SimpleType& type) const;

  Value base(int k, StateSet s) const;
  Value closure(int k, const SimpleType& type, std::function<Value(const Value&)> fn) const;
  Value element(const Lattice& l, int i) const;
  Value top(int k, const SimpleType& type) const;
  Value bottom(int k, const SimpleType& type) const;

  Value apply(const Value& f, const Value& x) const;
  /// Closures become tables; idempotent on tables and base values.
  Value materialize(const Value& v) const;
  /// Index in lattice(k, type); -1 when v lies outside D^k.
  int index_of(const Value& v) const;

  bool leq(const Value& a, const Value& b) const;
  bool equal(const Value& a, const Value& b) const;
  Value join(const Value& a, const Value& b) const;
  Value meet(const Value& a, const Value& b) const;

  Value project_down(const Value& d) const;
  Value lift_inf(const Value& d) const;
  Value lift_sup(const Value& d) const;
  Value bar(const Value& d) const;
  Value top_bar(int k, const SimpleType& type) const;
  /// (d↓, bar d)
  std::pair<Value, Value> decompose(const Value& d) const;

  /// (d ⇒ e)(h) = e if d ≤ h else ⊥
  Value step(const Value& d, const Value& e) const;
  /// (d ⇘ e)(h) = e if h ≤ d else ⊤
  Value costep(const Value& d, const Value& e) const;

  /// fix^k of f : A -> A.
  Value fixpoint(int k, const SimpleType& type, const Value& f) const;

  Value const_sem(const std::string& name, int k) const;
  Value eval(const TermPtr& m, const Env& env, int k) const;
  /// ⟦M⟧ at the top stratum: the states accepting BT(M).
  StateSet accept(const TermPtr& m) const;

  /// Sorted state lists for base values, `[arg↦res, ...]` tables otherwise.
  std::string str(const Value& v) const;
  /// Leaf vector of the materialized value; needs only the argument lattices.
  std::vector<StateSet> leaf_vector(const Value& v) const;

 private:
  std::unique_ptr<Lattice> build(int k, const SimpleType& type) const;
  const StateSet* leaves(const Value& v) const;
  Value table(int k, const SimpleType& type, std::shared_ptr<const std::vector<StateSet>> buf,
              std::size_t off) const;
  Value slice(const Value& table, std::size_t i) const;
  Value leafwise(const Value& a, const Value& b, bool is_join) const;
  Value project_table(const Value& d) const;
  Value lift_table(const Value& d, bool sup) const;

  WAA a_;
  std::size_t cap_;
  mutable std::recursive_mutex mu_;
  mutable std::map<std::pair<int, std::string>, std::unique_ptr<Lattice>> lattices_;
};

}  // namespace stratum
