#pragma once

// Intersection types over the states of a weak automaton: syntax, the
// subsumption order, type application, and the two interpretations in the
// stratified model.

#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "stratum/automaton.hpp"
#include "stratum/lambda.hpp"
#include "stratum/model.hpp"

namespace stratum {

class IType;
/// Types are hash-consed: equal types are the same object and live for the
/// rest of the process.
using ITypeRef = const IType*;

/// Finite set of intersection types sharing one simple type. Members are kept
/// sorted by their printed form.
class ITypeSet {
 public:
  explicit ITypeSet(SimpleType type = SimpleType::base()) : type_(std::move(type)) {}
  ITypeSet(SimpleType type, std::vector<ITypeRef> items);

  const SimpleType& type() const { return type_; }
  const std::vector<ITypeRef>& items() const { return items_; }
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }
  bool contains(ITypeRef t) const;
  void insert(ITypeRef t);
  ITypeSet unite(const ITypeSet& other) const;
  /// `{t1,t2}`
  std::string str() const;

  friend bool operator==(const ITypeSet& a, const ITypeSet& b) { return a.type_ == b.type_ && a.items_ == b.items_; }
  friend bool operator!=(const ITypeSet& a, const ITypeSet& b) { return !(a == b); }
  friend bool operator<(const ITypeSet& a, const ITypeSet& b);

 private:
  SimpleType type_;
  std::vector<ITypeRef> items_;
};

class IType {
 public:
  static ITypeRef state(const WAA& a, int q);
  /// T -> s; throws TypeError when a premise has a higher stratum than s.
  static ITypeRef arrow(const WAA& a, const ITypeSet& premises, ITypeRef target);

  const SimpleType& type() const { return type_; }
  bool is_state() const { return state_ >= 0; }
  int state() const { return state_; }
  const ITypeSet& premises() const { return premises_; }
  ITypeRef target() const { return target_; }
  /// Stratum under `a`: the rank of the final target state.
  int stratum(const WAA& a) const;
  /// `q`, `{q1}->q2`, `{{q1}->q1}->q1`
  const std::string& str() const { return str_; }
  std::size_t id() const { return id_; }

 private:
  IType(SimpleType t, int q, ITypeSet prem, ITypeRef target, std::string s, std::size_t id)
      : type_(std::move(t)), state_(q), premises_(std::move(prem)), target_(target), str_(std::move(s)), id_(id) {}
  friend struct ITypeTable;

  SimpleType type_;
  int state_;
  ITypeSet premises_;
  ITypeRef target_;
  std::string str_;
  std::size_t id_;
};

/// Largest stratum of a member, -1 for the empty set.
int max_stratum(const ITypeSet& s, const WAA& a);
/// S ⊆ τ^k
bool within_tau(const ITypeSet& s, int k, const WAA& a);
/// S ⊆ Types^k
bool within_types(const ITypeSet& s, int k, const WAA& a);
/// S ∩ Types^k
ITypeSet restrict_to(const ITypeSet& s, int k, const WAA& a);
/// {P -> t : t ∈ targets}
ITypeSet arrows(const WAA& a, const ITypeSet& premises, const ITypeSet& targets);
/// {q : q ∈ s} at type o
ITypeSet state_set(const WAA& a, StateSet s);

/// s ⊑ t. Base types by equality, arrows contravariantly in the premise.
bool subsume(ITypeRef s, ITypeRef t);
/// S ⊑ T: every member of S lies below some member of T.
bool subsume(const ITypeSet& s, const ITypeSet& t);
/// S(T) = {t : (U -> t) ∈ S, U ⊑ T}
ITypeSet type_apply(const ITypeSet& s, const ITypeSet& t);

/// Parses `{...}` at the given simple type. State names are resolved in `a`.
ITypeSet parse_typeset(std::string_view text, const SimpleType& type, const WAA& a);

/// ⟦S⟧^k: join of step functions.
Value interp(const Model& m, const ITypeSet& s, int k);
/// ⦇S⦈^k: meet of co-step functions.
Value dual_interp(const Model& m, const ITypeSet& s, int k);

/// Types naming model elements. Results are cached per lattice element.
class Representer {
 public:
  explicit Representer(const Model& m) : m_(m) {}
  /// S ⊆ Types^k with ⟦S⟧^k = d.
  ITypeSet represent(const Value& d);

 private:
  /// S ⊆ τ^k with ⟦S⟧^k = x, for x in the image of bar (any x at k = 0).
  ITypeSet top_part(const Value& x);

  const Model& m_;
  std::map<std::tuple<int, std::string, std::vector<StateSet>>, ITypeSet> cache_;
};

ITypeSet represent(const Model& m, const Value& d);

}  // namespace stratum
