#pragma once

// Typing derivations for the positive (≥) and dual (≱) systems: the tree
// structure, its text format, a purely syntactic checker, and a generator
// driven by the model.

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stratum/types.hpp"

namespace stratum {

enum class Rule { Axiom, Intersect, Subsume, ConstNullary, ConstTrans, App, Abs, YOdd, YEven };

const char* rule_name(Rule r);
std::optional<Rule> parse_rule(std::string_view s);

/// Geq: Γ ⊢ M ≥ S.  NotGeq: Γ ⊢ M ≱ S.
enum class Polarity { Geq, NotGeq };

struct Binding {
  std::string name;
  SimpleType type;
  ITypeSet types;
  friend bool operator==(const Binding&, const Binding&) = default;
};

/// Ordered environment; a name occurs at most once.
using Context = std::vector<Binding>;

/// Γ, x ≥ S: drops an earlier binding of x and appends the new one.
Context extend(const Context& g, const std::string& name, const SimpleType& type, const ITypeSet& types);

/// One node. `path` addresses the subject inside the certificate's term:
/// 0 and 1 step into an application, b into a binder body, L reads Y x.M as
/// λx.M. Witnesses are "-" except for Abs and the stratified fixpoint rule
/// (`k=<stratum>`) and the positive constant rule (`<state> <δ tuple>`).
struct Derivation {
  Rule rule = Rule::Intersect;
  Context gamma;
  std::string path;
  ITypeSet types;
  std::string witness = "-";
  std::vector<Derivation> premises;
  /// Source line when read from a file, else 0.
  int line = 0;

  std::size_t size() const;
};

struct Certificate {
  Signature signature;
  TermPtr term;
  Polarity polarity = Polarity::Geq;
  Derivation root;
};

/// Subterm at `path`; throws std::invalid_argument on a bad step.
TermPtr subterm(const TermPtr& t, const std::string& path);

/// Text format:
///   signature: a : o -> o; c : o
///   term: <term>
///   RULE | Γ | ⊢ @path ≥ {types} | witness
/// with children indented two spaces deeper than their parent. Γ is `-` or
/// `x:A ≥ {..}; y:B ≥ {..}`.
std::string write_certificate(const Certificate& c);
/// Reads only the header's signature, so the automaton can be parsed first.
Signature certificate_signature(std::string_view text);
Certificate read_certificate(std::string_view text, const WAA& a);

struct CheckResult {
  bool ok = true;
  Rule rule = Rule::Intersect;
  /// premise indices from the root, e.g. "0.1"; empty at the root
  std::string node;
  std::string term_path;
  int line = 0;
  std::string message;
};

/// Validates every node against the rules of its polarity, root first. Uses
/// only the automaton's ranks and transitions, never the model.
CheckResult check_derivation(const Certificate& c, const WAA& a);

class NotDerivable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Verdict {
  int state = 0;
  bool accepted = false;
  Certificate certificate;
};

/// Builds derivations for one automaton. The positive system is generated in
/// the model of the automaton; the dual one in the model of its dual.
class Prover {
 public:
  explicit Prover(const WAA& a, std::size_t cap = Model::default_cap());

  const WAA& automaton() const { return model_.automaton(); }
  const Model& model() const { return model_; }
  const Model& dual_model() const { return dual_; }

  /// Γ ⊢ M ≥ S. Throws NotDerivable when ⟦M⟧ ≱ ⟦S⟧ at the top stratum.
  Certificate derive(const Context& g, const TermPtr& m, const ITypeSet& s) const;
  /// Γ ⊢ M ≱ S. Throws NotDerivable when the dual condition fails.
  Certificate derive_dual(const Context& g, const TermPtr& m, const ITypeSet& s) const;

  /// Per state (in index order) of a closed term of type o: a positive
  /// certificate for accepting states, a dual one otherwise.
  std::vector<Verdict> decide(const TermPtr& m) const;
  Verdict decide(const TermPtr& m, int q) const;

 private:
  Model model_;
  Model dual_;
};

}  // namespace stratum
