#pragma once

// Weak alternating tree automata and the two game-based acceptance oracles.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stratum/lambda.hpp"

namespace stratum {

/// Bitmask over automaton states; at most 64 states.
using StateSet = std::uint64_t;
/// One alternative of δ_i(q,a): the i component obligations.
using Tuple = std::vector<StateSet>;

inline int popcount(StateSet s) { return __builtin_popcountll(s); }
inline bool subset(StateSet a, StateSet b) { return (a & ~b) == 0; }

class AutomatonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class WAA {
 public:
  WAA(Signature sig, std::vector<std::string> names, std::vector<int> ranks, int initial);

  const Signature& signature() const { return sig_; }
  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int q) const { return names_.at(q); }
  int rank(int q) const { return ranks_.at(q); }
  int initial() const { return initial_; }
  int max_rank() const { return max_rank_; }
  /// Index of a state name; throws AutomatonError when absent.
  int state(const std::string& name) const;

  StateSet all() const { return rank_le(max_rank_); }
  /// Q_k
  StateSet rank_eq(int k) const;
  /// Q_{≤k}; empty for k < 0
  StateSet rank_le(int k) const;

  /// Alternatives of δ(q,a), sorted and free of duplicates. Empty when the
  /// pair has no transition. For nullary a the only possible alternative is ().
  const std::vector<Tuple>& delta(int q, const std::string& a) const;
  /// Replaces δ(q,a); checks arity, weakness and duplicates.
  void set_delta(int q, const std::string& a, std::vector<Tuple> alts);

  /// Throws AutomatonError on a weakness or arity violation.
  void validate() const;

  std::string set_str(StateSet s) const;
  /// File representation accepted by parse_waa.
  std::string str() const;

  friend bool operator==(const WAA& a, const WAA& b);

 private:
  Signature sig_;
  std::vector<std::string> names_;
  std::vector<int> ranks_;
  int initial_;
  int max_rank_ = 0;
  std::map<std::pair<int, std::string>, std::vector<Tuple>> delta_;
};

/// Parses the automaton file format against `sig`:
///   states: q1@1 q2@2
///   initial: q2
///   q1 a -> ({q1}) | ({q1,q2})
///   q1 c -> ()
WAA parse_waa(std::string_view text, const Signature& sig);

/// Upward closure of every δ(q,a) within Q_{≤ρ(q)}. Throws AutomatonError
/// when a single closure would exceed `bound` tuples.
WAA monotone_completion(const WAA& a, std::size_t bound = 1u << 16);

/// Complement automaton: ranks shifted by one, nullary acceptance flipped, and
/// δ(q,a) replaced by all transversal tuples over Q_{≤ρ(q)}. Throws
/// AutomatonError when the tuple space of one (q,a) exceeds `bound`.
WAA dualize(const WAA& a, std::size_t bound = 1u << 16);

/// Eve's local condition: some alternative of δ(q,a) fits inside `children`.
bool eve_moves(const WAA& a, int q, const std::string& label, const std::vector<StateSet>& children);

/// Finite presentation of a regular tree; vertex 0 is the root.
struct RegularTree {
  struct Vertex {
    std::string name;
    std::string label;
    std::vector<int> succ;
  };
  std::vector<Vertex> vertices;
};

/// Lines `v0: a v1`, first vertex is the root. Checks labels and arities.
RegularTree parse_regular_tree(std::string_view text, const Signature& sig);

/// Unfolding to `depth` constant levels.
BohmPrefix unfold(const RegularTree& t, std::size_t depth);

enum class PrefixMode { Exact, Optimistic, Pessimistic };

class InconclusiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Winning states at each node of a prefix, mirroring its shape.
struct PrefixWin {
  StateSet win = 0;
  std::vector<PrefixWin> children;
};

/// Bottom-up AND–OR evaluation. Cutoff leaves count as Q (optimistic), ∅
/// (pessimistic) or raise InconclusiveError (exact).
PrefixWin accept_prefix(const WAA& a, const BohmPrefix& p, PrefixMode mode);

/// Winning states per vertex of the acceptance game on the unfolding of t.
std::vector<StateSet> solve_regular(const WAA& a, const RegularTree& t);

}  // namespace stratum
