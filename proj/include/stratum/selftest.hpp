#pragma once

// Property suites over the fixture automata, shared by `stratum selftest` and
// the acceptance binary.

#include <cstdint>
#include <string>
#include <vector>

#include "stratum/derivation.hpp"

namespace stratum {

struct SelftestOptions {
  /// Directory holding a1.waa, a2.waa, a3.waa and regular/.
  std::string fixtures;
  std::uint64_t seed = 1;
  std::size_t cap = Model::default_cap();
};

struct SuiteResult {
  std::string name;
  std::size_t cases = 0;
  bool ok = true;
  /// First counterexample when !ok.
  std::string failure;
  double seconds = 0;
};

/// galois, fixpoint, types, beta, duality, oracles, fuzz
const std::vector<std::string>& selftest_suites();
/// Throws std::invalid_argument for an unknown name.
SuiteResult run_suite(const std::string& name, const SelftestOptions& opt);

/// Closed terms of type o over a:o->o, b:o->o, c:o.
const std::vector<std::string>& base_corpus();
/// a:o->o, b:o->o, c:o, g:o->o->o
Signature corpus_signature();

/// Positions of β- and δ-redexes, as derivation paths.
std::vector<std::string> redex_paths(const TermPtr& t);
/// Contracts the redex at `path`.
TermPtr contract_at(const TermPtr& t, const std::string& path);

enum class Mutation { AddType, MovePath, SwapRule, BumpStratum };

/// Applies one single-node mutation of the given class, choosing the node from
/// `pick` (taken modulo the number of eligible nodes). Returns false when no
/// node is eligible. Every mutation made here yields an invalid derivation.
bool mutate(Certificate& c, const WAA& a, Mutation kind, std::size_t pick);

}  // namespace stratum
