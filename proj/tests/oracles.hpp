#pragma once

// Test-only reference implementations, written independently of the library
// algorithms they check.

#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stratum/automaton.hpp"

namespace oracle {

inline std::string fixture(const std::string& rel) {
  std::ifstream in(std::string(STRATUM_FIXTURES) + "/" + rel);
  if (!in) throw std::runtime_error("missing fixture " + rel);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Explicit game on a finite tree: Eve picks an alternative, Adam picks a
// component and a state in it.
inline bool eve_wins_finite(const stratum::WAA& a, int q, const stratum::BohmPrefix& p) {
  using K = stratum::BohmPrefix::Kind;
  if (p.kind == K::Omega) return a.rank(q) % 2 == 0;
  if (p.kind == K::Cutoff) throw std::logic_error("cutoff in exact oracle");
  for (const auto& alt : a.delta(q, p.label)) {
    bool adam_refutes = false;
    for (std::size_t j = 0; j < alt.size() && !adam_refutes; ++j)
      for (int r = 0; r < a.size() && !adam_refutes; ++r)
        if ((alt[j] >> r & 1) && !eve_wins_finite(a, r, p.children[j])) adam_refutes = true;
    if (!adam_refutes) return true;
  }
  return false;
}

// Zielonka's recursive algorithm on an explicit max-parity game.
struct ParityGame {
  std::vector<int> owner;  // 0 Eve, 1 Adam
  std::vector<int> prio;
  std::vector<std::vector<int>> succ;

  int add(int who, int p) {
    owner.push_back(who);
    prio.push_back(p);
    succ.emplace_back();
    return static_cast<int>(owner.size()) - 1;
  }

  std::vector<bool> attractor(const std::vector<bool>& alive, const std::vector<bool>& target,
                              int player) const {
    std::vector<bool> attr = target;
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t v = 0; v < owner.size(); ++v) {
        if (!alive[v] || attr[v]) continue;
        bool any = false, all = true;
        for (int w : succ[v]) {
          if (!alive[w]) continue;
          any = any || attr[w];
          all = all && attr[w];
        }
        if (owner[v] == player ? any : all) {
          attr[v] = true;
          changed = true;
        }
      }
    }
    return attr;
  }

  // returns winning region of Eve within `alive`
  std::vector<bool> solve(const std::vector<bool>& alive) const {
    std::size_t n = owner.size();
    int top = -1;
    for (std::size_t v = 0; v < n; ++v)
      if (alive[v]) top = std::max(top, prio[v]);
    if (top < 0) return std::vector<bool>(n, false);
    int player = top % 2;
    std::vector<bool> at_top(n, false);
    for (std::size_t v = 0; v < n; ++v) at_top[v] = alive[v] && prio[v] == top;
    std::vector<bool> attr = attractor(alive, at_top, player);
    std::vector<bool> rest(n);
    for (std::size_t v = 0; v < n; ++v) rest[v] = alive[v] && !attr[v];
    std::vector<bool> eve_sub = solve(rest);
    std::vector<bool> opp(n, false);
    for (std::size_t v = 0; v < n; ++v) opp[v] = rest[v] && (player == 0 ? !eve_sub[v] : eve_sub[v]);
    bool opp_empty = true;
    for (std::size_t v = 0; v < n; ++v) opp_empty = opp_empty && !opp[v];
    if (opp_empty) {
      std::vector<bool> w(n, false);
      for (std::size_t v = 0; v < n; ++v) w[v] = alive[v] && player == 0;
      return w;
    }
    std::vector<bool> oattr = attractor(alive, opp, 1 - player);
    std::vector<bool> rest2(n);
    for (std::size_t v = 0; v < n; ++v) rest2[v] = alive[v] && !oattr[v];
    std::vector<bool> eve2 = solve(rest2);
    std::vector<bool> w(n, false);
    for (std::size_t v = 0; v < n; ++v) w[v] = player == 0 ? eve2[v] : (oattr[v] || eve2[v]);
    return w;
  }
};

// Acceptance game on a regular tree as an explicit parity game.
inline std::vector<stratum::StateSet> solve_by_parity(const stratum::WAA& a,
                                                      const stratum::RegularTree& t) {
  ParityGame g;
  int eve_sink = g.add(0, 0), adam_sink = g.add(0, 1);
  g.succ[eve_sink] = {eve_sink};
  g.succ[adam_sink] = {adam_sink};
  int nv = static_cast<int>(t.vertices.size());
  std::vector<std::vector<int>> pos(a.size(), std::vector<int>(nv));
  for (int q = 0; q < a.size(); ++q)
    for (int v = 0; v < nv; ++v) pos[q][v] = g.add(0, a.rank(q));
  for (int q = 0; q < a.size(); ++q)
    for (int v = 0; v < nv; ++v) {
      const auto& alts = a.delta(q, t.vertices[v].label);
      if (alts.empty()) g.succ[pos[q][v]].push_back(adam_sink);
      for (const auto& alt : alts) {
        int choice = g.add(1, a.rank(q));
        g.succ[pos[q][v]].push_back(choice);
        for (std::size_t j = 0; j < alt.size(); ++j)
          for (int r = 0; r < a.size(); ++r)
            if (alt[j] >> r & 1) g.succ[choice].push_back(pos[r][t.vertices[v].succ[j]]);
        if (g.succ[choice].empty()) g.succ[choice].push_back(eve_sink);
      }
    }
  std::vector<bool> eve = g.solve(std::vector<bool>(g.owner.size(), true));
  std::vector<stratum::StateSet> out(nv, 0);
  for (int q = 0; q < a.size(); ++q)
    for (int v = 0; v < nv; ++v)
      if (eve[pos[q][v]]) out[v] |= stratum::StateSet{1} << q;
  return out;
}

}  // namespace oracle
