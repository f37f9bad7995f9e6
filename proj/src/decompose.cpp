// SPDX-License-Identifier: Apache-2.0

#include "multiring/decompose.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>

#include "multiring/errors.hpp"

namespace multiring {

namespace {

int floor_mod(int a, int m) { return ((a % m) + m) % m; }

// Classical zig-zag order [j, j+1, j-1, j+2, j-2, ...] on Z_w. For even w the
// w paths are pairwise arc-disjoint, cover all w(w-1) arcs of the complete
// digraph, and stacked as rows form a row-complete Latin square.
std::vector<int> zigzag_order(int j, int w) {
  std::vector<int> p;
  p.reserve(w);
  p.push_back(floor_mod(j, w));
  for (int t = 1; t < w; ++t) {
    if (t % 2 == 1) {
      p.push_back(floor_mod(j + (t + 1) / 2, w));
    } else {
      p.push_back(floor_mod(j - t / 2, w));
    }
  }
  return p;
}

void canonicalize(RingDatapath& ring) {
  auto it = std::min_element(ring.order.begin(), ring.order.end());
  std::rotate(ring.order.begin(), it, ring.order.end());
}

// --- even n: two-hub construction -----------------------------------------
//
// Base cycles decompose the complete digraph on the n-1 vertices
// {0..n-3} + hub1 (= n-2): zig-zag paths on Z_{n-2} closed through hub1.
// Removing one arc per base cycle such that the removed arcs form a
// Hamiltonian path over those n-1 vertices leaves n-2 open paths plus the
// removed-arc path itself; closing all n-1 paths through a second hub (n-1)
// yields the n-1 cycles of the complete digraph on n vertices.

std::vector<std::vector<int>> base_cycles(int n) {
  const int w = n - 2;
  std::vector<std::vector<int>> cycles;
  cycles.reserve(w);
  for (int j = 0; j < w; ++j) {
    std::vector<int> c = zigzag_order(j, w);
    c.push_back(w);  // hub1 between path end and path start
    cycles.push_back(std::move(c));
  }
  return cycles;
}

// For n % 4 == 0 the break arcs come from a fixed shift table over the
// hub-first representation [hub1, j, j+1, j-1, ...]; the removed arcs form a
// Hamiltonian path starting at hub1. Verified for this whole residue class.
std::vector<std::pair<int, int>> break_arcs_shift_table(int n) {
  const int w = n - 2;
  const int L = n - 1;
  const int k = n / 4 - 1;
  const std::map<int, int> exceptions = {
      {0, 1}, {k + 1, 4 * k + 2}, {2 * k + 2, 3}, {3 * k + 2, 4 * k}};
  std::vector<std::pair<int, int>> removed;
  removed.reserve(w);
  for (int i = 0; i < w; ++i) {
    std::vector<int> rep;
    rep.reserve(L);
    rep.push_back(w);
    for (int v : zigzag_order(i, w)) rep.push_back(v);
    auto it = exceptions.find(i);
    const int shift = (it != exceptions.end() ? it->second : 2 * k) % L;
    removed.emplace_back(rep[floor_mod(shift - 1, L)], rep[shift]);
  }
  return removed;
}

// For n % 4 == 2 no uniform shift table exists over this cycle family;
// a deterministic first-fit backtracking picks one arc per base cycle so the
// picks chain into a single path (w arcs over w+1 vertices, acyclic and
// degree <= 1 each way, is automatically one Hamiltonian path).
std::vector<std::pair<int, int>> break_arcs_search(
    const std::vector<std::vector<int>>& cycles, int n) {
  const int nverts = n - 1;
  const int L = n - 1;
  std::vector<int> nxt(nverts, -1), prv(nverts, -1);
  std::vector<std::pair<int, int>> picked(cycles.size());
  long budget = 50'000'000;

  auto chain_end = [&](int v) {
    while (nxt[v] != -1) v = nxt[v];
    return v;
  };

  auto bt = [&](auto&& self, size_t idx) -> bool {
    if (--budget < 0) return false;
    if (idx == cycles.size()) return true;
    const auto& c = cycles[idx];
    for (int p = 0; p < L; ++p) {
      const int u = c[p];
      const int v = c[(p + 1) % L];
      if (nxt[u] != -1 || prv[v] != -1) continue;
      if (chain_end(v) == u) continue;  // would close a cycle
      nxt[u] = v;
      prv[v] = u;
      picked[idx] = {u, v};
      if (self(self, idx + 1)) return true;
      nxt[u] = -1;
      prv[v] = -1;
    }
    return false;
  };

  if (!bt(bt, 0)) {
    throw Error("break-arc selection failed for n=" + std::to_string(n));
  }
  return picked;
}

Decomposition complete_even(int n) {
  const int L = n - 1;
  const auto cycles = base_cycles(n);

  std::vector<std::pair<int, int>> removed =
      (n % 4 == 0) ? break_arcs_shift_table(n) : break_arcs_search(cycles, n);

  // Break each base cycle at its removed arc: open path from arc head back
  // around to arc tail.
  std::vector<std::vector<int>> paths;
  paths.reserve(L);
  for (size_t i = 0; i < cycles.size(); ++i) {
    const auto& c = cycles[i];
    int start = 0;
    while (c[start] != removed[i].second) ++start;
    std::vector<int> path;
    path.reserve(L);
    for (int t = 0; t < L; ++t) path.push_back(c[(start + t) % L]);
    paths.push_back(std::move(path));
  }

  // The removed arcs themselves form the final path.
  std::vector<int> nxt(L, -1), indeg(L, 0);
  for (auto [u, v] : removed) {
    nxt[u] = v;
    ++indeg[v];
  }
  int head = -1;
  for (int v = 0; v < L; ++v) {
    if (indeg[v] == 0) head = v;
  }
  std::vector<int> appender;
  appender.reserve(L);
  for (int v = head; v != -1; v = nxt[v]) appender.push_back(v);
  if (static_cast<int>(appender.size()) != L) {
    throw Error("removed arcs do not form a Hamiltonian path");
  }
  paths.push_back(std::move(appender));

  Decomposition d;
  d.scheme = DecompScheme::complete;
  d.n = n;
  d.ranks_per_node = n;
  for (auto& p : paths) {
    p.push_back(n - 1);  // hub2 closes every path into a cycle
    RingDatapath ring{std::move(p)};
    canonicalize(ring);
    d.rings.push_back(std::move(ring));
  }
  return d;
}

Decomposition complete_odd(int n) {
  const int w = n - 1;
  Decomposition d;
  d.scheme = DecompScheme::complete;
  d.n = n;
  d.ranks_per_node = n;
  for (int j = 0; j < w; ++j) {
    std::vector<int> order = zigzag_order(j, w);
    order.push_back(w);
    RingDatapath ring{std::move(order)};
    canonicalize(ring);
    d.rings.push_back(std::move(ring));
  }
  return d;
}

// Internal sanity gate: permutation + disjointness + perfect cover.
void check_complete(const Decomposition& d) {
  const int n = d.n;
  if (d.num_rings() != n - 1) throw Error("wrong ring count");
  std::vector<char> seen(static_cast<size_t>(n) * n, 0);
  for (const auto& ring : d.rings) {
    std::vector<char> vis(n, 0);
    if (ring.length() != n) throw Error("ring length mismatch");
    for (int i = 0; i < n; ++i) {
      const int u = ring.order[i];
      const int v = ring.order[(i + 1) % n];
      if (vis[u]++) throw Error("rank revisited within ring");
      auto& cell = seen[static_cast<size_t>(u) * n + v];
      if (cell++) throw Error("arc used twice across rings");
    }
  }
}

}  // namespace

int RingDatapath::position_of(int rank) const {
  for (int i = 0; i < length(); ++i) {
    if (order[i] == rank) return i;
  }
  return -1;
}

Decomposition decompose_complete(int n) {
  if (n < 3) throw InvalidSizeError("decompose_complete requires n >= 3");
  if (n == 4 || n == 6) {
    throw NoDecompositionError(
        "the complete digraph on " + std::to_string(n) +
        " ranks has no Hamiltonian decomposition (only n = 4 and n = 6 fail)");
  }
  Decomposition d = (n % 2 == 1) ? complete_odd(n) : complete_even(n);
  check_complete(d);
  return d;
}

std::vector<HamPath> decompose_paths(int m) {
  if (m < 2) throw InvalidSizeError("decompose_paths requires m >= 2");
  if (m % 2 != 0) {
    throw InvalidSizeError("decompose_paths supports even m only");
  }
  std::vector<HamPath> out;
  out.reserve(m);
  for (int j = 0; j < m; ++j) out.push_back(HamPath{zigzag_order(j, m)});
  return out;
}

Decomposition decompose_multinode(int m, int u) {
  if (u < 2) throw InvalidSizeError("decompose_multinode requires u >= 2");
  const auto paths = decompose_paths(m);  // validates m
  Decomposition d;
  d.scheme = DecompScheme::path_linked;
  d.n = m * u;
  d.ranks_per_node = m;
  for (int r = 0; r < m; ++r) {
    std::vector<int> order;
    order.reserve(m * u);
    for (int t = 0; t < u; ++t) {
      for (int local : paths[r].order) order.push_back(t * m + local);
    }
    RingDatapath ring{std::move(order)};
    canonicalize(ring);
    d.rings.push_back(std::move(ring));
  }
  return d;
}

Decomposition decompose_multinode_flat(int m, int u) {
  if (m < 1 || u < 1 || m * u < 3) {
    throw InvalidSizeError("decompose_multinode_flat requires m*u >= 3");
  }
  Decomposition d = decompose_complete(m * u);
  d.scheme = DecompScheme::complete_multinode;
  d.ranks_per_node = m;
  return d;
}

VerificationReport verify_decomposition(const Decomposition& d, const Topology& t) {
  VerificationReport rep;
  const int n = t.n();
  std::unordered_set<std::int64_t> topo_arcs;
  for (const Link& l : t.links) {
    topo_arcs.insert(static_cast<std::int64_t>(l.src) * n + l.dst);
  }

  rep.nic_out.assign(n, 0);
  rep.nic_in.assign(n, 0);
  std::set<std::pair<int, int>> used;
  bool dup = false;

  for (int ri = 0; ri < d.num_rings(); ++ri) {
    const auto& ring = d.rings[ri];
    bool ok = true;
    std::vector<int> visits(n, 0);
    if (ring.length() != n) {
      ok = false;
      rep.failures.push_back("ring " + std::to_string(ri) + ": length " +
                             std::to_string(ring.length()) + " != " + std::to_string(n));
    }
    for (int v : ring.order) {
      if (v < 0 || v >= n) {
        ok = false;
        rep.failures.push_back("ring " + std::to_string(ri) + ": rank " +
                               std::to_string(v) + " out of range");
      } else if (++visits[v] == 2) {
        ok = false;
        rep.failures.push_back("ring " + std::to_string(ri) + ": rank " +
                               std::to_string(v) + " visited more than once");
      }
    }
    for (int i = 0; ok && i < ring.length(); ++i) {
      const int u = ring.order[i];
      const int v = ring.order[(i + 1) % ring.length()];
      if (!topo_arcs.count(static_cast<std::int64_t>(u) * n + v)) {
        ok = false;
        rep.failures.push_back("ring " + std::to_string(ri) + ": arc (" +
                               std::to_string(u) + "->" + std::to_string(v) +
                               ") not in topology");
      }
    }
    rep.ring_hamiltonian.push_back(ok);
    if (!ok) continue;
    for (int i = 0; i < ring.length(); ++i) {
      const int u = ring.order[i];
      const int v = ring.order[(i + 1) % ring.length()];
      if (!used.insert({u, v}).second) {
        dup = true;
        rep.failures.push_back("arc (" + std::to_string(u) + "->" +
                               std::to_string(v) + ") used by more than one ring");
      }
      if (t.node_of(u) != t.node_of(v)) {
        ++rep.nic_out[u];
        ++rep.nic_in[v];
      }
    }
  }

  rep.arc_disjoint = !dup;
  rep.coverage = t.links.empty() ? 0.0
                                 : static_cast<double>(used.size()) /
                                       static_cast<double>(t.links.size());
  rep.all_ok = rep.arc_disjoint &&
               std::all_of(rep.ring_hamiltonian.begin(), rep.ring_hamiltonian.end(),
                           [](bool b) { return b; });
  return rep;
}

Decomposition extend_multinode_by_one(const Decomposition& d) {
  if (d.scheme != DecompScheme::path_linked) {
    throw ConfigError("extend_multinode_by_one expects a path_linked decomposition");
  }
  const int m = d.ranks_per_node;
  const int u = d.n / m;
  Decomposition out;
  out.scheme = DecompScheme::path_linked;
  out.n = m * (u + 1);
  out.ranks_per_node = m;

  for (const auto& ring : d.rings) {
    const int len = ring.length();
    // Locate the single arc from the last node back to node 0.
    int cut = -1;
    for (int i = 0; i < len; ++i) {
      const int a = ring.order[i];
      const int b = ring.order[(i + 1) % len];
      if (a / m == u - 1 && b / m == 0) cut = i;
    }
    if (cut < 0) throw ConfigError("ring has no last-node -> node-0 arc");
    std::vector<int> seq;
    seq.reserve(len + m);
    for (int t = 0; t < len; ++t) seq.push_back(ring.order[(cut + 1 + t) % len]);
    // The fresh node traverses the same local path as node 0.
    for (int t = 0; t < m; ++t) seq.push_back(u * m + (seq[t] % m));
    RingDatapath nring{std::move(seq)};
    canonicalize(nring);
    out.rings.push_back(std::move(nring));
  }
  return out;
}

std::string to_string(DecompScheme s) {
  switch (s) {
    case DecompScheme::complete: return "kn";
    case DecompScheme::complete_multinode: return "flat";
    case DecompScheme::path_linked: return "linked";
  }
  return "?";
}

DecompScheme scheme_from_string(const std::string& s) {
  if (s == "kn") return DecompScheme::complete;
  if (s == "flat") return DecompScheme::complete_multinode;
  if (s == "linked") return DecompScheme::path_linked;
  throw ConfigError("unknown scheme: " + s + " (expected kn|flat|linked)");
}

}  // namespace multiring
