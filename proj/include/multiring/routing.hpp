// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "multiring/decompose.hpp"

namespace multiring {

inline constexpr int kNoRing = -1;

// Precomputed send/receive lookups: out[u][v] = i iff arc (u->v) lies on ring
// i's forward traversal, kNoRing otherwise; in[u][v] = i iff rank u receives
// from v on ring i. Computed once per decomposition, immutable afterwards.
struct RoutingTable {
  int n = 0;
  int num_rings = 0;
  std::vector<std::vector<int>> out;
  std::vector<std::vector<int>> in;
};

// Mapping core with direction d in {+1, -1}: neighbor of position j is
// position j+d around each ring. Throws ArcConflictError if two rings claim
// one arc (a non-orthogonal decomposition).
std::vector<std::vector<int>> cal_mapping(const Decomposition& d, int direction);

inline std::vector<std::vector<int>> cal_out_mapping(const Decomposition& d) {
  return cal_mapping(d, +1);
}
inline std::vector<std::vector<int>> cal_in_mapping(const Decomposition& d) {
  return cal_mapping(d, -1);
}

RoutingTable make_routing(const Decomposition& d);

}  // namespace multiring
