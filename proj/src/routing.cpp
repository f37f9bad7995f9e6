// SPDX-License-Identifier: Apache-2.0

#include "multiring/routing.hpp"

#include <string>

#include "multiring/errors.hpp"

namespace multiring {

std::vector<std::vector<int>> cal_mapping(const Decomposition& d, int direction) {
  const int n = d.n;
  std::vector<std::vector<int>> mapping(n, std::vector<int>(n, kNoRing));
  for (int i = 0; i < d.num_rings(); ++i) {
    const auto& order = d.rings[i].order;
    const int len = static_cast<int>(order.size());
    for (int j = 0; j < len; ++j) {
      const int u = order[j];
      const int v = order[(j + direction + len) % len];
      if (mapping[u][v] != kNoRing) {
        throw ArcConflictError("arc (" + std::to_string(u) + "->" +
                               std::to_string(v) + ") claimed by rings " +
                               std::to_string(mapping[u][v]) + " and " +
                               std::to_string(i));
      }
      mapping[u][v] = i;
    }
  }
  return mapping;
}

RoutingTable make_routing(const Decomposition& d) {
  RoutingTable t;
  t.n = d.n;
  t.num_rings = d.num_rings();
  t.out = cal_out_mapping(d);
  t.in = cal_in_mapping(d);
  return t;
}

}  // namespace multiring
