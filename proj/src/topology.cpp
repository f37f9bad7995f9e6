// SPDX-License-Identifier: Apache-2.0

#include "multiring/topology.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "multiring/errors.hpp"

namespace multiring {

namespace {

std::vector<Rank> dense_ranks(int n, int ranks_per_node) {
  std::vector<Rank> out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = Rank{i, i / ranks_per_node};
  }
  return out;
}

// Both directions of a cable share one id; intra and inter cables live in
// disjoint id spaces so (src, dst, cable_id) stays unique.
std::int64_t intra_cable_id(int a, int b, int n) {
  return static_cast<std::int64_t>(std::min(a, b)) * n + std::max(a, b);
}

std::int64_t inter_cable_id(int a, int b, int n) {
  return static_cast<std::int64_t>(n) * n + intra_cable_id(a, b, n);
}

}  // namespace

bool Topology::has_arc(int src, int dst) const {
  for (const Link& l : links) {
    if (l.src == src && l.dst == dst) return true;
  }
  return false;
}

Topology make_fullmesh(int n, double per_link_bw) {
  if (n < 2) throw InvalidSizeError("fullmesh requires n >= 2");
  if (per_link_bw <= 0) throw ConfigError("per-link bandwidth must be positive");
  Topology t;
  t.ranks = dense_ranks(n, n);
  t.ranks_per_node = n;
  t.capacity = CapacityModel{CapacityKind::per_link, per_link_bw, 0.0};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      t.links.push_back(Link{i, j, intra_cable_id(i, j, n), LinkKind::intra_node});
    }
  }
  return t;
}

Topology make_switched(int n, double node_agg_bw) {
  if (n < 2) throw InvalidSizeError("switched requires n >= 2");
  if (node_agg_bw <= 0) throw ConfigError("node aggregate bandwidth must be positive");
  Topology t = make_fullmesh(n, 1.0);
  t.capacity = CapacityModel{CapacityKind::per_port, node_agg_bw, 0.0};
  return t;
}

Topology make_multinode(int ranks_per_node, int nodes, double intra_link_bw,
                        double inter_nic_bw) {
  const int m = ranks_per_node;
  const int u = nodes;
  if (m < 2 || u < 2) throw InvalidSizeError("multinode requires m >= 2 and u >= 2");
  if (intra_link_bw <= 0 || inter_nic_bw <= 0) {
    throw ConfigError("bandwidths must be positive");
  }
  const int n = m * u;
  Topology t;
  t.ranks = dense_ranks(n, m);
  t.ranks_per_node = m;
  t.capacity = CapacityModel{CapacityKind::per_link, intra_link_bw, inter_nic_bw};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const bool same_node = t.ranks[i].node_id == t.ranks[j].node_id;
      t.links.push_back(Link{i, j,
                             same_node ? intra_cable_id(i, j, n) : inter_cable_id(i, j, n),
                             same_node ? LinkKind::intra_node : LinkKind::inter_node});
    }
  }
  return t;
}

double parse_bandwidth(const std::string& text) {
  if (text.empty()) throw ConfigError("empty bandwidth");
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || v <= 0) throw ConfigError("bad bandwidth: " + text);
  std::string suffix(end);
  double scale = 1.0;
  if (suffix == "" || suffix == "B") scale = 1.0;
  else if (suffix == "K" || suffix == "KB") scale = 1e3;
  else if (suffix == "M" || suffix == "MB") scale = 1e6;
  else if (suffix == "G" || suffix == "GB") scale = 1e9;
  else if (suffix == "T" || suffix == "TB") scale = 1e12;
  else throw ConfigError("bad bandwidth suffix: " + text);
  return v * scale;
}

Topology make_preset(const std::string& preset) {
  std::vector<std::string> parts;
  std::stringstream ss(preset);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.empty()) throw ConfigError("empty topology preset");

  auto want = [&](size_t k) {
    if (parts.size() != k) {
      throw ConfigError("preset '" + parts[0] + "' expects " +
                        std::to_string(k - 1) + " parameters");
    }
  };
  if (parts[0] == "fullmesh") {
    want(3);
    return make_fullmesh(std::stoi(parts[1]), parse_bandwidth(parts[2]));
  }
  if (parts[0] == "switched") {
    want(3);
    return make_switched(std::stoi(parts[1]), parse_bandwidth(parts[2]));
  }
  if (parts[0] == "multinode") {
    want(5);
    return make_multinode(std::stoi(parts[1]), std::stoi(parts[2]),
                          parse_bandwidth(parts[3]), parse_bandwidth(parts[4]));
  }
  throw ConfigError("unknown topology preset: " + parts[0]);
}

}  // namespace multiring
