// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace multiring {

enum class LinkKind { intra_node, inter_node };

// A member of the communication group. Rank ids are dense in [0, n);
// node_id = id / ranks_per_node.
struct Rank {
  int id = 0;
  int node_id = 0;
};

// One logical unidirectional communication link. A physical cable yields one
// link per direction; both directions share the same cable_id.
struct Link {
  int src = 0;
  int dst = 0;
  std::int64_t cable_id = 0;
  LinkKind kind = LinkKind::intra_node;
};

enum class CapacityKind { per_link, per_port };

// Bandwidth model attached to a topology, all values bytes/sec per direction.
//   per_link: intra_bw is the dedicated bandwidth of each intra-node link.
//   per_port: intra_bw is the node aggregate; the cost model divides it by
//             the ranks per node to get each rank's port rate.
// Inter-node capacity is always per rank NIC (inter_nic_bw), regardless of
// the intra model: every rank owns one NIC per direction.
struct CapacityModel {
  CapacityKind kind = CapacityKind::per_link;
  double intra_bw = 0.0;
  double inter_nic_bw = 0.0;
};

// Directed multigraph of ranks plus capacity constraints. Immutable after
// construction; safe to share across concurrent readers.
struct Topology {
  std::vector<Rank> ranks;
  std::vector<Link> links;
  CapacityModel capacity;
  int ranks_per_node = 0;

  int n() const { return static_cast<int>(ranks.size()); }
  int num_nodes() const { return n() / ranks_per_node; }
  int node_of(int rank) const { return ranks[rank].node_id; }
  bool has_arc(int src, int dst) const;
};

// Single node, n ranks, every ordered pair directly cabled (complete digraph),
// each link with its own dedicated bandwidth.
Topology make_fullmesh(int n, double per_link_bw);

// Single node, n ranks behind a switch: complete digraph with a per-port
// capacity tag; node_agg_bw is the node aggregate per direction.
Topology make_switched(int n, double node_agg_bw);

// u nodes of m ranks each. Intra-node links form u disjoint complete digraphs
// (per-link intra_bw each); inter-node links form the complete bipartite
// pattern between every node pair, with one NIC of inter_nic_bw per rank per
// direction.
Topology make_multinode(int ranks_per_node, int nodes, double intra_link_bw,
                        double inter_nic_bw);

// Parses a preset string: "fullmesh:N:BW", "switched:N:BW",
// "multinode:M:U:BW_INTRA:BW_NIC". Bandwidths accept K/M/G/T suffixes
// (decimal, bytes/sec).
Topology make_preset(const std::string& preset);

double parse_bandwidth(const std::string& text);

}  // namespace multiring
