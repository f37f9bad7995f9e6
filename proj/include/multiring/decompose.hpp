// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "multiring/topology.hpp"

namespace multiring {

// A directed Hamiltonian cycle over the rank set, stored as the visiting
// order; the cycle closes from the last entry back to the first. Stored
// canonically rotated so order[0] is the smallest rank id.
struct RingDatapath {
  std::vector<int> order;

  int length() const { return static_cast<int>(order.size()); }
  // Position of `rank` in the visiting order; -1 if absent.
  int position_of(int rank) const;
};

// An open directed Hamiltonian path on one node's local ranks.
struct HamPath {
  std::vector<int> order;
};

enum class DecompScheme { complete, complete_multinode, path_linked };

// An ordered set of pairwise arc-disjoint ring datapaths.
struct Decomposition {
  DecompScheme scheme = DecompScheme::complete;
  int n = 0;
  int ranks_per_node = 0;  // m for multinode schemes, n otherwise
  std::vector<RingDatapath> rings;

  int num_rings() const { return static_cast<int>(rings.size()); }
};

// Splits the complete digraph on n ranks into n-1 arc-disjoint Hamiltonian
// cycles covering every arc exactly once. Exists for every n >= 3 except
// n = 4 and n = 6 (NoDecompositionError).
Decomposition decompose_complete(int n);

// Splits the complete digraph on m ranks (m even) into m arc-disjoint
// Hamiltonian paths whose stacked orders form a row-complete Latin square:
// each rank appears exactly once among the starts and once among the ends.
std::vector<HamPath> decompose_paths(int m);

// Multi-node scheme: m rings of length m*u. Ring r traverses path r inside
// every node, hopping node t -> node t+1 (mod u) between path end and path
// start. Each rank gets exactly one inbound and one outbound inter-node arc.
Decomposition decompose_multinode(int m, int u);

// Treats the whole m*u-rank cluster as one complete digraph and delegates to
// decompose_complete(m*u); tagged complete_multinode.
Decomposition decompose_multinode_flat(int m, int u);

struct VerificationReport {
  std::vector<bool> ring_hamiltonian;   // per ring: permutation + arcs exist
  bool arc_disjoint = false;
  double coverage = 0.0;                // |used arcs| / |topology arcs|
  std::vector<int> nic_out;             // per rank inter-node arc usage
  std::vector<int> nic_in;
  std::vector<std::string> failures;    // human-readable findings
  bool all_ok = false;
};

// Mechanized check of Hamiltonicity, pairwise arc-disjointness, coverage and
// per-rank inter-node NIC usage. Failures land in the report, never throw.
VerificationReport verify_decomposition(const Decomposition& d, const Topology& t);

// The induction rewiring that extends a u-node linked decomposition to
// u+1 nodes: redirect each ring's last-node -> node-0 arc through a fresh
// node traversing the same path index. Used by tests; the result must equal
// decompose_multinode(m, u+1).
Decomposition extend_multinode_by_one(const Decomposition& d);

std::string to_string(DecompScheme s);
DecompScheme scheme_from_string(const std::string& s);

}  // namespace multiring
