// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "multiring/attention.hpp"
#include "multiring/schedule.hpp"
#include "multiring/topology.hpp"

namespace multiring {

// Inputs of the analytical latency model. Bandwidths come from the Topology.
struct CostParams {
  double bytes_per_token = 0.0;   // 2 * H * Dh * elem_size for stacked K+V
  double flops_per_pair = 0.0;    // arithmetic per admitted (q, k) pair
  double compute_rate = 0.0;      // flops/sec
  double alpha = 0.0;             // fixed per-iteration message overhead, sec
};

struct LinkLoad {
  int src = 0;
  int dst = 0;
  std::int64_t bytes = 0;  // total across all iterations
};

// Predicted timing of one schedule on one topology. Two total-latency
// conventions are reported side by side: overlapped two-stream execution
// (sum of per-iteration maxima) and the plain sum of both streams.
struct RunReport {
  std::vector<double> comm_s;             // per iteration (0 when no transfers)
  std::vector<double> comp_s;             // per iteration
  std::vector<double> link_utilization;   // used arcs / topology arcs, per iter
  std::vector<LinkLoad> link_bytes;       // sorted by (src, dst)
  double t_comm = 0.0;
  double t_comp = 0.0;
  double t_all_overlap = 0.0;
  double t_all_sum = 0.0;
  double ccr = 0.0;                       // t_comp / t_comm
};

// Duration of one iteration's transfer set. per-link capacity: the slowest
// dedicated link gates the iteration; per-port capacity: each rank's flows
// share its port aggregate equally, so the fullest port gates it. Inter-node
// bytes always go through the sender's and receiver's NICs.
double comm_time(const std::vector<Transfer>& transfers, const Topology& topo,
                 const CostParams& cp);

double comp_time(std::uint64_t pairs, const CostParams& cp);

// Full run prediction; per-iteration compute is gated by the busiest rank.
RunReport simulate_run(const Schedule& s, const Topology& topo,
                       const CostParams& cp, const PairCounts& pairs);

// Effective steady-state bandwidth of every arc a schedule keeps busy,
// taking port/NIC sharing into account (iteration 0 usage). Used to compare
// decomposition schemes on multi-node topologies.
struct LinkBandwidthReport {
  double min_intra = 0.0;
  double min_inter = 0.0;   // 0 when no inter-node arc is used
  int intra_arcs = 0;
  int inter_arcs = 0;
};

LinkBandwidthReport effective_link_bandwidth(const Schedule& s, const Topology& topo);

}  // namespace multiring
