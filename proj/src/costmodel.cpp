// SPDX-License-Identifier: Apache-2.0

#include "multiring/costmodel.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "multiring/errors.hpp"

namespace multiring {

namespace {

struct ArcLoads {
  // bytes per arc, keyed src * n + dst
  std::unordered_map<std::int64_t, std::int64_t> arc_bytes;
  std::vector<std::int64_t> egress_intra, ingress_intra;
  std::vector<std::int64_t> egress_inter, ingress_inter;
};

ArcLoads gather_loads(const std::vector<Transfer>& transfers, const Topology& topo) {
  const int n = topo.n();
  ArcLoads loads;
  loads.egress_intra.assign(n, 0);
  loads.ingress_intra.assign(n, 0);
  loads.egress_inter.assign(n, 0);
  loads.ingress_inter.assign(n, 0);
  for (const Transfer& t : transfers) {
    if (t.src < 0 || t.src >= n || t.dst < 0 || t.dst >= n ||
        !topo.has_arc(t.src, t.dst)) {
      throw ConfigError("transfer on a nonexistent arc (" + std::to_string(t.src) +
                        "->" + std::to_string(t.dst) + ")");
    }
    loads.arc_bytes[static_cast<std::int64_t>(t.src) * n + t.dst] += t.bytes;
    if (topo.node_of(t.src) == topo.node_of(t.dst)) {
      loads.egress_intra[t.src] += t.bytes;
      loads.ingress_intra[t.dst] += t.bytes;
    } else {
      loads.egress_inter[t.src] += t.bytes;
      loads.ingress_inter[t.dst] += t.bytes;
    }
  }
  return loads;
}

}  // namespace

double comm_time(const std::vector<Transfer>& transfers, const Topology& topo,
                 const CostParams& cp) {
  if (transfers.empty()) return 0.0;
  const ArcLoads loads = gather_loads(transfers, topo);
  const int n = topo.n();
  double worst = 0.0;

  if (topo.capacity.kind == CapacityKind::per_link) {
    for (const auto& [arc, bytes] : loads.arc_bytes) {
      const int src = static_cast<int>(arc / n);
      const int dst = static_cast<int>(arc % n);
      if (topo.node_of(src) == topo.node_of(dst)) {
        worst = std::max(worst, static_cast<double>(bytes) / topo.capacity.intra_bw);
      }
    }
  } else {
    // Each node's aggregate is divided across its ranks' ports on demand.
    const double port = topo.capacity.intra_bw / topo.ranks_per_node;
    for (int r = 0; r < n; ++r) {
      worst = std::max(worst, loads.egress_intra[r] / port);
      worst = std::max(worst, loads.ingress_intra[r] / port);
    }
  }
  if (topo.capacity.inter_nic_bw > 0) {
    for (int r = 0; r < n; ++r) {
      worst = std::max(worst, loads.egress_inter[r] / topo.capacity.inter_nic_bw);
      worst = std::max(worst, loads.ingress_inter[r] / topo.capacity.inter_nic_bw);
    }
  } else {
    for (int r = 0; r < n; ++r) {
      if (loads.egress_inter[r] > 0 || loads.ingress_inter[r] > 0) {
        throw ConfigError("inter-node transfer on a topology without NICs");
      }
    }
  }
  return cp.alpha + worst;
}

double comp_time(std::uint64_t pairs, const CostParams& cp) {
  if (pairs == 0) return 0.0;
  if (cp.compute_rate <= 0) throw ConfigError("compute_rate must be positive");
  return static_cast<double>(pairs) * cp.flops_per_pair / cp.compute_rate;
}

RunReport simulate_run(const Schedule& s, const Topology& topo,
                       const CostParams& cp, const PairCounts& pairs) {
  if (static_cast<int>(pairs.pairs.size()) != s.num_iterations()) {
    throw ConfigError("pair counts do not match schedule iterations");
  }
  RunReport rep;
  const double total_arcs = static_cast<double>(topo.links.size());
  std::map<std::pair<int, int>, std::int64_t> loads;
  for (int k = 0; k < s.num_iterations(); ++k) {
    const auto& transfers = s.iterations[k].transfers;
    rep.comm_s.push_back(comm_time(transfers, topo, cp));

    std::uint64_t busiest = 0;
    for (const std::uint64_t v : pairs.pairs[k]) busiest = std::max(busiest, v);
    rep.comp_s.push_back(comp_time(busiest, cp));

    std::set<std::pair<int, int>> used;
    for (const Transfer& t : transfers) {
      used.insert({t.src, t.dst});
      loads[{t.src, t.dst}] += t.bytes;
    }
    rep.link_utilization.push_back(total_arcs == 0 ? 0.0 : used.size() / total_arcs);
  }
  for (const auto& [arc, bytes] : loads) {
    rep.link_bytes.push_back(LinkLoad{arc.first, arc.second, bytes});
  }
  for (double v : rep.comm_s) rep.t_comm += v;
  for (double v : rep.comp_s) rep.t_comp += v;
  for (int k = 0; k < s.num_iterations(); ++k) {
    rep.t_all_overlap += std::max(rep.comm_s[k], rep.comp_s[k]);
  }
  rep.t_all_sum = rep.t_comm + rep.t_comp;
  rep.ccr = rep.t_comm > 0 ? rep.t_comp / rep.t_comm
                           : std::numeric_limits<double>::infinity();
  return rep;
}

LinkBandwidthReport effective_link_bandwidth(const Schedule& s, const Topology& topo) {
  LinkBandwidthReport rep;
  if (s.iterations.empty()) return rep;
  const int n = topo.n();
  const auto& transfers = s.iterations.front().transfers;

  std::set<std::pair<int, int>> arcs;
  std::vector<int> egress_intra(n, 0), ingress_intra(n, 0);
  std::vector<int> egress_inter(n, 0), ingress_inter(n, 0);
  for (const Transfer& t : transfers) {
    if (!arcs.insert({t.src, t.dst}).second) continue;
    if (topo.node_of(t.src) == topo.node_of(t.dst)) {
      ++egress_intra[t.src];
      ++ingress_intra[t.dst];
    } else {
      ++egress_inter[t.src];
      ++ingress_inter[t.dst];
    }
  }

  double min_intra = std::numeric_limits<double>::infinity();
  double min_inter = std::numeric_limits<double>::infinity();
  for (const auto& [src, dst] : arcs) {
    if (topo.node_of(src) == topo.node_of(dst)) {
      double bw;
      if (topo.capacity.kind == CapacityKind::per_link) {
        bw = topo.capacity.intra_bw;
      } else {
        const double port = topo.capacity.intra_bw / topo.ranks_per_node;
        bw = std::min(port / egress_intra[src], port / ingress_intra[dst]);
      }
      min_intra = std::min(min_intra, bw);
      ++rep.intra_arcs;
    } else {
      const double nic = topo.capacity.inter_nic_bw;
      const double bw = std::min(nic / egress_inter[src], nic / ingress_inter[dst]);
      min_inter = std::min(min_inter, bw);
      ++rep.inter_arcs;
    }
  }
  rep.min_intra = rep.intra_arcs ? min_intra : 0.0;
  rep.min_inter = rep.inter_arcs ? min_inter : 0.0;
  return rep;
}

}  // namespace multiring
