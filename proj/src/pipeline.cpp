// SPDX-License-Identifier: Apache-2.0

#include "multiring/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "multiring/attention.hpp"
#include "multiring/errors.hpp"
#include "multiring/json_io.hpp"
#include "multiring/rng.hpp"
#include "multiring/routing.hpp"

namespace multiring {

namespace fs = std::filesystem;
using nlohmann::json;

std::int64_t default_bytes_per_token(int heads, int head_dim) {
  // stacked K+V, f32
  return 2LL * heads * head_dim * static_cast<std::int64_t>(sizeof(float));
}

double default_flops_per_pair(int head_dim) {
  // q.k dot (2*Dh), exp + max + divide (~4), p.v accumulate (2*Dh)
  return 4.0 * head_dim + 4.0;
}

namespace {

struct BuiltExperiment {
  Topology topo;
  Decomposition decomp;
  Placement baseline_placement;
  Schedule baseline;
  std::optional<Placement> multiring_placement;
  std::optional<Schedule> multiring;
  MaskKind mask = MaskKind::full;
  CostParams cost;
};

// An invariant failed; maps to kExitInvariant at the CLI boundary.
class InvariantFailure : public Error {
 public:
  using Error::Error;
};

BuiltExperiment build_experiment(const ExperimentConfig& cfg) {
  BuiltExperiment b;
  b.topo = load_topology_arg(cfg.topo);
  b.mask = mask_from_string(cfg.mask);

  const int n = b.topo.n();
  const int m = b.topo.ranks_per_node;
  const int u = b.topo.num_nodes();
  const DecompScheme scheme = scheme_from_string(cfg.scheme);
  if (scheme == DecompScheme::complete) {
    b.decomp = decompose_complete(n);
  } else if (u < 2) {
    throw ConfigError("scheme '" + cfg.scheme + "' needs a multi-node topology");
  } else if (scheme == DecompScheme::complete_multinode) {
    b.decomp = decompose_multinode_flat(m, u);
  } else {
    b.decomp = decompose_multinode(m, u);
  }

  const VerificationReport vrep = verify_decomposition(b.decomp, b.topo);
  if (!vrep.all_ok) {
    throw InvariantFailure("decomposition verification failed: " +
                           (vrep.failures.empty() ? "unknown" : vrep.failures.front()));
  }

  const std::int64_t bpt =
      cfg.bytes_per_token > 0 ? cfg.bytes_per_token
                              : default_bytes_per_token(cfg.heads, cfg.head_dim);

  b.baseline_placement = b.mask == MaskKind::causal
                             ? place_zigzag_ring(cfg.seqlen, n)
                             : place_naive(cfg.seqlen, n);
  b.baseline = build_ring_schedule(n, b.baseline_placement, bpt);

  const PlacementStrategy strategy = strategy_from_string(cfg.strategy);
  if (strategy == PlacementStrategy::zigzag_tasp) {
    b.multiring_placement = place_zigzag_tasp(cfg.seqlen, n, b.decomp.num_rings());
    b.multiring = build_multiring_schedule(b.decomp, *b.multiring_placement, bpt);
  } else if (strategy == PlacementStrategy::naive) {
    b.baseline_placement = place_naive(cfg.seqlen, n);
    b.baseline = build_ring_schedule(n, b.baseline_placement, bpt);
  } else {
    b.baseline_placement = place_zigzag_ring(cfg.seqlen, n);
    b.baseline = build_ring_schedule(n, b.baseline_placement, bpt);
  }

  b.cost.bytes_per_token = static_cast<double>(bpt);
  b.cost.flops_per_pair = cfg.flops_per_pair > 0 ? cfg.flops_per_pair
                                                 : default_flops_per_pair(cfg.head_dim);
  b.cost.compute_rate = cfg.compute_rate;
  b.cost.alpha = cfg.alpha;
  return b;
}

void require_schedule_invariants(const Schedule& s, const char* name) {
  if (const CheckResult r = check_accessibility(s); !r.ok) {
    throw InvariantFailure(std::string(name) + " accessibility: " + r.witness);
  }
  if (const CheckResult r = check_zero_copy(s); !r.ok) {
    throw InvariantFailure(std::string(name) + " zero-copy: " + r.witness);
  }
}

EvalResult evaluate_built(const BuiltExperiment& b) {
  EvalResult r;
  r.n = b.topo.n();
  r.num_rings = b.decomp.num_rings();

  require_schedule_invariants(b.baseline, "baseline");
  const PairCounts base_pairs = count_flops(b.baseline, b.baseline_placement, b.mask);
  r.baseline = simulate_run(b.baseline, b.topo, b.cost, base_pairs);
  r.ccr_baseline = r.baseline.ccr;

  if (b.multiring) {
    r.has_multiring = true;
    require_schedule_invariants(*b.multiring, "multiring");
    const PairCounts multi_pairs =
        count_flops(*b.multiring, *b.multiring_placement, b.mask);
    r.load_balanced = multi_pairs.balanced();
    if (b.mask == MaskKind::causal && !r.load_balanced) {
      throw InvariantFailure("zigzag_tasp causal load balance violated");
    }
    r.multiring = simulate_run(*b.multiring, b.topo, b.cost, multi_pairs);
    r.link_bw = effective_link_bandwidth(*b.multiring, b.topo);
    r.speedup_comm = r.baseline.t_comm / r.multiring.t_comm;
    r.speedup_overlap = r.baseline.t_all_overlap / r.multiring.t_all_overlap;
    r.speedup_sum = r.baseline.t_all_sum / r.multiring.t_all_sum;
  } else {
    r.multiring = r.baseline;
    r.link_bw = effective_link_bandwidth(b.baseline, b.topo);
  }
  return r;
}

json run_report_to_json(const RunReport& r) {
  json loads = json::array();
  for (const LinkLoad& l : r.link_bytes) {
    loads.push_back({{"src", l.src}, {"dst", l.dst}, {"bytes", l.bytes}});
  }
  return json{{"t_comm", r.t_comm},
              {"t_comp", r.t_comp},
              {"t_all_overlap", r.t_all_overlap},
              {"t_all_sum", r.t_all_sum},
              {"ccr", r.ccr},
              {"comm_s", r.comm_s},
              {"comp_s", r.comp_s},
              {"link_utilization", r.link_utilization},
              {"link_bytes", loads}};
}

void write_cost_csv(const std::string& path, const RunReport& rep,
                    const RunReport* baseline) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  char buf[160];
  out << "iter,comm_s,comp_s\n";
  for (std::size_t i = 0; i < rep.comm_s.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.9e,%.9e\n", i, rep.comm_s[i], rep.comp_s[i]);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf),
                "total,t_comm=%.9e,t_comp=%.9e,t_all_overlap=%.9e,t_all_sum=%.9e,ccr=%.9e",
                rep.t_comm, rep.t_comp, rep.t_all_overlap, rep.t_all_sum, rep.ccr);
  out << buf;
  if (baseline) {
    std::snprintf(buf, sizeof(buf), ",speedup_vs_baseline=%.9e",
                  baseline->t_all_overlap / rep.t_all_overlap);
    out << buf;
  }
  out << "\n";
}

}  // namespace

EvalResult evaluate_config(const ExperimentConfig& cfg) {
  return evaluate_built(build_experiment(cfg));
}

int run_pipeline(const ExperimentConfig& cfg, std::ostream& log) {
  try {
    const BuiltExperiment b = build_experiment(cfg);
    fs::create_directories(cfg.out_dir);
    const auto path = [&](const char* name) {
      return (fs::path(cfg.out_dir) / name).string();
    };

    save_json(path("topology.json"), topology_to_json(b.topo));
    save_json(path("decomposition.json"), decomposition_to_json(b.decomp));
    save_json(path("routing.json"), routing_to_json(make_routing(b.decomp)));

    const VerificationReport vrep = verify_decomposition(b.decomp, b.topo);
    save_json(path("verification.json"),
              json{{"all_ok", vrep.all_ok},
                   {"arc_disjoint", vrep.arc_disjoint},
                   {"coverage", vrep.coverage},
                   {"ring_hamiltonian", vrep.ring_hamiltonian},
                   {"nic_out", vrep.nic_out},
                   {"nic_in", vrep.nic_in},
                   {"failures", vrep.failures}});

    save_json(path("placement_baseline.json"), placement_to_json(b.baseline_placement));
    save_json(path("schedule_baseline.json"), schedule_to_json(b.baseline));
    if (b.multiring) {
      save_json(path("placement.json"), placement_to_json(*b.multiring_placement));
      save_json(path("schedule.json"), schedule_to_json(*b.multiring));
    }

    const EvalResult eval = evaluate_built(b);

    // Numeric equivalence of every built schedule against the direct oracle.
    json combos = json::array();
    double worst = 0.0;
    for (int batch = 0; batch < cfg.batch; ++batch) {
      const AttnTensors tensors =
          AttnTensors::random(cfg.seqlen, cfg.heads, cfg.head_dim, cfg.seed, batch);
      const std::vector<float> reference = reference_attention(tensors, b.mask);
      const double err_base = max_relative_error(
          exec_schedule(b.baseline, b.baseline_placement, tensors, b.mask), reference);
      combos.push_back({{"schedule", "ring"},
                        {"batch", batch},
                        {"max_rel_err", err_base},
                        {"pass", err_base <= cfg.tolerance}});
      worst = std::max(worst, err_base);
      if (b.multiring) {
        const double err_multi = max_relative_error(
            exec_schedule(*b.multiring, *b.multiring_placement, tensors, b.mask),
            reference);
        combos.push_back({{"schedule", "multiring"},
                          {"batch", batch},
                          {"max_rel_err", err_multi},
                          {"pass", err_multi <= cfg.tolerance}});
        worst = std::max(worst, err_multi);
      }
    }
    save_json(path("equivalence.json"),
              json{{"rng", kRngAlgorithm},
                   {"seed", cfg.seed},
                   {"mask", cfg.mask},
                   {"tolerance", cfg.tolerance},
                   {"max_rel_err", worst},
                   {"combos", combos}});

    write_cost_csv(path("cost_report.csv"),
                   b.multiring ? eval.multiring : eval.baseline,
                   b.multiring ? &eval.baseline : nullptr);
    save_json(path("summary.json"),
              json{{"n", eval.n},
                   {"num_rings", eval.num_rings},
                   {"mask", cfg.mask},
                   {"scheme", cfg.scheme},
                   {"strategy", cfg.strategy},
                   {"baseline", run_report_to_json(eval.baseline)},
                   {"multiring", run_report_to_json(eval.multiring)},
                   {"speedup_comm", eval.speedup_comm},
                   {"speedup_overlap", eval.speedup_overlap},
                   {"speedup_sum", eval.speedup_sum},
                   {"load_balanced", eval.load_balanced},
                   {"max_rel_err", worst},
                   {"min_intra_bw", eval.link_bw.min_intra},
                   {"min_inter_bw", eval.link_bw.min_inter}});

    if (worst > cfg.tolerance) {
      log << "tolerance breach: max relative error " << worst << " > " << cfg.tolerance
          << "\n";
      return kExitTolerance;
    }
    log << "ok: n=" << eval.n << " rings=" << eval.num_rings
        << " max_rel_err=" << worst << " speedup_comm=" << eval.speedup_comm
        << " speedup_overlap=" << eval.speedup_overlap << "\n";
    return kExitOk;
  } catch (const InvariantFailure& e) {
    log << "invariant failure: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const ScheduleIntegrityError& e) {
    log << "invariant failure: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const ArcConflictError& e) {
    log << "invariant failure: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const Error& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int run_sweep(const std::vector<ExperimentConfig>& grid, const std::string& csv_path,
              std::ostream& log) {
  std::ofstream out(csv_path);
  if (!out) {
    log << "config error: cannot write " << csv_path << "\n";
    return kExitConfig;
  }
  out << "index,topo,scheme,mask,seqlen,heads,head_dim,ccr_baseline,"
         "t_all_baseline,t_all_multiring,speedup_comm,speedup_overlap,speedup_sum\n";
  char buf[256];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const ExperimentConfig& cfg = grid[i];
    try {
      const EvalResult r = evaluate_config(cfg);
      std::snprintf(buf, sizeof(buf),
                    "%zu,%s,%s,%s,%lld,%d,%d,%.9e,%.9e,%.9e,%.9e,%.9e,%.9e\n", i,
                    cfg.topo.c_str(), cfg.scheme.c_str(), cfg.mask.c_str(),
                    static_cast<long long>(cfg.seqlen), cfg.heads, cfg.head_dim,
                    r.ccr_baseline, r.baseline.t_all_overlap,
                    r.multiring.t_all_overlap, r.speedup_comm, r.speedup_overlap,
                    r.speedup_sum);
      out << buf;
    } catch (const Error& e) {
      log << "config " << i << " failed: " << e.what() << "\n";
      return kExitConfig;
    }
  }
  log << "wrote " << csv_path << " (" << grid.size() << " rows)\n";
  return kExitOk;
}

std::vector<ExperimentConfig> sweep_over_ccr(const ExperimentConfig& base,
                                             const std::vector<double>& ccr_targets) {
  // Fix the compute rate per target so the baseline lands exactly on it.
  ExperimentConfig probe = base;
  probe.compute_rate = 1.0;
  const BuiltExperiment b = build_experiment(probe);
  const PairCounts pairs = count_flops(b.baseline, b.baseline_placement, b.mask);
  CostParams unit = b.cost;
  unit.compute_rate = 1.0;
  const RunReport rep = simulate_run(b.baseline, b.topo, unit, pairs);
  // With rate 1, t_comp equals total busy flops; t_comm is rate-independent.
  std::vector<ExperimentConfig> grid;
  for (const double target : ccr_targets) {
    ExperimentConfig cfg = base;
    cfg.compute_rate = rep.t_comp / (target * rep.t_comm);
    grid.push_back(cfg);
  }
  return grid;
}

}  // namespace multiring
