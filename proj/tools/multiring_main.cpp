// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: decompose | routing | place | schedule | verify |
// simulate | sweep | report. Exit codes: 0 ok, 2 config error, 3 invariant
// failure, 4 tolerance breach.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "multiring/attention.hpp"
#include "multiring/errors.hpp"
#include "multiring/json_io.hpp"
#include "multiring/pipeline.hpp"
#include "multiring/rng.hpp"
#include "multiring/routing.hpp"

namespace mr = multiring;
using nlohmann::json;

namespace {

std::string joined(const std::string& out_dir, const std::string& name) {
  if (out_dir.empty()) return name;
  std::filesystem::create_directories(out_dir);
  return (std::filesystem::path(out_dir) / name).string();
}

int cmd_decompose(const std::string& topo_arg, const std::string& scheme,
                  const std::string& out) {
  const mr::Topology topo = mr::load_topology_arg(topo_arg);
  const mr::DecompScheme s = mr::scheme_from_string(scheme);
  mr::Decomposition d;
  if (s == mr::DecompScheme::complete) {
    d = mr::decompose_complete(topo.n());
  } else if (topo.num_nodes() < 2) {
    throw mr::ConfigError("scheme '" + scheme + "' needs a multi-node topology");
  } else if (s == mr::DecompScheme::complete_multinode) {
    d = mr::decompose_multinode_flat(topo.ranks_per_node, topo.num_nodes());
  } else {
    d = mr::decompose_multinode(topo.ranks_per_node, topo.num_nodes());
  }
  const mr::VerificationReport rep = mr::verify_decomposition(d, topo);
  if (!rep.all_ok) {
    std::cerr << "decomposition verification failed\n";
    for (const auto& f : rep.failures) std::cerr << "  " << f << "\n";
    return mr::kExitInvariant;
  }
  mr::save_json(out, mr::decomposition_to_json(d));
  std::cout << "wrote " << out << ": " << d.num_rings() << " rings, coverage "
            << rep.coverage << "\n";
  return mr::kExitOk;
}

int cmd_verify(const std::string& sched_path, const std::string& place_path,
               std::int64_t seqlen, int heads, int dim, const std::string& mask_name,
               std::uint64_t seed, double tolerance, const std::string& out) {
  const mr::Schedule sched = mr::schedule_from_json(mr::load_json(sched_path));
  const mr::Placement place =
      place_path.empty() ? sched.placement
                         : mr::placement_from_json(mr::load_json(place_path));
  const mr::MaskKind mask = mr::mask_from_string(mask_name);
  if (seqlen == 0) seqlen = place.seqlen();
  if (seqlen != place.seqlen()) {
    throw mr::ConfigError("--seqlen disagrees with the placement file");
  }

  if (const mr::CheckResult r = mr::check_accessibility(sched); !r.ok) {
    std::cerr << "accessibility failed: " << r.witness << "\n";
    return mr::kExitInvariant;
  }
  if (const mr::CheckResult r = mr::check_zero_copy(sched); !r.ok) {
    std::cerr << "zero-copy failed: " << r.witness << "\n";
    return mr::kExitInvariant;
  }

  const mr::AttnTensors tensors = mr::AttnTensors::random(seqlen, heads, dim, seed);
  const std::vector<float> reference = mr::reference_attention(tensors, mask);
  const std::vector<float> result = mr::exec_schedule(sched, place, tensors, mask);
  const double err = mr::max_relative_error(result, reference);

  const mr::PairCounts pairs = mr::count_flops(sched, place, mask);
  std::printf("max_rel_err %.3e (tolerance %.1e)\n", err, tolerance);
  std::printf("load balance per iteration (pairs per rank):\n");
  for (std::size_t k = 0; k < pairs.pairs.size(); ++k) {
    std::printf("  iter %2zu [%s]:", k, pairs.balanced_at(static_cast<int>(k)) ? "=" : "!");
    for (const std::uint64_t v : pairs.pairs[k]) std::printf(" %llu", static_cast<unsigned long long>(v));
    std::printf("\n");
  }
  if (!out.empty()) {
    mr::save_json(out, json{{"rng", mr::kRngAlgorithm},
                            {"seed", seed},
                            {"mask", mask_name},
                            {"max_rel_err", err},
                            {"tolerance", tolerance},
                            {"balanced", pairs.balanced()},
                            {"pairs", pairs.pairs}});
  }
  return err <= tolerance ? mr::kExitOk : mr::kExitTolerance;
}

int cmd_simulate(const std::string& topo_arg, const std::string& sched_path,
                 const std::string& baseline_path, const std::string& mask_name,
                 const mr::CostParams& cp, const std::string& out) {
  const mr::Topology topo = mr::load_topology_arg(topo_arg);
  const mr::Schedule sched = mr::schedule_from_json(mr::load_json(sched_path));
  const mr::MaskKind mask = mr::mask_from_string(mask_name);
  const mr::PairCounts pairs = mr::count_flops(sched, sched.placement, mask);
  const mr::RunReport rep = mr::simulate_run(sched, topo, cp, pairs);

  std::ofstream csv(out);
  if (!csv) throw mr::ConfigError("cannot write " + out);
  char buf[200];
  csv << "iter,comm_s,comp_s\n";
  for (std::size_t i = 0; i < rep.comm_s.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.9e,%.9e\n", i, rep.comm_s[i], rep.comp_s[i]);
    csv << buf;
  }
  std::snprintf(buf, sizeof(buf),
                "total,t_comm=%.9e,t_comp=%.9e,t_all_overlap=%.9e,t_all_sum=%.9e,ccr=%.9e",
                rep.t_comm, rep.t_comp, rep.t_all_overlap, rep.t_all_sum, rep.ccr);
  csv << buf;
  if (!baseline_path.empty()) {
    const mr::Schedule base = mr::schedule_from_json(mr::load_json(baseline_path));
    const mr::PairCounts bp = mr::count_flops(base, base.placement, mask);
    const mr::RunReport brep = mr::simulate_run(base, topo, cp, bp);
    std::snprintf(buf, sizeof(buf), ",speedup_vs_baseline=%.9e",
                  brep.t_all_overlap / rep.t_all_overlap);
    csv << buf;
  }
  csv << "\n";
  std::cout << "wrote " << out << " (t_comm " << rep.t_comm << " s, t_comp "
            << rep.t_comp << " s, ccr " << rep.ccr << ")\n";
  return mr::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamiltonian-decomposition ring schedules for sequence-parallel attention"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir;
  std::uint64_t seed = 1;
  std::string format = "json";
  app.add_option("--out-dir", out_dir, "directory for output artifacts");
  app.add_option("--seed", seed, "PRNG seed (" + std::string(mr::kRngAlgorithm) + ")");
  app.add_option("--format", format, "artifact format")->check(CLI::IsMember({"json", "csv"}));

  // decompose
  auto* dec = app.add_subcommand("decompose", "build ring datapaths for a topology");
  std::string topo_arg = "mi300x-like", scheme = "kn", out_file = "decomp.json";
  dec->add_option("--topo", topo_arg, "topology preset or file");
  dec->add_option("--scheme", scheme, "kn|flat|linked");
  dec->add_option("--out", out_file, "output file");

  // routing
  auto* rout = app.add_subcommand("routing", "precompute in/out ring mappings");
  std::string decomp_path = "decomp.json", routing_out = "routing.json";
  rout->add_option("--decomp", decomp_path, "decomposition file")->required();
  rout->add_option("--out", routing_out, "output file");

  // place
  auto* plc = app.add_subcommand("place", "token-range placement");
  std::string strategy = "zigzag-tasp", place_out = "place.json";
  std::int64_t seqlen = 224;
  int ranks = 8, rings = -1;
  plc->add_option("--strategy", strategy, "naive|zigzag-ring|zigzag-tasp");
  plc->add_option("--seqlen", seqlen, "sequence length (tokens)")->required();
  plc->add_option("--ranks", ranks, "rank count")->required();
  plc->add_option("--rings", rings, "ring count (zigzag-tasp; default ranks-1)");
  plc->add_option("--out", place_out, "output file");

  // schedule
  auto* sch = app.add_subcommand("schedule", "per-iteration transfer/compute plan");
  std::string sched_decomp, sched_place, sched_out = "sched.json";
  std::int64_t bytes_per_token = 0;
  sch->add_option("--decomp", sched_decomp, "decomposition file (multiring)");
  sch->add_option("--place", sched_place, "placement file")->required();
  sch->add_option("--bytes-per-token", bytes_per_token, "bytes per token (default 2*H*Dh*4 for H=2, Dh=16)");
  sch->add_option("--out", sched_out, "output file");

  // verify
  auto* ver = app.add_subcommand("verify", "numeric equivalence vs the attention oracle");
  std::string ver_sched, ver_place, ver_mask = "full", ver_out;
  std::int64_t ver_seqlen = 0;
  int heads = 2, dim = 16;
  double tolerance = 1e-4;
  ver->add_option("--sched", ver_sched, "schedule file")->required();
  ver->add_option("--place", ver_place, "placement file (defaults to the one embedded in the schedule)");
  ver->add_option("--seqlen", ver_seqlen, "sequence length (defaults to placement's)");
  ver->add_option("--heads", heads, "attention heads");
  ver->add_option("--dim", dim, "head dimension");
  ver->add_option("--mask", ver_mask, "full|causal");
  ver->add_option("--tolerance", tolerance, "max relative error allowed");
  ver->add_option("--out", ver_out, "optional JSON report");

  // simulate
  auto* sim = app.add_subcommand("simulate", "cost-model latency prediction");
  std::string sim_topo = "mi300x-like", sim_sched, sim_baseline, sim_mask = "full",
              sim_out = "report.csv";
  mr::CostParams cp;
  cp.flops_per_pair = mr::default_flops_per_pair(16);
  cp.compute_rate = 1e12;
  sim->add_option("--topo", sim_topo, "topology preset or file");
  sim->add_option("--sched", sim_sched, "schedule file")->required();
  sim->add_option("--baseline", sim_baseline, "baseline schedule for speedup");
  sim->add_option("--mask", sim_mask, "full|causal (for compute pair counts)");
  sim->add_option("--bytes-per-token", cp.bytes_per_token, "unused if schedule has bytes");
  sim->add_option("--flops-per-pair", cp.flops_per_pair, "flops per admitted (q,k) pair");
  sim->add_option("--compute-rate", cp.compute_rate, "flops/sec");
  sim->add_option("--alpha", cp.alpha, "fixed per-iteration comm overhead (s)");
  sim->add_option("--out", sim_out, "output CSV");

  // report (full pipeline) and sweep share the experiment flags
  mr::ExperimentConfig cfg;
  auto add_experiment_flags = [&](CLI::App* cmd) {
    cmd->add_option("--topo", cfg.topo, "topology preset or file");
    cmd->add_option("--scheme", cfg.scheme, "kn|flat|linked");
    cmd->add_option("--strategy", cfg.strategy, "placement under test");
    cmd->add_option("--seqlen", cfg.seqlen, "sequence length");
    cmd->add_option("--heads", cfg.heads, "attention heads");
    cmd->add_option("--dim", cfg.head_dim, "head dimension");
    cmd->add_option("--batch", cfg.batch, "independent sequences");
    cmd->add_option("--mask", cfg.mask, "full|causal");
    cmd->add_option("--flops-per-pair", cfg.flops_per_pair, "flops per (q,k) pair");
    cmd->add_option("--compute-rate", cfg.compute_rate, "flops/sec");
    cmd->add_option("--alpha", cfg.alpha, "per-iteration comm overhead (s)");
    cmd->add_option("--bytes-per-token", cfg.bytes_per_token, "bytes per token");
    cmd->add_option("--tolerance", cfg.tolerance, "numeric tolerance");
  };
  auto* rep = app.add_subcommand("report", "run the full pipeline and write all artifacts");
  add_experiment_flags(rep);

  auto* swp = app.add_subcommand("sweep", "evaluate a CCR grid, one CSV row per config");
  std::vector<double> ccr_grid;
  std::string sweep_out = "sweep.csv";
  add_experiment_flags(swp);
  swp->add_option("--ccr", ccr_grid, "baseline CCR targets");
  swp->add_option("--out", sweep_out, "output CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (dec->parsed()) return cmd_decompose(topo_arg, scheme, joined(out_dir, out_file));
    if (rout->parsed()) {
      const mr::Decomposition d = mr::decomposition_from_json(mr::load_json(decomp_path));
      mr::save_json(joined(out_dir, routing_out), mr::routing_to_json(mr::make_routing(d)));
      std::cout << "wrote " << joined(out_dir, routing_out) << "\n";
      return mr::kExitOk;
    }
    if (plc->parsed()) {
      const mr::PlacementStrategy s = mr::strategy_from_string(strategy);
      mr::Placement p;
      if (s == mr::PlacementStrategy::naive) p = mr::place_naive(seqlen, ranks);
      else if (s == mr::PlacementStrategy::zigzag_ring) p = mr::place_zigzag_ring(seqlen, ranks);
      else p = mr::place_zigzag_tasp(seqlen, ranks, rings);
      mr::save_json(joined(out_dir, place_out), mr::placement_to_json(p));
      std::cout << "wrote " << joined(out_dir, place_out) << "\n";
      return mr::kExitOk;
    }
    if (sch->parsed()) {
      const mr::Placement p = mr::placement_from_json(mr::load_json(sched_place));
      if (bytes_per_token <= 0) bytes_per_token = mr::default_bytes_per_token(2, 16);
      mr::Schedule s;
      if (p.strategy() == mr::PlacementStrategy::zigzag_tasp) {
        if (sched_decomp.empty()) {
          throw mr::ConfigError("--decomp is required for a zigzag-tasp placement");
        }
        const mr::Decomposition d =
            mr::decomposition_from_json(mr::load_json(sched_decomp));
        s = mr::build_multiring_schedule(d, p, bytes_per_token);
      } else {
        s = mr::build_ring_schedule(p.n(), p, bytes_per_token);
      }
      mr::save_json(joined(out_dir, sched_out), mr::schedule_to_json(s));
      std::cout << "wrote " << joined(out_dir, sched_out) << " ("
                << mr::to_string(s.kind) << ", " << s.num_iterations() << " iterations)\n";
      return mr::kExitOk;
    }
    if (ver->parsed()) {
      return cmd_verify(ver_sched, ver_place, ver_seqlen, heads, dim, ver_mask, seed,
                        tolerance, ver_out.empty() ? "" : joined(out_dir, ver_out));
    }
    if (sim->parsed()) {
      return cmd_simulate(sim_topo, sim_sched, sim_baseline, sim_mask, cp,
                          joined(out_dir, sim_out));
    }
    if (rep->parsed()) {
      cfg.seed = seed;
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      const int rc = mr::run_pipeline(cfg, std::cout);
      const auto summary_path = std::filesystem::path(cfg.out_dir) / "summary.json";
      if (std::filesystem::exists(summary_path)) {
        const json summary = mr::load_json(summary_path.string());
        if (format == "csv") {
          std::printf("n,num_rings,speedup_comm,speedup_overlap,speedup_sum,max_rel_err\n");
          std::printf("%d,%d,%.9e,%.9e,%.9e,%.9e\n", summary.at("n").get<int>(),
                      summary.at("num_rings").get<int>(),
                      summary.at("speedup_comm").get<double>(),
                      summary.at("speedup_overlap").get<double>(),
                      summary.at("speedup_sum").get<double>(),
                      summary.at("max_rel_err").get<double>());
        } else {
          std::cout << summary.dump(2) << "\n";
        }
      }
      return rc;
    }
    if (swp->parsed()) {
      cfg.seed = seed;
      const std::vector<mr::ExperimentConfig> grid =
          ccr_grid.empty() ? std::vector<mr::ExperimentConfig>{}
                           : mr::sweep_over_ccr(cfg, ccr_grid);
      return mr::run_sweep(grid, joined(out_dir, sweep_out), std::cout);
    }
  } catch (const mr::ScheduleIntegrityError& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return mr::kExitInvariant;
  } catch (const mr::ArcConflictError& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return mr::kExitInvariant;
  } catch (const mr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mr::kExitConfig;
  } catch (const std::exception& e) {
    // malformed input files and the like
    std::cerr << "error: " << e.what() << "\n";
    return mr::kExitConfig;
  }
  return mr::kExitConfig;
}
