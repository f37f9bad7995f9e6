// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "multiring/costmodel.hpp"

namespace multiring {

// Exit codes shared by the pipeline and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInvariant = 3;
inline constexpr int kExitTolerance = 4;

struct ExperimentConfig {
  std::string topo = "mi300x-like";      // preset, alias, or topology file
  std::string scheme = "kn";             // kn | flat | linked
  std::string strategy = "zigzag-tasp";  // placement under test
  std::int64_t seqlen = 224;
  int heads = 2;
  int head_dim = 16;
  int batch = 1;
  std::string mask = "causal";
  double flops_per_pair = 0.0;           // 0 -> 4*Dh + 8 (qk dot, exp, pv)
  double compute_rate = 1e12;
  double alpha = 0.0;
  std::int64_t bytes_per_token = 0;      // 0 -> 2 * H * Dh * sizeof(float)
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  double tolerance = 1e-4;
};

// Cost/verification metrics of one config, without tensors or disk output.
struct EvalResult {
  int n = 0;
  int num_rings = 0;
  bool has_multiring = false;
  RunReport baseline;
  RunReport multiring;
  double ccr_baseline = 0.0;
  double speedup_comm = 1.0;
  double speedup_overlap = 1.0;
  double speedup_sum = 1.0;
  bool load_balanced = false;            // multiring pair counts equal per iter
  LinkBandwidthReport link_bw;           // of the multiring schedule
};

// Builds decomposition, placements, both schedules and cost reports for one
// config; throws on config errors and invariant failures.
EvalResult evaluate_config(const ExperimentConfig& cfg);

// Full artifact run: decompose -> route -> place -> schedule -> verify
// (structure, accessibility, zero-copy, load balance, numeric equivalence)
// -> cost model. Writes JSON/CSV artifacts under cfg.out_dir and returns an
// exit code; any invariant failure makes performance output unreachable.
int run_pipeline(const ExperimentConfig& cfg, std::ostream& log);

// One CSV row per config, deterministic ordering. Returns an exit code.
int run_sweep(const std::vector<ExperimentConfig>& grid, const std::string& csv_path,
              std::ostream& log);

// Expands a base config into one config per CCR^B target by fixing the
// compute rate so the baseline's compute-to-communication ratio hits the
// target exactly.
std::vector<ExperimentConfig> sweep_over_ccr(const ExperimentConfig& base,
                                             const std::vector<double>& ccr_targets);

std::int64_t default_bytes_per_token(int heads, int head_dim);
double default_flops_per_pair(int head_dim);

}  // namespace multiring
