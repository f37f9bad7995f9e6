// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "multiring/placement.hpp"
#include "multiring/schedule.hpp"

namespace multiring {

enum class MaskKind { full, causal };

// Dense [S, H, Dh] f32 tensors, row-major; token indices are global.
struct AttnTensors {
  std::int64_t S = 0;
  int H = 0;
  int Dh = 0;
  std::vector<float> q, k, v;

  // Deterministic fill from the counter-based generator; streams 3b+0/1/2
  // hold q/k/v of batch element b.
  static AttnTensors random(std::int64_t S, int H, int Dh, std::uint64_t seed,
                            int batch_index = 0);

  const float* q_at(std::int64_t s, int h) const { return &q[(s * H + h) * Dh]; }
  const float* k_at(std::int64_t s, int h) const { return &k[(s * H + h) * Dh]; }
  const float* v_at(std::int64_t s, int h) const { return &v[(s * H + h) * Dh]; }
};

// Partial attention state for a block of query rows: normalized output plus
// per-row log-sum-exp. Rows with no unmasked key carry lse = -inf, out = 0.
struct PartialOut {
  std::int64_t rows = 0;
  int H = 0;
  int Dh = 0;
  std::vector<double> out;  // [rows, H, Dh]
  std::vector<double> lse;  // [rows, H]

  static PartialOut empty(std::int64_t rows, int H, int Dh);
};

// Direct, unblocked softmax attention over all S keys; the oracle every
// schedule execution is checked against. f64 accumulation, f32 result.
std::vector<float> reference_attention(const AttnTensors& t, MaskKind mask);

// Exact softmax attention of the given query rows over the supplied keys
// only. Token indices are global so causal masking is position-correct.
PartialOut block_attention(const AttnTensors& t,
                           const std::vector<std::int64_t>& q_tokens,
                           const std::vector<std::int64_t>& k_tokens,
                           MaskKind mask);

// Numerically stable combination of two partial results over the same rows:
// lse' = log(exp(a.lse) + exp(b.lse)) (max-shifted), outputs reweighted.
// The -inf partial is the identity element.
PartialOut merge_lse(const PartialOut& a, const PartialOut& b);

// Runs a schedule at desk scale: every compute iteration each rank
// concatenates its resident KV chunks in ring order, attends its stationary
// Q rows against them, and folds the block into its accumulator via
// merge_lse. Transfers are replayed and cross-checked against the stored
// compute sets (ScheduleIntegrityError on disagreement). Output is scattered
// back to global token order, [S, H, Dh].
std::vector<float> exec_schedule(const Schedule& s, const Placement& p,
                                 const AttnTensors& t, MaskKind mask);

// Exact per-rank, per-iteration counts of mask-admitted (q, k) token pairs.
struct PairCounts {
  int n = 0;
  std::vector<std::vector<std::uint64_t>> pairs;  // [iteration][rank]

  bool balanced_at(int iteration) const;
  bool balanced() const;
  std::uint64_t total() const;
};

PairCounts count_flops(const Schedule& s, const Placement& p, MaskKind mask);

// Admitted pairs between a query range and a key range in closed form.
std::uint64_t admitted_pairs(const TokenRange& q, const TokenRange& k, MaskKind mask);

// max_i |a_i - b_i| / max(|b_i|, floor); b is the reference.
double max_relative_error(const std::vector<float>& a, const std::vector<float>& b,
                          double floor = 1e-6);

MaskKind mask_from_string(const std::string& s);
std::string to_string(MaskKind m);

}  // namespace multiring
