// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "multiring/decompose.hpp"
#include "multiring/placement.hpp"

namespace multiring {

// Identity of one circulating KV chunk: the ring it rides, the rank it
// started on, and (under zigzag_tasp) which mirrored half it is.
struct ChunkId {
  int ring = 0;
  int origin = 0;
  int half = 0;

  auto operator<=>(const ChunkId&) const = default;
};

struct Transfer {
  ChunkId chunk;
  int src = 0;
  int dst = 0;
  std::int64_t bytes = 0;
};

struct IterationPlan {
  std::vector<Transfer> transfers;               // empty on the last iteration
  std::vector<std::vector<ChunkId>> resident;    // per rank, ring-ascending
};

enum class ScheduleKind { ring, multiring };

// Per-iteration transfer and compute sets for every rank. Iteration k lists
// the chunks computable at k and the transfers that make them computable at
// k+1 (double-buffered receive, swap after the compute). Immutable once
// built; all ordering is encoded here, so execution is deterministic
// regardless of executor parallelism.
struct Schedule {
  ScheduleKind kind = ScheduleKind::ring;
  int n = 0;
  int num_rings = 1;
  std::int64_t bytes_per_token = 0;
  Placement placement;
  std::vector<IterationPlan> iterations;

  int num_iterations() const { return static_cast<int>(iterations.size()); }
};

// Baseline Ring AllGather: one chunk per rank; at iteration k rank r computes
// against the chunk originated at (r-k) mod n, then sends it to (r+1) mod n.
// Placement must be naive or zigzag_ring.
Schedule build_ring_schedule(int n, const Placement& p, std::int64_t bytes_per_token);

// Multi-Ring AllGather: chunk (i, j) starts at rank j and advances one hop
// along ring i every transfer iteration; all rings move simultaneously, so a
// perfect decomposition keeps every topology link busy every iteration.
// Placement must be zigzag_tasp with one chunk pair per (ring, rank).
Schedule build_multiring_schedule(const Decomposition& d, const Placement& p,
                                  std::int64_t bytes_per_token);

struct CheckResult {
  bool ok = false;
  std::string witness;  // first offending (rank, chunk, count) when !ok

  explicit operator bool() const { return ok; }
};

// Replays the transfers from each chunk's origin and confirms every
// (rank, chunk) pair co-resides at exactly one compute iteration.
CheckResult check_accessibility(const Schedule& s);

// Replays the transfers and confirms each chunk lives on exactly one rank at
// every iteration (no duplication, no loss).
CheckResult check_zero_copy(const Schedule& s);

std::string to_string(ScheduleKind k);
ScheduleKind schedule_kind_from_string(const std::string& s);

}  // namespace multiring
