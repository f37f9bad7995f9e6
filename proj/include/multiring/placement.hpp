// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace multiring {

// Half-open global token interval [start, end), 0-based.
struct TokenRange {
  std::int64_t start = 0;
  std::int64_t end = 0;

  std::int64_t tokens() const { return end - start; }
  bool operator==(const TokenRange&) const = default;
};

enum class PlacementStrategy { naive, zigzag_ring, zigzag_tasp };

// Maps global KV token ranges onto (rank, ring, half). naive and zigzag_ring
// use a single pseudo-ring index 0 and half 0 (one chunk per rank, possibly
// two ranges); zigzag_tasp assigns one mirrored range per (rank, ring, half).
// Q placement mirrors the KV placement per rank and never moves.
class Placement {
 public:
  Placement() = default;
  Placement(PlacementStrategy strategy, std::int64_t seqlen, int n, int num_rings);

  PlacementStrategy strategy() const { return strategy_; }
  std::int64_t seqlen() const { return seqlen_; }
  int n() const { return n_; }
  int num_rings() const { return rings_; }
  int num_halves() const { return strategy_ == PlacementStrategy::zigzag_tasp ? 2 : 1; }

  const std::vector<TokenRange>& ranges(int rank, int ring, int half) const;
  std::vector<TokenRange>& mutable_ranges(int rank, int ring, int half);

  // All ranges held by one rank, in (ring, half) order; this is also the Q
  // row order used by the executor.
  std::vector<TokenRange> rank_ranges(int rank) const;
  std::int64_t rank_tokens(int rank) const;
  std::int64_t chunk_tokens(int ring, int origin, int half) const;

 private:
  PlacementStrategy strategy_ = PlacementStrategy::naive;
  std::int64_t seqlen_ = 0;
  int n_ = 0;
  int rings_ = 1;
  // assignments_[((rank * rings_) + ring) * 2 + half]
  std::vector<std::vector<TokenRange>> assignments_;
};

// Rank i holds KV[i*S/n, (i+1)*S/n). Requires n | S.
Placement place_naive(std::int64_t seqlen, int n);

// Rank i holds the mirrored pair KV[i*S/2n, (i+1)*S/2n) u
// KV[(2n-i-1)*S/2n, (2n-i)*S/2n). Requires 2n | S.
Placement place_zigzag_ring(std::int64_t seqlen, int n);

// One mirrored granule pair per (ring, rank): with G = S/(2nR) and
// g = R*j + i, chunk (i, j) holds [gG, (g+1)G) and [S-(g+1)G, S-gG).
// num_rings defaults to n-1 (complete scheme); pass the ring count of the
// decomposition for linked multi-node schemes. Requires 2nR | S.
Placement place_zigzag_tasp(std::int64_t seqlen, int n, int num_rings = -1);

// Q placement for a KV placement: identical ranges per rank, never scheduled
// for transfer.
Placement q_placement_for(const Placement& kv);

std::string to_string(PlacementStrategy s);
PlacementStrategy strategy_from_string(const std::string& s);

}  // namespace multiring
