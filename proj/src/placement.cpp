// SPDX-License-Identifier: Apache-2.0

#include "multiring/placement.hpp"

#include <string>

#include "multiring/errors.hpp"

namespace multiring {

namespace {

void require_divisible(std::int64_t seqlen, std::int64_t divisor, const char* what) {
  if (seqlen <= 0 || divisor <= 0 || seqlen % divisor != 0) {
    throw DivisibilityError(std::string(what) + " requires seqlen divisible by " +
                            std::to_string(divisor) + ", got " +
                            std::to_string(seqlen));
  }
}

}  // namespace

Placement::Placement(PlacementStrategy strategy, std::int64_t seqlen, int n,
                     int num_rings)
    : strategy_(strategy), seqlen_(seqlen), n_(n), rings_(num_rings) {
  assignments_.resize(static_cast<size_t>(n) * rings_ * 2);
}

const std::vector<TokenRange>& Placement::ranges(int rank, int ring, int half) const {
  return assignments_[(static_cast<size_t>(rank) * rings_ + ring) * 2 + half];
}

std::vector<TokenRange>& Placement::mutable_ranges(int rank, int ring, int half) {
  return assignments_[(static_cast<size_t>(rank) * rings_ + ring) * 2 + half];
}

std::vector<TokenRange> Placement::rank_ranges(int rank) const {
  std::vector<TokenRange> out;
  for (int ring = 0; ring < rings_; ++ring) {
    for (int half = 0; half < 2; ++half) {
      const auto& rs = ranges(rank, ring, half);
      out.insert(out.end(), rs.begin(), rs.end());
    }
  }
  return out;
}

std::int64_t Placement::rank_tokens(int rank) const {
  std::int64_t total = 0;
  for (const TokenRange& r : rank_ranges(rank)) total += r.tokens();
  return total;
}

std::int64_t Placement::chunk_tokens(int ring, int origin, int half) const {
  std::int64_t total = 0;
  for (const TokenRange& r : ranges(origin, ring, half)) total += r.tokens();
  return total;
}

Placement place_naive(std::int64_t seqlen, int n) {
  if (n < 1) throw InvalidSizeError("place_naive requires n >= 1");
  require_divisible(seqlen, n, "naive placement");
  Placement p(PlacementStrategy::naive, seqlen, n, 1);
  const std::int64_t block = seqlen / n;
  for (int i = 0; i < n; ++i) {
    p.mutable_ranges(i, 0, 0) = {TokenRange{i * block, (i + 1) * block}};
  }
  return p;
}

Placement place_zigzag_ring(std::int64_t seqlen, int n) {
  if (n < 1) throw InvalidSizeError("place_zigzag_ring requires n >= 1");
  require_divisible(seqlen, 2 * static_cast<std::int64_t>(n), "zigzag_ring placement");
  Placement p(PlacementStrategy::zigzag_ring, seqlen, n, 1);
  const std::int64_t block = seqlen / (2 * n);
  for (int i = 0; i < n; ++i) {
    p.mutable_ranges(i, 0, 0) = {
        TokenRange{i * block, (i + 1) * block},
        TokenRange{(2 * n - i - 1) * block, (2 * n - i) * block}};
  }
  return p;
}

Placement place_zigzag_tasp(std::int64_t seqlen, int n, int num_rings) {
  if (n < 2) throw InvalidSizeError("place_zigzag_tasp requires n >= 2");
  const int rings = num_rings < 0 ? n - 1 : num_rings;
  if (rings < 1) throw InvalidSizeError("place_zigzag_tasp requires >= 1 ring");
  require_divisible(seqlen, 2LL * n * rings, "zigzag_tasp placement");
  Placement p(PlacementStrategy::zigzag_tasp, seqlen, n, rings);
  const std::int64_t granule = seqlen / (2LL * n * rings);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < rings; ++i) {
      // Granule index ordered primarily by rank, secondarily by ring; this
      // ordering is what makes causal work equal across ranks per iteration.
      const std::int64_t g = static_cast<std::int64_t>(rings) * j + i;
      p.mutable_ranges(j, i, 0) = {TokenRange{g * granule, (g + 1) * granule}};
      p.mutable_ranges(j, i, 1) = {
          TokenRange{seqlen - (g + 1) * granule, seqlen - g * granule}};
    }
  }
  return p;
}

Placement q_placement_for(const Placement& kv) { return kv; }

std::string to_string(PlacementStrategy s) {
  switch (s) {
    case PlacementStrategy::naive: return "naive";
    case PlacementStrategy::zigzag_ring: return "zigzag-ring";
    case PlacementStrategy::zigzag_tasp: return "zigzag-tasp";
  }
  return "?";
}

PlacementStrategy strategy_from_string(const std::string& s) {
  if (s == "naive") return PlacementStrategy::naive;
  if (s == "zigzag-ring" || s == "zigzag_ring") return PlacementStrategy::zigzag_ring;
  if (s == "zigzag-tasp" || s == "zigzag_tasp") return PlacementStrategy::zigzag_tasp;
  throw ConfigError("unknown placement strategy: " + s);
}

}  // namespace multiring
