// SPDX-License-Identifier: Apache-2.0

#include "multiring/schedule.hpp"

#include <map>
#include <set>

#include "multiring/errors.hpp"

namespace multiring {

namespace {

std::string chunk_str(const ChunkId& c) {
  return "(ring " + std::to_string(c.ring) + ", origin " + std::to_string(c.origin) +
         ", half " + std::to_string(c.half) + ")";
}

std::vector<ChunkId> all_chunks(const Schedule& s) {
  std::vector<ChunkId> chunks;
  for (int ring = 0; ring < s.num_rings; ++ring) {
    for (int origin = 0; origin < s.n; ++origin) {
      for (int half = 0; half < s.placement.num_halves(); ++half) {
        chunks.push_back(ChunkId{ring, origin, half});
      }
    }
  }
  return chunks;
}

}  // namespace

Schedule build_ring_schedule(int n, const Placement& p, std::int64_t bytes_per_token) {
  if (p.strategy() == PlacementStrategy::zigzag_tasp) {
    throw ConfigError("ring schedule expects a naive or zigzag_ring placement");
  }
  if (p.n() != n) throw ConfigError("placement rank count mismatch");
  if (bytes_per_token <= 0) throw ConfigError("bytes_per_token must be positive");

  Schedule s;
  s.kind = ScheduleKind::ring;
  s.n = n;
  s.num_rings = 1;
  s.bytes_per_token = bytes_per_token;
  s.placement = p;
  s.iterations.resize(n);

  for (int k = 0; k < n; ++k) {
    IterationPlan& it = s.iterations[k];
    it.resident.resize(n);
    for (int r = 0; r < n; ++r) {
      it.resident[r].push_back(ChunkId{0, ((r - k) % n + n) % n, 0});
    }
    if (k < n - 1) {
      for (int origin = 0; origin < n; ++origin) {
        const int src = (origin + k) % n;
        const int dst = (origin + k + 1) % n;
        it.transfers.push_back(Transfer{ChunkId{0, origin, 0}, src, dst,
                                        p.chunk_tokens(0, origin, 0) * bytes_per_token});
      }
    }
  }
  return s;
}

Schedule build_multiring_schedule(const Decomposition& d, const Placement& p,
                                  std::int64_t bytes_per_token) {
  if (p.strategy() != PlacementStrategy::zigzag_tasp) {
    throw ConfigError("multiring schedule expects a zigzag_tasp placement");
  }
  if (p.num_rings() != d.num_rings()) {
    throw ConfigError("placement has " + std::to_string(p.num_rings()) +
                      " rings but decomposition has " + std::to_string(d.num_rings()));
  }
  if (p.n() != d.n) throw ConfigError("placement rank count mismatch");
  if (bytes_per_token <= 0) throw ConfigError("bytes_per_token must be positive");

  const int n = d.n;
  Schedule s;
  s.kind = ScheduleKind::multiring;
  s.n = n;
  s.num_rings = d.num_rings();
  s.bytes_per_token = bytes_per_token;
  s.placement = p;
  s.iterations.resize(n);

  // positions[i][r] = index of rank r in ring i's visiting order.
  std::vector<std::vector<int>> positions(d.num_rings(), std::vector<int>(n, -1));
  for (int i = 0; i < d.num_rings(); ++i) {
    for (int j = 0; j < n; ++j) positions[i][d.rings[i].order[j]] = j;
  }

  for (int k = 0; k < n; ++k) {
    IterationPlan& it = s.iterations[k];
    it.resident.resize(n);
    for (int r = 0; r < n; ++r) {
      for (int i = 0; i < d.num_rings(); ++i) {
        const int origin = d.rings[i].order[((positions[i][r] - k) % n + n) % n];
        for (int half = 0; half < p.num_halves(); ++half) {
          it.resident[r].push_back(ChunkId{i, origin, half});
        }
      }
    }
    if (k < n - 1) {
      for (int i = 0; i < d.num_rings(); ++i) {
        const auto& order = d.rings[i].order;
        for (int origin = 0; origin < n; ++origin) {
          const int pos = positions[i][origin];
          const int src = order[(pos + k) % n];
          const int dst = order[(pos + k + 1) % n];
          for (int half = 0; half < p.num_halves(); ++half) {
            it.transfers.push_back(
                Transfer{ChunkId{i, origin, half}, src, dst,
                         p.chunk_tokens(i, origin, half) * bytes_per_token});
          }
        }
      }
    }
  }
  return s;
}

CheckResult check_accessibility(const Schedule& s) {
  const auto chunks = all_chunks(s);
  // Replay from origins; a chunk may transiently occupy several ranks if the
  // schedule is malformed, so track multisets.
  std::map<ChunkId, std::map<int, int>> where;
  for (const ChunkId& c : chunks) where[c][c.origin] = 1;

  std::map<ChunkId, std::map<int, int>> meetings;  // chunk -> rank -> count
  for (const IterationPlan& it : s.iterations) {
    for (const auto& [chunk, ranks] : where) {
      for (const auto& [rank, cnt] : ranks) meetings[chunk][rank] += cnt;
    }
    for (const Transfer& t : it.transfers) {
      auto& ranks = where[t.chunk];
      auto src = ranks.find(t.src);
      if (src != ranks.end() && --src->second == 0) ranks.erase(src);
      ++ranks[t.dst];
    }
  }

  for (const ChunkId& c : chunks) {
    for (int r = 0; r < s.n; ++r) {
      const auto& m = meetings[c];
      auto it = m.find(r);
      const int count = it == m.end() ? 0 : it->second;
      if (count != 1) {
        return CheckResult{false, "chunk " + chunk_str(c) + " co-resides with rank " +
                                      std::to_string(r) + " " + std::to_string(count) +
                                      " times (want 1)"};
      }
    }
  }
  return CheckResult{true, ""};
}

CheckResult check_zero_copy(const Schedule& s) {
  const auto chunks = all_chunks(s);
  std::map<ChunkId, std::map<int, int>> where;
  for (const ChunkId& c : chunks) where[c][c.origin] = 1;

  for (int k = 0; k < s.num_iterations(); ++k) {
    for (const ChunkId& c : chunks) {
      int copies = 0;
      for (const auto& [rank, cnt] : where[c]) copies += cnt;
      if (copies != 1) {
        return CheckResult{false, "chunk " + chunk_str(c) + " has " +
                                      std::to_string(copies) + " copies at iteration " +
                                      std::to_string(k)};
      }
    }
    for (const Transfer& t : s.iterations[k].transfers) {
      auto& ranks = where[t.chunk];
      auto src = ranks.find(t.src);
      if (src != ranks.end() && --src->second == 0) ranks.erase(src);
      ++ranks[t.dst];
    }
  }
  return CheckResult{true, ""};
}

std::string to_string(ScheduleKind k) {
  return k == ScheduleKind::ring ? "ring" : "multiring";
}

ScheduleKind schedule_kind_from_string(const std::string& s) {
  if (s == "ring") return ScheduleKind::ring;
  if (s == "multiring") return ScheduleKind::multiring;
  throw ConfigError("unknown schedule kind: " + s);
}

}  // namespace multiring
