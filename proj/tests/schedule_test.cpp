// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "multiring/errors.hpp"
#include "multiring/json_io.hpp"
#include "multiring/schedule.hpp"
#include "multiring/topology.hpp"

using namespace multiring;

namespace {

constexpr std::int64_t kBpt = 256;

std::set<std::pair<int, int>> arcs_used(const IterationPlan& it) {
  std::set<std::pair<int, int>> arcs;
  for (const Transfer& t : it.transfers) arcs.insert({t.src, t.dst});
  return arcs;
}

std::int64_t total_bytes(const Schedule& s) {
  std::int64_t sum = 0;
  for (const IterationPlan& it : s.iterations) {
    for (const Transfer& t : it.transfers) sum += t.bytes;
  }
  return sum;
}

}  // namespace

TEST_CASE("ring schedule shifts residency by one origin per iteration") {
  const Schedule s = build_ring_schedule(3, place_naive(6, 3), kBpt);
  REQUIRE(s.num_iterations() == 3);
  for (int r = 0; r < 3; ++r) {
    REQUIRE(s.iterations[0].resident[r].size() == 1);
    CHECK(s.iterations[0].resident[r][0].origin == r);
    CHECK(s.iterations[1].resident[r][0].origin == (r + 2) % 3);  // (r-1) mod 3
  }
  CHECK(s.iterations[2].transfers.empty());
}

TEST_CASE("ring schedule transfer counts and utilization at n=8") {
  const Schedule s = build_ring_schedule(8, place_naive(224, 8), kBpt);
  int transfer_iters = 0;
  for (int k = 0; k < s.num_iterations(); ++k) {
    const auto& it = s.iterations[k];
    if (it.transfers.empty()) continue;
    ++transfer_iters;
    CHECK(it.transfers.size() == 8);  // one send per rank
    // active links: 8 of 56 -> utilization 1/7
    CHECK(arcs_used(it).size() == 8);
  }
  CHECK(transfer_iters == 7);
}

TEST_CASE("multiring over K_8 uses every arc exactly once per iteration") {
  const Decomposition d = decompose_complete(8);
  const Schedule s = build_multiring_schedule(d, place_zigzag_tasp(112, 8), kBpt);
  const Topology topo = make_fullmesh(8, 1e9);
  std::set<std::pair<int, int>> all_arcs;
  for (const Link& l : topo.links) all_arcs.insert({l.src, l.dst});

  for (int k = 0; k + 1 < s.num_iterations(); ++k) {
    const auto arcs = arcs_used(s.iterations[k]);
    CHECK(arcs == all_arcs);  // 56 distinct arcs, 100% utilization
    // each arc carries exactly one chunk pair
    std::map<std::pair<int, int>, std::set<std::pair<int, int>>> per_arc;
    for (const Transfer& t : s.iterations[k].transfers) {
      per_arc[{t.src, t.dst}].insert({t.chunk.ring, t.chunk.origin});
    }
    for (const auto& [arc, chunks] : per_arc) CHECK(chunks.size() == 1);
  }
}

TEST_CASE("multiring over K_3") {
  const Decomposition d = decompose_complete(3);
  const Schedule s = build_multiring_schedule(d, place_zigzag_tasp(12, 3), kBpt);
  REQUIRE(s.num_iterations() == 3);
  int transfer_iters = 0;
  for (const IterationPlan& it : s.iterations) {
    if (it.transfers.empty()) continue;
    ++transfer_iters;
    CHECK(arcs_used(it).size() == 6);  // all arcs of K_3
  }
  CHECK(transfer_iters == 2);
}

TEST_CASE("multinode multiring crosses nodes once per rank per iteration") {
  const Decomposition d = decompose_multinode(8, 2);
  const Schedule s = build_multiring_schedule(d, place_zigzag_tasp(256, 16, 8), kBpt);
  const Topology topo = make_multinode(8, 2, 64e9, 50e9);
  REQUIRE(s.num_iterations() == 16);
  for (int k = 0; k + 1 < s.num_iterations(); ++k) {
    std::set<std::pair<int, int>> inter;
    for (const auto& [src, dst] : arcs_used(s.iterations[k])) {
      if (topo.node_of(src) != topo.node_of(dst)) inter.insert({src, dst});
    }
    CHECK(inter.size() == 16);  // one outbound inter arc per rank
  }
}

TEST_CASE("chunk trajectory equals its ring order") {
  const Decomposition d = decompose_complete(5);
  const Schedule s = build_multiring_schedule(d, place_zigzag_tasp(40, 5), kBpt);
  for (int ring = 0; ring < d.num_rings(); ++ring) {
    for (int origin = 0; origin < 5; ++origin) {
      // follow residency of chunk (ring, origin, 0) across iterations
      std::vector<int> trajectory;
      for (const IterationPlan& it : s.iterations) {
        for (int r = 0; r < 5; ++r) {
          for (const ChunkId& c : it.resident[r]) {
            if (c.ring == ring && c.origin == origin && c.half == 0) {
              trajectory.push_back(r);
            }
          }
        }
      }
      REQUIRE(trajectory.size() == 5);
      const int pos = d.rings[ring].position_of(origin);
      for (int k = 0; k < 5; ++k) {
        CHECK(trajectory[k] == d.rings[ring].order[(pos + k) % 5]);
      }
    }
  }
}

TEST_CASE("communication volume is conserved across primitives") {
  const Schedule ring = build_ring_schedule(8, place_naive(224, 8), kBpt);
  const Schedule multi = build_multiring_schedule(decompose_complete(8),
                                                  place_zigzag_tasp(224, 8), kBpt);
  CHECK(total_bytes(ring) == total_bytes(multi));
  CHECK(total_bytes(ring) == 7LL * 224 * kBpt);  // n-1 iterations moving S tokens
}

TEST_CASE("accessibility and zero-copy hold exhaustively") {
  for (int n : {3, 5, 7, 8}) {
    CAPTURE(n);
    const std::int64_t S = 2LL * n * (n - 1);
    CHECK(check_accessibility(build_ring_schedule(n, place_naive(S, n), kBpt)).ok);
    CHECK(check_accessibility(build_ring_schedule(n, place_zigzag_ring(S, n), kBpt)).ok);
    CHECK(check_zero_copy(build_ring_schedule(n, place_naive(S, n), kBpt)).ok);
    const Schedule multi =
        build_multiring_schedule(decompose_complete(n), place_zigzag_tasp(S, n), kBpt);
    CHECK(check_accessibility(multi).ok);
    CHECK(check_zero_copy(multi).ok);
  }
}

TEST_CASE("a deleted transfer breaks accessibility") {
  Schedule s = build_multiring_schedule(decompose_complete(5),
                                        place_zigzag_tasp(40, 5), kBpt);
  REQUIRE(check_accessibility(s).ok);
  s.iterations[1].transfers.pop_back();
  const CheckResult r = check_accessibility(s);
  CHECK_FALSE(r.ok);
  CHECK_FALSE(r.witness.empty());
}

TEST_CASE("a duplicated destination breaks zero-copy") {
  Schedule s = build_ring_schedule(4, place_naive(8, 4), kBpt);
  REQUIRE(check_zero_copy(s).ok);
  Transfer dup = s.iterations[0].transfers[0];
  dup.dst = (dup.dst + 1) % 4;
  s.iterations[0].transfers.push_back(dup);
  const CheckResult r = check_zero_copy(s);
  CHECK_FALSE(r.ok);
  CHECK(r.witness.find("copies") != std::string::npos);
}

TEST_CASE("scheme and placement must match") {
  CHECK_THROWS_AS(build_ring_schedule(8, place_zigzag_tasp(112, 8), kBpt), ConfigError);
  CHECK_THROWS_AS(
      build_multiring_schedule(decompose_complete(8), place_naive(8, 8), kBpt),
      ConfigError);
  // ring-count mismatch: K_8 has 7 rings, placement built for 3
  CHECK_THROWS_AS(build_multiring_schedule(decompose_complete(8),
                                           place_zigzag_tasp(48, 8, 3), kBpt),
                  ConfigError);
}

TEST_CASE("schedule json round trip") {
  const Schedule s = build_multiring_schedule(decompose_complete(5),
                                              place_zigzag_tasp(40, 5), kBpt);
  const Schedule back = schedule_from_json(schedule_to_json(s));
  CHECK(back.kind == s.kind);
  CHECK(back.n == s.n);
  CHECK(back.num_rings == s.num_rings);
  CHECK(back.bytes_per_token == s.bytes_per_token);
  REQUIRE(back.num_iterations() == s.num_iterations());
  for (int k = 0; k < s.num_iterations(); ++k) {
    REQUIRE(back.iterations[k].transfers.size() == s.iterations[k].transfers.size());
    for (size_t i = 0; i < s.iterations[k].transfers.size(); ++i) {
      const Transfer& a = back.iterations[k].transfers[i];
      const Transfer& b = s.iterations[k].transfers[i];
      CHECK(a.chunk == b.chunk);
      CHECK(a.src == b.src);
      CHECK(a.dst == b.dst);
      CHECK(a.bytes == b.bytes);
    }
    CHECK(back.iterations[k].resident == s.iterations[k].resident);
  }
}
