// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>
#include <tuple>

#include "multiring/errors.hpp"
#include "multiring/json_io.hpp"
#include "multiring/topology.hpp"

using namespace multiring;

namespace {

// Every ordered pair (i, j), i != j, is an arc, and nothing else.
void expect_complete_digraph(const Topology& t) {
  const int n = t.n();
  std::set<std::pair<int, int>> arcs;
  for (const Link& l : t.links) {
    CHECK(l.src != l.dst);
    CHECK(arcs.insert({l.src, l.dst}).second);
  }
  CHECK(arcs.size() == static_cast<size_t>(n) * (n - 1));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) CHECK(arcs.count({i, j}) == 1);
    }
  }
}

}  // namespace

TEST_CASE("fullmesh link counts and capacity") {
  const Topology t8 = make_fullmesh(8, 56e9);
  CHECK(t8.links.size() == 56);
  expect_complete_digraph(t8);
  CHECK(t8.capacity.kind == CapacityKind::per_link);
  CHECK(t8.capacity.intra_bw == 56e9);  // stored verbatim

  const Topology t2 = make_fullmesh(2, 1e9);
  REQUIRE(t2.links.size() == 2);
  CHECK(t2.links[0].src == 0);
  CHECK(t2.links[0].dst == 1);
  CHECK(t2.links[1].src == 1);
  CHECK(t2.links[1].dst == 0);

  CHECK_THROWS_AS(make_fullmesh(1, 1e9), InvalidSizeError);
}

TEST_CASE("switched is a complete digraph with a per-port tag") {
  const Topology t = make_switched(8, 3.6e12);
  CHECK(t.links.size() == 56);
  expect_complete_digraph(t);
  CHECK(t.capacity.kind == CapacityKind::per_port);
  CHECK(t.capacity.intra_bw == 3.6e12);
  CHECK_THROWS_AS(make_switched(1, 1e9), InvalidSizeError);
}

TEST_CASE("no duplicate (src, dst, cable) triples") {
  for (const Topology& t : {make_fullmesh(8, 1e9), make_multinode(4, 3, 1e9, 1e9)}) {
    std::set<std::tuple<int, int, std::int64_t>> keys;
    for (const Link& l : t.links) {
      CHECK(keys.insert({l.src, l.dst, l.cable_id}).second);
    }
  }
}

TEST_CASE("both directions of a cable share its id") {
  const Topology t = make_fullmesh(5, 1e9);
  std::map<std::pair<int, int>, std::int64_t> id;
  for (const Link& l : t.links) id[{l.src, l.dst}] = l.cable_id;
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      CHECK(id[{i, j}] == id[{j, i}]);
    }
  }
}

TEST_CASE("multinode structure") {
  const Topology t = make_multinode(8, 2, 64e9, 50e9);
  CHECK(t.n() == 16);
  CHECK(t.num_nodes() == 2);
  int intra = 0, inter = 0;
  for (const Link& l : t.links) {
    if (l.kind == LinkKind::intra_node) {
      ++intra;
      CHECK(t.node_of(l.src) == t.node_of(l.dst));
    } else {
      ++inter;
      CHECK(t.node_of(l.src) != t.node_of(l.dst));
    }
  }
  CHECK(intra == 2 * 56);
  CHECK(inter == 2 * 64);  // 8*8 per direction between the node pair
  CHECK(t.capacity.inter_nic_bw == 50e9);  // NIC bandwidth stored as given

  const Topology small = make_multinode(2, 2, 1e9, 1e9);
  CHECK(small.n() == 4);
  int s_intra = 0, s_inter = 0;
  for (const Link& l : small.links) (l.kind == LinkKind::intra_node ? s_intra : s_inter)++;
  CHECK(s_intra == 4);  // 2 + 2
  CHECK(s_inter == 8);

  CHECK_THROWS_AS(make_multinode(1, 2, 1e9, 1e9), InvalidSizeError);
  CHECK_THROWS_AS(make_multinode(8, 1, 1e9, 1e9), InvalidSizeError);
}

TEST_CASE("rank node ids are dense") {
  const Topology t = make_multinode(4, 3, 1e9, 1e9);
  for (int i = 0; i < t.n(); ++i) {
    CHECK(t.ranks[i].id == i);
    CHECK(t.ranks[i].node_id == i / 4);
  }
}

TEST_CASE("presets parse") {
  const Topology f = make_preset("fullmesh:8:56G");
  CHECK(f.n() == 8);
  CHECK(f.capacity.intra_bw == doctest::Approx(56e9));

  const Topology m = make_preset("multinode:8:2:64G:50G");
  CHECK(m.n() == 16);
  CHECK(m.capacity.inter_nic_bw == doctest::Approx(50e9));

  CHECK(parse_bandwidth("3.6T") == doctest::Approx(3.6e12));
  CHECK(parse_bandwidth("450e9") == doctest::Approx(450e9));

  CHECK_THROWS_AS(make_preset("torus:4:1G"), ConfigError);
  CHECK_THROWS_AS(make_preset("fullmesh:8"), ConfigError);
  CHECK_THROWS_AS(parse_bandwidth("fast"), ConfigError);
}

TEST_CASE("json round trip") {
  const Topology t = make_multinode(4, 2, 2e9, 1e9);
  const Topology back = topology_from_json(topology_to_json(t));
  CHECK(back.n() == t.n());
  CHECK(back.ranks_per_node == t.ranks_per_node);
  CHECK(back.capacity.kind == t.capacity.kind);
  CHECK(back.capacity.intra_bw == t.capacity.intra_bw);
  CHECK(back.capacity.inter_nic_bw == t.capacity.inter_nic_bw);
  REQUIRE(back.links.size() == t.links.size());
  for (size_t i = 0; i < t.links.size(); ++i) {
    CHECK(back.links[i].src == t.links[i].src);
    CHECK(back.links[i].dst == t.links[i].dst);
    CHECK(back.links[i].cable_id == t.links[i].cable_id);
    CHECK(back.links[i].kind == t.links[i].kind);
  }
}
