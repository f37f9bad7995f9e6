// SPDX-License-Identifier: Apache-2.0

#include "multiring/json_io.hpp"

#include <filesystem>
#include <fstream>

#include "multiring/errors.hpp"

namespace multiring {

using nlohmann::json;

json topology_to_json(const Topology& t) {
  json links = json::array();
  for (const Link& l : t.links) {
    links.push_back({{"src", l.src},
                     {"dst", l.dst},
                     {"cable", l.cable_id},
                     {"kind", l.kind == LinkKind::intra_node ? "intra" : "inter"}});
  }
  return json{{"n", t.n()},
              {"ranks_per_node", t.ranks_per_node},
              {"capacity_model",
               {{"kind", t.capacity.kind == CapacityKind::per_link ? "per_link" : "per_port"},
                {"intra_bw", t.capacity.intra_bw},
                {"inter_nic_bw", t.capacity.inter_nic_bw}}},
              {"links", links}};
}

Topology topology_from_json(const json& j) {
  Topology t;
  const int n = j.at("n").get<int>();
  t.ranks_per_node = j.at("ranks_per_node").get<int>();
  t.ranks.resize(n);
  for (int i = 0; i < n; ++i) t.ranks[i] = Rank{i, i / t.ranks_per_node};
  const auto& cap = j.at("capacity_model");
  t.capacity.kind = cap.at("kind").get<std::string>() == "per_link"
                        ? CapacityKind::per_link
                        : CapacityKind::per_port;
  t.capacity.intra_bw = cap.at("intra_bw").get<double>();
  t.capacity.inter_nic_bw = cap.at("inter_nic_bw").get<double>();
  for (const auto& l : j.at("links")) {
    t.links.push_back(Link{l.at("src").get<int>(), l.at("dst").get<int>(),
                           l.at("cable").get<std::int64_t>(),
                           l.at("kind").get<std::string>() == "intra"
                               ? LinkKind::intra_node
                               : LinkKind::inter_node});
  }
  return t;
}

json decomposition_to_json(const Decomposition& d) {
  json rings = json::array();
  for (const RingDatapath& r : d.rings) rings.push_back(r.order);
  return json{{"scheme", to_string(d.scheme)},
              {"n", d.n},
              {"ranks_per_node", d.ranks_per_node},
              {"rings", rings}};
}

Decomposition decomposition_from_json(const json& j) {
  Decomposition d;
  d.scheme = scheme_from_string(j.at("scheme").get<std::string>());
  d.n = j.at("n").get<int>();
  d.ranks_per_node = j.at("ranks_per_node").get<int>();
  for (const auto& r : j.at("rings")) {
    d.rings.push_back(RingDatapath{r.get<std::vector<int>>()});
  }
  return d;
}

json routing_to_json(const RoutingTable& t) {
  return json{{"n", t.n}, {"num_rings", t.num_rings}, {"out", t.out}, {"in", t.in}};
}

json placement_to_json(const Placement& p) {
  json assignments = json::array();
  for (int rank = 0; rank < p.n(); ++rank) {
    for (int ring = 0; ring < p.num_rings(); ++ring) {
      for (int half = 0; half < 2; ++half) {
        const auto& ranges = p.ranges(rank, ring, half);
        if (ranges.empty()) continue;
        json jr = json::array();
        for (const TokenRange& r : ranges) jr.push_back({r.start, r.end});
        assignments.push_back(
            {{"rank", rank}, {"ring", ring}, {"half", half}, {"ranges", jr}});
      }
    }
  }
  return json{{"strategy", to_string(p.strategy())},
              {"seqlen", p.seqlen()},
              {"ranks", p.n()},
              {"rings", p.num_rings()},
              {"assignments", assignments}};
}

Placement placement_from_json(const json& j) {
  Placement p(strategy_from_string(j.at("strategy").get<std::string>()),
              j.at("seqlen").get<std::int64_t>(), j.at("ranks").get<int>(),
              j.at("rings").get<int>());
  for (const auto& a : j.at("assignments")) {
    auto& ranges = p.mutable_ranges(a.at("rank").get<int>(), a.at("ring").get<int>(),
                                    a.at("half").get<int>());
    for (const auto& r : a.at("ranges")) {
      ranges.push_back(TokenRange{r.at(0).get<std::int64_t>(), r.at(1).get<std::int64_t>()});
    }
  }
  return p;
}

json schedule_to_json(const Schedule& s) {
  json iterations = json::array();
  for (const IterationPlan& it : s.iterations) {
    json transfers = json::array();
    for (const Transfer& t : it.transfers) {
      transfers.push_back({{"ring", t.chunk.ring},
                           {"origin", t.chunk.origin},
                           {"half", t.chunk.half},
                           {"src", t.src},
                           {"dst", t.dst},
                           {"bytes", t.bytes}});
    }
    json resident = json::array();
    for (const auto& per_rank : it.resident) {
      json chunks = json::array();
      for (const ChunkId& c : per_rank) chunks.push_back({c.ring, c.origin, c.half});
      resident.push_back(chunks);
    }
    iterations.push_back({{"transfers", transfers}, {"resident", resident}});
  }
  return json{{"kind", to_string(s.kind)},
              {"n", s.n},
              {"num_rings", s.num_rings},
              {"bytes_per_token", s.bytes_per_token},
              {"placement", placement_to_json(s.placement)},
              {"iterations", iterations}};
}

Schedule schedule_from_json(const json& j) {
  Schedule s;
  s.kind = schedule_kind_from_string(j.at("kind").get<std::string>());
  s.n = j.at("n").get<int>();
  s.num_rings = j.at("num_rings").get<int>();
  s.bytes_per_token = j.at("bytes_per_token").get<std::int64_t>();
  s.placement = placement_from_json(j.at("placement"));
  for (const auto& jit : j.at("iterations")) {
    IterationPlan it;
    for (const auto& jt : jit.at("transfers")) {
      it.transfers.push_back(Transfer{
          ChunkId{jt.at("ring").get<int>(), jt.at("origin").get<int>(),
                  jt.at("half").get<int>()},
          jt.at("src").get<int>(), jt.at("dst").get<int>(),
          jt.at("bytes").get<std::int64_t>()});
    }
    for (const auto& jr : jit.at("resident")) {
      std::vector<ChunkId> chunks;
      for (const auto& c : jr) {
        chunks.push_back(ChunkId{c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>()});
      }
      it.resident.push_back(std::move(chunks));
    }
    s.iterations.push_back(std::move(it));
  }
  return s;
}

void save_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << "\n";
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  json j;
  in >> j;
  return j;
}

Topology load_topology_arg(const std::string& arg) {
  if (arg.find(':') != std::string::npos) return make_preset(arg);
  // Named aliases for the evaluated systems; everything else is a file.
  if (arg == "mi300x-like") return make_fullmesh(8, 16e9);
  if (arg == "h100-like") return make_switched(8, 3.6e12);
  if (arg == "h100x2-like") return make_multinode(8, 2, 3.6e12 / 56.0, 50e9);
  if (!std::filesystem::exists(arg)) {
    throw ConfigError("topology '" + arg + "' is neither a preset nor a file");
  }
  return topology_from_json(load_json(arg));
}

}  // namespace multiring
