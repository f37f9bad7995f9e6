// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include <json.hpp>

#include "multiring/decompose.hpp"
#include "multiring/placement.hpp"
#include "multiring/routing.hpp"
#include "multiring/schedule.hpp"
#include "multiring/topology.hpp"

namespace multiring {

nlohmann::json topology_to_json(const Topology& t);
Topology topology_from_json(const nlohmann::json& j);

nlohmann::json decomposition_to_json(const Decomposition& d);
Decomposition decomposition_from_json(const nlohmann::json& j);

nlohmann::json routing_to_json(const RoutingTable& t);

nlohmann::json placement_to_json(const Placement& p);
Placement placement_from_json(const nlohmann::json& j);

nlohmann::json schedule_to_json(const Schedule& s);
Schedule schedule_from_json(const nlohmann::json& j);

void save_json(const std::string& path, const nlohmann::json& j);
nlohmann::json load_json(const std::string& path);

// Accepts either a preset string (contains ':' or a known alias) or a path
// to a topology JSON file.
Topology load_topology_arg(const std::string& arg);

}  // namespace multiring
