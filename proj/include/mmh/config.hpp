#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmh/channel.hpp"
#include "mmh/path_learning.hpp"
#include "mmh/queueing.hpp"
#include "mmh/scheduler_params.hpp"
#include "mmh/topology.hpp"

namespace mmh {

/// Raw scenario description as parsed from the JSON config file. Field names
/// match the documented schema (docs/config_schema.md).
struct ScenarioConfig {
  double slot_duration_s = 1e-3;
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;                 // distance 0 = derive from positions
  std::vector<FlowSpec> flows;
  ChannelParams channel;
  UrllcParams urllc;
  SchedulerParams scheduler;
};

ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& json_text);
std::string config_to_json(const ScenarioConfig& cfg);

/// The default evaluation scenario: 1 MBS, 8 SCBSs, 2 UEs, 2 flows with four
/// 3-hop candidate paths each (two relays per path) plus direct MBS-UE links
/// for the single-hop scheme.
ScenarioConfig default_scenario();

}  // namespace mmh
