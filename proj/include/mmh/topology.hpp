#pragma once

#include <array>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "mmh/common.hpp"

namespace mmh {

enum class NodeKind { Mbs, Scbs, Ue };

std::string to_string(NodeKind kind);

struct NodeSpec {
  int id = -1;
  NodeKind kind = NodeKind::Scbs;
  int antennas = 1;
  int rf_chains = 1;
  double max_power_w = 0.0;
  std::array<double, 2> position{0.0, 0.0};
};

/// Hop sequence from the MBS (node 0) to the flow's UE, inclusive.
struct PathSpec {
  std::vector<int> hops;
};

struct FlowSpec {
  int id = -1;
  int destination = -1;
  double mean_arrival_bps = 0.0;
  double max_rate_bps = 0.0;
  int n_select = 1;
  std::vector<PathSpec> paths;
};

struct LinkSpec {
  int from = -1;
  int to = -1;
  double distance_m = 0.0;
};

/// Immutable after build_network; shared read-only across replications.
struct NetworkModel {
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  std::vector<FlowSpec> flows;
  double slot_duration_s = 1e-3;

  std::unordered_map<int, int> node_index;            // node id -> index into nodes
  std::map<std::pair<int, int>, int> link_index;      // (from,to) -> index into links

  const NodeSpec& node(int id) const;
  const LinkSpec& link(int from, int to) const;
  bool has_link(int from, int to) const { return link_index.count({from, to}) > 0; }
  int mbs_id() const { return 0; }
};

struct ScenarioConfig;  // config.hpp

/// Validates ids, link coverage, path disjointness and RF-chain limits.
NetworkModel build_network(const ScenarioConfig& config);

/// Unique adjacent hop of `node_id` on the path of `flow_id` containing it.
/// The MBS has no previous hop and the UE has no next hop (NodeNotOnPath).
int previous_hop(const NetworkModel& model, int flow_id, int node_id);
int next_hop(const NetworkModel& model, int flow_id, int node_id);

}  // namespace mmh
