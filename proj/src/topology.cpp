#include "mmh/topology.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "mmh/config.hpp"

namespace mmh {

std::string to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Mbs: return "MBS";
    case NodeKind::Scbs: return "SCBS";
    case NodeKind::Ue: return "UE";
  }
  return "?";
}

const NodeSpec& NetworkModel::node(int id) const {
  auto it = node_index.find(id);
  if (it == node_index.end()) throw Error(Errc::DanglingPathHop, "unknown node id " + std::to_string(id));
  return nodes[it->second];
}

const LinkSpec& NetworkModel::link(int from, int to) const {
  auto it = link_index.find({from, to});
  if (it == link_index.end())
    throw Error(Errc::DanglingPathHop,
                "no link " + std::to_string(from) + "->" + std::to_string(to));
  return links[it->second];
}

namespace {

double node_distance(const NodeSpec& a, const NodeSpec& b) {
  const double dx = a.position[0] - b.position[0];
  const double dy = a.position[1] - b.position[1];
  return std::sqrt(dx * dx + dy * dy);
}

void check_flow(const NetworkModel& model, const FlowSpec& flow) {
  if (flow.paths.empty())
    throw Error(Errc::BadConfig, "flow " + std::to_string(flow.id) + " has no paths");
  if (flow.n_select < 1 || flow.n_select > int(flow.paths.size()))
    throw Error(Errc::BadConfig, "flow " + std::to_string(flow.id) + ": n_select out of range");
  if (!(flow.mean_arrival_bps > 0.0) || flow.mean_arrival_bps > flow.max_rate_bps)
    throw Error(Errc::BadConfig,
                "flow " + std::to_string(flow.id) + ": need 0 < mean_arrival <= max_rate");

  const auto& dest = model.node(flow.destination);
  if (dest.kind != NodeKind::Ue)
    throw Error(Errc::BadConfig, "flow " + std::to_string(flow.id) + ": destination is not a UE");

  std::set<int> seen_intermediate;
  for (const auto& path : flow.paths) {
    if (path.hops.size() < 2 || path.hops.front() != model.mbs_id() ||
        path.hops.back() != flow.destination)
      throw Error(Errc::BadConfig, "flow " + std::to_string(flow.id) +
                                       ": every path must run MBS -> ... -> destination UE");
    for (size_t h = 0; h + 1 < path.hops.size(); ++h) {
      if (!model.has_link(path.hops[h], path.hops[h + 1])) {
        std::ostringstream os;
        os << "flow " << flow.id << ": path hop " << path.hops[h] << "->" << path.hops[h + 1]
           << " has no declared link";
        throw Error(Errc::DanglingPathHop, os.str());
      }
    }
    for (size_t h = 1; h + 1 < path.hops.size(); ++h) {
      const int id = path.hops[h];
      if (model.node(id).kind != NodeKind::Scbs)
        throw Error(Errc::BadConfig,
                    "flow " + std::to_string(flow.id) + ": intermediate hops must be SCBSs");
      if (!seen_intermediate.insert(id).second)
        throw Error(Errc::NonDisjointPaths, "flow " + std::to_string(flow.id) + ": SCBS " +
                                                std::to_string(id) + " appears on two paths");
    }
  }
}

}  // namespace

NetworkModel build_network(const ScenarioConfig& config) {
  NetworkModel model;
  model.slot_duration_s = config.slot_duration_s;
  if (!(model.slot_duration_s > 0.0)) throw Error(Errc::BadConfig, "slot_duration must be > 0");

  model.nodes = config.nodes;
  int n_mbs = 0;
  for (size_t i = 0; i < model.nodes.size(); ++i) {
    const auto& n = model.nodes[i];
    if (!model.node_index.emplace(n.id, int(i)).second)
      throw Error(Errc::DuplicateId, "duplicate node id " + std::to_string(n.id));
    if (n.rf_chains < 1 || n.rf_chains > n.antennas)
      throw Error(Errc::BadConfig,
                  "node " + std::to_string(n.id) + ": need 1 <= rf_chains <= antennas");
    if (n.kind == NodeKind::Mbs) {
      ++n_mbs;
      if (n.id != 0) throw Error(Errc::BadConfig, "the MBS must have id 0");
    }
    if (n.kind != NodeKind::Ue && !(n.max_power_w > 0.0))
      throw Error(Errc::BadConfig, "BS node " + std::to_string(n.id) + ": max_power must be > 0");
  }
  if (n_mbs != 1) throw Error(Errc::BadConfig, "exactly one MBS required");

  model.links = config.links;
  for (size_t i = 0; i < model.links.size(); ++i) {
    auto& l = model.links[i];
    const auto& from = model.node(l.from);
    model.node(l.to);
    if (from.kind == NodeKind::Ue)
      throw Error(Errc::BadConfig, "link source must be a BS (downlink only)");
    if (!model.link_index.emplace(std::make_pair(l.from, l.to), int(i)).second)
      throw Error(Errc::DuplicateId,
                  "duplicate link " + std::to_string(l.from) + "->" + std::to_string(l.to));
    if (l.distance_m <= 0.0) l.distance_m = node_distance(model.node(l.from), model.node(l.to));
    if (!(l.distance_m > 0.0))
      throw Error(Errc::NonPositiveDistance,
                  "link " + std::to_string(l.from) + "->" + std::to_string(l.to) +
                      ": distance must be positive (set positions or a distance override)");
  }

  model.flows = config.flows;
  std::set<int> flow_ids;
  int total_streams = 0;
  int min_ue_chains = INT32_MAX;
  for (const auto& f : model.flows) {
    if (!flow_ids.insert(f.id).second)
      throw Error(Errc::DuplicateId, "duplicate flow id " + std::to_string(f.id));
    check_flow(model, f);
    const auto& ue = model.node(f.destination);
    min_ue_chains = std::min(min_ue_chains, ue.rf_chains);
    ++total_streams;
  }
  if (!model.flows.empty()) {
    const int mbs_chains = model.node(model.mbs_id()).rf_chains;
    if (total_streams * min_ue_chains > mbs_chains) {
      std::ostringstream os;
      os << "F*R_ue = " << total_streams * min_ue_chains << " exceeds MBS RF chains "
         << mbs_chains;
      throw Error(Errc::RfChainViolation, os.str());
    }
  }
  return model;
}

namespace {

const FlowSpec& flow_by_id(const NetworkModel& model, int flow_id) {
  for (const auto& f : model.flows)
    if (f.id == flow_id) return f;
  throw Error(Errc::BadConfig, "unknown flow id " + std::to_string(flow_id));
}

int adjacent_hop(const NetworkModel& model, int flow_id, int node_id, int direction) {
  const auto& flow = flow_by_id(model, flow_id);
  int found = INT32_MIN;
  for (const auto& path : flow.paths) {
    for (size_t h = 0; h < path.hops.size(); ++h) {
      if (path.hops[h] != node_id) continue;
      const long j = long(h) + direction;
      if (j < 0)
        throw Error(Errc::NodeNotOnPath,
                    "node " + std::to_string(node_id) + " is the path source (no previous hop)");
      if (j >= long(path.hops.size()))
        throw Error(Errc::NodeNotOnPath,
                    "node " + std::to_string(node_id) + " is the path sink (no next hop)");
      const int hop = path.hops[j];
      if (found != INT32_MIN && hop != found)
        throw Error(Errc::NodeNotOnPath, "node " + std::to_string(node_id) +
                                             " has no unique adjacent hop across paths");
      found = hop;
    }
  }
  if (found == INT32_MIN)
    throw Error(Errc::NodeNotOnPath, "node " + std::to_string(node_id) + " is not on any path of flow " +
                                         std::to_string(flow_id));
  return found;
}

}  // namespace

int previous_hop(const NetworkModel& model, int flow_id, int node_id) {
  return adjacent_hop(model, flow_id, node_id, -1);
}

int next_hop(const NetworkModel& model, int flow_id, int node_id) {
  return adjacent_hop(model, flow_id, node_id, +1);
}

}  // namespace mmh
