#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mmh/config.hpp"
#include "mmh/topology.hpp"

using namespace mmh;

namespace {

ScenarioConfig evaluation_scenario() { return default_scenario(); }

ScenarioConfig single_hop_scenario() {
  ScenarioConfig cfg;
  NodeSpec mbs;
  mbs.id = 0;
  mbs.kind = NodeKind::Mbs;
  mbs.antennas = 8;
  mbs.rf_chains = 8;
  mbs.max_power_w = 20.0;
  NodeSpec ue;
  ue.id = 1;
  ue.kind = NodeKind::Ue;
  ue.antennas = 2;
  ue.rf_chains = 2;
  cfg.nodes = {mbs, ue};
  cfg.links = {{0, 1, 150.0}};
  FlowSpec f;
  f.id = 0;
  f.destination = 1;
  f.mean_arrival_bps = 1e9;
  f.max_rate_bps = 2e9;
  f.n_select = 1;
  f.paths = {PathSpec{{0, 1}}};
  cfg.flows = {f};
  return cfg;
}

}  // namespace

TEST_CASE("the evaluation scenario builds: 1 MBS, 8 SCBSs, 2 UEs, 2 flows x 4 paths") {
  const auto model = build_network(evaluation_scenario());
  int mbs = 0, scbs = 0, ue = 0;
  for (const auto& n : model.nodes) {
    if (n.kind == NodeKind::Mbs) ++mbs;
    if (n.kind == NodeKind::Scbs) ++scbs;
    if (n.kind == NodeKind::Ue) ++ue;
  }
  CHECK(mbs == 1);
  CHECK(scbs == 8);
  CHECK(ue == 2);
  CHECK(model.flows.size() == 2);
  for (const auto& f : model.flows) {
    CHECK(f.paths.size() == 4);
    CHECK(f.n_select == 2);
    for (const auto& p : f.paths) CHECK(p.hops.size() == 4);  // 3 hops, 2 relays
  }
}

TEST_CASE("degenerate single-path single-hop model is valid") {
  const auto model = build_network(single_hop_scenario());
  CHECK(model.flows.size() == 1);
  CHECK(model.flows[0].paths[0].hops.size() == 2);
}

TEST_CASE("two paths sharing an intermediate SCBS are rejected") {
  auto cfg = evaluation_scenario();
  // Reroute flow 0's second path through relay 1 (already on path 0).
  cfg.links.push_back({1, 6, 50.0});
  cfg.flows[0].paths[1] = PathSpec{{0, 1, 6, 9}};
  CHECK_THROWS_AS(build_network(cfg), Error);
  try {
    build_network(cfg);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonDisjointPaths);
  }
}

TEST_CASE("construction errors carry the right codes") {
  SUBCASE("duplicate node id") {
    auto cfg = evaluation_scenario();
    cfg.nodes.push_back(cfg.nodes[3]);
    try {
      build_network(cfg);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::DuplicateId);
    }
  }
  SUBCASE("dangling path hop") {
    auto cfg = evaluation_scenario();
    cfg.flows[0].paths[0] = PathSpec{{0, 1, 8, 9}};  // no link 1->8
    try {
      build_network(cfg);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::DanglingPathHop);
    }
  }
  SUBCASE("RF chain violation") {
    auto cfg = evaluation_scenario();
    for (auto& n : cfg.nodes)
      if (n.kind == NodeKind::Mbs) n.rf_chains = 2;  // F * R_ue = 4 > 2
    try {
      build_network(cfg);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::RfChainViolation);
    }
  }
  SUBCASE("arrival above the rate cap") {
    auto cfg = evaluation_scenario();
    cfg.flows[0].mean_arrival_bps = cfg.flows[0].max_rate_bps * 2.0;
    CHECK_THROWS_AS(build_network(cfg), Error);
  }
}

TEST_CASE("previous/next hop navigation") {
  const auto model = build_network(evaluation_scenario());
  // Path [0, 1, 5, 9] of flow 0.
  CHECK(previous_hop(model, 0, 1) == 0);
  CHECK(next_hop(model, 0, 1) == 5);
  CHECK(previous_hop(model, 0, 5) == 1);
  CHECK(next_hop(model, 0, 5) == 9);

  try {
    previous_hop(model, 0, 0);
    FAIL("MBS has no previous hop");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NodeNotOnPath);
  }
  try {
    next_hop(model, 0, 9);
    FAIL("UE has no next hop");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NodeNotOnPath);
  }
  CHECK_THROWS_AS(next_hop(model, 0, 999), Error);
}

TEST_CASE("paths start at the MBS and end at the flow's UE") {
  const auto model = build_network(evaluation_scenario());
  for (const auto& f : model.flows)
    for (const auto& p : f.paths) {
      CHECK(p.hops.front() == 0);
      CHECK(p.hops.back() == f.destination);
    }
}

TEST_CASE("building twice from the same config gives identical models") {
  const auto a = build_network(evaluation_scenario());
  const auto b = build_network(evaluation_scenario());
  REQUIRE(a.nodes.size() == b.nodes.size());
  REQUIRE(a.links.size() == b.links.size());
  for (size_t i = 0; i < a.links.size(); ++i)
    CHECK(a.links[i].distance_m == b.links[i].distance_m);
  for (size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].id == b.nodes[i].id);
    CHECK(a.nodes[i].max_power_w == b.nodes[i].max_power_w);
  }
}

TEST_CASE("positions drive distances when no override is given") {
  auto cfg = single_hop_scenario();
  cfg.links[0].distance_m = 0.0;  // derive from positions
  cfg.nodes[0].position = {0.0, 0.0};
  cfg.nodes[1].position = {30.0, 40.0};
  const auto model = build_network(cfg);
  CHECK(model.links[0].distance_m == doctest::Approx(50.0));
}
