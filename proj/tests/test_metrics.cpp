#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "mmh/metrics.hpp"
#include "mmh/scheduler.hpp"
#include "mmh/sweep.hpp"

using namespace mmh;

TEST_CASE("ccdf counting") {
  const std::vector<float> samples = {1.0f, 2.0f, 3.0f};
  CHECK(ccdf(samples, {2.0})[0] == doctest::Approx(1.0 / 3.0));
  CHECK(ccdf(samples, {0.5})[0] == doctest::Approx(1.0));
  CHECK(ccdf(samples, {3.5})[0] == doctest::Approx(0.0));
  // Monotone nonincreasing over any threshold grid.
  const auto curve = ccdf(samples, {0.0, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0});
  for (size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] <= curve[i - 1]);
  CHECK_THROWS_AS(ccdf({}, {1.0}), Error);
}

TEST_CASE("tail probabilities below resolution are flagged, not zeroed") {
  CHECK(format_tail_probability(0.0, 1000).find("<0.001") == 0);
  CHECK(format_tail_probability(0.0005, 1000).find("<0.001") == 0);
  CHECK(format_tail_probability(0.25, 1000).find("0.25") == 0);
}

namespace {

NetworkModel tiny_model() {
  auto cfg = default_scenario();
  return build_network(cfg);
}

}  // namespace

TEST_CASE("per-hop delays from a queue trace") {
  const auto model = tiny_model();
  const double lambda_slot = model.flows[0].mean_arrival_bps * model.slot_duration_s;

  SUBCASE("constant queue of five slot-arrivals means five slots of delay") {
    std::vector<QueueRow> rows;
    for (long t = 0; t < 100; ++t) rows.push_back({t, 0, 1, 5.0 * lambda_slot, 0.0});
    const auto hd = per_hop_delays(rows, model);
    CHECK(hd.avg_delay_s.at({0, 1}) == doctest::Approx(5e-3));
    for (float s : hd.samples_s) CHECK(s == doctest::Approx(5e-3));
  }

  SUBCASE("empty trace produces no samples; empty queues produce zero delays") {
    const auto hd = per_hop_delays({}, model);
    CHECK(hd.samples_s.empty());
    std::vector<QueueRow> rows = {{0, 0, 1, 0.0, 0.0}};
    const auto hd2 = per_hop_delays(rows, model);
    CHECK(hd2.avg_delay_s.at({0, 1}) == 0.0);
  }

  SUBCASE("end-to-end delay is the sum of the per-hop averages") {
    std::vector<QueueRow> rows;
    for (long t = 0; t < 50; ++t) {
      rows.push_back({t, 0, 0, 2.0 * lambda_slot, 0.0});
      rows.push_back({t, 0, 1, 1.0 * lambda_slot, 0.0});
      rows.push_back({t, 0, 5, 3.0 * lambda_slot, 0.0});
    }
    const auto hd = per_hop_delays(rows, model);
    const double e2e =
        hd.avg_delay_s.at({0, 0}) + hd.avg_delay_s.at({0, 1}) + hd.avg_delay_s.at({0, 5});
    CHECK(e2e == doctest::Approx(6e-3));
  }
}

TEST_CASE("summary serialization carries the frozen keys") {
  RunSummary s;
  s.scheme = "Proposed";
  s.seed = 42;
  s.slots = 100;
  s.delay_samples_s = {0.001f, 0.002f};
  s.avg_mbs_queue_bits = {1.0};
  s.throughput_bps = {2.0};
  s.arrival_bps = {3.0};
  const auto text = summary_to_json(s);
  for (const char* key :
       {"scheme", "seed", "violation_prob", "delay_ccdf", "throughput_bps", "psi_estimate",
        "sca_monotonicity_violations", "violation_prob_display"})
    CHECK(text.find(key) != std::string::npos);
}

TEST_CASE("single-cell sweep equals a direct run") {
  auto cfg = default_scenario();
  SweepGrid grid;
  grid.schemes = {"Proposed"};
  grid.seeds = {5};
  grid.slots = 400;
  const auto report = run_sweep(cfg, grid, 400, 1, "out_test_sweep");
  REQUIRE(report.cells.size() == 1);
  REQUIRE_FALSE(report.cells[0].failed);

  EpisodeOptions opt;
  opt.slots = 400;
  opt.seed = 5;
  const auto direct = run_episode(cfg, opt);
  CHECK(report.cells[0].summary.mean_one_hop_delay_s ==
        doctest::Approx(direct.summary.mean_one_hop_delay_s));
  CHECK(report.cells[0].summary.violation_prob == doctest::Approx(direct.summary.violation_prob));
  CHECK(report.cells[0].summary.throughput_bps[0] ==
        doctest::Approx(direct.summary.throughput_bps[0]));
  std::filesystem::remove_all("out_test_sweep");
}

TEST_CASE("grid parsing") {
  const auto grid = parse_grid(R"({"schemes":["Proposed","Baseline3"],"seeds":[1,2,3],
                                   "arrival_gbps":[2.0,4.5],"slots":1234})");
  CHECK(grid.schemes.size() == 2);
  CHECK(grid.seeds.size() == 3);
  CHECK(grid.arrival_gbps.size() == 2);
  CHECK(grid.slots == 1234);
  CHECK(grid.nu.empty());
}
