#include "mmh/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mmh {

using nlohmann::json;

namespace {

NodeKind kind_from_string(const std::string& s) {
  if (s == "MBS" || s == "mbs") return NodeKind::Mbs;
  if (s == "SCBS" || s == "scbs") return NodeKind::Scbs;
  if (s == "UE" || s == "ue") return NodeKind::Ue;
  throw Error(Errc::BadConfig, "unknown node kind: " + s);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
  json j = json::parse(json_text);
  ScenarioConfig cfg;
  cfg.slot_duration_s = get_or(j, "slot_duration_s", 1e-3);

  for (const auto& jn : j.at("nodes")) {
    NodeSpec n;
    n.id = jn.at("id").get<int>();
    n.kind = kind_from_string(jn.at("kind").get<std::string>());
    n.antennas = get_or(jn, "antennas", 1);
    n.rf_chains = get_or(jn, "rf_chains", 1);
    if (jn.contains("max_power_dbm"))
      n.max_power_w = dbm_to_watts(jn.at("max_power_dbm").get<double>());
    else
      n.max_power_w = get_or(jn, "max_power_w", 0.0);
    if (jn.contains("position")) {
      n.position[0] = jn.at("position").at(0).get<double>();
      n.position[1] = jn.at("position").at(1).get<double>();
    }
    cfg.nodes.push_back(n);
  }

  if (j.contains("links")) {
    for (const auto& jl : j.at("links")) {
      LinkSpec l;
      l.from = jl.at("from").get<int>();
      l.to = jl.at("to").get<int>();
      l.distance_m = get_or(jl, "distance_m", 0.0);
      cfg.links.push_back(l);
    }
  }

  for (const auto& jf : j.at("flows")) {
    FlowSpec f;
    f.id = jf.at("id").get<int>();
    f.destination = jf.at("destination").get<int>();
    f.mean_arrival_bps = jf.contains("mean_arrival_gbps")
                             ? jf.at("mean_arrival_gbps").get<double>() * 1e9
                             : jf.at("mean_arrival_bps").get<double>();
    f.max_rate_bps = jf.contains("max_rate_gbps") ? jf.at("max_rate_gbps").get<double>() * 1e9
                                                  : jf.at("max_rate_bps").get<double>();
    f.n_select = get_or(jf, "n_select", 1);
    for (const auto& jp : jf.at("paths")) {
      PathSpec p;
      for (const auto& hop : jp) p.hops.push_back(hop.get<int>());
      f.paths.push_back(std::move(p));
    }
    cfg.flows.push_back(std::move(f));
  }

  if (j.contains("channel")) {
    const auto& jc = j.at("channel");
    auto& c = cfg.channel;
    c.bandwidth_hz = get_or(jc, "bandwidth_hz", c.bandwidth_hz);
    c.noise_psd_dbm_hz = get_or(jc, "noise_psd_dbm_hz", c.noise_psd_dbm_hz);
    c.noise_figure_db = get_or(jc, "noise_figure_db", c.noise_figure_db);
    c.side_lobe_gain = get_or(jc, "side_lobe_gain", c.side_lobe_gain);
    c.tx_beamwidth_rad = get_or(jc, "tx_beamwidth_rad", c.tx_beamwidth_rad);
    c.rx_beamwidth_rad = get_or(jc, "rx_beamwidth_rad", c.rx_beamwidth_rad);
    c.blockage_decay_per_m = get_or(jc, "blockage_decay_per_m", c.blockage_decay_per_m);
    c.estimation_error = get_or(jc, "estimation_error", c.estimation_error);
    c.interference_margin = get_or(jc, "interference_margin", c.interference_margin);
    if (!(c.side_lobe_gain > 0.0) || c.side_lobe_gain >= 1.0)
      throw Error(Errc::BadConfig, "side_lobe_gain must lie in (0, 1)");
    if (c.estimation_error < 0.0 || c.estimation_error > 1.0)
      throw Error(Errc::BadConfig, "estimation_error must lie in [0, 1]");
  }

  if (j.contains("urllc")) {
    const auto& ju = j.at("urllc");
    cfg.urllc.delay_bound_s = ju.contains("delay_bound_ms")
                                  ? ju.at("delay_bound_ms").get<double>() * 1e-3
                                  : get_or(ju, "delay_bound_s", cfg.urllc.delay_bound_s);
    cfg.urllc.violation_prob = get_or(ju, "violation_prob", cfg.urllc.violation_prob);
    if (!(cfg.urllc.delay_bound_s > 0.0))
      throw Error(Errc::BadConfig, "delay bound must be positive");
    if (!(cfg.urllc.violation_prob > 0.0) || cfg.urllc.violation_prob >= 1.0)
      throw Error(Errc::BadConfig, "violation_prob must lie in (0, 1)");
  }

  if (j.contains("scheduler")) {
    const auto& js = j.at("scheduler");
    auto& s = cfg.scheduler;
    s.nu = get_or(js, "nu", s.nu);
    s.long_period = get_or(js, "long_period_slots", s.long_period);
    if (js.contains("scheme")) s.scheme = scheme_from_string(js.at("scheme").get<std::string>());
    if (js.contains("utility")) {
      const std::string u = js.at("utility").get<std::string>();
      if (u == "Log1p" || u == "log1p")
        s.utility = UtilityForm::Log1p;
      else if (u == "PaperLog" || u == "log")
        s.utility = UtilityForm::PaperLog;
      else
        throw Error(Errc::BadConfig, "unknown utility form: " + u);
    }
    s.learning.kappa = get_or(js, "kappa", s.learning.kappa);
    if (js.contains("learning_exponents")) {
      const auto& e = js.at("learning_exponents");
      s.learning.a_utility = e.at(0).get<double>();
      s.learning.a_regret = e.at(1).get<double>();
      s.learning.a_prob = e.at(2).get<double>();
    }
    s.sca_tol = get_or(js, "sca_tol", s.sca_tol);
    s.sca_max_iter = get_or(js, "sca_max_iter", s.sca_max_iter);
    s.relay_rows_always_on = get_or(js, "relay_rows_always_on", s.relay_rows_always_on);
    s.mbs_delay_row = get_or(js, "mbs_delay_row", s.mbs_delay_row);
    s.windowed_delay_terms = get_or(js, "windowed_delay_terms", s.windowed_delay_terms);
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::BadConfig, "cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ScenarioConfig& cfg) {
  json j;
  j["slot_duration_s"] = cfg.slot_duration_s;
  for (const auto& n : cfg.nodes) {
    json jn;
    jn["id"] = n.id;
    jn["kind"] = to_string(n.kind);
    jn["antennas"] = n.antennas;
    jn["rf_chains"] = n.rf_chains;
    jn["max_power_w"] = n.max_power_w;
    jn["position"] = {n.position[0], n.position[1]};
    j["nodes"].push_back(jn);
  }
  for (const auto& l : cfg.links)
    j["links"].push_back({{"from", l.from}, {"to", l.to}, {"distance_m", l.distance_m}});
  for (const auto& f : cfg.flows) {
    json jf;
    jf["id"] = f.id;
    jf["destination"] = f.destination;
    jf["mean_arrival_bps"] = f.mean_arrival_bps;
    jf["max_rate_bps"] = f.max_rate_bps;
    jf["n_select"] = f.n_select;
    for (const auto& p : f.paths) jf["paths"].push_back(p.hops);
    j["flows"].push_back(jf);
  }
  json jc;
  jc["bandwidth_hz"] = cfg.channel.bandwidth_hz;
  jc["noise_psd_dbm_hz"] = cfg.channel.noise_psd_dbm_hz;
  jc["noise_figure_db"] = cfg.channel.noise_figure_db;
  jc["side_lobe_gain"] = cfg.channel.side_lobe_gain;
  jc["tx_beamwidth_rad"] = cfg.channel.tx_beamwidth_rad;
  jc["rx_beamwidth_rad"] = cfg.channel.rx_beamwidth_rad;
  jc["blockage_decay_per_m"] = cfg.channel.blockage_decay_per_m;
  jc["estimation_error"] = cfg.channel.estimation_error;
  jc["interference_margin"] = cfg.channel.interference_margin;
  j["channel"] = jc;
  j["urllc"] = {{"delay_bound_s", cfg.urllc.delay_bound_s},
                {"violation_prob", cfg.urllc.violation_prob}};
  json js;
  js["nu"] = cfg.scheduler.nu;
  js["long_period_slots"] = cfg.scheduler.long_period;
  js["scheme"] = to_string(cfg.scheduler.scheme);
  js["utility"] = cfg.scheduler.utility == UtilityForm::Log1p ? "Log1p" : "PaperLog";
  js["kappa"] = cfg.scheduler.learning.kappa;
  js["learning_exponents"] = {cfg.scheduler.learning.a_utility, cfg.scheduler.learning.a_regret,
                              cfg.scheduler.learning.a_prob};
  js["sca_tol"] = cfg.scheduler.sca_tol;
  js["sca_max_iter"] = cfg.scheduler.sca_max_iter;
  js["relay_rows_always_on"] = cfg.scheduler.relay_rows_always_on;
  js["mbs_delay_row"] = cfg.scheduler.mbs_delay_row;
  js["windowed_delay_terms"] = cfg.scheduler.windowed_delay_terms;
  j["scheduler"] = js;
  return j.dump(2);
}

ScenarioConfig default_scenario() {
  ScenarioConfig cfg;
  cfg.slot_duration_s = 1e-3;

  auto bs = [](int id, NodeKind kind, double power_dbm, double x, double y, int antennas,
               int chains) {
    NodeSpec n;
    n.id = id;
    n.kind = kind;
    n.antennas = antennas;
    n.rf_chains = chains;
    n.max_power_w = kind == NodeKind::Ue ? 0.0 : dbm_to_watts(power_dbm);
    n.position = {x, y};
    return n;
  };

  // Small-antenna setting: MBS at the origin, two UEs behind two relay tiers.
  cfg.nodes.push_back(bs(0, NodeKind::Mbs, 43.0, 0.0, 0.0, 8, 8));
  // First-tier relays (ids 1..4), second tier (ids 5..8).
  cfg.nodes.push_back(bs(1, NodeKind::Scbs, 30.0, 55.0, 30.0, 8, 2));
  cfg.nodes.push_back(bs(2, NodeKind::Scbs, 30.0, 60.0, -25.0, 8, 2));
  cfg.nodes.push_back(bs(3, NodeKind::Scbs, 30.0, 75.0, 45.0, 8, 2));
  cfg.nodes.push_back(bs(4, NodeKind::Scbs, 30.0, 85.0, -50.0, 8, 2));
  cfg.nodes.push_back(bs(5, NodeKind::Scbs, 30.0, 115.0, 25.0, 8, 2));
  cfg.nodes.push_back(bs(6, NodeKind::Scbs, 30.0, 120.0, -20.0, 8, 2));
  cfg.nodes.push_back(bs(7, NodeKind::Scbs, 30.0, 150.0, 40.0, 8, 2));
  cfg.nodes.push_back(bs(8, NodeKind::Scbs, 30.0, 165.0, -45.0, 8, 2));
  cfg.nodes.push_back(bs(9, NodeKind::Ue, 0.0, 175.0, 5.0, 2, 2));
  cfg.nodes.push_back(bs(10, NodeKind::Ue, 0.0, 178.0, -8.0, 2, 2));

  // One-hop distances 50-100 m; the two lower-numbered chains are shorter.
  auto link = [&](int a, int b, double d) { cfg.links.push_back({a, b, d}); };
  link(0, 1, 55.0);
  link(0, 2, 60.0);
  link(0, 3, 80.0);
  link(0, 4, 95.0);
  link(1, 5, 55.0);
  link(2, 6, 58.0);
  link(3, 7, 82.0);
  link(4, 8, 95.0);
  for (int ue : {9, 10}) {
    link(5, ue, 60.0);
    link(6, ue, 62.0);
    link(7, ue, 85.0);
    link(8, ue, 98.0);
  }
  // Direct MBS->UE links for the single-hop scheme.
  link(0, 9, 180.0);
  link(0, 10, 185.0);

  for (int f = 0; f < 2; ++f) {
    FlowSpec flow;
    flow.id = f;
    flow.destination = 9 + f;
    flow.mean_arrival_bps = 4.5e9;
    flow.max_rate_bps = 10e9;
    flow.n_select = 2;
    flow.paths.push_back({{0, 1, 5, flow.destination}});
    flow.paths.push_back({{0, 2, 6, flow.destination}});
    flow.paths.push_back({{0, 3, 7, flow.destination}});
    flow.paths.push_back({{0, 4, 8, flow.destination}});
    cfg.flows.push_back(std::move(flow));
  }
  return cfg;
}

}  // namespace mmh
