#pragma once

#include <random>

#include "mmh/common.hpp"

namespace mmh {

struct ChannelParams {
  double bandwidth_hz = 1e9;
  double noise_psd_dbm_hz = -174.0;
  double noise_figure_db = 10.0;        // not stated in the scenario tables; config-exposed
  double side_lobe_gain = 0.25;         // Gamma
  double tx_beamwidth_rad = kPi / 4.0;
  double rx_beamwidth_rad = kPi / 3.0;
  double blockage_decay_per_m = 0.006;
  double estimation_error = 0.0;        // tau in [0,1]
  double interference_margin = 0.0;     // I_max >= 0

  /// Receiver noise power over the full band, in watts (PSD + bandwidth + noise figure).
  double noise_power_w() const {
    return dbm_to_watts(noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz) + noise_figure_db);
  }
};

enum class LinkState { Los, Nlos };

struct LinkRealization {
  int from = -1;
  int to = -1;
  LinkState state = LinkState::Los;
  double path_loss_db = 0.0;
  double tx_gain = 1.0;
  double rx_gain = 1.0;
  double spatial_gain = 1.0;
  /// tx_gain * spatial_gain * rx_gain * 10^(-PL/10) / (1 + I_max); dimensionless.
  double effective_gain = 0.0;
};

/// 28 GHz urban distance-based path loss. LOS: 61.4 + 20 log10(d); NLOS: 72 + 29.2 log10(d).
double path_loss_db(double distance_m, LinkState state);

/// exp(-decay * d); the blockage/NLOS probability is the complement.
double los_probability(double distance_m, double decay_per_m);

/// Sectored pattern: (2*pi - (2*pi - bw) * gamma) / bw inside the main lobe, else gamma.
double antenna_gain(double offset_angle_rad, double beamwidth_rad, double side_lobe);

/// Draws LOS/NLOS and the small-scale gain |sqrt(1-tau^2) w + tau w_err|^2 with
/// w, w_err ~ CN(0,1), then combines with path loss and aligned-beam antenna gains.
LinkRealization sample_link(int from, int to, double distance_m, const ChannelParams& params,
                            std::mt19937_64& rng);

/// Shannon rate w * log2(1 + p * effective_gain / noise) in bits/second.
double link_rate_bps(double power_w, const LinkRealization& real, const ChannelParams& params);

}  // namespace mmh
