#include "mmh/channel.hpp"

#include <cmath>

namespace mmh {

double path_loss_db(double distance_m, LinkState state) {
  if (!(distance_m > 0.0))
    throw Error(Errc::NonPositiveDistance, "path loss needs distance > 0");
  const double logd = std::log10(distance_m);
  return state == LinkState::Los ? 61.4 + 20.0 * logd : 72.0 + 29.2 * logd;
}

double los_probability(double distance_m, double decay_per_m) {
  return std::exp(-decay_per_m * distance_m);
}

double antenna_gain(double offset_angle_rad, double beamwidth_rad, double side_lobe) {
  if (!(beamwidth_rad > 0.0) || beamwidth_rad > 2.0 * kPi)
    throw Error(Errc::InvalidBeamwidth, "beamwidth must lie in (0, 2*pi]");
  if (std::abs(offset_angle_rad) <= beamwidth_rad / 2.0)
    return (2.0 * kPi - (2.0 * kPi - beamwidth_rad) * side_lobe) / beamwidth_rad;
  return side_lobe;
}

LinkRealization sample_link(int from, int to, double distance_m, const ChannelParams& params,
                            std::mt19937_64& rng) {
  LinkRealization real;
  real.from = from;
  real.to = to;

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double p_los = los_probability(distance_m, params.blockage_decay_per_m);
  real.state = unif(rng) < p_los ? LinkState::Los : LinkState::Nlos;
  real.path_loss_db = path_loss_db(distance_m, real.state);

  // Aligned main lobes after the beam-alignment phase.
  real.tx_gain = antenna_gain(0.0, params.tx_beamwidth_rad, params.side_lobe_gain);
  real.rx_gain = antenna_gain(0.0, params.rx_beamwidth_rad, params.side_lobe_gain);

  // Estimated small-scale coefficient: sqrt(1-tau^2) w + tau w_err, w and
  // w_err standard complex Gaussians. tau = 0 reduces to perfect CSI.
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const double wr = normal(rng), wi = normal(rng);
  const double er = normal(rng), ei = normal(rng);
  const double tau = params.estimation_error;
  const double a = std::sqrt(1.0 - tau * tau);
  const double hr = a * wr + tau * er;
  const double hi = a * wi + tau * ei;
  real.spatial_gain = hr * hr + hi * hi;

  real.effective_gain = real.tx_gain * real.spatial_gain * real.rx_gain *
                        db_to_linear(-real.path_loss_db) / (1.0 + params.interference_margin);
  return real;
}

double link_rate_bps(double power_w, const LinkRealization& real, const ChannelParams& params) {
  if (power_w < 0.0) throw Error(Errc::NegativePower, "negative transmit power");
  const double snr = power_w * real.effective_gain / params.noise_power_w();
  return params.bandwidth_hz * std::log2(1.0 + snr);
}

}  // namespace mmh
