#include "ptra/energy.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ptra/errors.hpp"

namespace ptra {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InputError(std::string("EnergyParams: ") + what);
}

}  // namespace

void EnergyParams::validate() const {
  auto finite_pos = [](double v) { return std::isfinite(v) && v > 0.0; };
  require(finite_pos(eps_fs), "eps_fs must be > 0");
  require(finite_pos(eps_mp), "eps_mp must be > 0");
  require(finite_pos(e_elec), "e_elec must be > 0");
  require(std::isfinite(msg_bits) && msg_bits >= 0.0, "msg_bits must be >= 0");
  require(std::isfinite(p_ch_dbm), "p_ch_dbm must be finite");
  require(n_per_cluster >= 1, "n_per_cluster must be >= 1");
  require(finite_pos(bandwidth_hz), "bandwidth_hz must be > 0");
  require(std::isfinite(noise_dbm_hz), "noise_dbm_hz must be finite");
  require(finite_pos(carrier_hz), "carrier_hz must be > 0");
  require(std::isfinite(alpha) && alpha >= 2.0, "alpha must be >= 2");
  require(finite_pos(height_m), "height_m must be > 0");
  require(std::isfinite(mu_los_db) && std::isfinite(mu_nlos_db), "mu_los_db/mu_nlos_db must be finite");
  require(std::isfinite(beta) && beta >= 0.0, "beta must be >= 0");
  require(finite_pos(eta), "eta must be > 0");
  require(finite_pos(light_speed_ms), "light_speed_ms must be > 0");
  require(finite_pos(v_uav_ms), "v_uav_ms must be > 0");
  require(finite_pos(v_max_ms), "v_max_ms must be > 0");
  require(v_uav_ms <= v_max_ms, "v_uav_ms must not exceed v_max_ms");
  require(finite_pos(mass_kg), "mass_kg must be > 0");
  require(finite_pos(rotor_radius_m), "rotor_radius_m must be > 0");
  require(n_props >= 1, "n_props must be >= 1");
  require(finite_pos(p_max_w), "p_max_w must be > 0");
  require(std::isfinite(p_idle_w) && p_idle_w >= 0.0, "p_idle_w must be >= 0");
  require(finite_pos(p_com_w), "p_com_w must be > 0");
  require(finite_pos(gravity_ms2), "gravity_ms2 must be > 0");
  require(finite_pos(air_density_kgm3), "air_density_kgm3 must be > 0");
  require(omega >= 0.0 && omega <= 1.0, "omega must lie in [0, 1]");
}

double los_probability_at(const EnergyParams& p, double slant_distance_m) {
  if (!(slant_distance_m >= p.height_m))
    throw InputError("los_probability_at: slant distance below flight height");
  const double elevation_deg = 180.0 / std::numbers::pi * std::asin(p.height_m / slant_distance_m);
  return 1.0 / (1.0 + p.eta * std::exp(-p.beta * (elevation_deg - p.eta)));
}

double los_probability(const EnergyParams& p) {
  // The hovering point is straight above the CH, so the elevation is exactly 90 deg.
  return 1.0 / (1.0 + p.eta * std::exp(-p.beta * (90.0 - p.eta)));
}

double reference_path_loss_db(const EnergyParams& p) {
  return 10.0 * p.alpha *
         std::log10(4.0 * std::numbers::pi * p.carrier_hz * p.height_m / p.light_speed_ms);
}

double average_path_loss_db(const EnergyParams& p) {
  const double p_los = los_probability(p);
  const double k0 = reference_path_loss_db(p);
  return p_los * (k0 + p.mu_los_db) + (1.0 - p_los) * (k0 + p.mu_nlos_db);
}

double noise_power_dbm(const EnergyParams& p) {
  return p.noise_dbm_hz + 10.0 * std::log10(p.bandwidth_hz);
}

double dbm_to_watts(double dbm) noexcept { return std::pow(10.0, dbm / 10.0) * 1e-3; }

double snr_linear(const EnergyParams& p) {
  const double snr_db = p.p_ch_dbm - average_path_loss_db(p) - noise_power_dbm(p);
  return std::pow(10.0, snr_db / 10.0);
}

double data_rate_bps(const EnergyParams& p) {
  return p.bandwidth_hz * std::log2(1.0 + snr_linear(p));
}

double hover_power_w(const EnergyParams& p) {
  const double weight = p.mass_kg * p.gravity_ms2;
  return std::sqrt(weight * weight * weight /
                   (2.0 * std::numbers::pi * p.rotor_radius_m * p.rotor_radius_m * p.n_props *
                    p.air_density_kgm3));
}

double hover_energy_j(const EnergyParams& p, double data_bits) {
  if (!(data_bits >= 0.0)) throw InputError("hover_energy_j: data_bits must be >= 0");
  // hovering time == uplink time
  return data_bits / data_rate_bps(p) * (hover_power_w(p) + p.p_com_w);
}

double move_power_w(const EnergyParams& p) {
  return (p.p_max_w - p.p_idle_w) / p.v_max_ms * p.v_uav_ms + p.p_idle_w;
}

double flight_energy_j(const EnergyParams& p, double tour_length_m) {
  if (!(tour_length_m >= 0.0)) throw InputError("flight_energy_j: negative length");
  return tour_length_m / p.v_uav_ms * (hover_power_w(p) + move_power_w(p));
}

double crossover_distance_m(const EnergyParams& p) { return std::sqrt(p.eps_fs / p.eps_mp); }

double member_tx_energy_j(const EnergyParams& p, double distance_m) {
  if (!(distance_m >= 0.0)) throw InputError("member_tx_energy_j: negative distance");
  const double d2 = distance_m * distance_m;
  const double amplifier =
      distance_m <= crossover_distance_m(p) ? p.eps_fs * d2 : p.eps_mp * d2 * d2;
  return p.msg_bits * p.e_elec + p.msg_bits * amplifier;
}

double ch_rx_energy_j(const EnergyParams& p) { return p.msg_bits * p.e_elec; }

double ch_uplink_energy_j(const EnergyParams& p, std::size_t member_count) {
  return dbm_to_watts(p.p_ch_dbm) * static_cast<double>(member_count) * p.msg_bits /
         data_rate_bps(p);
}

double ch_uplink_energy_j(const EnergyParams& p) {
  return ch_uplink_energy_j(p, static_cast<std::size_t>(p.n_per_cluster - 1));
}

double cluster_ground_energy_j(const EnergyParams& p, std::span<const Point2> cluster,
                               int ch_index) {
  if (ch_index < 0 || static_cast<std::size_t>(ch_index) >= cluster.size())
    throw InputError("cluster_ground_energy_j: ch_index " + std::to_string(ch_index) +
                     " out of range for cluster of " + std::to_string(cluster.size()));
  const Point2 ch = cluster[static_cast<std::size_t>(ch_index)];
  const double rx = ch_rx_energy_j(p);
  double total = 0.0;
  for (std::size_t n = 0; n < cluster.size(); ++n) {
    if (n == static_cast<std::size_t>(ch_index)) continue;
    total += member_tx_energy_j(p, distance(cluster[n], ch)) + rx;
  }
  return total + ch_uplink_energy_j(p, cluster.size() - 1);
}

double cluster_hover_energy_j(const EnergyParams& p, std::size_t cluster_size) {
  const double payload_bits = static_cast<double>(cluster_size - 1) * p.msg_bits;
  return hover_energy_j(p, payload_bits);
}

double tour_length_m(const Instance& instance, const Tour& tour, std::span<const int> ch_choices) {
  auto position = [&](int item) {
    return item == 0 ? instance.start
                     : ch_position(instance, static_cast<std::size_t>(item - 1),
                                   ch_choices[static_cast<std::size_t>(item - 1)]);
  };
  double length = 0.0;
  for (std::size_t t = 0; t < tour.order.size(); ++t) {
    const int from = tour.order[t];
    const int to = t + 1 < tour.order.size() ? tour.order[t + 1] : tour.order.front();
    length += distance(position(from), position(to));
  }
  return length;
}

EnergyBreakdown evaluate_solution(const EnergyParams& p, const Instance& instance,
                                  const Tour& tour, std::span<const int> ch_choices) {
  validate_tour(tour, instance.cluster_count());
  validate_ch_choices(instance, ch_choices);

  EnergyBreakdown out;
  for (std::size_t k = 0; k < instance.cluster_count(); ++k) {
    out.e_ground_j += cluster_ground_energy_j(p, instance.clusters[k], ch_choices[k]);
    out.e_uav_hover_j += cluster_hover_energy_j(p, instance.clusters[k].size());
  }
  out.e_uav_flight_j = flight_energy_j(p, tour_length_m(instance, tour, ch_choices));
  out.e_total_weighted_j =
      p.omega * out.e_ground_j + (1.0 - p.omega) * (out.e_uav_flight_j + out.e_uav_hover_j);
  return out;
}

Solution make_solution(const EnergyParams& p, const Instance& instance, Tour tour,
                       std::vector<int> ch_choices) {
  Solution s;
  s.energy = evaluate_solution(p, instance, tour, ch_choices);
  s.tour_length_m = tour_length_m(instance, tour, ch_choices);
  s.tour = std::move(tour);
  s.ch_choices = std::move(ch_choices);
  return s;
}

}  // namespace ptra
