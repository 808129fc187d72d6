#pragma once

#include <span>
#include <vector>

#include "ptra/instance.hpp"

namespace ptra {

/// Physical constants of the UAV / ground-network energy model, SI units
/// unless the name says otherwise. Defaults are the reference scenario.
struct EnergyParams {
  // first-order radio model
  double eps_fs = 10e-12;     // J/bit/m^2
  double eps_mp = 0.0013e-12;  // J/bit/m^4
  double e_elec = 50e-9;      // J/bit
  double msg_bits = 4000.0;   // bits per member message

  // ground-to-air link
  double p_ch_dbm = 21.0;  // total CH transmit power
  int n_per_cluster = 20;
  double bandwidth_hz = 1e6;
  double noise_dbm_hz = -174.0;
  double carrier_hz = 2e9;
  double alpha = 3.0;
  double height_m = 50.0;
  double mu_los_db = 1.0;
  double mu_nlos_db = 20.0;
  double beta = 0.03;
  double eta = 10.0;
  double light_speed_ms = 3e8;

  // rotorcraft
  double v_uav_ms = 15.0;
  double v_max_ms = 15.0;
  double mass_kg = 0.5;
  double rotor_radius_m = 0.2;
  int n_props = 4;
  double p_max_w = 5.0;
  double p_idle_w = 0.0;
  double p_com_w = 0.0126;
  double gravity_ms2 = 9.81;
  double air_density_kgm3 = 1.225;

  /// Weight of ground energy in the objective; UAV energy gets 1 - omega.
  double omega = 0.5;

  /// Throws InputError on the first violated invariant.
  void validate() const;

  friend bool operator==(const EnergyParams&, const EnergyParams&) = default;
};

struct EnergyBreakdown {
  double e_ground_j = 0.0;
  double e_uav_flight_j = 0.0;
  double e_uav_hover_j = 0.0;
  double e_total_weighted_j = 0.0;

  double e_uav_j() const noexcept { return e_uav_flight_j + e_uav_hover_j; }
};

// Air-to-ground channel.

/// LoS probability at an arbitrary CH-to-UAV slant distance (>= height).
double los_probability_at(const EnergyParams& p, double slant_distance_m);
/// LoS probability for a UAV hovering straight above its CH (elevation 90 deg).
double los_probability(const EnergyParams& p);
/// Free-space reference loss K0 in dB.
double reference_path_loss_db(const EnergyParams& p);
double average_path_loss_db(const EnergyParams& p);
/// Noise power integrated over the bandwidth, in dBm.
double noise_power_dbm(const EnergyParams& p);
double snr_linear(const EnergyParams& p);
double data_rate_bps(const EnergyParams& p);

double dbm_to_watts(double dbm) noexcept;

// UAV.

double hover_power_w(const EnergyParams& p);
/// Energy spent hovering while `data_bits` are uplinked.
double hover_energy_j(const EnergyParams& p, double data_bits);
double move_power_w(const EnergyParams& p);
/// Cruise energy over a horizontal path; hover power is drawn during cruise too.
double flight_energy_j(const EnergyParams& p, double tour_length_m);

// Ground network.

/// Distance at which the amplifier switches from free-space to multipath.
double crossover_distance_m(const EnergyParams& p);
double member_tx_energy_j(const EnergyParams& p, double distance_m);
double ch_rx_energy_j(const EnergyParams& p);
/// CH-to-UAV uplink energy for a cluster of p.n_per_cluster nodes.
double ch_uplink_energy_j(const EnergyParams& p);
/// CH-to-UAV uplink energy when the CH relays `member_count` messages.
double ch_uplink_energy_j(const EnergyParams& p, std::size_t member_count);
/// Member transmit + CH receive + CH uplink for one cluster with CH `ch_index`.
double cluster_ground_energy_j(const EnergyParams& p, std::span<const Point2> cluster,
                               int ch_index);
/// UAV hover energy at a cluster of `cluster_size` nodes.
double cluster_hover_energy_j(const EnergyParams& p, std::size_t cluster_size);

// Objective.

/// Closed tour length through the CH positions.
double tour_length_m(const Instance& instance, const Tour& tour, std::span<const int> ch_choices);

/// Weighted objective for a closed tour and one CH per cluster. `ch_choices`
/// is indexed by cluster (0-based), not by tour position.
EnergyBreakdown evaluate_solution(const EnergyParams& p, const Instance& instance,
                                  const Tour& tour, std::span<const int> ch_choices);

/// Position of cluster `cluster`'s CH.
inline Point2 ch_position(const Instance& instance, std::size_t cluster, int ch_index) {
  return instance.clusters[cluster][static_cast<std::size_t>(ch_index)];
}

/// Tour + CH choice + energy, the common output of every solver.
struct Solution {
  Tour tour;
  std::vector<int> ch_choices;
  EnergyBreakdown energy;
  double tour_length_m = 0.0;
};

/// Evaluates and packages (tour, chs).
Solution make_solution(const EnergyParams& p, const Instance& instance, Tour tour,
                       std::vector<int> ch_choices);

}  // namespace ptra
