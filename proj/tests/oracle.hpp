// Reference formulas written out term by term from the model definition,
// independent of the library's implementation.
#pragma once

#include <cmath>
#include <vector>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

struct Table {
  double eps_fs = 10e-12, eps_mp = 0.0013e-12, e_elec = 50e-9, l = 4000.0;
  double p_ch_dbm = 21.0, bw = 1e6, n0 = -174.0, fc = 2e9, alpha = 3.0, h = 50.0;
  double mu_los = 1.0, mu_nlos = 20.0, beta = 0.03, eta = 10.0, c = 3e8;
  double v = 15.0, vmax = 15.0, m = 0.5, r = 0.2, np = 4.0, pmax = 5.0, pidle = 0.0, pcom = 0.0126;
  double g = 9.81, rho = 1.225, omega = 0.5;
};

inline double plos(const Table& t) { return 1.0 / (1.0 + t.eta * std::exp(-t.beta * (90.0 - t.eta))); }

inline double loss_db(const Table& t) {
  const double k0 = 10.0 * t.alpha * std::log10(4.0 * kPi * t.fc * t.h / t.c);
  const double p = plos(t);
  return k0 + p * t.mu_los + (1.0 - p) * t.mu_nlos;
}

inline double rate(const Table& t) {
  const double noise_dbm = t.n0 + 10.0 * std::log10(t.bw);
  const double snr = std::pow(10.0, (t.p_ch_dbm - loss_db(t) - noise_dbm) / 10.0);
  return t.bw * std::log2(1.0 + snr);
}

inline double p_hover(const Table& t) {
  const double w = t.m * t.g;
  return std::sqrt(w * w * w / (2.0 * kPi * t.r * t.r * t.np * t.rho));
}

inline double p_move(const Table& t) { return (t.pmax - t.pidle) * t.v / t.vmax + t.pidle; }

inline double tx(const Table& t, double d) {
  const double d0 = std::sqrt(t.eps_fs / t.eps_mp);
  return d <= d0 ? t.l * t.e_elec + t.l * t.eps_fs * d * d
                 : t.l * t.e_elec + t.l * t.eps_mp * d * d * d * d;
}

inline double p_ch_watts(const Table& t) { return std::pow(10.0, t.p_ch_dbm / 10.0) / 1000.0; }

struct Pt {
  double x, y;
};
inline double dist(Pt a, Pt b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Full weighted objective of a closed tour visiting `order` (0-based cluster
/// ids) with CH index `chs[k]` for cluster k.
inline double objective(const Table& t, Pt start, const std::vector<std::vector<Pt>>& clusters,
                        const std::vector<int>& order, const std::vector<int>& chs,
                        double* ground = nullptr, double* uav = nullptr) {
  double eg = 0.0, hover = 0.0, length = 0.0;
  Pt here = start;
  for (int k : order) {
    const auto& cl = clusters[static_cast<std::size_t>(k)];
    const Pt ch = cl[static_cast<std::size_t>(chs[static_cast<std::size_t>(k)])];
    for (std::size_t n = 0; n < cl.size(); ++n) {
      if (static_cast<int>(n) == chs[static_cast<std::size_t>(k)]) continue;
      eg += tx(t, dist(cl[n], ch));
      eg += t.l * t.e_elec;
    }
    const double bits = static_cast<double>(cl.size() - 1) * t.l;
    eg += p_ch_watts(t) * bits / rate(t);
    hover += bits / rate(t) * (p_hover(t) + t.pcom);
    length += dist(here, ch);
    here = ch;
  }
  length += dist(here, start);
  const double flight = length / t.v * (p_hover(t) + p_move(t));
  if (ground) *ground = eg;
  if (uav) *uav = flight + hover;
  return t.omega * eg + (1.0 - t.omega) * (flight + hover);
}

inline bool rel_close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) || std::abs(a - b) < 1e-300;
}

}  // namespace oracle
