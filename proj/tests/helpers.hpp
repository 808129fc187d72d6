#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "oracle.hpp"
#include "ptra/energy.hpp"
#include "ptra/instance.hpp"

namespace testing {

inline std::vector<std::vector<oracle::Pt>> oracle_clusters(const ptra::Instance& inst) {
  std::vector<std::vector<oracle::Pt>> out;
  for (const auto& c : inst.clusters) {
    out.emplace_back();
    for (const auto& p : c) out.back().push_back({p.x, p.y});
  }
  return out;
}

/// Tour items (1-based) to 0-based cluster order.
inline std::vector<int> cluster_order(const ptra::Tour& tour) {
  std::vector<int> out;
  for (std::size_t i = 1; i < tour.order.size(); ++i) out.push_back(tour.order[i] - 1);
  return out;
}

inline double oracle_energy(const oracle::Table& t, const ptra::Instance& inst, const ptra::Tour& tour,
                            const std::vector<int>& chs) {
  return oracle::objective(t, {inst.start.x, inst.start.y}, oracle_clusters(inst), cluster_order(tour), chs);
}

inline oracle::Table table_with_omega(double omega) {
  oracle::Table t;
  t.omega = omega;
  return t;
}

/// Minimum over every CH combination for a fixed tour, by odometer enumeration.
inline double enumerate_best_chs(const oracle::Table& t, const ptra::Instance& inst, const ptra::Tour& tour) {
  const auto clusters = oracle_clusters(inst);
  const auto order = cluster_order(tour);
  std::vector<int> chs(clusters.size(), 0);
  double best = 1e300;
  while (true) {
    best = std::min(best, oracle::objective(t, {inst.start.x, inst.start.y}, clusters, order, chs));
    std::size_t k = 0;
    while (k < chs.size() && ++chs[k] == static_cast<int>(clusters[k].size())) chs[k++] = 0;
    if (k == chs.size()) break;
  }
  return best;
}

}  // namespace testing
