#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace ptra {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(Point2 a, Point2 b) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

using Cluster = std::vector<Point2>;

/// A start position plus K clusters of ground nodes, all in meters.
///
/// Item 0 of the pointer network's input is the start; item k (1-based) is
/// cluster k-1 of `clusters`.
struct Instance {
  double area_m = 2000.0;
  std::uint64_t seed = 0;
  Point2 start{};
  std::vector<Cluster> clusters;

  std::size_t cluster_count() const noexcept { return clusters.size(); }
  /// Number of pointer-network items (start + clusters).
  std::size_t item_count() const noexcept { return clusters.size() + 1; }

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Visiting order over items {0..K}. order[0] is always 0 (the start); the
/// return edge to the start is implicit.
struct Tour {
  std::vector<int> order;

  friend bool operator==(const Tour&, const Tour&) = default;
  friend auto operator<=>(const Tour&, const Tour&) = default;
};

/// Throws ValidationError if the instance breaks its invariants.
void validate(const Instance& instance);

/// Throws InputError unless `tour` is a permutation of {0..K} starting at 0.
void validate_tour(const Tour& tour, std::size_t cluster_count);

/// Throws InputError unless there is exactly one in-range CH per cluster.
void validate_ch_choices(const Instance& instance, std::span<const int> ch_choices);

/// Identity order (start, 1, 2, ..., K).
Tour identity_tour(std::size_t cluster_count);

Point2 centroid(const Cluster& cluster);

/// Seeded generator: cluster means uniform over [0, area]^2, nodes isotropic
/// Gaussian around each mean, clamped to the field. Start is (0, 0).
Instance generate_instance(std::size_t k, std::size_t n, double area_m, double std_m,
                           std::uint64_t seed);

/// Copy with every coordinate divided by area_m, for network inputs.
Instance normalized(const Instance& instance);

void save_instance(const Instance& instance, const std::filesystem::path& path);
Instance load_instance(const std::filesystem::path& path);

}  // namespace ptra
