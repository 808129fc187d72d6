#pragma once

#include <cstddef>
#include <vector>

#include "ptra/energy.hpp"
#include "ptra/instance.hpp"

namespace ptra {

/// Per-instance cost terms that do not depend on the visiting order.
///
/// node_cost(k, n) is what the objective charges for making node n the CH of
/// cluster k: omega * ground energy + (1 - omega) * hover energy. Flight is
/// charged separately per meter flown.
class CostTable {
 public:
  CostTable(const EnergyParams& params, const Instance& instance);

  double node_cost(std::size_t cluster, std::size_t node) const {
    return node_costs_[cluster][node];
  }
  /// (1 - omega) * flight energy over `meters`.
  double flight_cost(double meters) const { return flight_per_meter_ * meters; }

  const EnergyParams& params() const noexcept { return params_; }
  const Instance& instance() const noexcept { return instance_; }

 private:
  EnergyParams params_;
  Instance instance_;
  std::vector<std::vector<double>> node_costs_;
  double flight_per_meter_ = 0.0;
};

/// One vertex of the layered search graph.
struct GraphNode {
  std::size_t layer = 0;
  int cluster = -1;  // -1 for the start and its end copy
  int ch = -1;       // node index inside the cluster
  Point2 position{};
  double arrival_cost = 0.0;  // hover + ground terms charged on entry
};

/// K+2 layers: {start}, the clusters in tour order, {start copy}.
class LayeredGraph {
 public:
  LayeredGraph(const CostTable& costs, const Tour& tour);

  std::size_t layer_count() const noexcept { return layer_offsets_.size() - 1; }
  std::size_t layer_size(std::size_t layer) const {
    return layer_offsets_[layer + 1] - layer_offsets_[layer];
  }
  /// Flat id of node `index` in `layer`.
  std::size_t id(std::size_t layer, std::size_t index) const {
    return layer_offsets_[layer] + index;
  }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  const GraphNode& node(std::size_t id) const { return nodes_[id]; }
  std::size_t start_id() const noexcept { return 0; }
  std::size_t end_id() const noexcept { return nodes_.size() - 1; }

  const CostTable& costs() const noexcept { return *costs_; }
  const Tour& tour() const noexcept { return tour_; }

 private:
  const CostTable* costs_;
  Tour tour_;
  std::vector<GraphNode> nodes_;
  std::vector<std::size_t> layer_offsets_;
};

/// Weighted energy of moving from `from` (layer i) to `to` (layer i+1):
/// flight over the horizontal distance plus the destination's arrival cost.
/// Throws InputError for any other pair of layers.
double edge_cost(const LayeredGraph& graph, std::size_t from, std::size_t to);

/// Straight-line flight energy from `node` back to the start copy.
double heuristic(const LayeredGraph& graph, std::size_t node);

struct ChSelection {
  std::vector<int> ch_choices;  // indexed by cluster
  EnergyBreakdown energy;       // evaluate_solution of (tour, ch_choices)
  double path_cost = 0.0;       // sum of edge costs along the path
  std::size_t expansions = 0;   // nodes popped from OPEN (A* only)
};

/// CH selection for a fixed visiting order by A* over the layered graph.
ChSelection astar_select_chs(const CostTable& costs, const Tour& tour);
ChSelection astar_select_chs(const EnergyParams& params, const Instance& instance,
                             const Tour& tour);

/// Same problem solved by a forward dynamic program over the layers.
ChSelection dp_select_chs(const CostTable& costs, const Tour& tour);
ChSelection dp_select_chs(const EnergyParams& params, const Instance& instance,
                          const Tour& tour);

/// Exhaustive search over every order and every CH combination.
/// Ties resolve to the lexicographically smallest (tour, ch_choices).
/// Throws SizeError when K > 8 or the CH combination count exceeds 1e6.
Solution brute_force_solve(const EnergyParams& params, const Instance& instance);

}  // namespace ptra
