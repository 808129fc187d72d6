#include "ptra/route_search.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <tuple>

#include "ptra/errors.hpp"

namespace ptra {

CostTable::CostTable(const EnergyParams& params, const Instance& instance)
    : params_(params), instance_(instance) {
  params_.validate();
  validate(instance_);
  const double w = params_.omega;
  node_costs_.resize(instance_.cluster_count());
  for (std::size_t k = 0; k < instance_.cluster_count(); ++k) {
    const Cluster& cluster = instance_.clusters[k];
    const double hover = cluster_hover_energy_j(params_, cluster.size());
    node_costs_[k].resize(cluster.size());
    for (std::size_t n = 0; n < cluster.size(); ++n)
      node_costs_[k][n] =
          w * cluster_ground_energy_j(params_, cluster, static_cast<int>(n)) + (1.0 - w) * hover;
  }
  flight_per_meter_ = (1.0 - w) * flight_energy_j(params_, 1.0);
}

LayeredGraph::LayeredGraph(const CostTable& costs, const Tour& tour) : costs_(&costs), tour_(tour) {
  const Instance& inst = costs.instance();
  validate_tour(tour_, inst.cluster_count());

  layer_offsets_.push_back(0);
  nodes_.push_back({0, -1, -1, inst.start, 0.0});
  layer_offsets_.push_back(nodes_.size());
  for (std::size_t t = 1; t < tour_.order.size(); ++t) {
    const auto k = static_cast<std::size_t>(tour_.order[t] - 1);
    for (std::size_t n = 0; n < inst.clusters[k].size(); ++n)
      nodes_.push_back({t, static_cast<int>(k), static_cast<int>(n), inst.clusters[k][n],
                        costs.node_cost(k, n)});
    layer_offsets_.push_back(nodes_.size());
  }
  nodes_.push_back({tour_.order.size(), -1, -1, inst.start, 0.0});
  layer_offsets_.push_back(nodes_.size());
}

double edge_cost(const LayeredGraph& graph, std::size_t from, std::size_t to) {
  const GraphNode& a = graph.node(from);
  const GraphNode& b = graph.node(to);
  if (b.layer != a.layer + 1)
    throw InputError("edge_cost: nodes in layers " + std::to_string(a.layer) + " and " +
                     std::to_string(b.layer) + " are not adjacent");
  return graph.costs().flight_cost(distance(a.position, b.position)) + b.arrival_cost;
}

double heuristic(const LayeredGraph& graph, std::size_t node) {
  const GraphNode& m = graph.node(node);
  const GraphNode& goal = graph.node(graph.end_id());
  return graph.costs().flight_cost(distance(m.position, goal.position));
}

namespace {

ChSelection finish(const CostTable& costs, const LayeredGraph& graph,
                   const std::vector<std::size_t>& parent, double path_cost) {
  ChSelection out;
  out.ch_choices.assign(costs.instance().cluster_count(), -1);
  for (std::size_t v = parent[graph.end_id()]; v != graph.start_id(); v = parent[v]) {
    const GraphNode& n = graph.node(v);
    out.ch_choices[static_cast<std::size_t>(n.cluster)] = n.ch;
  }
  out.path_cost = path_cost;
  out.energy = evaluate_solution(costs.params(), costs.instance(), graph.tour(), out.ch_choices);
  return out;
}

}  // namespace

ChSelection astar_select_chs(const CostTable& costs, const Tour& tour) {
  const LayeredGraph graph(costs, tour);
  const std::size_t count = graph.node_count();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  enum class Where : unsigned char { kNowhere, kOpen, kClosed };
  // OPEN ordered by f, then g, then insertion sequence.
  using Key = std::tuple<double, double, std::size_t, std::size_t>;
  std::set<Key> open;
  std::vector<Where> where(count, Where::kNowhere);
  std::vector<double> g(count, std::numeric_limits<double>::infinity());
  std::vector<double> f(count, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> seq(count, 0);
  std::vector<std::size_t> come_from(count, kNone);
  std::size_t counter = 0;

  auto open_add = [&](std::size_t v) {
    seq[v] = counter++;
    open.emplace(f[v], g[v], seq[v], v);
    where[v] = Where::kOpen;
  };
  auto open_remove = [&](std::size_t v) {
    open.erase(Key{f[v], g[v], seq[v], v});
    where[v] = Where::kNowhere;
  };

  const std::size_t start = graph.start_id();
  g[start] = 0.0;
  f[start] = 0.0;
  open_add(start);

  std::size_t expansions = 0;
  while (!open.empty()) {
    const std::size_t q = std::get<3>(*open.begin());
    if (q == graph.end_id()) {
      ChSelection out = finish(costs, graph, come_from, g[q]);
      out.expansions = expansions;
      return out;
    }
    open_remove(q);
    where[q] = Where::kClosed;
    ++expansions;

    // Only the next layer is expanded: stepping back would revisit a cluster.
    const std::size_t next = graph.node(q).layer + 1;
    for (std::size_t i = 0; i < graph.layer_size(next); ++i) {
      const std::size_t m = graph.id(next, i);
      const double cost = g[q] + edge_cost(graph, q, m);
      if (where[m] == Where::kOpen && cost < g[m]) open_remove(m);
      if (where[m] == Where::kClosed && cost < g[m]) where[m] = Where::kNowhere;
      if (where[m] == Where::kNowhere) {
        g[m] = cost;
        f[m] = cost + heuristic(graph, m);
        open_add(m);
        come_from[m] = q;
      }
    }
  }
  // Every layer is non-empty, so the end node is always reachable.
  throw InputError("astar_select_chs: end node unreachable");
}

ChSelection astar_select_chs(const EnergyParams& params, const Instance& instance,
                             const Tour& tour) {
  const CostTable costs(params, instance);
  return astar_select_chs(costs, tour);
}

ChSelection dp_select_chs(const CostTable& costs, const Tour& tour) {
  const LayeredGraph graph(costs, tour);
  std::vector<double> best(graph.node_count(), std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(graph.node_count(), 0);
  best[graph.start_id()] = 0.0;
  for (std::size_t layer = 1; layer < graph.layer_count(); ++layer) {
    for (std::size_t j = 0; j < graph.layer_size(layer); ++j) {
      const std::size_t to = graph.id(layer, j);
      for (std::size_t i = 0; i < graph.layer_size(layer - 1); ++i) {
        const std::size_t from = graph.id(layer - 1, i);
        const double c = best[from] + edge_cost(graph, from, to);
        if (c < best[to]) {
          best[to] = c;
          parent[to] = from;
        }
      }
    }
  }
  return finish(costs, graph, parent, best[graph.end_id()]);
}

ChSelection dp_select_chs(const EnergyParams& params, const Instance& instance,
                          const Tour& tour) {
  const CostTable costs(params, instance);
  return dp_select_chs(costs, tour);
}

Solution brute_force_solve(const EnergyParams& params, const Instance& instance) {
  params.validate();
  validate(instance);
  const std::size_t k = instance.cluster_count();
  if (k > 8) throw SizeError("brute_force_solve: K=" + std::to_string(k) + " exceeds 8");
  double combos = 1.0;
  for (const auto& c : instance.clusters) combos *= static_cast<double>(c.size());
  if (combos > 1e6) throw SizeError("brute_force_solve: more than 1e6 CH combinations");

  Solution best;
  double best_energy = std::numeric_limits<double>::infinity();

  Tour tour = identity_tour(k);
  do {
    std::vector<int> chs(k, 0);
    // Odometer over CH indices, last cluster fastest.
    auto advance = [&] {
      for (std::size_t pos = k; pos-- > 0;) {
        if (++chs[pos] < static_cast<int>(instance.clusters[pos].size())) return true;
        chs[pos] = 0;
      }
      return false;
    };
    do {
      const EnergyBreakdown e = evaluate_solution(params, instance, tour, chs);
      // Enumeration is lexicographic in (tour, chs), so strict < keeps the smallest tie.
      if (e.e_total_weighted_j < best_energy) {
        best_energy = e.e_total_weighted_j;
        best.tour = tour;
        best.ch_choices = chs;
        best.energy = e;
      }
    } while (advance());
  } while (std::next_permutation(tour.order.begin() + 1, tour.order.end()));

  best.tour_length_m = tour_length_m(instance, best.tour, best.ch_choices);
  return best;
}

}  // namespace ptra
