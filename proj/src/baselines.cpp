#include "ptra/baselines.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "ptra/errors.hpp"
#include "ptra/route_search.hpp"

namespace ptra {

void GaConfig::validate() const {
  if (population_size < 2) throw InputError("GaConfig: population_size must be >= 2");
  if (generations < 0) throw InputError("GaConfig: generations must be >= 0");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0))
    throw InputError("GaConfig: mutation_rate must lie in [0, 1]");
  if (elitism_count < 0 || elitism_count >= population_size)
    throw InputError("GaConfig: elitism_count must lie in [0, population_size)");
  if (tournament_size < 1) throw InputError("GaConfig: tournament_size must be >= 1");
}

namespace {

Solution complete_with_dp(const EnergyParams& params, const Instance& instance, Tour tour) {
  ChSelection sel = dp_select_chs(params, instance, tour);
  return make_solution(params, instance, std::move(tour), std::move(sel.ch_choices));
}

}  // namespace

Solution solve_nearest_neighbor(const EnergyParams& params, const Instance& instance) {
  validate(instance);
  const std::size_t k = instance.cluster_count();
  std::vector<Point2> centroids;
  for (const auto& c : instance.clusters) centroids.push_back(centroid(c));

  Tour tour;
  tour.order.push_back(0);
  std::vector<bool> used(k, false);
  Point2 here = instance.start;
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t pick = k;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (used[c]) continue;
      const double d = distance(here, centroids[c]);
      if (d < best) {
        best = d;
        pick = c;
      }
    }
    used[pick] = true;
    here = centroids[pick];
    tour.order.push_back(static_cast<int>(pick + 1));
  }
  return complete_with_dp(params, instance, std::move(tour));
}

Solution solve_random(const EnergyParams& params, const Instance& instance, std::mt19937_64& rng) {
  validate(instance);
  Tour tour = identity_tour(instance.cluster_count());
  std::shuffle(tour.order.begin() + 1, tour.order.end(), rng);
  return complete_with_dp(params, instance, std::move(tour));
}

namespace {

struct Chromosome {
  std::vector<int> order;  // permutation of cluster ids 1..K
  std::vector<int> chs;    // CH index per cluster (0-based cluster)
  double energy = 0.0;
};

class GeneticSearch {
 public:
  GeneticSearch(const EnergyParams& params, const Instance& instance, const GaConfig& config)
      : costs_(params, instance), config_(config), rng_(config.seed) {}

  double fitness_energy(const Chromosome& c) const {
    const Instance& inst = costs_.instance();
    double total = 0.0;
    Point2 here = inst.start;
    for (int item : c.order) {
      const auto k = static_cast<std::size_t>(item - 1);
      const Point2 next = ch_position(inst, k, c.chs[k]);
      total += costs_.flight_cost(distance(here, next)) +
               costs_.node_cost(k, static_cast<std::size_t>(c.chs[k]));
      here = next;
    }
    return total + costs_.flight_cost(distance(here, inst.start));
  }

  Chromosome random_chromosome() {
    const Instance& inst = costs_.instance();
    Chromosome c;
    c.order.resize(inst.cluster_count());
    std::iota(c.order.begin(), c.order.end(), 1);
    std::shuffle(c.order.begin(), c.order.end(), rng_);
    for (const auto& cluster : inst.clusters) c.chs.push_back(random_ch(cluster.size()));
    c.energy = fitness_energy(c);
    return c;
  }

  int random_ch(std::size_t size) {
    return std::uniform_int_distribution<int>(0, static_cast<int>(size) - 1)(rng_);
  }

  const Chromosome& tournament(const std::vector<Chromosome>& pop) {
    std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
    const Chromosome* best = &pop[pick(rng_)];
    for (int t = 1; t < config_.tournament_size; ++t) {
      const Chromosome& other = pop[pick(rng_)];
      if (other.energy < best->energy) best = &other;
    }
    return *best;
  }

  /// Order crossover: a slice of `a` kept in place, the rest filled in `b`'s order.
  std::vector<int> order_crossover(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t n = a.size();
    std::uniform_int_distribution<std::size_t> pos(0, n - 1);
    std::size_t lo = pos(rng_);
    std::size_t hi = pos(rng_);
    if (lo > hi) std::swap(lo, hi);
    std::vector<int> child(n, 0);
    std::vector<bool> taken(n + 1, false);
    for (std::size_t i = lo; i <= hi; ++i) {
      child[i] = a[i];
      taken[static_cast<std::size_t>(a[i])] = true;
    }
    std::size_t write = (hi + 1) % n;
    for (std::size_t off = 0; off < n; ++off) {
      const int gene = b[(hi + 1 + off) % n];
      if (taken[static_cast<std::size_t>(gene)]) continue;
      child[write] = gene;
      write = (write + 1) % n;
    }
    return child;
  }

  Chromosome breed(const Chromosome& a, const Chromosome& b) {
    std::bernoulli_distribution coin(0.5);
    std::bernoulli_distribution mutate(config_.mutation_rate);
    std::uniform_int_distribution<std::size_t> pos(0, a.order.size() - 1);

    Chromosome child;
    child.order = order_crossover(a.order, b.order);
    child.chs.resize(a.chs.size());
    for (std::size_t k = 0; k < a.chs.size(); ++k) child.chs[k] = coin(rng_) ? a.chs[k] : b.chs[k];

    for (std::size_t i = 0; i < child.order.size(); ++i)
      if (mutate(rng_)) std::swap(child.order[i], child.order[pos(rng_)]);
    for (std::size_t k = 0; k < child.chs.size(); ++k)
      if (mutate(rng_)) child.chs[k] = random_ch(costs_.instance().clusters[k].size());
    child.energy = fitness_energy(child);
    return child;
  }

  Solution run(std::vector<double>* trace) {
    const auto size = static_cast<std::size_t>(config_.population_size);
    const auto by_energy = [](const Chromosome& x, const Chromosome& y) {
      return x.energy < y.energy;
    };
    std::vector<Chromosome> pop;
    pop.reserve(size);
    for (std::size_t i = 0; i < size; ++i) pop.push_back(random_chromosome());
    Chromosome best = *std::min_element(pop.begin(), pop.end(), by_energy);
    if (trace) trace->push_back(best.energy);

    std::vector<Chromosome> next;
    for (int g = 0; g < config_.generations; ++g) {
      std::stable_sort(pop.begin(), pop.end(), by_energy);
      next.assign(pop.begin(), pop.begin() + config_.elitism_count);
      while (next.size() < size) next.push_back(breed(tournament(pop), tournament(pop)));
      pop.swap(next);
      const Chromosome& gen_best = *std::min_element(pop.begin(), pop.end(), by_energy);
      if (gen_best.energy < best.energy) best = gen_best;
      if (trace) trace->push_back(best.energy);
    }

    Tour tour;
    tour.order.push_back(0);
    tour.order.insert(tour.order.end(), best.order.begin(), best.order.end());
    return make_solution(costs_.params(), costs_.instance(), std::move(tour), best.chs);
  }

 private:
  CostTable costs_;
  GaConfig config_;
  std::mt19937_64 rng_;
};

}  // namespace

Solution solve_genetic(const EnergyParams& params, const Instance& instance,
                       const GaConfig& config, std::vector<double>* best_trace) {
  config.validate();
  return GeneticSearch(params, instance, config).run(best_trace);
}

}  // namespace ptra
