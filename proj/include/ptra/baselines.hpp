#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ptra/energy.hpp"

namespace ptra {

struct GaConfig {
  int population_size = 150;
  int generations = 4000;
  double mutation_rate = 0.005;  // per gene
  int elitism_count = 1;
  int tournament_size = 2;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Greedy nearest-centroid order from the start, CHs by dynamic programming.
Solution solve_nearest_neighbor(const EnergyParams& params, const Instance& instance);

/// Genetic algorithm over (cluster permutation, CH per cluster) chromosomes.
/// When `best_trace` is given it receives the all-time best energy after the
/// initial population and after each generation.
Solution solve_genetic(const EnergyParams& params, const Instance& instance,
                       const GaConfig& config, std::vector<double>* best_trace = nullptr);

/// Uniformly random order, CHs by dynamic programming.
Solution solve_random(const EnergyParams& params, const Instance& instance, std::mt19937_64& rng);

}  // namespace ptra
