#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ptra/energy.hpp"
#include "ptra/network.hpp"
#include "ptra/route_search.hpp"

namespace ptra {

// ---------------------------------------------------------------------------
// Adam

struct AdamState {
  std::vector<nn::Matrix> m;
  std::vector<nn::Matrix> v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <class Params>
AdamState make_adam_state(const Params& params) {
  AdamState s;
  s.m = nn::zero_gradients(params);
  s.v = nn::zero_gradients(params);
  return s;
}

/// One bias-corrected Adam step, descending along `grads`.
void adam_update(AdamState& state, std::span<const nn::TensorRef> params,
                 std::span<const nn::Matrix> grads, double lr);

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  int batch_size = 64;
  std::int64_t steps = 3000;
  double lr_initial = 1e-3;
  std::int64_t lr_decay_every = 5000;
  double lr_decay_factor = 0.96;
  int k_train = 8;
  int n_train = 5;
  double area_m = 2000.0;
  double std_m = 30.0;
  double energy_scale = 1000.0;  // energies are divided by this before the loss
  std::uint64_t seed = 1;
  int workers = 1;
  EnergyParams energy;
  /// When non-empty, batches cycle through these instead of fresh draws.
  std::vector<Instance> fixed_instances;

  void validate() const;
};

/// lr_initial * factor^floor(step / decay_every).
double learning_rate(const TrainConfig& config, std::int64_t step);

struct TrainStepStats {
  std::int64_t step = 0;
  double mean_energy = 0.0;  // J, mean over the batch's sampled tours
  double critic_loss = 0.0;  // MSE in scaled units, before the update
  double lr = 0.0;
};

/// Optimizer state carried across train() calls.
struct TrainState {
  std::int64_t step = 0;  // completed steps
  AdamState actor;
  AdamState critic;
};

TrainState make_train_state(const nn::PolicyParams& policy, const nn::CriticParams& critic);

/// Runs config.steps actor-critic updates starting at state.step. `on_step`
/// is called after every update. Throws NonFiniteError on NaN/Inf, leaving
/// the parameters from the last good step untouched.
std::vector<TrainStepStats> train(const TrainConfig& config, nn::PolicyParams& policy,
                                  nn::CriticParams& critic, TrainState& state,
                                  const std::function<void(const TrainStepStats&)>& on_step = {});

// ---------------------------------------------------------------------------
// Inference

/// Argmax decode + A* CH selection.
Solution infer_greedy(const nn::PolicyParams& policy, const EnergyParams& params,
                      const Instance& instance);

/// Best of `samples` stochastic decodes, each completed by A*.
Solution infer_sampling(const nn::PolicyParams& policy, const EnergyParams& params,
                        const Instance& instance, int samples, nn::Rng& rng);

enum class BaselineMode { kCritic, kSampleMean };

struct ActiveSearchConfig {
  std::int64_t steps = 40;
  int samples_per_step = 512;
  double ema_zeta = 0.9;
  BaselineMode baseline_mode = BaselineMode::kCritic;
  double learning_rate = 1e-3;
  double energy_scale = 1000.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct ActiveSearchResult {
  Solution best;
  /// Incumbent energy after initialization and after every step (S + 1 entries).
  std::vector<double> incumbent_trace;
  bool aborted = false;  // a non-finite update stopped the search early
};

/// Policy-gradient refinement on a private copy of `policy` for one instance.
ActiveSearchResult infer_active(const nn::PolicyParams& policy, const nn::CriticParams& critic,
                                const EnergyParams& params, const Instance& instance,
                                const ActiveSearchConfig& config);

}  // namespace ptra
