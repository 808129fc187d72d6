#include "ptra/policy.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ptra/errors.hpp"
#include "ptra/parallel.hpp"

namespace ptra {

using nn::Matrix;
using nn::Tape;

void adam_update(AdamState& state, std::span<const nn::TensorRef> params,
                 std::span<const Matrix> grads, double lr) {
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i].cwiseAbs2();
    const auto m_hat = state.m[i].array() / correction1;
    const auto v_hat = state.v[i].array() / correction2;
    params[i].value->array() -= lr * m_hat / (v_hat.sqrt() + state.eps);
  }
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw InputError("TrainConfig: batch_size must be >= 1");
  if (steps < 0) throw InputError("TrainConfig: steps must be >= 0");
  if (!(lr_initial > 0.0)) throw InputError("TrainConfig: lr_initial must be > 0");
  if (lr_decay_every < 1) throw InputError("TrainConfig: lr_decay_every must be >= 1");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0))
    throw InputError("TrainConfig: lr_decay_factor must lie in (0, 1]");
  if (k_train < 1 || n_train < 1) throw InputError("TrainConfig: k_train and n_train must be >= 1");
  if (!(energy_scale > 0.0)) throw InputError("TrainConfig: energy_scale must be > 0");
  energy.validate();
}

double learning_rate(const TrainConfig& config, std::int64_t step) {
  return config.lr_initial *
         std::pow(config.lr_decay_factor, static_cast<double>(step / config.lr_decay_every));
}

TrainState make_train_state(const nn::PolicyParams& policy, const nn::CriticParams& critic) {
  return {0, make_adam_state(policy), make_adam_state(critic)};
}

namespace {

Solution to_solution(const CostTable& costs, Tour tour, ChSelection sel) {
  Solution s;
  s.tour_length_m = tour_length_m(costs.instance(), tour, sel.ch_choices);
  s.tour = std::move(tour);
  s.ch_choices = std::move(sel.ch_choices);
  s.energy = sel.energy;
  return s;
}

void add_into(std::vector<Matrix>& total, const std::vector<Matrix>& part) {
  for (std::size_t i = 0; i < total.size(); ++i) total[i] += part[i];
}

}  // namespace

std::vector<TrainStepStats> train(const TrainConfig& config, nn::PolicyParams& policy,
                                  nn::CriticParams& critic, TrainState& state,
                                  const std::function<void(const TrainStepStats&)>& on_step) {
  config.validate();
  const auto batch = static_cast<std::size_t>(config.batch_size);
  const int workers = std::max(1, std::min(config.workers, config.batch_size));
  const double inv_batch = 1.0 / static_cast<double>(batch);

  std::vector<TrainStepStats> trace;
  for (std::int64_t s = 0; s < config.steps; ++s) {
    const std::int64_t step = state.step;
    const double lr = learning_rate(config, step);
    nn::check_finite(std::as_const(policy).tensors(), {}, "train actor");
    nn::check_finite(std::as_const(critic).tensors(), {}, "train critic");

    std::vector<std::vector<Matrix>> actor_grads(static_cast<std::size_t>(workers),
                                                 nn::zero_gradients(policy));
    std::vector<std::vector<Matrix>> critic_grads(static_cast<std::size_t>(workers),
                                                  nn::zero_gradients(critic));
    std::vector<double> energies(batch, 0.0);
    std::vector<double> baselines(batch, 0.0);

    parallel_for(batch, workers, [&](std::size_t i, int w) {
      nn::Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(step), i));
      const Instance instance =
          config.fixed_instances.empty()
              ? generate_instance(static_cast<std::size_t>(config.k_train),
                                  static_cast<std::size_t>(config.n_train), config.area_m,
                                  config.std_m, rng())
              : config.fixed_instances[(static_cast<std::size_t>(step) * batch + i) %
                                       config.fixed_instances.size()];
      const Instance input = normalized(instance);

      Tape critic_tape;
      const nn::CriticVars cv = nn::bind(critic_tape, critic);
      const Tape::Var value = nn::critic_value(critic_tape, cv, input);
      baselines[i] = critic_tape.scalar(value);

      Tape actor_tape;
      const nn::ActorVars av = nn::bind(actor_tape, policy);
      const nn::Encoded enc = nn::encode(actor_tape, av, input);
      const nn::RolloutRecord rollout =
          nn::decode(actor_tape, av, enc, nn::DecodeMode::kSample, &rng);
      const CostTable costs(config.energy, instance);
      energies[i] = astar_select_chs(costs, rollout.tour).energy.e_total_weighted_j;

      const double scaled = energies[i] / config.energy_scale;
      const std::size_t wi = static_cast<std::size_t>(w);
      const std::pair<Tape::Var, double> actor_seed{rollout.log_prob,
                                                    (scaled - baselines[i]) * inv_batch};
      actor_tape.backward(std::span(&actor_seed, 1), actor_grads[wi]);
      const std::pair<Tape::Var, double> critic_seed{value,
                                                     2.0 * (baselines[i] - scaled) * inv_batch};
      critic_tape.backward(std::span(&critic_seed, 1), critic_grads[wi]);
    });

    for (std::size_t w = 1; w < actor_grads.size(); ++w) {
      add_into(actor_grads[0], actor_grads[w]);
      add_into(critic_grads[0], critic_grads[w]);
    }

    TrainStepStats stats;
    stats.step = step;
    stats.lr = lr;
    for (std::size_t i = 0; i < batch; ++i) {
      const double diff = baselines[i] - energies[i] / config.energy_scale;
      stats.mean_energy += energies[i] * inv_batch;
      stats.critic_loss += diff * diff * inv_batch;
    }
    if (!std::isfinite(stats.mean_energy) || !std::isfinite(stats.critic_loss))
      throw NonFiniteError("train: non-finite loss at step " + std::to_string(step), "loss");
    const auto actor_view = std::as_const(policy).tensors();
    const auto critic_view = std::as_const(critic).tensors();
    nn::check_finite(actor_view, actor_grads[0], "train actor");
    nn::check_finite(critic_view, critic_grads[0], "train critic");

    adam_update(state.actor, policy.tensors(), actor_grads[0], lr);
    adam_update(state.critic, critic.tensors(), critic_grads[0], lr);
    ++state.step;

    trace.push_back(stats);
    if (on_step) on_step(stats);
  }
  return trace;
}

Solution infer_greedy(const nn::PolicyParams& policy, const EnergyParams& params,
                      const Instance& instance) {
  const CostTable costs(params, instance);
  nn::RolloutResult rollout =
      nn::decode_rollout(policy, normalized(instance), nn::DecodeMode::kGreedy, nullptr);
  ChSelection sel = astar_select_chs(costs, rollout.tour);
  return to_solution(costs, std::move(rollout.tour), std::move(sel));
}

Solution infer_sampling(const nn::PolicyParams& policy, const EnergyParams& params,
                        const Instance& instance, int samples, nn::Rng& rng) {
  if (samples < 1) throw InputError("infer_sampling: sample count must be >= 1");
  const CostTable costs(params, instance);
  Tape tape;
  const nn::ActorVars vars = nn::bind(tape, policy);
  const nn::Encoded enc = nn::encode(tape, vars, normalized(instance));
  const std::size_t shared = tape.size();

  Solution best;
  double best_energy = std::numeric_limits<double>::infinity();
  for (int m = 0; m < samples; ++m) {
    nn::RolloutRecord rollout = nn::decode(tape, vars, enc, nn::DecodeMode::kSample, &rng);
    tape.truncate(shared);
    ChSelection sel = astar_select_chs(costs, rollout.tour);
    if (sel.energy.e_total_weighted_j < best_energy) {
      best_energy = sel.energy.e_total_weighted_j;
      best = to_solution(costs, std::move(rollout.tour), std::move(sel));
    }
  }
  return best;
}

void ActiveSearchConfig::validate() const {
  if (steps < 0) throw InputError("ActiveSearchConfig: steps must be >= 0");
  if (samples_per_step < 1) throw InputError("ActiveSearchConfig: samples_per_step must be >= 1");
  if (!(ema_zeta >= 0.0 && ema_zeta <= 1.0))
    throw InputError("ActiveSearchConfig: ema_zeta must lie in [0, 1]");
  if (!(learning_rate > 0.0)) throw InputError("ActiveSearchConfig: learning_rate must be > 0");
  if (!(energy_scale > 0.0)) throw InputError("ActiveSearchConfig: energy_scale must be > 0");
}

ActiveSearchResult infer_active(const nn::PolicyParams& policy, const nn::CriticParams& critic,
                                const EnergyParams& params, const Instance& instance,
                                const ActiveSearchConfig& config) {
  config.validate();
  const CostTable costs(params, instance);
  const Instance input = normalized(instance);
  nn::PolicyParams local = policy;
  AdamState adam = make_adam_state(local);
  nn::Rng rng(config.seed);

  ActiveSearchResult out;
  {
    nn::RolloutResult first = nn::decode_rollout(local, input, nn::DecodeMode::kSample, &rng);
    ChSelection sel = astar_select_chs(costs, first.tour);
    out.best = to_solution(costs, std::move(first.tour), std::move(sel));
  }
  double incumbent = out.best.energy.e_total_weighted_j;
  out.incumbent_trace.push_back(incumbent);

  double baseline = incumbent / config.energy_scale;
  // The critic is not refined here, so its estimate is a constant.
  const double critic_estimate =
      config.baseline_mode == BaselineMode::kCritic ? nn::critic_value(critic, input) : 0.0;
  const double inv_q = 1.0 / static_cast<double>(config.samples_per_step);

  Tape tape;
  for (std::int64_t s = 0; s < config.steps; ++s) {
    tape.clear();
    const nn::ActorVars vars = nn::bind(tape, local);
    const nn::Encoded enc = nn::encode(tape, vars, input);
    const std::size_t shared = tape.size();
    std::vector<Matrix> grads = nn::zero_gradients(local);

    double mean_energy = 0.0;
    for (int q = 0; q < config.samples_per_step; ++q) {
      nn::RolloutRecord rollout = nn::decode(tape, vars, enc, nn::DecodeMode::kSample, &rng);
      ChSelection sel = astar_select_chs(costs, rollout.tour);
      const double energy = sel.energy.e_total_weighted_j;
      mean_energy += energy / config.energy_scale * inv_q;

      const std::pair<Tape::Var, double> seed{rollout.log_prob,
                                              (energy / config.energy_scale - baseline) * inv_q};
      tape.backward_until(std::span(&seed, 1), grads, shared);
      tape.truncate(shared);

      if (energy < incumbent) {
        incumbent = energy;
        out.best = to_solution(costs, std::move(rollout.tour), std::move(sel));
      }
    }
    tape.backward_until({}, grads, 0);

    try {
      nn::check_finite(std::as_const(local).tensors(), grads, "infer_active");
      adam_update(adam, local.tensors(), grads, config.learning_rate);
      nn::check_finite(std::as_const(local).tensors(), {}, "infer_active");
    } catch (const NonFiniteError&) {
      out.aborted = true;
      out.incumbent_trace.push_back(incumbent);
      break;
    }

    const double target =
        config.baseline_mode == BaselineMode::kCritic ? critic_estimate : mean_energy;
    baseline = config.ema_zeta * baseline + (1.0 - config.ema_zeta) * target;
    out.incumbent_trace.push_back(incumbent);
  }
  return out;
}

}  // namespace ptra
