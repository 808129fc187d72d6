// Acceptance checks. Prints one PASS/FAIL line per criterion.
//   acceptance                 run all
//   acceptance --criterion N   run criterion N only

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>

#include "nn_helpers.hpp"
#include "oracle.hpp"
#include "ptra/baselines.hpp"
#include "ptra/policy.hpp"
#include "ptra/route_search.hpp"

using namespace ptra;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool rel_eq(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

Tour shuffled_tour(std::size_t k, std::mt19937_64& rng) {
  Tour t = identity_tour(k);
  std::shuffle(t.order.begin() + 1, t.order.end(), rng);
  return t;
}

double optimum(const EnergyParams& p, const Instance& inst) {
  return brute_force_solve(p, inst).energy.e_total_weighted_j;
}

// 1
Outcome astar_exactness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  int bad = 0;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto k = std::uniform_int_distribution<std::size_t>(3, 8)(rng);
    const auto n = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
    EnergyParams p;
    p.omega = std::array<double, 3>{0.0, 0.5, 1.0}[static_cast<std::size_t>(i % 3)];
    const Instance inst = generate_instance(k, n, 2000, 30, rng());
    const Tour tour = shuffled_tour(k, rng);
    const double a = astar_select_chs(p, inst, tour).energy.e_total_weighted_j;
    const double d = dp_select_chs(p, inst, tour).energy.e_total_weighted_j;
    worst = std::max(worst, std::abs(a - d) / std::max(std::abs(a), std::abs(d)));
    if (!rel_eq(a, d, 1e-9)) ++bad;
  }
  const double dt = seconds_since(t0);
  return {bad == 0 && dt < 10.0, fmt("200 instances, %d mismatches, max rel diff %.2e, %.2f s (limit 10 s)", bad, worst, dt)};
}

// 2
Outcome global_oracle() {
  const auto t0 = Clock::now();
  const EnergyParams p;
  int bad = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Instance inst = generate_instance(4, 3, 2000, 30, 2000 + s);
    Tour t = identity_tour(4);
    double best = std::numeric_limits<double>::infinity();
    do {
      best = std::min(best, dp_select_chs(p, inst, t).energy.e_total_weighted_j);
    } while (std::next_permutation(t.order.begin() + 1, t.order.end()));
    if (best != optimum(p, inst)) ++bad;
  }
  const double dt = seconds_since(t0);
  return {bad == 0 && dt < 30.0, fmt("50 instances, %d inexact, %.2f s (limit 30 s)", bad, dt)};
}

// 3
Outcome gradient_check() {
  const nn::InitializedParams init = nn::init_params(3, 8);
  const Instance inst = testing::toy_instance();
  Tour base;
  testing::actor_log_prob(init.policy, inst, nullptr, &base);
  bool stable = true;
  const double actor = testing::max_gradient_error(init.policy, [&](const nn::PolicyParams& p, std::vector<nn::Matrix>* g) {
    Tour t;
    const double v = testing::actor_log_prob(p, inst, g, &t);
    stable = stable && t == base;
    return v;
  });
  nn::CriticParams critic = init.critic;
  critic.fc1_b.setConstant(0.05);
  const double crit = testing::max_gradient_error(critic, [&](const nn::CriticParams& p, std::vector<nn::Matrix>* g) {
    return testing::critic_output(p, inst, g);
  });
  return {stable && actor < 1e-4 && crit < 1e-4,
          fmt("actor %.2e, critic %.2e (limit 1e-4, step 1e-5, denominator floor 1e-6)", actor, crit)};
}

// 4
Outcome formula_checks() {
  const EnergyParams p;
  const double d0 = crossover_distance_m(p);
  const double fs = p.msg_bits * p.e_elec + p.msg_bits * p.eps_fs * d0 * d0;
  const double mp = p.msg_bits * p.e_elec + p.msg_bits * p.eps_mp * d0 * d0 * d0 * d0;
  const bool ok = move_power_w(p) == 5.0 && std::abs(hover_power_w(p) - 9.79) <= 0.01 &&
                  std::abs(los_probability(p) - 0.5244) <= 1e-3 && std::abs(d0 - 87.7) <= 0.1 &&
                  std::abs(fs - mp) <= 1e-12 * fs;
  return {ok, fmt("P_move %.6g W, P_hover %.4f W, P_LoS %.5f, d0 %.3f m, branch gap %.1e", move_power_w(p),
                  hover_power_w(p), los_probability(p), d0, std::abs(fs - mp) / fs)};
}

// 5
Outcome omega_one() {
  EnergyParams p;
  p.omega = 1.0;
  std::mt19937_64 rng(505);
  int bad = 0;
  for (int i = 0; i < 100; ++i) {
    const auto k = std::uniform_int_distribution<std::size_t>(2, 10)(rng);
    const auto n = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
    const Instance inst = generate_instance(k, n, 2000, 40, rng());
    const ChSelection sel = dp_select_chs(p, inst, shuffled_tour(k, rng));
    for (std::size_t c = 0; c < k; ++c) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j)
        best = std::min(best, cluster_ground_energy_j(p, inst.clusters[c], static_cast<int>(j)));
      // Ties: any index attaining the minimum is accepted.
      if (cluster_ground_energy_j(p, inst.clusters[c], sel.ch_choices[c]) != best) ++bad;
    }
  }
  return {bad == 0, fmt("100 instances, %d clusters off their ground-energy argmin", bad)};
}

// 6
Outcome feasibility() {
  std::mt19937_64 rng(606);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const nn::InitializedParams init = nn::init_params(rng(), 8);
    const auto k = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
    const Instance inst = normalized(generate_instance(k, 3, 2000, 30, rng()));
    nn::Rng r(rng());
    const nn::RolloutResult out = nn::decode_rollout(init.policy, inst, nn::DecodeMode::kSample, &r, true);
    bool ok = out.tour.order.size() == k + 1 && out.tour.order.front() == 0;
    try {
      validate_tour(out.tour, k);
    } catch (const std::exception&) {
      ok = false;
    }
    std::vector<bool> used(k + 1, false);
    for (std::size_t t = 0; ok && t < out.step_probs.size(); ++t) {
      const auto& pr = out.step_probs[t];
      if (std::abs(pr.sum() - 1.0) > 1e-9 || pr.minCoeff() < 0.0) ok = false;
      for (std::size_t j = 0; j <= k; ++j) {
        const bool masked = t == 0 ? j != 0 : used[j];
        if (masked && pr(static_cast<Eigen::Index>(j)) != 0.0) ok = false;
      }
      used[static_cast<std::size_t>(out.tour.order[t])] = true;
    }
    if (!ok) ++bad;
  }
  return {bad == 0, fmt("1000 decodes from random parameters, %d violations", bad)};
}

// 7
Outcome training_improvement() {
  const auto t0 = Clock::now();
  std::vector<Instance> held_out;
  for (int i = 0; i < 100; ++i) held_out.push_back(generate_instance(8, 5, 2000, 30, 700000 + static_cast<std::uint64_t>(i)));
  const EnergyParams p;
  auto mean_greedy = [&](const nn::PolicyParams& policy) {
    double sum = 0.0;
    for (const auto& inst : held_out) sum += infer_greedy(policy, p, inst).energy.e_total_weighted_j;
    return sum / static_cast<double>(held_out.size());
  };
  nn::InitializedParams init = nn::init_params(7, 32);
  const double before = mean_greedy(init.policy);
  TrainConfig cfg;
  cfg.k_train = 8;
  cfg.n_train = 5;
  cfg.batch_size = 64;
  cfg.steps = 3000;
  cfg.seed = 7;
  TrainState state = make_train_state(init.policy, init.critic);
  train(cfg, init.policy, init.critic, state);
  const double after = mean_greedy(init.policy);
  const double gain = (before - after) / before;
  const double dt = seconds_since(t0);
  return {gain >= 0.10 && dt < 1800.0,
          fmt("greedy mean %.1f J -> %.1f J on 100 held-out, improvement %.1f%% (need 10%%), %.0f s (limit 1800 s)",
              before, after, 100 * gain, dt)};
}

// 8
Outcome sampling_recovery() {
  const nn::InitializedParams init = nn::init_params(8, 32);
  const EnergyParams p;
  int hit = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Instance inst = generate_instance(4, 3, 2000, 30, 8000 + s);
    nn::Rng rng(s);
    const double e = infer_sampling(init.policy, p, inst, 500, rng).energy.e_total_weighted_j;
    if (rel_eq(e, optimum(p, inst), 1e-9)) ++hit;
  }
  return {hit >= 45, fmt("%d/50 optimal (need 45)", hit)};
}

// 9
Outcome active_dominance() {
  const auto t0 = Clock::now();
  const nn::InitializedParams init = nn::init_params(9, 32);
  const EnergyParams p;
  int wins = 0, monotone = 0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Instance inst = generate_instance(10, 20, 2000, 30, 9000 + s);
    const double greedy = infer_greedy(init.policy, p, inst).energy.e_total_weighted_j;
    ActiveSearchConfig cfg;
    cfg.samples_per_step = 512;
    cfg.steps = 40;
    cfg.seed = s;
    const ActiveSearchResult r = infer_active(init.policy, init.critic, p, inst, cfg);
    if (r.best.energy.e_total_weighted_j < greedy) ++wins;
    bool mono = !r.aborted && r.incumbent_trace.size() == 41;
    for (std::size_t i = 1; i < r.incumbent_trace.size(); ++i) mono = mono && r.incumbent_trace[i] <= r.incumbent_trace[i - 1];
    if (mono) ++monotone;
  }
  return {wins >= 24 && monotone == 30,
          fmt("beats greedy on %d/30 (need 24), non-increasing trace on %d/30, %.0f s", wins, monotone, seconds_since(t0))};
}

// 10
Outcome baseline_sanity() {
  const EnergyParams p;
  int hit = 0, below = 0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Instance inst = generate_instance(4, 3, 2000, 30, 10000 + s);
    const double best = optimum(p, inst);
    GaConfig g;
    g.population_size = 150;
    g.mutation_rate = 0.005;
    g.generations = 200;
    g.seed = s;
    const double ga = solve_genetic(p, inst, g).energy.e_total_weighted_j;
    const double nn = solve_nearest_neighbor(p, inst).energy.e_total_weighted_j;
    if (rel_eq(ga, best, 1e-9)) ++hit;
    if (ga < best * (1 - 1e-12) || nn < best * (1 - 1e-12)) ++below;
  }
  return {hit >= 29 && below == 0, fmt("GA optimal on %d/30 (need 29), %d NN/GA results below the optimum", hit, below)};
}

// 11
Outcome runtime_ordering() {
  const nn::InitializedParams init = nn::init_params(11, 32);
  const EnergyParams p;
  const Instance inst = generate_instance(20, 20, 2000, 30, 11000);

  auto t0 = Clock::now();
  infer_greedy(init.policy, p, inst);
  const double greedy = seconds_since(t0);

  t0 = Clock::now();
  nn::Rng rng(1);
  infer_sampling(init.policy, p, inst, 5120, rng);
  const double sampling = seconds_since(t0);

  // 20 steps of 512 samples: 10240 sampled tours plus their updates.
  t0 = Clock::now();
  ActiveSearchConfig cfg;
  cfg.samples_per_step = 512;
  cfg.steps = 20;
  infer_active(init.policy, init.critic, p, inst, cfg);
  const double active = seconds_since(t0);
  return {greedy < sampling && sampling < active,
          fmt("greedy %.3f s < sampling(5120) %.2f s < active(512x20) %.2f s", greedy, sampling, active)};
}

// 12
Outcome energy_invariants() {
  std::mt19937_64 rng(1212);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto k = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    const auto n = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    const Instance inst = generate_instance(k, n, 2000, std::uniform_real_distribution<double>(0, 200)(rng), rng());
    EnergyParams p;
    p.omega = std::uniform_real_distribution<double>(0, 1)(rng);
    std::vector<int> chs;
    for (std::size_t c = 0; c < k; ++c) chs.push_back(std::uniform_int_distribution<int>(0, static_cast<int>(n) - 1)(rng));
    const Tour a = shuffled_tour(k, rng);
    const Tour b = shuffled_tour(k, rng);
    const EnergyBreakdown ea = evaluate_solution(p, inst, a, chs);
    const EnergyBreakdown eb = evaluate_solution(p, inst, b, chs);
    const double recomposed = p.omega * ea.e_ground_j + (1 - p.omega) * (ea.e_uav_flight_j + ea.e_uav_hover_j);
    if (!rel_eq(ea.e_ground_j, eb.e_ground_j, 1e-9) || !rel_eq(ea.e_total_weighted_j, recomposed, 1e-9)) ++bad;
  }
  return {bad == 0, fmt("1000 random (instance, tour, CH) triples, %d violations", bad)};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const Criterion criteria[] = {
      {"A* equals DP", astar_exactness},
      {"global optimum from per-order DP", global_oracle},
      {"gradient check", gradient_check},
      {"formula spot-checks", formula_checks},
      {"omega=1 decomposition", omega_one},
      {"decoder feasibility", feasibility},
      {"training improvement", training_improvement},
      {"sampling recovery", sampling_recovery},
      {"active search dominance", active_dominance},
      {"baseline sanity", baseline_sanity},
      {"runtime ordering", runtime_ordering},
      {"energy invariants", energy_invariants},
  };
  int only = 0;
  if (argc == 3 && std::strcmp(argv[1], "--criterion") == 0) only = std::atoi(argv[2]);
  if (only < 0 || only > 12 || (argc != 1 && argc != 3)) {
    std::fprintf(stderr, "usage: acceptance [--criterion 1-12]\n");
    return 2;
  }
  int failed = 0;
  for (int i = 1; i <= 12; ++i) {
    if (only != 0 && i != only) continue;
    const Outcome o = criteria[i - 1].run();
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", i, criteria[i - 1].name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
