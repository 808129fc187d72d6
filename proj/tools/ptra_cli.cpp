// ptra_cli: instance generation, training, solving and benchmarking.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ptra/checkpoint.hpp"
#include "ptra/errors.hpp"
#include "ptra/experiment.hpp"
#include "ptra/json_io.hpp"

namespace fs = std::filesystem;
using namespace ptra;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string checkpoint;
  int workers = 1;
  std::optional<double> omega;
};

ExperimentConfig base_config(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_experiment_config(c.config);
  if (c.seed) {
    cfg.seed = *c.seed;
    cfg.train.seed = *c.seed;
  }
  if (c.omega) {
    cfg.energy.omega = *c.omega;
    cfg.energy.validate();
    cfg.train.energy = cfg.energy;
  }
  if (!c.checkpoint.empty()) cfg.checkpoint = c.checkpoint;
  return cfg;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<int> parse_k_list(const std::string& text) {
  std::vector<int> ks;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    std::size_t used = 0;
    int k = 0;
    try {
      k = std::stoi(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size() || k < 1) throw InputError("--k: bad entry '" + part + "'");
    ks.push_back(k);
  }
  if (ks.empty()) throw InputError("--k: empty list");
  return ks;
}

void add_common(CLI::App* app, Common& c, bool with_workers) {
  app->add_option("--config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Base seed");
  app->add_option("--out", c.out, "Output path");
  app->add_option("--checkpoint", c.checkpoint, "Model checkpoint");
  app->add_option("--omega", c.omega, "Ground-energy weight in [0, 1]");
  if (with_workers) app->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
}

// ---------------------------------------------------------------------------

int cmd_gen(const Common& c, const std::string& k_list, std::optional<int> n,
            std::optional<int> count) {
  ExperimentConfig cfg = base_config(c);
  InstanceSet set = cfg.instances;
  if (!k_list.empty()) set.k_values = parse_k_list(k_list);
  if (n) set.n = *n;
  if (c.seed || count) {
    const std::uint64_t first = c.seed.value_or(1);
    const int how_many = count.value_or(1);
    set.seeds.clear();
    for (int i = 0; i < how_many; ++i) set.seeds.push_back(first + static_cast<std::uint64_t>(i));
  }
  const fs::path dir = c.out.empty() ? fs::path("instances") : fs::path(c.out);
  fs::create_directories(dir);
  for (int k : set.k_values) {
    for (std::uint64_t seed : set.seeds) {
      const Instance inst = generate_instance(static_cast<std::size_t>(k),
                                              static_cast<std::size_t>(set.n), set.area_m,
                                              set.std_m, seed);
      const fs::path path = dir / ("k" + std::to_string(k) + "_s" + std::to_string(seed) + ".json");
      save_instance(inst, path);
      std::cout << path.string() << "\n";
    }
  }
  return 0;
}

int cmd_train(const Common& c, std::optional<std::int64_t> steps,
              std::optional<std::int64_t> every, std::optional<int> hidden) {
  ExperimentConfig cfg = base_config(c);
  TrainConfig tc = cfg.train;
  tc.workers = c.workers;
  if (steps) tc.steps = *steps;
  if (every) cfg.checkpoint_every = *every;
  if (hidden) cfg.hidden_dim = *hidden;
  if (cfg.checkpoint_every < 1) throw InputError("--checkpoint-every must be >= 1");
  tc.validate();

  const fs::path dir = c.out.empty() ? fs::path("run") : fs::path(c.out);
  fs::create_directories(dir);
  const fs::path ck_path = dir / "checkpoint.json";
  const fs::path trace_path = dir / "trace.csv";

  nn::Checkpoint ck;
  bool resumed = false;
  if (cfg.checkpoint) {
    ck = nn::load_checkpoint(*cfg.checkpoint);
    resumed = true;
  } else {
    nn::InitializedParams init = nn::init_params(tc.seed, cfg.hidden_dim);
    ck.hidden_dim = cfg.hidden_dim;
    ck.seed = tc.seed;
    ck.policy = std::move(init.policy);
    ck.critic = std::move(init.critic);
  }
  TrainState state = make_train_state(ck.policy, ck.critic);
  state.step = ck.step;

  const bool append = resumed && fs::exists(trace_path);
  std::ofstream trace(trace_path, append ? std::ios::app : std::ios::trunc);
  if (!trace) throw InputError("cannot write " + trace_path.string());
  if (!append) trace << "step,mean_energy,critic_loss,lr\n";

  const std::int64_t end = state.step + tc.steps;
  try {
    train(tc, ck.policy, ck.critic, state, [&](const TrainStepStats& s) {
      char line[160];
      std::snprintf(line, sizeof line, "%lld,%.12g,%.12g,%.12g\n", static_cast<long long>(s.step),
                    s.mean_energy, s.critic_loss, s.lr);
      trace << line << std::flush;
      const std::int64_t done = s.step + 1;
      if (done % cfg.checkpoint_every == 0 || done == end) {
        ck.step = done;
        nn::save_checkpoint(ck, ck_path);
      }
    });
  } catch (const NonFiniteError& e) {
    std::cerr << "training aborted: " << e.what() << " (last good checkpoint kept)\n";
    return 3;
  }
  std::cout << ck_path.string() << " step " << state.step << "\n";
  return 0;
}

int cmd_solve(const Common& c, const std::string& instance_path, const std::string& solver_text,
              const std::string& polyline) {
  ExperimentConfig cfg = base_config(c);
  const SolverSpec spec = parse_solver_spec(solver_text);
  const Instance inst = load_instance(instance_path);
  std::optional<nn::Checkpoint> model;
  if (spec.needs_checkpoint()) {
    if (!cfg.checkpoint) throw InputError("solver '" + spec.label() + "' needs --checkpoint");
    model = nn::load_checkpoint(*cfg.checkpoint);
  }
  const Solution s = run_solver(spec, cfg.energy, inst, model ? &*model : nullptr, cfg.seed);
  const std::string json = format_solution_json(inst, s, spec.label());
  if (c.out.empty())
    std::cout << json;
  else
    write_file(c.out, json);
  if (!polyline.empty()) write_file(polyline, format_polyline_csv(inst, s));
  return 0;
}

int cmd_bench(const Common& c, const std::vector<std::string>& solvers,
              const std::string& reference, bool no_timing) {
  ExperimentConfig cfg = base_config(c);
  if (!solvers.empty()) {
    cfg.solvers.clear();
    for (const auto& s : solvers) cfg.solvers.push_back(parse_solver_spec(s));
  }
  if (!reference.empty()) cfg.reference_solver = parse_solver_spec(reference).label();
  if (cfg.reference_solver.empty() && !cfg.solvers.empty())
    cfg.reference_solver = cfg.solvers.front().label();

  const BenchOutput out = run_bench(cfg, c.workers, !no_timing);
  const std::string stem = c.out.empty() ? "results" : c.out;
  write_file(stem + ".csv", format_results_csv(out.rows));
  write_file(stem + "_ratios.csv", format_ratio_csv(ratio_table(out.rows, cfg.reference_solver)));
  write_file(stem + "_solutions.jsonl", format_solutions_jsonl(out, cfg.energy));

  int failed = 0;
  for (const auto& r : out.rows) {
    if (r.error.empty()) continue;
    ++failed;
    std::cerr << r.instance_id << " " << r.solver << ": " << r.error << "\n";
  }
  std::cout << out.rows.size() << " rows, " << failed << " failed -> " << stem << ".csv\n";
  return 0;
}

int cmd_verify(const std::string& results, std::string solutions) {
  if (solutions.empty()) {
    fs::path p(results);
    solutions = (p.parent_path() / (p.stem().string() + "_solutions.jsonl")).string();
  }
  const VerifyReport report = verify_results(read_file(results), read_file(solutions));
  for (const auto& m : report.mismatches) std::cerr << m << "\n";
  std::cout << report.checked << " rows verified, " << report.failed_rows << " failed rows skipped, "
            << report.mismatches.size() << " mismatches\n";
  return report.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV data-collection routing: pointer network + A* cluster-head selection"};
  app.require_subcommand(1);

  Common gen_c, train_c, solve_c, bench_c;

  auto* gen = app.add_subcommand("gen", "Write seeded instance files");
  add_common(gen, gen_c, false);
  std::string k_list;
  std::optional<int> gen_n, gen_count;
  gen->add_option("--k", k_list, "Comma list of cluster counts");
  gen->add_option("--n", gen_n, "Nodes per cluster");
  gen->add_option("--count", gen_count, "Instances per K, seeds counting up from --seed");

  auto* tr = app.add_subcommand("train", "Actor-critic training");
  add_common(tr, train_c, true);
  std::optional<std::int64_t> steps, every;
  std::optional<int> hidden;
  tr->add_option("--steps", steps, "Training steps to run");
  tr->add_option("--checkpoint-every", every, "Steps between checkpoints");
  tr->add_option("--hidden-dim", hidden, "Hidden size for a fresh model");

  auto* solve = app.add_subcommand("solve", "Solve one instance");
  add_common(solve, solve_c, false);
  std::string instance_path, solver_text = "nn", polyline;
  solve->add_option("--instance", instance_path, "Instance JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--solver", solver_text, "greedy | sampling:M | active:Q,S[,zeta] | nn | ga[:G[,P]] | brute | random");
  solve->add_option("--polyline", polyline, "Write the closed CH polyline as CSV");

  auto* bench = app.add_subcommand("bench", "Run every solver on every instance");
  add_common(bench, bench_c, true);
  std::vector<std::string> bench_solvers;
  std::string reference;
  bool no_timing = false;
  bench->add_option("--solver", bench_solvers, "Solver (repeatable; replaces the config list)");
  bench->add_option("--reference", reference, "Reference solver for the ratio table");
  bench->add_flag("--no-timing", no_timing, "Write wall_time_s as 0 for byte-stable output");

  auto* verify = app.add_subcommand("verify", "Re-check a results CSV");
  std::string results_path, solutions_path;
  verify->add_option("results", results_path, "Results CSV")->required()->check(CLI::ExistingFile);
  verify->add_option("--solutions", solutions_path, "Solutions JSONL (default: <stem>_solutions.jsonl)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(gen_c, k_list, gen_n, gen_count);
    if (*tr) return cmd_train(train_c, steps, every, hidden);
    if (*solve) return cmd_solve(solve_c, instance_path, solver_text, polyline);
    if (*bench) return cmd_bench(bench_c, bench_solvers, reference, no_timing);
    if (*verify) return cmd_verify(results_path, solutions_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
