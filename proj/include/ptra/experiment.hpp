#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ptra/baselines.hpp"
#include "ptra/checkpoint.hpp"
#include "ptra/energy.hpp"
#include "ptra/policy.hpp"

namespace ptra {

enum class SolverKind { kGreedy, kSampling, kActive, kNearestNeighbor, kGenetic, kBrute, kRandom };

/// One solver with its settings, written as text like "sampling:128",
/// "active:512,40,0.9", "ga:200" (generations) or "nn".
struct SolverSpec {
  SolverKind kind = SolverKind::kGreedy;
  int samples = 0;               // sampling
  ActiveSearchConfig active;     // active
  GaConfig ga;                   // ga

  bool needs_checkpoint() const noexcept;
  /// Canonical text form; parse_solver_spec(label()) round-trips.
  std::string label() const;
};

/// Throws InputError on unknown names or malformed settings.
SolverSpec parse_solver_spec(const std::string& text);

/// Runs one solver. `seed` drives every random choice the solver makes;
/// `model` must be non-null for neural solvers.
Solution run_solver(const SolverSpec& spec, const EnergyParams& params, const Instance& instance,
                    const nn::Checkpoint* model, std::uint64_t seed);

struct InstanceSet {
  std::vector<int> k_values{4};
  int n = 5;
  double area_m = 2000.0;
  double std_m = 30.0;
  std::vector<std::uint64_t> seeds{1};
};

struct ExperimentConfig {
  EnergyParams energy;
  InstanceSet instances;
  std::vector<SolverSpec> solvers;
  std::optional<std::filesystem::path> checkpoint;
  std::string reference_solver;  // label; empty means the first solver
  std::uint64_t seed = 1;        // base seed for stochastic solvers
  TrainConfig train;
  int hidden_dim = 32;                 // for fresh training runs
  std::int64_t checkpoint_every = 500;  // training steps between checkpoints

  /// Throws InputError when no solver is given, a neural solver lacks a
  /// checkpoint, the checkpoint file is missing or the reference is unknown.
  void validate() const;
};

/// Reads the JSON config; absent sections keep their defaults.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct ResultRow {
  std::string instance_id;
  int k = 0;
  std::string solver;
  double energy_j = 0.0;
  double e_ground_j = 0.0;
  double e_uav_j = 0.0;
  double tour_length_m = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
  std::string error;  // non-empty when the solver failed; numbers are NaN
};

inline constexpr const char* kResultsHeader =
    "instance_id,k,solver,energy_j,e_ground_j,e_uav_j,tour_length_m,wall_time_s,seed";

struct BenchOutput {
  std::vector<Instance> instances;
  std::vector<std::string> instance_ids;
  std::vector<ResultRow> rows;        // instance-major, solvers in config order
  std::vector<Solution> solutions;    // parallel to rows
};

/// Every (instance, solver) pair, fanned out over `workers` threads. With
/// `timing` false every wall_time_s is written as 0 so files are byte-stable.
BenchOutput run_bench(const ExperimentConfig& config, int workers, bool timing);

struct RatioRow {
  int k = 0;
  std::string solver;
  double mean_energy_j = 0.0;
  double mean_ratio = 0.0;  // mean over instances of energy / reference energy
  int count = 0;
};
std::vector<RatioRow> ratio_table(const std::vector<ResultRow>& rows, const std::string& reference);

std::string format_results_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_csv(const std::string& text);
std::string format_ratio_csv(const std::vector<RatioRow>& rows);

/// One JSON line per row: instance, energy params, tour and CHs.
std::string format_solutions_jsonl(const BenchOutput& output, const EnergyParams& params);

struct VerifyReport {
  int checked = 0;
  int failed_rows = 0;  // rows recorded as solver failures, skipped
  std::vector<std::string> mismatches;
  bool ok() const noexcept { return mismatches.empty(); }
};

/// Re-evaluates every successful row of a results CSV from the solutions
/// JSONL written beside it; energies must agree to 1e-9 relative.
VerifyReport verify_results(const std::string& results_csv, const std::string& solutions_jsonl);

/// Closed polyline through the CH positions: start, CHs in visiting order, start.
std::string format_polyline_csv(const Instance& instance, const Solution& solution);
/// Solution with its energy breakdown and CH coordinates.
std::string format_solution_json(const Instance& instance, const Solution& solution,
                                 const std::string& solver);

bool approx_equal_rel(double a, double b, double rel) noexcept;

}  // namespace ptra
