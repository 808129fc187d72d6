#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "ptra/errors.hpp"
#include "ptra/experiment.hpp"

using namespace ptra;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "ptra_test_experiment";
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path path = temp_dir() / name;
  std::ofstream(path) << text;
  return path;
}

fs::path tiny_checkpoint() {
  const fs::path path = temp_dir() / "tiny_ck.json";
  nn::InitializedParams init = nn::init_params(1, 4);
  nn::save_checkpoint({4, 1, 0, init.policy, init.critic}, path);
  return path;
}

ExperimentConfig small_bench() {
  ExperimentConfig c;
  c.instances.k_values = {3, 4};
  c.instances.n = 3;
  c.instances.seeds = {1, 2, 3};
  for (const char* s : {"nn", "ga:20,20", "brute", "random", "greedy", "sampling:8", "active:4,2"})
    c.solvers.push_back(parse_solver_spec(s));
  c.checkpoint = tiny_checkpoint();
  c.reference_solver = "brute";
  return c;
}

}  // namespace

TEST_CASE("solver specs") {
  CHECK(parse_solver_spec("greedy").kind == SolverKind::kGreedy);
  CHECK(parse_solver_spec("sampling:128").samples == 128);
  const SolverSpec a = parse_solver_spec("active:512,40,0.8");
  CHECK(a.active.samples_per_step == 512);
  CHECK(a.active.steps == 40);
  CHECK(a.active.ema_zeta == 0.8);
  CHECK(a.active.baseline_mode == BaselineMode::kCritic);
  CHECK(parse_solver_spec("active:4,2,0.9,mean").active.baseline_mode == BaselineMode::kSampleMean);
  CHECK(parse_solver_spec("ga").ga.generations == GaConfig{}.generations);
  CHECK(parse_solver_spec("ga:200,50").ga.population_size == 50);
  for (const char* s : {"greedy", "sampling:7", "active:8,3,0.5,mean", "nn", "ga:10,20", "brute", "random"}) {
    const SolverSpec spec = parse_solver_spec(s);
    CHECK(parse_solver_spec(spec.label()).label() == spec.label());
  }
  CHECK(parse_solver_spec("greedy").needs_checkpoint());
  CHECK_FALSE(parse_solver_spec("nn").needs_checkpoint());
  for (const char* bad : {"", "magic", "sampling", "sampling:0", "sampling:x", "active:1", "active:1,1,2.0",
                          "active:4,2,0.9,other", "greedy:3", "ga:1,1"})
    CHECK_THROWS_AS(parse_solver_spec(bad), InputError);
}

TEST_CASE("config parsing") {
  const fs::path ck = tiny_checkpoint();
  const fs::path path = write_config("cfg.json", R"({
    "energy": {"omega": 0.25, "height_m": 60},
    "instances": {"k": [3, 5], "n": 4, "seed_count": 3, "first_seed": 10},
    "solvers": ["nn", "greedy"],
    "checkpoint": "tiny_ck.json",
    "reference": "nn",
    "seed": 7,
    "train": {"batch_size": 16, "steps": 50, "hidden_dim": 8}
  })");
  const ExperimentConfig c = load_experiment_config(path);
  CHECK(c.energy.omega == 0.25);
  CHECK(c.energy.height_m == 60.0);
  CHECK(c.instances.k_values == std::vector<int>{3, 5});
  CHECK(c.instances.seeds == std::vector<std::uint64_t>{10, 11, 12});
  CHECK(c.solvers.size() == 2);
  CHECK(fs::equivalent(*c.checkpoint, ck));
  CHECK(c.seed == 7);
  CHECK(c.train.batch_size == 16);
  CHECK(c.train.steps == 50);
  CHECK(c.train.energy.omega == 0.25);
  CHECK(c.hidden_dim == 8);
  CHECK_NOTHROW(c.validate());

  CHECK_THROWS_AS(load_experiment_config(write_config("bad1.json", R"({"solverz": []})")), ParseError);
  CHECK_THROWS_AS(load_experiment_config(write_config("bad2.json", R"({"instances": {"k": "x"}})")), ParseError);
  CHECK_THROWS_AS(load_experiment_config(write_config("bad3.json", R"({"energy": {"omega": 3}})")), ValidationError);
  CHECK_THROWS_AS(load_experiment_config(write_config("bad4.json", "{")), ParseError);

  ExperimentConfig none;
  CHECK_THROWS_AS(none.validate(), InputError);
  ExperimentConfig neural;
  neural.solvers = {parse_solver_spec("greedy")};
  CHECK_THROWS_AS(neural.validate(), InputError);
  neural.checkpoint = temp_dir() / "does_not_exist.json";
  CHECK_THROWS_AS(neural.validate(), InputError);
  ExperimentConfig ref;
  ref.solvers = {parse_solver_spec("nn")};
  ref.reference_solver = "brute";
  CHECK_THROWS_AS(ref.validate(), InputError);
}

TEST_CASE("bench rows, ratios and verification") {
  const ExperimentConfig cfg = small_bench();
  const BenchOutput out = run_bench(cfg, 1, false);
  CHECK(out.rows.size() == 6 * 7);
  for (const auto& r : out.rows) {
    CHECK(r.error.empty());
    CHECK(r.wall_time_s == 0.0);
  }

  const auto table = ratio_table(out.rows, "brute");
  CHECK(table.size() == 2 * 7);
  for (const auto& t : table) {
    CHECK(t.count == 3);
    if (t.solver == "brute") CHECK(t.mean_ratio == 1.0);
    else CHECK(t.mean_ratio >= 1.0 - 1e-12);
  }

  const std::string csv = format_results_csv(out.rows);
  CHECK(csv.rfind(std::string(kResultsHeader) + "\n", 0) == 0);
  const auto parsed = parse_results_csv(csv);
  REQUIRE(parsed.size() == out.rows.size());
  CHECK(parsed[5].solver == out.rows[5].solver);  // labels with commas survive quoting
  CHECK(format_results_csv(parsed) == csv);

  const std::string jsonl = format_solutions_jsonl(out, cfg.energy);
  const VerifyReport ok = verify_results(csv, jsonl);
  CHECK(ok.ok());
  CHECK(ok.checked == 42);

  auto tampered_rows = out.rows;
  tampered_rows[3].energy_j *= 1.000001;
  const VerifyReport bad = verify_results(format_results_csv(tampered_rows), jsonl);
  CHECK(bad.mismatches.size() == 1);
  CHECK_THROWS_AS(verify_results("wrong,header\n", jsonl), ParseError);
}

TEST_CASE("bench output is byte-stable and independent of the worker count") {
  const ExperimentConfig cfg = small_bench();
  const BenchOutput a = run_bench(cfg, 1, false);
  const BenchOutput b = run_bench(cfg, 1, false);
  const BenchOutput c = run_bench(cfg, 3, false);
  CHECK(format_results_csv(a.rows) == format_results_csv(b.rows));
  CHECK(format_results_csv(a.rows) == format_results_csv(c.rows));
  CHECK(format_ratio_csv(ratio_table(a.rows, "nn")) == format_ratio_csv(ratio_table(b.rows, "nn")));
  CHECK(format_solutions_jsonl(a, cfg.energy) == format_solutions_jsonl(c, cfg.energy));

  const BenchOutput timed = run_bench(cfg, 1, true);
  for (const auto& r : timed.rows) CHECK(r.wall_time_s >= 0.0);
}

TEST_CASE("solver failures are recorded and the run continues") {
  ExperimentConfig cfg;
  cfg.instances.k_values = {3, 9};
  cfg.instances.n = 2;
  cfg.instances.seeds = {1};
  cfg.solvers = {parse_solver_spec("brute"), parse_solver_spec("nn")};
  const BenchOutput out = run_bench(cfg, 1, false);
  REQUIRE(out.rows.size() == 4);
  CHECK(out.rows[0].error.empty());
  CHECK_FALSE(out.rows[2].error.empty());
  CHECK(std::isnan(out.rows[2].energy_j));
  CHECK(out.rows[3].error.empty());

  const std::string csv = format_results_csv(out.rows);
  CHECK(csv.find("nan") != std::string::npos);
  const VerifyReport v = verify_results(csv, format_solutions_jsonl(out, cfg.energy));
  CHECK(v.ok());
  CHECK(v.failed_rows == 1);
  CHECK(v.checked == 3);
  // The failed instance has no reference, so it drops out of the ratio table.
  for (const auto& t : ratio_table(out.rows, "brute")) CHECK(t.k == 3);
}

TEST_CASE("solution output") {
  const Instance inst = generate_instance(3, 2, 2000, 30, 4);
  const Solution s = run_solver(parse_solver_spec("brute"), EnergyParams{}, inst, nullptr, 1);
  const std::string poly = format_polyline_csv(inst, s);
  CHECK(poly.rfind("x,y\n0,0\n", 0) == 0);
  CHECK(poly.substr(poly.size() - 4) == "0,0\n");
  CHECK(std::count(poly.begin(), poly.end(), '\n') == 1 + 3 + 2);

  const auto j = nlohmann::json::parse(format_solution_json(inst, s, "brute"));
  CHECK(j["tour"].size() == 4);
  CHECK(j["ch_positions"].size() == 3);
  CHECK(j["energy"]["e_total_weighted_j"].get<double>() == s.energy.e_total_weighted_j);
  CHECK_THROWS_AS(run_solver(parse_solver_spec("greedy"), EnergyParams{}, inst, nullptr, 1), InputError);
}

TEST_CASE("relative comparison helper") {
  CHECK(approx_equal_rel(1.0, 1.0 + 1e-10, 1e-9));
  CHECK_FALSE(approx_equal_rel(1.0, 1.0 + 1e-8, 1e-9));
  CHECK(approx_equal_rel(0.0, 0.0, 1e-9));
}
