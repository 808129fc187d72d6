#include "ptra/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "ptra/errors.hpp"
#include "ptra/json_io.hpp"
#include "ptra/parallel.hpp"
#include "ptra/route_search.hpp"

namespace ptra {

using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

long long parse_int(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw InputError(what + ": expected an integer, got '" + text + "'");
  return v;
}

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw InputError(what + ": expected a number, got '" + text + "'");
  return v;
}

/// RFC 4180 field splitting: quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        fields.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else {
      fields.back() += ch;
    }
  }
  return fields;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Solver specs

bool SolverSpec::needs_checkpoint() const noexcept {
  return kind == SolverKind::kGreedy || kind == SolverKind::kSampling ||
         kind == SolverKind::kActive;
}

std::string SolverSpec::label() const {
  switch (kind) {
    case SolverKind::kGreedy:
      return "greedy";
    case SolverKind::kSampling:
      return "sampling:" + std::to_string(samples);
    case SolverKind::kActive: {
      std::string s = "active:" + std::to_string(active.samples_per_step) + "," +
                      std::to_string(active.steps) + "," + fmt(active.ema_zeta);
      if (active.baseline_mode == BaselineMode::kSampleMean) s += ",mean";
      return s;
    }
    case SolverKind::kNearestNeighbor:
      return "nn";
    case SolverKind::kGenetic:
      return "ga:" + std::to_string(ga.generations) + "," + std::to_string(ga.population_size);
    case SolverKind::kBrute:
      return "brute";
    case SolverKind::kRandom:
      return "random";
  }
  return "?";
}

SolverSpec parse_solver_spec(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::vector<std::string> args =
      colon == std::string::npos ? std::vector<std::string>{} : split(text.substr(colon + 1), ',');
  const std::string what = "solver '" + text + "'";
  const auto arity = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi)
      throw InputError(what + ": expected " + std::to_string(lo) + "-" + std::to_string(hi) +
                       " settings");
  };

  SolverSpec spec;
  if (name == "greedy" || name == "nn" || name == "brute" || name == "random") {
    arity(0, 0);
    spec.kind = name == "greedy" ? SolverKind::kGreedy
                : name == "nn"   ? SolverKind::kNearestNeighbor
                : name == "brute" ? SolverKind::kBrute
                                  : SolverKind::kRandom;
  } else if (name == "sampling") {
    arity(1, 1);
    spec.kind = SolverKind::kSampling;
    spec.samples = static_cast<int>(parse_int(args[0], what));
    if (spec.samples < 1) throw InputError(what + ": sample count must be >= 1");
  } else if (name == "active") {
    arity(2, 4);
    spec.kind = SolverKind::kActive;
    spec.active.samples_per_step = static_cast<int>(parse_int(args[0], what));
    spec.active.steps = parse_int(args[1], what);
    if (args.size() >= 3) spec.active.ema_zeta = parse_double(args[2], what);
    if (args.size() == 4) {
      if (args[3] == "mean")
        spec.active.baseline_mode = BaselineMode::kSampleMean;
      else if (args[3] != "critic")
        throw InputError(what + ": baseline must be 'critic' or 'mean'");
    }
    spec.active.validate();
  } else if (name == "ga") {
    arity(0, 2);
    spec.kind = SolverKind::kGenetic;
    if (args.size() >= 1) spec.ga.generations = static_cast<int>(parse_int(args[0], what));
    if (args.size() == 2) spec.ga.population_size = static_cast<int>(parse_int(args[1], what));
    spec.ga.validate();
  } else {
    throw InputError("unknown solver '" + text +
                     "' (greedy, sampling:M, active:Q,S[,zeta], nn, ga[:G[,P]], brute, random)");
  }
  return spec;
}

Solution run_solver(const SolverSpec& spec, const EnergyParams& params, const Instance& instance,
                    const nn::Checkpoint* model, std::uint64_t seed) {
  if (spec.needs_checkpoint() && model == nullptr)
    throw InputError("solver '" + spec.label() + "' needs a checkpoint");
  switch (spec.kind) {
    case SolverKind::kGreedy:
      return infer_greedy(model->policy, params, instance);
    case SolverKind::kSampling: {
      nn::Rng rng(seed);
      return infer_sampling(model->policy, params, instance, spec.samples, rng);
    }
    case SolverKind::kActive: {
      ActiveSearchConfig cfg = spec.active;
      cfg.seed = seed;
      return infer_active(model->policy, model->critic, params, instance, cfg).best;
    }
    case SolverKind::kNearestNeighbor:
      return solve_nearest_neighbor(params, instance);
    case SolverKind::kGenetic: {
      GaConfig cfg = spec.ga;
      cfg.seed = seed;
      return solve_genetic(params, instance, cfg);
    }
    case SolverKind::kBrute:
      return brute_force_solve(params, instance);
    case SolverKind::kRandom: {
      std::mt19937_64 rng(seed);
      return solve_random(params, instance, rng);
    }
  }
  throw InputError("unhandled solver");
}

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
  if (solvers.empty()) throw InputError("config: at least one solver is required");
  if (instances.k_values.empty()) throw InputError("config: instances.k must not be empty");
  for (int k : instances.k_values)
    if (k < 1) throw InputError("config: every instances.k must be >= 1");
  if (instances.n < 1) throw InputError("config: instances.n must be >= 1");
  if (!(instances.area_m > 0.0)) throw InputError("config: instances.area_m must be > 0");
  if (!(instances.std_m >= 0.0)) throw InputError("config: instances.std_m must be >= 0");
  if (instances.seeds.empty()) throw InputError("config: instances.seeds must not be empty");
  bool neural = false;
  for (const auto& s : solvers) neural = neural || s.needs_checkpoint();
  if (neural) {
    if (!checkpoint) throw InputError("config: neural solvers need a checkpoint");
    if (!std::filesystem::exists(*checkpoint))
      throw InputError("config: checkpoint not found: " + checkpoint->string());
  }
  if (!reference_solver.empty()) {
    bool found = false;
    for (const auto& s : solvers) found = found || s.label() == reference_solver;
    if (!found) throw InputError("config: reference solver '" + reference_solver + "' is not in the solver list");
  }
  energy.validate();
}

namespace {

template <class T>
T get_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ParseError("config: field '" + where + "' has the wrong type");
  }
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ParseError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) throw ParseError("config: unknown field '" + where + "." + key + "'");
  }
}

InstanceSet parse_instances(const json& j) {
  check_keys(j, "instances", {"k", "n", "area_m", "std_m", "seeds", "seed_count", "first_seed"});
  InstanceSet set;
  if (j.contains("k")) {
    const json& k = j["k"];
    set.k_values = k.is_array() ? get_as<std::vector<int>>(k, "instances.k")
                                : std::vector<int>{get_as<int>(k, "instances.k")};
  }
  if (j.contains("n")) set.n = get_as<int>(j["n"], "instances.n");
  if (j.contains("area_m")) set.area_m = get_as<double>(j["area_m"], "instances.area_m");
  if (j.contains("std_m")) set.std_m = get_as<double>(j["std_m"], "instances.std_m");
  if (j.contains("seeds") && j.contains("seed_count"))
    throw ParseError("config: give either instances.seeds or instances.seed_count");
  if (j.contains("seeds")) set.seeds = get_as<std::vector<std::uint64_t>>(j["seeds"], "instances.seeds");
  if (j.contains("seed_count")) {
    const auto count = get_as<int>(j["seed_count"], "instances.seed_count");
    const auto first =
        j.contains("first_seed") ? get_as<std::uint64_t>(j["first_seed"], "instances.first_seed") : 1;
    set.seeds.clear();
    for (int i = 0; i < count; ++i) set.seeds.push_back(first + static_cast<std::uint64_t>(i));
  }
  return set;
}

void parse_train(const json& j, ExperimentConfig& cfg) {
  check_keys(j, "train",
             {"batch_size", "steps", "lr_initial", "lr_decay_every", "lr_decay_factor", "k_train",
              "n_train", "area_m", "std_m", "energy_scale", "hidden_dim", "checkpoint_every"});
  TrainConfig& t = cfg.train;
  const auto read = [&](const char* key, auto& field) {
    if (j.contains(key))
      field = get_as<std::remove_reference_t<decltype(field)>>(j[key], std::string("train.") + key);
  };
  read("batch_size", t.batch_size);
  read("steps", t.steps);
  read("lr_initial", t.lr_initial);
  read("lr_decay_every", t.lr_decay_every);
  read("lr_decay_factor", t.lr_decay_factor);
  read("k_train", t.k_train);
  read("n_train", t.n_train);
  read("area_m", t.area_m);
  read("std_m", t.std_m);
  read("energy_scale", t.energy_scale);
  read("hidden_dim", cfg.hidden_dim);
  read("checkpoint_every", cfg.checkpoint_every);
}

}  // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("config: " + path.string() + ": " + e.what());
  }
  check_keys(j, "", {"energy", "instances", "solvers", "checkpoint", "reference", "seed", "train"});

  ExperimentConfig cfg;
  if (j.contains("energy")) cfg.energy = energy_params_from_json(j["energy"]);
  if (j.contains("instances")) cfg.instances = parse_instances(j["instances"]);
  if (j.contains("solvers")) {
    for (const auto& s : get_as<std::vector<std::string>>(j["solvers"], "solvers"))
      cfg.solvers.push_back(parse_solver_spec(s));
  }
  if (j.contains("checkpoint")) {
    std::filesystem::path ck = get_as<std::string>(j["checkpoint"], "checkpoint");
    if (ck.is_relative()) ck = path.parent_path() / ck;
    cfg.checkpoint = ck;
  }
  if (j.contains("reference"))
    cfg.reference_solver = parse_solver_spec(get_as<std::string>(j["reference"], "reference")).label();
  if (j.contains("seed")) cfg.seed = get_as<std::uint64_t>(j["seed"], "seed");
  if (j.contains("train")) parse_train(j["train"], cfg);
  cfg.train.energy = cfg.energy;
  cfg.train.seed = cfg.seed;
  return cfg;
}

// ---------------------------------------------------------------------------
// Bench

BenchOutput run_bench(const ExperimentConfig& config, int workers, bool timing) {
  config.validate();
  std::optional<nn::Checkpoint> model;
  if (config.checkpoint) {
    bool neural = false;
    for (const auto& s : config.solvers) neural = neural || s.needs_checkpoint();
    if (neural) model = nn::load_checkpoint(*config.checkpoint);
  }

  BenchOutput out;
  const InstanceSet& set = config.instances;
  for (int k : set.k_values) {
    for (std::uint64_t seed : set.seeds) {
      out.instances.push_back(generate_instance(static_cast<std::size_t>(k),
                                                static_cast<std::size_t>(set.n), set.area_m,
                                                set.std_m, seed));
      out.instance_ids.push_back("k" + std::to_string(k) + "_s" + std::to_string(seed));
    }
  }

  const std::size_t solvers = config.solvers.size();
  const std::size_t pairs = out.instances.size() * solvers;
  out.rows.resize(pairs);
  out.solutions.resize(pairs);
  parallel_for(pairs, workers, [&](std::size_t p, int) {
    const std::size_t i = p / solvers;
    const SolverSpec& spec = config.solvers[p % solvers];
    const Instance& inst = out.instances[i];
    ResultRow& row = out.rows[p];
    row.instance_id = out.instance_ids[i];
    row.k = static_cast<int>(inst.cluster_count());
    row.solver = spec.label();
    row.seed = inst.seed;

    const auto t0 = std::chrono::steady_clock::now();
    try {
      const std::uint64_t solver_seed = mix_seed(config.seed, inst.seed, inst.cluster_count());
      Solution s = run_solver(spec, config.energy, inst, model ? &*model : nullptr, solver_seed);
      row.energy_j = s.energy.e_total_weighted_j;
      row.e_ground_j = s.energy.e_ground_j;
      row.e_uav_j = s.energy.e_uav_j();
      row.tour_length_m = s.tour_length_m;
      out.solutions[p] = std::move(s);
    } catch (const std::exception& e) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.energy_j = row.e_ground_j = row.e_uav_j = row.tour_length_m = nan;
      row.error = e.what();
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    row.wall_time_s = timing ? dt.count() : 0.0;
  });
  return out;
}

std::vector<RatioRow> ratio_table(const std::vector<ResultRow>& rows, const std::string& reference) {
  std::map<std::string, double> ref_energy;
  for (const auto& r : rows)
    if (r.solver == reference && r.error.empty()) ref_energy[r.instance_id] = r.energy_j;

  std::vector<RatioRow> table;
  std::map<std::pair<int, std::string>, std::size_t> index;
  for (const auto& r : rows) {
    if (!r.error.empty() || std::isnan(r.energy_j)) continue;
    const auto ref = ref_energy.find(r.instance_id);
    if (ref == ref_energy.end()) continue;
    auto [it, fresh] = index.try_emplace({r.k, r.solver}, table.size());
    if (fresh) table.push_back({r.k, r.solver, 0.0, 0.0, 0});
    RatioRow& t = table[it->second];
    t.mean_energy_j += r.energy_j;
    t.mean_ratio += r.energy_j / ref->second;
    ++t.count;
  }
  for (auto& t : table) {
    t.mean_energy_j /= t.count;
    t.mean_ratio /= t.count;
  }
  std::stable_sort(table.begin(), table.end(),
                   [](const RatioRow& a, const RatioRow& b) { return a.k < b.k; });
  return table;
}

std::string format_results_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& r : rows) {
    out += csv_field(r.instance_id) + "," + std::to_string(r.k) + "," + csv_field(r.solver) + "," +
           fmt(r.energy_j) + "," +
           fmt(r.e_ground_j) + "," + fmt(r.e_uav_j) + "," + fmt(r.tour_length_m) + "," +
           fmt(r.wall_time_s) + "," + std::to_string(r.seed) + "\n";
  }
  return out;
}

std::vector<ResultRow> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader)
    throw ParseError("results: header must be '" + std::string(kResultsHeader) + "'");
  std::vector<ResultRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 9)
      throw ParseError("results: line " + std::to_string(line_no) + " must have 9 fields");
    const std::string where = "results line " + std::to_string(line_no);
    try {
      ResultRow r;
      r.instance_id = f[0];
      r.k = static_cast<int>(parse_int(f[1], where));
      r.solver = f[2];
      r.energy_j = parse_double(f[3], where);
      r.e_ground_j = parse_double(f[4], where);
      r.e_uav_j = parse_double(f[5], where);
      r.tour_length_m = parse_double(f[6], where);
      r.wall_time_s = parse_double(f[7], where);
      r.seed = static_cast<std::uint64_t>(parse_int(f[8], where));
      if (std::isnan(r.energy_j)) r.error = "solver failed";
      rows.push_back(std::move(r));
    } catch (const InputError& e) {
      throw ParseError(e.what());
    }
  }
  return rows;
}

std::string format_ratio_csv(const std::vector<RatioRow>& rows) {
  std::string out = "k,solver,mean_energy_j,mean_ratio,count\n";
  for (const auto& r : rows)
    out += std::to_string(r.k) + "," + csv_field(r.solver) + "," + fmt(r.mean_energy_j) + "," +
           fmt(r.mean_ratio) + "," + std::to_string(r.count) + "\n";
  return out;
}

std::string format_solutions_jsonl(const BenchOutput& output, const EnergyParams& params) {
  const json energy = energy_params_to_json(params);
  const std::size_t solvers = output.instances.empty() ? 0 : output.rows.size() / output.instances.size();
  std::string out;
  for (std::size_t p = 0; p < output.rows.size(); ++p) {
    const ResultRow& r = output.rows[p];
    json j;
    j["instance_id"] = r.instance_id;
    j["solver"] = r.solver;
    if (!r.error.empty()) {
      j["error"] = r.error;
    } else {
      j["energy_params"] = energy;
      j["instance"] = instance_to_json(output.instances[p / solvers]);
      j["tour"] = output.solutions[p].tour.order;
      j["ch_choices"] = output.solutions[p].ch_choices;
    }
    out += j.dump() + "\n";
  }
  return out;
}

bool approx_equal_rel(double a, double b, double rel) noexcept {
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= rel * scale || std::abs(a - b) <= 1e-12;
}

VerifyReport verify_results(const std::string& results_csv, const std::string& solutions_jsonl) {
  const std::vector<ResultRow> rows = parse_results_csv(results_csv);
  std::vector<json> sols;
  std::istringstream in(solutions_jsonl);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      sols.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("solutions: ") + e.what());
    }
  }
  if (sols.size() != rows.size())
    throw ParseError("solutions: " + std::to_string(sols.size()) + " lines for " +
                     std::to_string(rows.size()) + " result rows");

  VerifyReport report;
  constexpr double kRel = 1e-9;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ResultRow& r = rows[i];
    const json& s = sols[i];
    const std::string where = "row " + std::to_string(i + 1) + " (" + r.instance_id + ", " + r.solver + ")";
    if (s.value("instance_id", "") != r.instance_id || s.value("solver", "") != r.solver) {
      report.mismatches.push_back(where + ": solution line does not match the row");
      continue;
    }
    if (!r.error.empty() || s.contains("error")) {
      ++report.failed_rows;
      continue;
    }
    try {
      const EnergyParams params = energy_params_from_json(s.at("energy_params"));
      const Instance inst = instance_from_json(s.at("instance"));
      Tour tour;
      tour.order = s.at("tour").get<std::vector<int>>();
      const auto chs = s.at("ch_choices").get<std::vector<int>>();
      const EnergyBreakdown e = evaluate_solution(params, inst, tour, chs);
      const double length = tour_length_m(inst, tour, chs);
      const std::pair<const char*, std::pair<double, double>> checks[] = {
          {"energy_j", {r.energy_j, e.e_total_weighted_j}},
          {"e_ground_j", {r.e_ground_j, e.e_ground_j}},
          {"e_uav_j", {r.e_uav_j, e.e_uav_j()}},
          {"tour_length_m", {r.tour_length_m, length}},
      };
      for (const auto& [name, v] : checks)
        if (!approx_equal_rel(v.first, v.second, kRel))
          report.mismatches.push_back(where + ": " + name + " reported " + fmt(v.first) +
                                      ", recomputed " + fmt(v.second));
      ++report.checked;
    } catch (const json::exception& e) {
      report.mismatches.push_back(where + ": " + e.what());
    } catch (const std::exception& e) {
      report.mismatches.push_back(where + ": " + e.what());
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Single-solution output

std::string format_polyline_csv(const Instance& instance, const Solution& solution) {
  std::string out = "x,y\n";
  const auto add = [&](Point2 p) { out += fmt(p.x) + "," + fmt(p.y) + "\n"; };
  add(instance.start);
  for (std::size_t i = 1; i < solution.tour.order.size(); ++i) {
    const auto k = static_cast<std::size_t>(solution.tour.order[i] - 1);
    add(ch_position(instance, k, solution.ch_choices[k]));
  }
  add(instance.start);
  return out;
}

std::string format_solution_json(const Instance& instance, const Solution& solution,
                                 const std::string& solver) {
  json j;
  j["solver"] = solver;
  j["tour"] = solution.tour.order;
  j["ch_choices"] = solution.ch_choices;
  json positions = json::array();
  for (std::size_t i = 1; i < solution.tour.order.size(); ++i) {
    const auto k = static_cast<std::size_t>(solution.tour.order[i] - 1);
    const Point2 p = ch_position(instance, k, solution.ch_choices[k]);
    positions.push_back({p.x, p.y});
  }
  j["ch_positions"] = std::move(positions);
  j["tour_length_m"] = solution.tour_length_m;
  j["energy"] = {{"e_ground_j", solution.energy.e_ground_j},
                 {"e_uav_flight_j", solution.energy.e_uav_flight_j},
                 {"e_uav_hover_j", solution.energy.e_uav_hover_j},
                 {"e_uav_j", solution.energy.e_uav_j()},
                 {"e_total_weighted_j", solution.energy.e_total_weighted_j}};
  return j.dump(1) + "\n";
}

}  // namespace ptra
