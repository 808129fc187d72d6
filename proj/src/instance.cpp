#include "ptra/instance.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <string>

#include "ptra/errors.hpp"
#include "ptra/json_io.hpp"

namespace ptra {

using nlohmann::json;

void validate(const Instance& instance) {
  if (instance.clusters.empty()) throw ValidationError("instance: clusters must be non-empty (K >= 1)");
  if (!std::isfinite(instance.area_m) || instance.area_m <= 0.0)
    throw ValidationError("instance: area_m must be positive");
  auto finite = [](Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); };
  if (!finite(instance.start)) throw ValidationError("instance: start is not finite");
  if (instance.start.x < 0.0 || instance.start.y < 0.0 || instance.start.x > instance.area_m ||
      instance.start.y > instance.area_m)
    throw ValidationError("instance: start lies outside the field");
  for (std::size_t k = 0; k < instance.clusters.size(); ++k) {
    if (instance.clusters[k].empty())
      throw ValidationError("instance: clusters[" + std::to_string(k) + "] is empty");
    for (const Point2& node : instance.clusters[k])
      if (!finite(node))
        throw ValidationError("instance: clusters[" + std::to_string(k) + "] has a non-finite node");
  }
}

void validate_tour(const Tour& tour, std::size_t cluster_count) {
  const std::size_t items = cluster_count + 1;
  if (tour.order.size() != items)
    throw InputError("tour: expected " + std::to_string(items) + " items, got " +
                     std::to_string(tour.order.size()));
  if (tour.order.front() != 0) throw InputError("tour: must start at item 0");
  std::vector<bool> seen(items, false);
  for (int item : tour.order) {
    if (item < 0 || static_cast<std::size_t>(item) >= items)
      throw InputError("tour: item " + std::to_string(item) + " out of range");
    if (seen[static_cast<std::size_t>(item)])
      throw InputError("tour: item " + std::to_string(item) + " repeated");
    seen[static_cast<std::size_t>(item)] = true;
  }
}

void validate_ch_choices(const Instance& instance, std::span<const int> ch_choices) {
  if (ch_choices.size() != instance.cluster_count())
    throw InputError("ch_choices: expected one CH per cluster");
  for (std::size_t k = 0; k < ch_choices.size(); ++k)
    if (ch_choices[k] < 0 || static_cast<std::size_t>(ch_choices[k]) >= instance.clusters[k].size())
      throw InputError("ch_choices: index out of range for cluster " + std::to_string(k));
}

Tour identity_tour(std::size_t cluster_count) {
  Tour t;
  t.order.resize(cluster_count + 1);
  for (std::size_t i = 0; i < t.order.size(); ++i) t.order[i] = static_cast<int>(i);
  return t;
}

Point2 centroid(const Cluster& cluster) {
  Point2 c;
  for (const Point2& p : cluster) {
    c.x += p.x;
    c.y += p.y;
  }
  const double n = static_cast<double>(cluster.size());
  return {c.x / n, c.y / n};
}

Instance generate_instance(std::size_t k, std::size_t n, double area_m, double std_m,
                           std::uint64_t seed) {
  if (k < 1 || n < 1) throw InputError("generate_instance: k and n must be >= 1");
  if (!(std_m >= 0.0) || !(area_m > 0.0))
    throw InputError("generate_instance: area must be > 0 and std >= 0");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, area_m);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Instance inst;
  inst.area_m = area_m;
  inst.seed = seed;
  inst.start = {0.0, 0.0};
  inst.clusters.resize(k);
  for (auto& cluster : inst.clusters) {
    const Point2 mean{uniform(rng), uniform(rng)};
    cluster.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double zx = gauss(rng);
      const double zy = gauss(rng);
      Point2 p{mean.x + std_m * zx, mean.y + std_m * zy};
      p.x = std::clamp(p.x, 0.0, area_m);
      p.y = std::clamp(p.y, 0.0, area_m);
      cluster.push_back(p);
    }
  }
  return inst;
}

Instance normalized(const Instance& instance) {
  Instance out = instance;
  const double s = instance.area_m;
  out.start = {instance.start.x / s, instance.start.y / s};
  for (auto& cluster : out.clusters)
    for (auto& p : cluster) p = {p.x / s, p.y / s};
  out.area_m = 1.0;
  return out;
}

namespace {

constexpr int kInstanceVersion = 1;

Point2 parse_point(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError("instance: field '" + field + "' must be a two-number array");
  return {j[0].get<double>(), j[1].get<double>()};
}

const json& require_field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw ParseError(std::string("instance: missing field '") + name + "'");
  return *it;
}

}  // namespace

json instance_to_json(const Instance& instance) {
  json j;
  j["version"] = kInstanceVersion;
  j["area_m"] = instance.area_m;
  j["seed"] = instance.seed;
  j["start"] = {instance.start.x, instance.start.y};
  json clusters = json::array();
  for (const auto& cluster : instance.clusters) {
    json nodes = json::array();
    for (const auto& p : cluster) nodes.push_back({p.x, p.y});
    clusters.push_back({{"nodes", std::move(nodes)}});
  }
  j["clusters"] = std::move(clusters);
  return j;
}

void save_instance(const Instance& instance, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << instance_to_json(instance).dump(1) << '\n';
  if (!out) throw InputError("write failed: " + path.string());
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("instance: " + path.string() + ": " + e.what());
  }
  return instance_from_json(j);
}

Instance instance_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("instance: top level must be an object");

  const json& version = require_field(j, "version");
  if (!version.is_number_integer() || version.get<int>() != kInstanceVersion)
    throw ParseError("instance: field 'version' must be " + std::to_string(kInstanceVersion));

  Instance inst;
  const json& area = require_field(j, "area_m");
  if (!area.is_number()) throw ParseError("instance: field 'area_m' must be a number");
  inst.area_m = area.get<double>();
  const json& seed = require_field(j, "seed");
  if (!seed.is_number_integer()) throw ParseError("instance: field 'seed' must be an integer");
  inst.seed = seed.get<std::uint64_t>();
  inst.start = parse_point(require_field(j, "start"), "start");

  const json& clusters = require_field(j, "clusters");
  if (!clusters.is_array()) throw ParseError("instance: field 'clusters' must be an array");
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    const std::string where = "clusters[" + std::to_string(k) + "]";
    if (!clusters[k].is_object() || !clusters[k].contains("nodes") || !clusters[k]["nodes"].is_array())
      throw ParseError("instance: field '" + where + ".nodes' must be an array");
    Cluster cluster;
    const json& nodes = clusters[k]["nodes"];
    for (std::size_t n = 0; n < nodes.size(); ++n)
      cluster.push_back(parse_point(nodes[n], where + ".nodes[" + std::to_string(n) + "]"));
    inst.clusters.push_back(std::move(cluster));
  }
  validate(inst);
  return inst;
}

}  // namespace ptra
