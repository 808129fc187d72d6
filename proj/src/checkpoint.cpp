#include "ptra/checkpoint.hpp"

#include <fstream>

#include "json.hpp"
#include "ptra/errors.hpp"

namespace ptra::nn {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& name, Eigen::Index rows,
                        Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw ParseError("checkpoint: entry '" + name + "' must have " + std::to_string(rows) + " rows");
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ParseError("checkpoint: entry '" + name + "' row " + std::to_string(r) + " must have " +
                       std::to_string(cols) + " columns");
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number())
        throw ParseError("checkpoint: entry '" + name + "' holds a non-number");
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

const json& field(const json& j, const std::string& name) {
  auto it = j.find(name);
  if (it == j.end()) throw ParseError("checkpoint: missing entry '" + name + "'");
  return *it;
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  json j;
  j["version"] = kCheckpointVersion;
  j["hidden_dim"] = checkpoint.hidden_dim;
  j["seed"] = checkpoint.seed;
  j["step"] = checkpoint.step;
  for (const auto& t : checkpoint.policy.tensors()) j["actor." + t.name] = matrix_to_json(*t.value);
  for (const auto& t : checkpoint.critic.tensors()) j["critic." + t.name] = matrix_to_json(*t.value);
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump() << '\n';
  if (!out) throw InputError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("checkpoint: " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError("checkpoint: top level must be an object");
  if (field(j, "version") != kCheckpointVersion)
    throw ParseError("checkpoint: unsupported 'version'");
  const json& dim = field(j, "hidden_dim");
  if (!dim.is_number_integer() || dim.get<int>() < 1)
    throw ParseError("checkpoint: 'hidden_dim' must be a positive integer");

  // Shapes come from a freshly initialized model of the same width.
  Checkpoint cp;
  cp.hidden_dim = dim.get<int>();
  const InitializedParams shapes = init_params(0, cp.hidden_dim);
  cp.policy = shapes.policy;
  cp.critic = shapes.critic;
  cp.seed = field(j, "seed").get<std::uint64_t>();
  cp.step = j.contains("step") ? j["step"].get<std::int64_t>() : 0;
  for (auto& t : cp.policy.tensors()) {
    const std::string name = "actor." + t.name;
    *t.value = matrix_from_json(field(j, name), name, t.value->rows(), t.value->cols());
  }
  for (auto& t : cp.critic.tensors()) {
    const std::string name = "critic." + t.name;
    *t.value = matrix_from_json(field(j, name), name, t.value->rows(), t.value->cols());
  }
  return cp;
}

}  // namespace ptra::nn
