#include "ptra/json_io.hpp"

#include <string>
#include <variant>

#include "ptra/errors.hpp"

namespace ptra {

using nlohmann::json;

namespace {

using Field = std::variant<double EnergyParams::*, int EnergyParams::*>;

struct NamedField {
  const char* name;
  Field member;
};

constexpr NamedField kFields[] = {
    {"eps_fs", &EnergyParams::eps_fs},
    {"eps_mp", &EnergyParams::eps_mp},
    {"e_elec", &EnergyParams::e_elec},
    {"msg_bits", &EnergyParams::msg_bits},
    {"p_ch_dbm", &EnergyParams::p_ch_dbm},
    {"n_per_cluster", &EnergyParams::n_per_cluster},
    {"bandwidth_hz", &EnergyParams::bandwidth_hz},
    {"noise_dbm_hz", &EnergyParams::noise_dbm_hz},
    {"carrier_hz", &EnergyParams::carrier_hz},
    {"alpha", &EnergyParams::alpha},
    {"height_m", &EnergyParams::height_m},
    {"mu_los_db", &EnergyParams::mu_los_db},
    {"mu_nlos_db", &EnergyParams::mu_nlos_db},
    {"beta", &EnergyParams::beta},
    {"eta", &EnergyParams::eta},
    {"light_speed_ms", &EnergyParams::light_speed_ms},
    {"v_uav_ms", &EnergyParams::v_uav_ms},
    {"v_max_ms", &EnergyParams::v_max_ms},
    {"mass_kg", &EnergyParams::mass_kg},
    {"rotor_radius_m", &EnergyParams::rotor_radius_m},
    {"n_props", &EnergyParams::n_props},
    {"p_max_w", &EnergyParams::p_max_w},
    {"p_idle_w", &EnergyParams::p_idle_w},
    {"p_com_w", &EnergyParams::p_com_w},
    {"gravity_ms2", &EnergyParams::gravity_ms2},
    {"air_density_kgm3", &EnergyParams::air_density_kgm3},
    {"omega", &EnergyParams::omega},
};

const NamedField* find_field(const std::string& name) {
  for (const auto& f : kFields)
    if (name == f.name) return &f;
  return nullptr;
}

}  // namespace

json energy_params_to_json(const EnergyParams& params) {
  json j = json::object();
  for (const auto& f : kFields)
    std::visit([&](auto member) { j[f.name] = params.*member; }, f.member);
  return j;
}

EnergyParams energy_params_from_json(const json& j, EnergyParams base) {
  if (!j.is_object()) throw ParseError("energy: must be an object");
  for (const auto& [key, value] : j.items()) {
    const NamedField* f = find_field(key);
    if (!f) throw ParseError("energy: unknown field '" + key + "'");
    if (!value.is_number()) throw ParseError("energy: field '" + key + "' must be a number");
    std::visit(
        [&](auto member) {
          using T = std::remove_reference_t<decltype(base.*member)>;
          if constexpr (std::is_same_v<T, int>) {
            if (!value.is_number_integer())
              throw ParseError("energy: field '" + key + "' must be an integer");
          }
          base.*member = value.get<T>();
        },
        f->member);
  }
  try {
    base.validate();
  } catch (const InputError& e) {
    throw ValidationError(std::string("energy: ") + e.what());
  }
  return base;
}

}  // namespace ptra
