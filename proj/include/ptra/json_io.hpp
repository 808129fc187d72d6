#pragma once

#include "json.hpp"
#include "ptra/energy.hpp"
#include "ptra/instance.hpp"

namespace ptra {

nlohmann::json instance_to_json(const Instance& instance);
/// Throws ParseError naming the offending field, ValidationError on bad geometry.
Instance instance_from_json(const nlohmann::json& j);

/// Every EnergyParams field under its struct name.
nlohmann::json energy_params_to_json(const EnergyParams& params);
/// Starts from `base` and overrides the fields present in `j`. Unknown keys
/// and non-numeric values throw ParseError; the result is validated.
EnergyParams energy_params_from_json(const nlohmann::json& j, EnergyParams base = {});

}  // namespace ptra
