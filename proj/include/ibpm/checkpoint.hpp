// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include "ibpm/autodiff.hpp"

namespace ibpm::nn {

// {name: {shape: [...], data: [...]}} in name order. Doubles are written with
// round-trip precision so a reload is bit-exact. Optimizer moments are not
// saved.
nlohmann::ordered_json params_to_json(const ParamStore& store);
ParamStore params_from_json(const nlohmann::json& j);

}  // namespace ibpm::nn
