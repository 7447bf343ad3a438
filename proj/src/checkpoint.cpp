// SPDX-License-Identifier: Apache-2.0
#include "ibpm/checkpoint.hpp"

namespace ibpm::nn {

nlohmann::ordered_json params_to_json(const ParamStore& store) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [name, slot] : store.slots()) {
    out[name] = {{"shape", slot.value.shape()}, {"data", slot.value.values()}};
  }
  return out;
}

ParamStore params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("parameters must be a JSON object");
  ParamStore store;
  for (const auto& [name, entry] : j.items()) {
    if (!entry.is_object() || !entry.contains("shape") || !entry.contains("data")) {
      throw FormatError("parameter '" + name + "' needs shape and data");
    }
    try {
      store.add(name, Tensor(entry["shape"].get<std::vector<std::size_t>>(),
                             entry["data"].get<std::vector<double>>()));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("parameter '" + name + "': " + e.what());
    } catch (const ShapeError& e) {
      throw FormatError("parameter '" + name + "': " + e.what());
    }
  }
  return store;
}

}  // namespace ibpm::nn
