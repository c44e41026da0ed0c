#pragma once

#include <string>

#include <json.hpp>

#include "tenseg/core.hpp"
#include "tenseg/unfold.hpp"

namespace tenseg {

using Json = nlohmann::ordered_json;

inline constexpr int kGraphSchemaVersion = 1;

Json to_json(const TensegrityGraph& g);
// Throws StructureError on a malformed document.
TensegrityGraph graph_from_json(const Json& j);

Json to_json(const PlanarLayout& layout);

}  // namespace tenseg
