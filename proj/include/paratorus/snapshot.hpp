#pragma once

#include "paratorus/grid.hpp"
#include "paratorus/paraflow.hpp"

#include <json.hpp>

#include <string>

namespace paratorus {

inline constexpr int kSnapshotSchema = 1;

// Coefficients are stored as [re, im] pairs, component-major, lattice
// order as in TorusField.
nlohmann::json field_to_json(const TorusField& u);
TorusField field_from_json(const nlohmann::json& j);  // throws DomainError on schema mismatch

nlohmann::json diffeo_to_json(const Diffeo& d);
Diffeo diffeo_from_json(const nlohmann::json& j);

// Sampled symbol table (kept small: intended for n = 1 checks).
nlohmann::json symbol_to_json(const GridSymbol& a);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace paratorus
