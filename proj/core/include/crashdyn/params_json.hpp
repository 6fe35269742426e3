#pragma once

#include <nlohmann/json.hpp>

#include "crashdyn/surfaces.hpp"

namespace crashdyn {

// Field names match the C++ members exactly. from_json requires every field
// and validates the type invariants.
void to_json(nlohmann::json& j, const PotentialParams& p);
void from_json(const nlohmann::json& j, PotentialParams& p);
void to_json(nlohmann::json& j, const DiffusionParams& p);
void from_json(const nlohmann::json& j, DiffusionParams& p);
void to_json(nlohmann::json& j, const IndexFitParams& p);
void from_json(const nlohmann::json& j, IndexFitParams& p);

/// Parameter object of `model` from a raw vector in field order.
nlohmann::json params_to_json(SurfaceModel model, std::span<const double> params);
std::vector<double> params_from_json(SurfaceModel model, const nlohmann::json& j);

/// {"model", "params", "residual_sum", "initial_residual", "iterations", "converged", "underdetermined"}
nlohmann::json fit_report_to_json(SurfaceModel model, const FitReport& report);

}  // namespace crashdyn
