#include "crashdyn/params_json.hpp"

#include <string>

#include <fmt/format.h>

#include "crashdyn/error.hpp"

namespace crashdyn {

namespace {

constexpr std::array<const char*, PotentialParams::kSize> kPotentialNames{
    "A", "B", "omega", "omega1", "alpha", "beta1", "beta2", "a", "b", "gamma"};
constexpr std::array<const char*, DiffusionParams::kSize> kDiffusionNames{"A", "B", "p"};
constexpr std::array<const char*, IndexFitParams::kSize> kIndexNames{
    "A0", "A1", "A2", "alpha1", "alpha2", "omega", "gamma"};

std::span<const char* const> names_of(SurfaceModel model) {
  switch (model) {
    case SurfaceModel::potential: return kPotentialNames;
    case SurfaceModel::diffusion: return kDiffusionNames;
    case SurfaceModel::index: return kIndexNames;
  }
  return {};
}

nlohmann::json to_object(std::span<const char* const> names, std::span<const double> values) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < names.size(); ++i) j[names[i]] = values[i];
  return j;
}

std::vector<double> from_object(std::span<const char* const> names, const nlohmann::json& j,
                                std::string_view what) {
  if (!j.is_object()) throw DataError(fmt::format("{}: expected a JSON object", what));
  std::vector<double> values;
  std::string missing;
  for (const char* name : names) {
    if (!j.contains(name)) {
      missing += missing.empty() ? name : fmt::format(", {}", name);
      continue;
    }
    if (!j.at(name).is_number()) throw DataError(fmt::format("{}: field '{}' is not a number", what, name));
    values.push_back(j.at(name).get<double>());
  }
  if (!missing.empty()) throw DataError(fmt::format("{}: missing fields: {}", what, missing));
  return values;
}

}  // namespace

void to_json(nlohmann::json& j, const PotentialParams& p) { j = to_object(kPotentialNames, p.to_array()); }

void from_json(const nlohmann::json& j, PotentialParams& p) {
  p = PotentialParams::from_span(from_object(kPotentialNames, j, "potential parameters"));
  p.validate();
}

void to_json(nlohmann::json& j, const DiffusionParams& p) { j = to_object(kDiffusionNames, p.to_array()); }

void from_json(const nlohmann::json& j, DiffusionParams& p) {
  p = DiffusionParams::from_span(from_object(kDiffusionNames, j, "diffusion parameters"));
  p.validate();
}

void to_json(nlohmann::json& j, const IndexFitParams& p) { j = to_object(kIndexNames, p.to_array()); }

void from_json(const nlohmann::json& j, IndexFitParams& p) {
  p = IndexFitParams::from_span(from_object(kIndexNames, j, "index parameters"));
  p.validate();
}

nlohmann::json params_to_json(SurfaceModel model, std::span<const double> params) {
  if (params.size() != parameter_count(model)) {
    throw UsageError(fmt::format("{} parameters: expected {}, got {}", to_string(model),
                                 parameter_count(model), params.size()));
  }
  return to_object(names_of(model), params);
}

std::vector<double> params_from_json(SurfaceModel model, const nlohmann::json& j) {
  switch (model) {
    case SurfaceModel::potential: {
      const auto a = j.get<PotentialParams>().to_array();
      return {a.begin(), a.end()};
    }
    case SurfaceModel::diffusion: {
      const auto a = j.get<DiffusionParams>().to_array();
      return {a.begin(), a.end()};
    }
    case SurfaceModel::index: {
      const auto a = j.get<IndexFitParams>().to_array();
      return {a.begin(), a.end()};
    }
  }
  return {};
}

nlohmann::json fit_report_to_json(SurfaceModel model, const FitReport& report) {
  return {{"model", std::string(to_string(model))},
          {"params", params_to_json(model, report.params)},
          {"residual_sum", report.residual_sum},
          {"initial_residual", report.initial_residual},
          {"iterations", report.iterations},
          {"converged", report.converged},
          {"underdetermined", report.underdetermined}};
}

}  // namespace crashdyn
