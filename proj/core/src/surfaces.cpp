#include "crashdyn/surfaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "crashdyn/error.hpp"
#include "crashdyn/optimize.hpp"

namespace crashdyn {

namespace {

void require_size(std::span<const double> v, std::size_t n, std::string_view what) {
  if (v.size() != n) throw UsageError(fmt::format("{}: expected {} parameters, got {}", what, n, v.size()));
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

std::array<double, PotentialParams::kSize> PotentialParams::to_array() const {
  return {A, B, omega, omega1, alpha, beta1, beta2, a, b, gamma};
}

PotentialParams PotentialParams::from_span(std::span<const double> v) {
  require_size(v, kSize, "PotentialParams");
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]};
}

void PotentialParams::validate() const {
  const auto v = to_array();
  if (!all_finite(v)) throw UsageError("PotentialParams: all parameters must be finite");
  if (!(omega > 0.0)) throw UsageError(fmt::format("PotentialParams: omega must be > 0, got {}", omega));
  if (!(gamma > 0.0)) throw UsageError(fmt::format("PotentialParams: gamma must be > 0, got {}", gamma));
}

std::array<double, DiffusionParams::kSize> DiffusionParams::to_array() const { return {A, B, p}; }

DiffusionParams DiffusionParams::from_span(std::span<const double> v) {
  require_size(v, kSize, "DiffusionParams");
  return {v[0], v[1], v[2]};
}

void DiffusionParams::validate() const {
  if (!all_finite(to_array())) throw UsageError("DiffusionParams: all parameters must be finite");
  if (!(A > 0.0 && B > 0.0 && p > 0.0)) {
    throw UsageError(fmt::format("DiffusionParams: A, B, p must be > 0, got ({}, {}, {})", A, B, p));
  }
}

std::array<double, IndexFitParams::kSize> IndexFitParams::to_array() const {
  return {A0, A1, A2, alpha1, alpha2, omega, gamma};
}

IndexFitParams IndexFitParams::from_span(std::span<const double> v) {
  require_size(v, kSize, "IndexFitParams");
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

void IndexFitParams::validate() const {
  if (!all_finite(to_array())) throw UsageError("IndexFitParams: all parameters must be finite");
  if (alpha1 < 0.0 || alpha2 < 0.0) {
    throw UsageError(fmt::format("IndexFitParams: decay rates must be >= 0, got ({}, {})", alpha1, alpha2));
  }
}

PotentialParams reference_potential_params() {
  return {.A = 8.6e-3, .B = 1.4e-2, .omega = 3.9, .omega1 = 1.0, .alpha = 0.6,
          .beta1 = 0.5, .beta2 = 0.1, .a = 0.96, .b = 2.5, .gamma = 0.9};
}

DiffusionParams reference_diffusion_params() { return {.A = 7.6e-3, .B = 9.3e-4, .p = 0.57}; }

IndexFitParams reference_index_params() {
  return {.A0 = 0.787, .A1 = 0.05, .A2 = 0.031, .alpha1 = 0.09, .alpha2 = 0.64, .omega = 1.0, .gamma = -2.41};
}

double eval_potential(const PotentialParams& q, double x, double t) {
  const double phi = 1.0 - q.a * std::cbrt(x) * std::exp(-q.gamma * std::abs(t));
  const double shape = std::sin(q.omega * x);
  if (t < 0.0) return phi * q.A * shape * std::exp(-q.alpha * x + q.beta1 * t);
  return phi * q.B * shape * std::sin(q.omega1 * t + q.b) * std::exp(-q.alpha * x - q.beta2 * t);
}

double eval_diffusion(const DiffusionParams& q, double t, double t_floor) {
  if (!(t_floor > 0.0)) throw UsageError(fmt::format("eval_diffusion: t_floor must be > 0, got {}", t_floor));
  if (t < 0.0) return q.B;
  return q.A * std::pow(std::max(t, t_floor), -q.p);
}

double eval_index_model(const IndexFitParams& q, double t) {
  return (q.A1 * std::exp(-q.alpha1 * t) + q.A2 * std::exp(-q.alpha2 * t)) * std::sin(q.omega * t + q.gamma) + q.A0;
}

std::string_view to_string(SurfaceModel model) {
  switch (model) {
    case SurfaceModel::potential: return "potential";
    case SurfaceModel::diffusion: return "diffusion";
    case SurfaceModel::index: return "index";
  }
  return "unknown";
}

SurfaceModel parse_surface_model(std::string_view name) {
  if (name == "potential") return SurfaceModel::potential;
  if (name == "diffusion") return SurfaceModel::diffusion;
  if (name == "index") return SurfaceModel::index;
  throw UsageError(fmt::format("unknown model '{}' (expected potential, diffusion or index)", name));
}

std::size_t parameter_count(SurfaceModel model) {
  switch (model) {
    case SurfaceModel::potential: return PotentialParams::kSize;
    case SurfaceModel::diffusion: return DiffusionParams::kSize;
    case SurfaceModel::index: return IndexFitParams::kSize;
  }
  return 0;
}

std::vector<double> reference_params(SurfaceModel model) {
  auto to_vec = [](const auto& arr) { return std::vector<double>(arr.begin(), arr.end()); };
  switch (model) {
    case SurfaceModel::potential: return to_vec(reference_potential_params().to_array());
    case SurfaceModel::diffusion: return to_vec(reference_diffusion_params().to_array());
    case SurfaceModel::index: return to_vec(reference_index_params().to_array());
  }
  return {};
}

double model_value(SurfaceModel model, std::span<const double> params, double x, double t, double t_floor) {
  switch (model) {
    case SurfaceModel::potential: return eval_potential(PotentialParams::from_span(params), x, t);
    case SurfaceModel::diffusion: return eval_diffusion(DiffusionParams::from_span(params), t, t_floor);
    case SurfaceModel::index: return eval_index_model(IndexFitParams::from_span(params), t);
  }
  return 0.0;
}

bool feasible(SurfaceModel model, std::span<const double> params) {
  if (params.size() != parameter_count(model) || !all_finite(params)) return false;
  switch (model) {
    case SurfaceModel::potential: return params[2] > 0.0 && params[9] > 0.0;
    case SurfaceModel::diffusion: return params[0] > 0.0 && params[1] > 0.0 && params[2] > 0.0;
    case SurfaceModel::index: return params[3] >= 0.0 && params[4] >= 0.0;
  }
  return false;
}

FitReport fit(SurfaceModel model, std::span<const Sample> data, std::span<const double> init,
              const FitOptions& options) {
  if (data.empty()) throw UsageError(fmt::format("fit({}): no data", to_string(model)));
  if (!(options.t_floor > 0.0)) throw UsageError("fit: t_floor must be > 0");
  require_size(init, parameter_count(model), fmt::format("fit({}) init", to_string(model)));
  if (!feasible(model, init)) {
    throw UsageError(fmt::format("fit({}): initial parameters violate model invariants", to_string(model)));
  }

  const Objective residual = [&](std::span<const double> q) {
    if (!feasible(model, q)) return std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto& s : data) {
      const double r = model_value(model, q, s.x, s.t, options.t_floor) - s.value;
      sum += r * r;
    }
    return sum;
  };

  NelderMeadOptions nm;
  nm.tol = options.tol;
  nm.max_iter = options.max_iter;
  nm.initial_step = options.initial_step;
  const auto result = nelder_mead(residual, init, nm);

  FitReport report;
  report.params = result.x;
  report.residual_sum = result.value;
  report.initial_residual = result.initial_value;
  report.iterations = result.iterations;
  report.converged = result.converged;
  report.underdetermined = data.size() < parameter_count(model);
  return report;
}

}  // namespace crashdyn
