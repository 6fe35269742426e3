#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace crashdyn {

/// Nonstationary potential
///   U(x, t) = phi(x, t) * A sin(omega x) exp(-alpha x + beta1 t)                      t < 0
///   U(x, t) = phi(x, t) * B sin(omega x) sin(omega1 t + b) exp(-alpha x - beta2 t)    t >= 0
/// with phi(x, t) = 1 - a cbrt(x) exp(-gamma |t|), cbrt the signed real cube root.
struct PotentialParams {
  double A = 0.0;
  double B = 0.0;
  double omega = 1.0;
  double omega1 = 0.0;
  double alpha = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double a = 0.0;
  double b = 0.0;
  double gamma = 1.0;

  static constexpr std::size_t kSize = 10;
  std::array<double, kSize> to_array() const;
  static PotentialParams from_span(std::span<const double> v);
  void validate() const;
};

/// D2(t) = B for t < 0, A * t^-p for t >= 0.
struct DiffusionParams {
  double A = 1.0;
  double B = 1.0;
  double p = 1.0;

  static constexpr std::size_t kSize = 3;
  std::array<double, kSize> to_array() const;
  static DiffusionParams from_span(std::span<const double> v);
  void validate() const;
};

/// S(t) = (A1 exp(-alpha1 t) + A2 exp(-alpha2 t)) sin(omega t + gamma) + A0.
struct IndexFitParams {
  double A0 = 0.0;
  double A1 = 0.0;
  double A2 = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double omega = 0.0;
  double gamma = 0.0;

  static constexpr std::size_t kSize = 7;
  std::array<double, kSize> to_array() const;
  static IndexFitParams from_span(std::span<const double> v);
  void validate() const;
};

// Published parameter sets for the October 1987 crash ensemble.
PotentialParams reference_potential_params();
DiffusionParams reference_diffusion_params();
IndexFitParams reference_index_params();

/// t == 0 is evaluated on the t >= 0 branch.
double eval_potential(const PotentialParams& params, double x, double t);

/// Regularizes the t^-p shock as A * max(t, t_floor)^-p. Throws UsageError
/// when t_floor <= 0.
double eval_diffusion(const DiffusionParams& params, double t, double t_floor);

double eval_index_model(const IndexFitParams& params, double t);

enum class SurfaceModel { potential, diffusion, index };

std::string_view to_string(SurfaceModel model);
SurfaceModel parse_surface_model(std::string_view name);
std::size_t parameter_count(SurfaceModel model);
std::vector<double> reference_params(SurfaceModel model);

/// One observation: potential uses (x, t); diffusion and index use t only.
struct Sample {
  double x = 0.0;
  double t = 0.0;
  double value = 0.0;
};

/// Model value for a raw parameter vector in field order.
double model_value(SurfaceModel model, std::span<const double> params, double x, double t,
                   double t_floor);
/// Whether a parameter vector satisfies the model's type invariants.
bool feasible(SurfaceModel model, std::span<const double> params);

struct FitOptions {
  double tol = 1e-10;
  std::size_t max_iter = 10000;
  double t_floor = 0.02;
  double initial_step = 0.05;
};

struct FitReport {
  std::vector<double> params;
  double residual_sum = 0.0;
  double initial_residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Fewer observations than parameters.
  bool underdetermined = false;
};

/// Least-squares fit of a model to samples by downhill simplex, starting
/// from `init`. Non-convergence within max_iter is reported, not thrown.
FitReport fit(SurfaceModel model, std::span<const Sample> data, std::span<const double> init,
              const FitOptions& options = {});

}  // namespace crashdyn
