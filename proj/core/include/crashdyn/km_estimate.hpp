#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "crashdyn/density.hpp"
#include "crashdyn/ingest.hpp"

namespace crashdyn {

/// Lag used for the conditional moments. D_k(x, t) is estimated as M_k(x, t; 1 day).
inline constexpr int kLagDays = 1;

/// Drift, diffusion and potential estimates on an (x-bin, t) grid.
/// Cells are stored row-major by time: cell(ti, bin) = ti * n_bins + bin.
struct CoefficientField {
  BinningSpec binning;
  std::vector<int> t_axis;
  std::vector<std::optional<double>> d1;
  std::vector<std::optional<double>> d2;
  std::vector<std::optional<double>> u;
  std::vector<bool> supported;
  std::vector<bool> d2_floored;

  std::size_t cell(std::size_t ti, std::size_t bin) const noexcept { return ti * binning.n_bins + bin; }
  std::size_t n_cells() const noexcept { return t_axis.size() * binning.n_bins; }
};

struct EstimateOptions {
  std::size_t min_support = kDefaultMinSupport;
};

/// M_k(x) = sum over x' of (x' - x)^k P(x'|x) dx, evaluated on bin centers,
/// for k in {1, 2}. Unsupported rows yield std::nullopt.
std::vector<std::optional<double>> conditional_moment(const ConditionalDensity& cond, int k);

/// D1 = M1 and D2 = M2 from P(x, t+1 | x, t) for every t whose successor is on
/// the axis. A day with no paired observations contributes an unsupported column.
CoefficientField estimate_coefficients(const ReturnEnsemble& ensemble, const BinningSpec& binning,
                                       const EstimateOptions& options = {});

/// Bin containing x = 0, the default anchor of the potential.
std::size_t zero_bin(const BinningSpec& binning);

/// U(x, t) = -integral of D1 from the reference bin to x (trapezoid rule),
/// restricted to the supported run of bins around the reference. Times where
/// the reference bin is unsupported get no U at all.
CoefficientField reconstruct_potential(CoefficientField field, std::size_t reference_bin);

/// `t,x_center,D1,D2,U,supported`; absent values are written as empty fields.
void write_field_csv(const CoefficientField& field, std::ostream& out);
/// Inverse of write_field_csv; the binning is recovered from the bin centers.
CoefficientField read_field_csv(std::istream& in, const std::string& source_name = "<stream>");

}  // namespace crashdyn
