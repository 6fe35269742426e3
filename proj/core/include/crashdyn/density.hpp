#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "crashdyn/ingest.hpp"

namespace crashdyn {

/// Uniform binning of the return axis. Bin i covers [x_min + i*w, x_min + (i+1)*w),
/// the last bin also includes x_max.
struct BinningSpec {
  double x_min = -0.35;
  double x_max = 0.35;
  std::size_t n_bins = 24;

  void validate() const;
  double width() const noexcept { return (x_max - x_min) / static_cast<double>(n_bins); }
  double center(std::size_t i) const noexcept {
    return x_min + (static_cast<double>(i) + 0.5) * width();
  }
  std::optional<std::size_t> bin_of(double x) const noexcept;

  bool operator==(const BinningSpec&) const = default;
};

/// Histogram estimate of P(x, t).
struct OnePointDensity {
  BinningSpec binning;
  int t = 0;
  std::vector<double> values;
  std::size_t sample_count = 0;  ///< in-range samples used for normalization
  std::size_t out_of_range = 0;
};

/// Histogram estimate of P(x2 t2, x1 t1) from per-asset pairs. Row-major in (i1, i2).
struct JointDensity {
  BinningSpec binning;
  int t1 = 0;
  int t2 = 0;
  std::vector<double> values;
  std::vector<std::size_t> counts;
  std::size_t sample_count = 0;
  std::size_t out_of_range = 0;

  double at(std::size_t i1, std::size_t i2) const { return values[i1 * binning.n_bins + i2]; }
  std::size_t row_count(std::size_t i1) const;
};

/// P(x2 t2 | x1 t1); row i1 is a density over x2. Unsupported rows hold zeros.
struct ConditionalDensity {
  BinningSpec binning;
  int t1 = 0;
  int t2 = 0;
  std::vector<double> values;
  std::vector<bool> supported;
  std::vector<std::size_t> row_counts;

  double at(std::size_t i1, std::size_t i2) const { return values[i1 * binning.n_bins + i2]; }
};

inline constexpr std::size_t kDefaultMinSupport = 5;

OnePointDensity one_point(std::span<const double> sample, const BinningSpec& binning, int t = 0);
OnePointDensity one_point(const ReturnEnsemble& ensemble, int t, const BinningSpec& binning);

JointDensity joint(std::span<const std::pair<double, double>> pairs, const BinningSpec& binning,
                   int t1 = 0, int t2 = 1);
/// Pairs (x_i(t1), x_i(t2)) over assets present on both days.
JointDensity joint(const ReturnEnsemble& ensemble, int t1, int t2, const BinningSpec& binning);

/// First-coordinate marginal of a joint density, i.e. P(x1 t1) over paired samples.
OnePointDensity x1_marginal(const JointDensity& joint);

/// Divides the joint by the t1 marginal and renormalizes each supported row.
/// A row is supported when it holds at least `min_support` paired samples and
/// the marginal is positive there.
ConditionalDensity conditional(const JointDensity& joint, const OnePointDensity& marginal,
                               std::size_t min_support = kDefaultMinSupport);

/// `t,x_bin_center,density`
void write_density_csv(std::span<const OnePointDensity> densities, std::ostream& out);
/// `x1_center,x2_center,density`
void write_density_csv(const JointDensity& density, std::ostream& out);
void write_density_csv(const ConditionalDensity& density, std::ostream& out);

}  // namespace crashdyn
