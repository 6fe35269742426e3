#include "crashdyn/density.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "crashdyn/error.hpp"

namespace crashdyn {

void BinningSpec::validate() const {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max)) {
    throw UsageError(fmt::format("binning: need finite x_min < x_max, got [{}, {}]", x_min, x_max));
  }
  if (n_bins < 2) throw UsageError(fmt::format("binning: need n_bins >= 2, got {}", n_bins));
}

std::optional<std::size_t> BinningSpec::bin_of(double x) const noexcept {
  if (!(x >= x_min && x <= x_max)) return std::nullopt;
  const auto i = static_cast<std::size_t>(std::floor((x - x_min) / width()));
  return i >= n_bins ? n_bins - 1 : i;
}

std::size_t JointDensity::row_count(std::size_t i1) const {
  std::size_t n = 0;
  for (std::size_t i2 = 0; i2 < binning.n_bins; ++i2) n += counts[i1 * binning.n_bins + i2];
  return n;
}

OnePointDensity one_point(std::span<const double> sample, const BinningSpec& binning, int t) {
  binning.validate();
  if (sample.empty()) throw DataError(fmt::format("one-point density at t = {}: empty sample", t));
  OnePointDensity d;
  d.binning = binning;
  d.t = t;
  d.values.assign(binning.n_bins, 0.0);
  for (double x : sample) {
    if (auto i = binning.bin_of(x)) {
      d.values[*i] += 1.0;
      ++d.sample_count;
    } else {
      ++d.out_of_range;
    }
  }
  if (d.sample_count == 0) {
    throw DataError(fmt::format("one-point density at t = {}: all {} samples out of range", t,
                                d.out_of_range));
  }
  const double norm = static_cast<double>(d.sample_count) * binning.width();
  for (auto& v : d.values) v /= norm;
  return d;
}

OnePointDensity one_point(const ReturnEnsemble& ensemble, int t, const BinningSpec& binning) {
  const auto sample = pool(ensemble, t);
  return one_point(sample, binning, t);
}

JointDensity joint(std::span<const std::pair<double, double>> pairs, const BinningSpec& binning,
                   int t1, int t2) {
  binning.validate();
  if (t2 <= t1) throw UsageError(fmt::format("joint density: need t2 > t1, got {} and {}", t1, t2));
  if (pairs.empty()) {
    throw DataError(fmt::format("joint density ({}, {}): no paired observations", t1, t2));
  }
  const std::size_t n = binning.n_bins;
  JointDensity d;
  d.binning = binning;
  d.t1 = t1;
  d.t2 = t2;
  d.counts.assign(n * n, 0);
  for (const auto& [x1, x2] : pairs) {
    const auto i1 = binning.bin_of(x1);
    const auto i2 = binning.bin_of(x2);
    if (!i1 || !i2) {
      ++d.out_of_range;
      continue;
    }
    ++d.counts[*i1 * n + *i2];
    ++d.sample_count;
  }
  if (d.sample_count == 0) {
    throw DataError(fmt::format("joint density ({}, {}): all {} pairs out of range", t1, t2,
                                d.out_of_range));
  }
  const double w = binning.width();
  const double norm = static_cast<double>(d.sample_count) * w * w;
  d.values.resize(n * n);
  for (std::size_t k = 0; k < n * n; ++k) d.values[k] = static_cast<double>(d.counts[k]) / norm;
  return d;
}

JointDensity joint(const ReturnEnsemble& ensemble, int t1, int t2, const BinningSpec& binning) {
  if (!ensemble.contains_day(t1) || !ensemble.contains_day(t2)) {
    throw UsageError(fmt::format("joint density: days ({}, {}) outside axis [{}, {}]", t1, t2,
                                 ensemble.t_min(), ensemble.t_max()));
  }
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(ensemble.n_assets());
  for (std::size_t a = 0; a < ensemble.n_assets(); ++a) {
    const auto x1 = ensemble.at(a, t1);
    const auto x2 = ensemble.at(a, t2);
    if (x1 && x2) pairs.emplace_back(*x1, *x2);
  }
  return joint(pairs, binning, t1, t2);
}

OnePointDensity x1_marginal(const JointDensity& joint) {
  const std::size_t n = joint.binning.n_bins;
  OnePointDensity d;
  d.binning = joint.binning;
  d.t = joint.t1;
  d.sample_count = joint.sample_count;
  d.out_of_range = joint.out_of_range;
  d.values.assign(n, 0.0);
  const double norm = static_cast<double>(joint.sample_count) * joint.binning.width();
  for (std::size_t i1 = 0; i1 < n; ++i1) {
    d.values[i1] = static_cast<double>(joint.row_count(i1)) / norm;
  }
  return d;
}

ConditionalDensity conditional(const JointDensity& joint, const OnePointDensity& marginal,
                               std::size_t min_support) {
  if (!(joint.binning == marginal.binning)) throw UsageError("conditional density: binning mismatch");
  if (joint.t1 != marginal.t) {
    throw UsageError(fmt::format("conditional density: marginal at t = {} but joint conditions on t1 = {}",
                                 marginal.t, joint.t1));
  }
  const std::size_t n = joint.binning.n_bins;
  const double w = joint.binning.width();
  ConditionalDensity c;
  c.binning = joint.binning;
  c.t1 = joint.t1;
  c.t2 = joint.t2;
  c.values.assign(n * n, 0.0);
  c.supported.assign(n, false);
  c.row_counts.resize(n);
  for (std::size_t i1 = 0; i1 < n; ++i1) {
    c.row_counts[i1] = joint.row_count(i1);
    const double m = marginal.values[i1];
    if (c.row_counts[i1] < min_support || !(m > 0.0)) continue;
    double row_mass = 0.0;
    for (std::size_t i2 = 0; i2 < n; ++i2) {
      const double v = joint.at(i1, i2) / m;
      c.values[i1 * n + i2] = v;
      row_mass += v * w;
    }
    if (!(row_mass > 0.0)) continue;
    for (std::size_t i2 = 0; i2 < n; ++i2) c.values[i1 * n + i2] /= row_mass;
    c.supported[i1] = true;
  }
  return c;
}

void write_density_csv(std::span<const OnePointDensity> densities, std::ostream& out) {
  out << "t,x_bin_center,density\n";
  for (const auto& d : densities) {
    for (std::size_t i = 0; i < d.values.size(); ++i) {
      fmt::print(out, "{},{:.17g},{:.17g}\n", d.t, d.binning.center(i), d.values[i]);
    }
  }
}

namespace {

void write_pair_grid(const BinningSpec& b, const std::vector<double>& values, std::ostream& out) {
  out << "x1_center,x2_center,density\n";
  for (std::size_t i1 = 0; i1 < b.n_bins; ++i1) {
    for (std::size_t i2 = 0; i2 < b.n_bins; ++i2) {
      fmt::print(out, "{:.17g},{:.17g},{:.17g}\n", b.center(i1), b.center(i2), values[i1 * b.n_bins + i2]);
    }
  }
}

}  // namespace

void write_density_csv(const JointDensity& density, std::ostream& out) {
  write_pair_grid(density.binning, density.values, out);
}

void write_density_csv(const ConditionalDensity& density, std::ostream& out) {
  write_pair_grid(density.binning, density.values, out);
}

}  // namespace crashdyn
