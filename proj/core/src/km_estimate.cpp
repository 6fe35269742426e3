#include "crashdyn/km_estimate.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "crashdyn/error.hpp"
#include "csv_util.hpp"

namespace crashdyn {

std::vector<std::optional<double>> conditional_moment(const ConditionalDensity& cond, int k) {
  if (k != 1 && k != 2) throw UsageError(fmt::format("conditional moment order must be 1 or 2, got {}", k));
  const auto& b = cond.binning;
  const double w = b.width();
  std::vector<std::optional<double>> moments(b.n_bins);
  for (std::size_t i1 = 0; i1 < b.n_bins; ++i1) {
    if (!cond.supported[i1]) continue;
    const double x = b.center(i1);
    double m = 0.0;
    for (std::size_t i2 = 0; i2 < b.n_bins; ++i2) {
      const double dx = b.center(i2) - x;
      m += (k == 1 ? dx : dx * dx) * cond.at(i1, i2) * w;
    }
    moments[i1] = m;
  }
  return moments;
}

CoefficientField estimate_coefficients(const ReturnEnsemble& ensemble, const BinningSpec& binning,
                                       const EstimateOptions& options) {
  binning.validate();
  if (ensemble.n_days() < 2) {
    throw DataError(fmt::format("estimate_coefficients: need at least 2 days, got {}", ensemble.n_days()));
  }
  CoefficientField field;
  field.binning = binning;
  for (int t = ensemble.t_min(); t + kLagDays <= ensemble.t_max(); ++t) field.t_axis.push_back(t);

  const std::size_t n = binning.n_bins;
  field.d1.assign(field.n_cells(), std::nullopt);
  field.d2.assign(field.n_cells(), std::nullopt);
  field.u.assign(field.n_cells(), std::nullopt);
  field.supported.assign(field.n_cells(), false);
  field.d2_floored.assign(field.n_cells(), false);

  for (std::size_t ti = 0; ti < field.t_axis.size(); ++ti) {
    const int t = field.t_axis[ti];
    JointDensity pair_density;
    try {
      pair_density = joint(ensemble, t, t + kLagDays, binning);
    } catch (const DataError&) {
      continue;  // no pairs in range: the whole column stays unsupported
    }
    const auto cond = conditional(pair_density, x1_marginal(pair_density), options.min_support);
    const auto m1 = conditional_moment(cond, 1);
    const auto m2 = conditional_moment(cond, 2);
    for (std::size_t i = 0; i < n; ++i) {
      if (!cond.supported[i]) continue;
      const auto c = field.cell(ti, i);
      field.supported[c] = true;
      field.d1[c] = *m1[i] / kLagDays;
      double d2 = *m2[i] / kLagDays;
      if (d2 < 0.0) {
        d2 = 0.0;
        field.d2_floored[c] = true;
      }
      field.d2[c] = d2;
    }
  }
  return field;
}

std::size_t zero_bin(const BinningSpec& binning) {
  const auto bin = binning.bin_of(0.0);
  if (!bin) {
    throw UsageError(fmt::format("binning [{}, {}] does not contain x = 0", binning.x_min, binning.x_max));
  }
  return *bin;
}

CoefficientField reconstruct_potential(CoefficientField field, std::size_t reference_bin) {
  const std::size_t n = field.binning.n_bins;
  if (reference_bin >= n) {
    throw UsageError(fmt::format("reference bin {} out of range ({} bins)", reference_bin, n));
  }
  const double w = field.binning.width();
  std::fill(field.u.begin(), field.u.end(), std::nullopt);
  for (std::size_t ti = 0; ti < field.t_axis.size(); ++ti) {
    auto ok = [&](std::size_t i) { return field.supported[field.cell(ti, i)] && field.d1[field.cell(ti, i)]; };
    auto d1 = [&](std::size_t i) { return *field.d1[field.cell(ti, i)]; };
    if (!ok(reference_bin)) continue;
    double u = 0.0;
    field.u[field.cell(ti, reference_bin)] = u;
    for (std::size_t i = reference_bin + 1; i < n && ok(i); ++i) {
      u -= 0.5 * (d1(i - 1) + d1(i)) * w;
      field.u[field.cell(ti, i)] = u;
    }
    u = 0.0;
    for (std::size_t i = reference_bin; i > 0 && ok(i - 1); --i) {
      u += 0.5 * (d1(i) + d1(i - 1)) * w;
      field.u[field.cell(ti, i - 1)] = u;
    }
  }
  return field;
}

void write_field_csv(const CoefficientField& field, std::ostream& out) {
  auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : std::string{}; };
  out << "t,x_center,D1,D2,U,supported\n";
  for (std::size_t ti = 0; ti < field.t_axis.size(); ++ti) {
    for (std::size_t i = 0; i < field.binning.n_bins; ++i) {
      const auto c = field.cell(ti, i);
      fmt::print(out, "{},{:.17g},{},{},{},{}\n", field.t_axis[ti], field.binning.center(i),
                 opt(field.d1[c]), opt(field.d2[c]), opt(field.u[c]), field.supported[c] ? "true" : "false");
    }
  }
}

CoefficientField read_field_csv(std::istream& in, const std::string& source_name) {
  struct Row {
    int t;
    double x;
    std::optional<double> d1, d2, u;
    bool supported;
  };
  auto opt = [&](std::string_view f, std::size_t line_no) -> std::optional<double> {
    if (f.empty()) return std::nullopt;
    const auto v = detail::parse_double(f);
    if (!v) throw DataError(fmt::format("{}:{}: unparseable number '{}'", source_name, line_no, f));
    return v;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    const auto f = detail::split(line, ',');
    if (!header_seen) {
      if (f.size() != 6 || f[0] != "t" || f[1] != "x_center" || f[2] != "D1" || f[3] != "D2" || f[4] != "U" ||
          f[5] != "supported") {
        throw DataError(fmt::format("{}:{}: expected header 't,x_center,D1,D2,U,supported'", source_name, line_no));
      }
      header_seen = true;
      continue;
    }
    if (f.size() != 6) throw DataError(fmt::format("{}:{}: expected 6 fields", source_name, line_no));
    const auto t = detail::parse_int(f[0]);
    const auto x = detail::parse_double(f[1]);
    if (!t || !x || (f[5] != "true" && f[5] != "false")) {
      throw DataError(fmt::format("{}:{}: unparseable row", source_name, line_no));
    }
    rows.push_back({static_cast<int>(*t), *x, opt(f[2], line_no), opt(f[3], line_no), opt(f[4], line_no),
                    f[5] == "true"});
  }
  if (rows.empty()) throw DataError(fmt::format("{}: no rows", source_name));

  std::map<int, std::vector<const Row*>> by_t;
  for (const auto& r : rows) by_t[r.t].push_back(&r);
  const std::size_t n = by_t.begin()->second.size();
  if (n < 2) throw DataError(fmt::format("{}: need at least 2 bins per day", source_name));
  CoefficientField field;
  const auto& first = by_t.begin()->second;
  const double w = (first.back()->x - first.front()->x) / static_cast<double>(n - 1);
  field.binning = {first.front()->x - 0.5 * w, first.back()->x + 0.5 * w, n};
  for (const auto& [t, cells] : by_t) {
    if (cells.size() != n) throw DataError(fmt::format("{}: day {} has {} bins, expected {}", source_name, t, cells.size(), n));
    field.t_axis.push_back(t);
    for (const Row* r : cells) {
      field.d1.push_back(r->d1);
      field.d2.push_back(r->d2);
      field.u.push_back(r->u);
      field.supported.push_back(r->supported);
      field.d2_floored.push_back(false);
    }
  }
  return field;
}

}  // namespace crashdyn
