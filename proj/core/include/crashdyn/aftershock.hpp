#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace crashdyn {

/// Cumulative exceedance counts N(t) for one threshold and their power-law fit.
struct OmoriResult {
  double threshold = 0.0;
  std::vector<int> times;
  /// Integer-valued for a single series; ensemble means may be fractional.
  std::vector<double> counts;
  /// 1 - slope of log N against log t.
  std::optional<double> omega;
  double slope = 0.0;
  double intercept = 0.0;
  double fit_residual = 0.0;
};

/// Population standard deviation of `returns`. Throws DataError when empty.
double sigma(std::span<const double> returns);
/// Same, restricted to the index window [first, last] (inclusive).
double sigma(std::span<const double> returns, std::size_t first, std::size_t last);

/// N(t) = #{t' <= t : |x(t')| > threshold}, where returns[i] is day first_day + i.
OmoriResult cumulative_count(std::span<const double> returns, double threshold, int first_day = 0);

/// Least-squares line through (log t, log N) over t >= 1 with N(t) > 0.
/// Throws DataError with fewer than 3 usable points.
OmoriResult fit_omori(OmoriResult result);

struct OmoriOptions {
  std::vector<double> threshold_multiples{1.0, 1.5};
  /// Count only aftershocks: each series' first return (the crash itself)
  /// is never an event, so N(0) = 0. It still enters sigma.
  bool exclude_main_shock = true;
};

struct ThresholdSummary {
  double multiple = 0.0;
  double threshold = 0.0;
  /// One entry per series; omega stays empty where the fit was impossible.
  std::vector<OmoriResult> per_series;
  std::size_t n_fitted = 0;
  /// Mean of the per-series exponents over fitted series.
  std::optional<double> mean_omega;
  /// Fit of the ensemble-mean count curve.
  OmoriResult ensemble;
  bool ensemble_fitted = false;
};

struct OmoriSummary {
  /// Mean over series of each series' population sigma on the full window.
  double sigma = 0.0;
  std::vector<ThresholdSummary> thresholds;
};

/// Omori statistics over an ensemble of equally long daily return series.
OmoriSummary analyze_ensemble(std::span<const std::vector<double>> series, const OmoriOptions& options = {});

/// `t,N`
void write_counts_csv(const OmoriResult& result, std::ostream& out);
nlohmann::json omori_summary_to_json(const OmoriSummary& summary);

}  // namespace crashdyn
