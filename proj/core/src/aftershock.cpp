#include "crashdyn/aftershock.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "crashdyn/error.hpp"

namespace crashdyn {

double sigma(std::span<const double> returns) {
  if (returns.empty()) throw DataError("sigma: empty window");
  double mean = 0.0;
  for (double x : returns) mean += x;
  mean /= static_cast<double>(returns.size());
  double ss = 0.0;
  for (double x : returns) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(returns.size()));
}

double sigma(std::span<const double> returns, std::size_t first, std::size_t last) {
  if (first > last || last >= returns.size()) {
    throw DataError(fmt::format("sigma: empty window [{}, {}] for {} returns", first, last, returns.size()));
  }
  return sigma(returns.subspan(first, last - first + 1));
}

OmoriResult cumulative_count(std::span<const double> returns, double threshold, int first_day) {
  if (!(threshold > 0.0)) throw UsageError(fmt::format("cumulative_count: threshold must be > 0, got {}", threshold));
  OmoriResult r;
  r.threshold = threshold;
  r.times.reserve(returns.size());
  r.counts.reserve(returns.size());
  int n = 0;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    if (std::abs(returns[i]) > threshold) ++n;
    r.times.push_back(first_day + static_cast<int>(i));
    r.counts.push_back(n);
  }
  return r;
}

OmoriResult fit_omori(OmoriResult result) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < result.times.size(); ++i) {
    if (result.times[i] >= 1 && result.counts[i] > 0.0) {
      lx.push_back(std::log(static_cast<double>(result.times[i])));
      ly.push_back(std::log(result.counts[i]));
    }
  }
  if (lx.size() < 3) {
    throw DataError(fmt::format("fit_omori: need at least 3 positive counts at t >= 1, got {} (threshold {})",
                                lx.size(), result.threshold));
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw DataError("fit_omori: degenerate time axis");
  result.slope = sxy / sxx;
  result.intercept = my - result.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (result.intercept + result.slope * lx[i]);
    rss += e * e;
  }
  result.fit_residual = rss;
  result.omega = 1.0 - result.slope;
  return result;
}

OmoriSummary analyze_ensemble(std::span<const std::vector<double>> series, const OmoriOptions& options) {
  if (series.empty()) throw DataError("analyze_ensemble: no series");
  const std::size_t len = series.front().size();
  if (len < 2) throw DataError("analyze_ensemble: series too short");
  for (const auto& s : series) {
    if (s.size() != len) throw DataError("analyze_ensemble: series lengths differ");
  }

  OmoriSummary summary;
  for (const auto& s : series) summary.sigma += sigma(s);
  summary.sigma /= static_cast<double>(series.size());
  if (!(summary.sigma > 0.0)) throw NumericalError("analyze_ensemble: zero dispersion, thresholds undefined");

  for (double multiple : options.threshold_multiples) {
    if (!(multiple > 0.0)) throw UsageError(fmt::format("threshold multiple must be > 0, got {}", multiple));
    ThresholdSummary ts;
    ts.multiple = multiple;
    ts.threshold = multiple * summary.sigma;
    OmoriResult mean_counts;
    double omega_sum = 0.0;
    for (const auto& s : series) {
      // The main-shock day stays on the grid as a non-event, so N(0) = 0.
      std::vector<double> events = s;
      if (options.exclude_main_shock) events.front() = 0.0;
      auto counts = cumulative_count(events, ts.threshold);
      if (mean_counts.counts.empty()) {
        mean_counts = counts;
      } else {
        for (std::size_t i = 0; i < counts.counts.size(); ++i) mean_counts.counts[i] += counts.counts[i];
      }
      try {
        counts = fit_omori(counts);
        omega_sum += *counts.omega;
        ++ts.n_fitted;
      } catch (const DataError&) {
        // too few exceedances in this series; kept unfitted
      }
      ts.per_series.push_back(std::move(counts));
    }
    for (auto& c : mean_counts.counts) c /= static_cast<double>(series.size());
    if (ts.n_fitted > 0) ts.mean_omega = omega_sum / static_cast<double>(ts.n_fitted);
    try {
      ts.ensemble = fit_omori(mean_counts);
      ts.ensemble_fitted = true;
    } catch (const DataError&) {
      ts.ensemble = std::move(mean_counts);
    }
    summary.thresholds.push_back(std::move(ts));
  }
  return summary;
}

void write_counts_csv(const OmoriResult& result, std::ostream& out) {
  out << "t,N\n";
  for (std::size_t i = 0; i < result.times.size(); ++i) fmt::print(out, "{},{:.17g}\n", result.times[i], result.counts[i]);
}

nlohmann::json omori_summary_to_json(const OmoriSummary& summary) {
  nlohmann::json thresholds = nlohmann::json::array();
  for (const auto& ts : summary.thresholds) {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& r : ts.per_series) per.push_back(r.omega ? nlohmann::json(*r.omega) : nlohmann::json());
    thresholds.push_back({
        {"multiple", ts.multiple},
        {"threshold", ts.threshold},
        {"ensemble_omega", ts.ensemble_fitted ? nlohmann::json(*ts.ensemble.omega) : nlohmann::json()},
        {"ensemble_fit_residual", ts.ensemble_fitted ? nlohmann::json(ts.ensemble.fit_residual) : nlohmann::json()},
        {"mean_omega", ts.mean_omega ? nlohmann::json(*ts.mean_omega) : nlohmann::json()},
        {"n_fitted", ts.n_fitted},
        {"n_series", ts.per_series.size()},
        {"per_series_omega", std::move(per)},
    });
  }
  return {{"sigma", summary.sigma}, {"thresholds", std::move(thresholds)}};
}

}  // namespace crashdyn
