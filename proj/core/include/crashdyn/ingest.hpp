#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace crashdyn {

/// Close prices of one asset on the trading-day axis (crash day = 0).
struct PriceSeries {
  std::string asset_id;
  std::vector<int> days;
  std::vector<double> closes;

  /// Throws DataError unless closes are positive, days strictly increase and
  /// there are at least two observations.
  void validate() const;
};

/// Long-format price file: header `asset,date,close`, ISO-8601 dates.
struct CsvLayout {
  /// Date mapped to trading day 0. Must not lie after the last observed date;
  /// when it is not itself a trading day the next trading day is used.
  std::string crash_date;
  char delimiter = ',';
};

/// Pooled daily log-returns x_i(t) = ln(S_i(t+1) / S_i(t)).
///
/// Rows are assets, columns the contiguous day axis [t_min, t_max]. Absent
/// entries (no consecutive closes) are stored as NaN and surface as
/// std::nullopt through at(); present entries are always finite.
class ReturnEnsemble {
 public:
  ReturnEnsemble() = default;
  ReturnEnsemble(std::vector<std::string> asset_ids, int t_min, int t_max);

  int t_min() const noexcept { return t_min_; }
  int t_max() const noexcept { return t_max_; }
  bool contains_day(int t) const noexcept { return t >= t_min_ && t <= t_max_; }
  std::size_t n_assets() const noexcept { return asset_ids_.size(); }
  std::size_t n_days() const noexcept {
    return t_max_ < t_min_ ? 0 : static_cast<std::size_t>(t_max_ - t_min_ + 1);
  }
  const std::vector<std::string>& asset_ids() const noexcept { return asset_ids_; }

  std::optional<double> at(std::size_t asset, int t) const;
  void set(std::size_t asset, int t, double x);

  /// Number of present entries in column t.
  std::size_t present_count(int t) const;
  std::size_t total_present() const;
  /// Assets whose row has no present entry at all.
  std::size_t all_absent_assets() const;

  /// Same values with every day index moved by `offset`.
  ReturnEnsemble shifted(int offset) const;

 private:
  std::size_t index(std::size_t asset, int t) const;

  std::vector<std::string> asset_ids_;
  int t_min_ = 0;
  int t_max_ = -1;
  std::vector<double> values_;
};

/// Parses a long-format price CSV. Dates are mapped to positions in the sorted
/// union of observed dates, shifted so that the crash date is day 0.
std::vector<PriceSeries> load_prices(const std::filesystem::path& path, const CsvLayout& layout);
std::vector<PriceSeries> load_prices(std::istream& in, const CsvLayout& layout,
                                     const std::string& source_name = "<stream>");

/// Log-returns wherever an asset has closes on both t and t+1, re-indexed so
/// that `crash_day` becomes 0. No imputation across gaps.
ReturnEnsemble compute_returns(const std::vector<PriceSeries>& series, int crash_day = 0);

/// All present x_i(t) at day t in asset order.
std::vector<double> pool(const ReturnEnsemble& ensemble, int t);

/// CSV with header `t,asset,x`; absent entries are omitted.
void write_ensemble_csv(const ReturnEnsemble& ensemble, std::ostream& out);
ReturnEnsemble read_ensemble_csv(const std::filesystem::path& path);
ReturnEnsemble read_ensemble_csv(std::istream& in, const std::string& source_name = "<stream>");

}  // namespace crashdyn
