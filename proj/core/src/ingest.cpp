#include "crashdyn/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "crashdyn/error.hpp"
#include "csv_util.hpp"

namespace crashdyn {

namespace {

constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

// Days since epoch for a strict YYYY-MM-DD date.
std::optional<int> parse_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  const auto y = detail::parse_int(s.substr(0, 4));
  const auto m = detail::parse_int(s.substr(5, 2));
  const auto d = detail::parse_int(s.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(*y)},
                                        std::chrono::month{static_cast<unsigned>(*m)},
                                        std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return static_cast<int>(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

struct RawRow {
  std::string asset;
  int date = 0;
  double close = 0.0;
};

}  // namespace

void PriceSeries::validate() const {
  if (days.size() != closes.size()) {
    throw DataError(fmt::format("asset '{}': {} days but {} closes", asset_id, days.size(),
                                closes.size()));
  }
  if (days.size() < 2) {
    throw DataError(fmt::format("asset '{}': need at least 2 closes, got {}", asset_id, days.size()));
  }
  for (std::size_t i = 0; i < closes.size(); ++i) {
    if (!(closes[i] > 0.0) || !std::isfinite(closes[i])) {
      throw DataError(fmt::format("asset '{}': non-positive close {} on day {}", asset_id,
                                  closes[i], days[i]));
    }
    if (i > 0 && days[i] <= days[i - 1]) {
      throw DataError(fmt::format("asset '{}': days not strictly increasing at day {}", asset_id,
                                  days[i]));
    }
  }
}

ReturnEnsemble::ReturnEnsemble(std::vector<std::string> asset_ids, int t_min, int t_max)
    : asset_ids_(std::move(asset_ids)), t_min_(t_min), t_max_(t_max) {
  if (t_max < t_min) throw UsageError("ReturnEnsemble: empty day axis");
  values_.assign(asset_ids_.size() * n_days(), kAbsent);
}

std::size_t ReturnEnsemble::index(std::size_t asset, int t) const {
  if (asset >= asset_ids_.size()) {
    throw UsageError(fmt::format("asset index {} out of range ({} assets)", asset, asset_ids_.size()));
  }
  if (!contains_day(t)) {
    throw UsageError(fmt::format("day {} outside axis [{}, {}]", t, t_min_, t_max_));
  }
  return asset * n_days() + static_cast<std::size_t>(t - t_min_);
}

std::optional<double> ReturnEnsemble::at(std::size_t asset, int t) const {
  const double v = values_[index(asset, t)];
  if (std::isnan(v)) return std::nullopt;
  return v;
}

void ReturnEnsemble::set(std::size_t asset, int t, double x) {
  if (!std::isfinite(x)) {
    throw DataError(fmt::format("non-finite return for asset '{}' at day {}", asset_ids_.at(asset), t));
  }
  values_[index(asset, t)] = x;
}

std::size_t ReturnEnsemble::present_count(int t) const {
  std::size_t n = 0;
  for (std::size_t a = 0; a < n_assets(); ++a) {
    if (!std::isnan(values_[index(a, t)])) ++n;
  }
  return n;
}

std::size_t ReturnEnsemble::total_present() const {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](double v) { return !std::isnan(v); }));
}

std::size_t ReturnEnsemble::all_absent_assets() const {
  std::size_t n = 0;
  const std::size_t days = n_days();
  for (std::size_t a = 0; a < n_assets(); ++a) {
    const auto row = values_.begin() + static_cast<std::ptrdiff_t>(a * days);
    if (std::all_of(row, row + static_cast<std::ptrdiff_t>(days), [](double v) { return std::isnan(v); })) {
      ++n;
    }
  }
  return n;
}

ReturnEnsemble ReturnEnsemble::shifted(int offset) const {
  ReturnEnsemble out = *this;
  out.t_min_ += offset;
  out.t_max_ += offset;
  return out;
}

std::vector<PriceSeries> load_prices(const std::filesystem::path& path, const CsvLayout& layout) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open price file '{}'", path.string()));
  return load_prices(in, layout, path.string());
}

std::vector<PriceSeries> load_prices(std::istream& in, const CsvLayout& layout,
                                     const std::string& source_name) {
  const auto crash = parse_iso_date(detail::trim(layout.crash_date));
  if (!crash) {
    throw UsageError(fmt::format("crash date '{}' is not an ISO-8601 date (YYYY-MM-DD)",
                                 layout.crash_date));
  }

  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<RawRow> rows;
  std::set<std::pair<std::string, int>> seen;

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    const auto fields = detail::split(line, layout.delimiter);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "asset" || fields[1] != "date" || fields[2] != "close") {
        throw DataError(fmt::format("{}:{}: expected header 'asset,date,close'", source_name, line_no));
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) {
      throw DataError(fmt::format("{}:{}: expected 3 fields, got {}", source_name, line_no, fields.size()));
    }
    if (fields[0].empty()) throw DataError(fmt::format("{}:{}: empty asset id", source_name, line_no));
    const auto date = parse_iso_date(fields[1]);
    if (!date) {
      throw DataError(fmt::format("{}:{}: unparseable date '{}'", source_name, line_no, fields[1]));
    }
    const auto close = detail::parse_double(fields[2]);
    if (!close || !std::isfinite(*close)) {
      throw DataError(fmt::format("{}:{}: unparseable close '{}'", source_name, line_no, fields[2]));
    }
    if (*close <= 0.0) {
      throw DataError(fmt::format("{}:{}: non-positive close {} for asset '{}'", source_name, line_no,
                                  *close, fields[0]));
    }
    RawRow row{std::string(fields[0]), *date, *close};
    if (!seen.emplace(row.asset, row.date).second) {
      throw DataError(fmt::format("{}:{}: duplicate (asset, date) pair ('{}', {})", source_name,
                                  line_no, row.asset, fields[1]));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(fmt::format("{}: no rows", source_name));

  std::vector<int> dates;
  dates.reserve(rows.size());
  for (const auto& r : rows) dates.push_back(r.date);
  std::sort(dates.begin(), dates.end());
  dates.erase(std::unique(dates.begin(), dates.end()), dates.end());

  const auto crash_it = std::lower_bound(dates.begin(), dates.end(), *crash);
  if (crash_it == dates.end()) {
    throw DataError(fmt::format("{}: crash date {} is after the last observed date", source_name,
                                layout.crash_date));
  }
  const auto crash_pos = crash_it - dates.begin();
  auto trading_day = [&](int date) {
    const auto pos = std::lower_bound(dates.begin(), dates.end(), date) - dates.begin();
    return static_cast<int>(pos - crash_pos);
  };

  // std::map keeps asset order deterministic (lexicographic).
  std::map<std::string, std::vector<std::pair<int, double>>> by_asset;
  for (const auto& r : rows) by_asset[r.asset].emplace_back(trading_day(r.date), r.close);

  std::vector<PriceSeries> out;
  out.reserve(by_asset.size());
  for (auto& [asset, obs] : by_asset) {
    std::sort(obs.begin(), obs.end());
    PriceSeries s;
    s.asset_id = asset;
    for (const auto& [day, close] : obs) {
      s.days.push_back(day);
      s.closes.push_back(close);
    }
    out.push_back(std::move(s));
  }
  return out;
}

ReturnEnsemble compute_returns(const std::vector<PriceSeries>& series, int crash_day) {
  if (series.empty()) throw DataError("compute_returns: no price series");
  int lo = std::numeric_limits<int>::max();
  int hi = std::numeric_limits<int>::min();
  int common_lo = std::numeric_limits<int>::min();
  int common_hi = std::numeric_limits<int>::max();
  for (const auto& s : series) {
    s.validate();
    lo = std::min(lo, s.days.front());
    hi = std::max(hi, s.days.back());
    common_lo = std::max(common_lo, s.days.front());
    common_hi = std::min(common_hi, s.days.back());
  }
  if (series.size() > 1 && common_lo > common_hi) throw DataError("no overlapping days across assets");
  if (crash_day < lo || crash_day > hi) {
    throw UsageError(fmt::format("crash day {} outside observed days [{}, {}]", crash_day, lo, hi));
  }

  std::vector<std::string> ids;
  ids.reserve(series.size());
  for (const auto& s : series) ids.push_back(s.asset_id);

  // A return at t needs closes at t and t+1, so the axis ends one day early.
  ReturnEnsemble ensemble(std::move(ids), lo - crash_day, hi - 1 - crash_day);
  for (std::size_t a = 0; a < series.size(); ++a) {
    const auto& s = series[a];
    for (std::size_t i = 0; i + 1 < s.days.size(); ++i) {
      if (s.days[i + 1] != s.days[i] + 1) continue;
      ensemble.set(a, s.days[i] - crash_day, std::log(s.closes[i + 1] / s.closes[i]));
    }
  }
  return ensemble;
}

std::vector<double> pool(const ReturnEnsemble& ensemble, int t) {
  if (!ensemble.contains_day(t)) {
    throw UsageError(fmt::format("day {} outside axis [{}, {}]", t, ensemble.t_min(), ensemble.t_max()));
  }
  std::vector<double> sample;
  sample.reserve(ensemble.n_assets());
  for (std::size_t a = 0; a < ensemble.n_assets(); ++a) {
    if (auto x = ensemble.at(a, t)) sample.push_back(*x);
  }
  return sample;
}

void write_ensemble_csv(const ReturnEnsemble& ensemble, std::ostream& out) {
  out << "t,asset,x\n";
  for (int t = ensemble.t_min(); t <= ensemble.t_max(); ++t) {
    for (std::size_t a = 0; a < ensemble.n_assets(); ++a) {
      if (auto x = ensemble.at(a, t)) fmt::print(out, "{},{},{:.17g}\n", t, ensemble.asset_ids()[a], *x);
    }
  }
}

ReturnEnsemble read_ensemble_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open ensemble file '{}'", path.string()));
  return read_ensemble_csv(in, path.string());
}

ReturnEnsemble read_ensemble_csv(std::istream& in, const std::string& source_name) {
  struct Entry {
    int t;
    std::size_t asset;
    double x;
  };
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> id_index;
  std::vector<Entry> entries;
  int lo = std::numeric_limits<int>::max();
  int hi = std::numeric_limits<int>::min();

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    const auto fields = detail::split(line, ',');
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "t" || fields[1] != "asset" || fields[2] != "x") {
        throw DataError(fmt::format("{}:{}: expected header 't,asset,x'", source_name, line_no));
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) {
      throw DataError(fmt::format("{}:{}: expected 3 fields, got {}", source_name, line_no, fields.size()));
    }
    const auto t = detail::parse_int(fields[0]);
    const auto x = detail::parse_double(fields[2]);
    if (!t || !x || !std::isfinite(*x) || fields[1].empty()) {
      throw DataError(fmt::format("{}:{}: unparseable row", source_name, line_no));
    }
    const std::string asset(fields[1]);
    auto [it, inserted] = id_index.emplace(asset, ids.size());
    if (inserted) ids.push_back(asset);
    entries.push_back({static_cast<int>(*t), it->second, *x});
    lo = std::min(lo, static_cast<int>(*t));
    hi = std::max(hi, static_cast<int>(*t));
  }
  if (entries.empty()) throw DataError(fmt::format("{}: no rows", source_name));

  ReturnEnsemble ensemble(std::move(ids), lo, hi);
  for (const auto& e : entries) {
    if (ensemble.at(e.asset, e.t)) {
      throw DataError(fmt::format("{}: duplicate entry for asset '{}' at t = {}", source_name,
                                  ensemble.asset_ids()[e.asset], e.t));
    }
    ensemble.set(e.asset, e.t, e.x);
  }
  return ensemble;
}

}  // namespace crashdyn
