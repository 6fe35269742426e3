#include "crashdyn/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "crashdyn/error.hpp"

namespace crashdyn {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

double safe_eval(const Objective& f, std::span<const double> x) {
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

struct Simplex {
  std::vector<std::vector<double>> vertices;
  std::vector<double> values;

  void order() {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    // Stable sort keeps tie-breaking deterministic.
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::vector<double>> v2;
    std::vector<double> f2;
    v2.reserve(idx.size());
    f2.reserve(idx.size());
    for (auto i : idx) {
      v2.push_back(std::move(vertices[i]));
      f2.push_back(values[i]);
    }
    vertices = std::move(v2);
    values = std::move(f2);
  }

  bool collapsed() const {
    const auto& best = vertices.front();
    for (std::size_t j = 1; j < vertices.size(); ++j) {
      for (std::size_t i = 0; i < best.size(); ++i) {
        const double scale = std::max(std::abs(best[i]), 1e-300);
        if (std::abs(vertices[j][i] - best[i]) > 4.0 * std::numeric_limits<double>::epsilon() * scale) {
          return false;
        }
      }
    }
    return true;
  }
};

Simplex build_simplex(const Objective& f, const std::vector<double>& origin, double origin_value,
                      const NelderMeadOptions& opt) {
  Simplex s;
  s.vertices.push_back(origin);
  s.values.push_back(origin_value);
  for (std::size_t i = 0; i < origin.size(); ++i) {
    auto v = origin;
    v[i] = origin[i] != 0.0 ? origin[i] * (1.0 + opt.initial_step) : opt.zero_step;
    s.values.push_back(safe_eval(f, v));
    s.vertices.push_back(std::move(v));
  }
  s.order();
  return s;
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& objective, std::span<const double> init,
                             const NelderMeadOptions& options) {
  if (init.empty()) throw UsageError("nelder_mead: empty parameter vector");
  for (double v : init) {
    if (!std::isfinite(v)) throw UsageError("nelder_mead: non-finite initial parameter");
  }
  const std::size_t n = init.size();
  std::vector<double> start(init.begin(), init.end());

  NelderMeadResult result;
  result.initial_value = safe_eval(objective, start);
  if (!std::isfinite(result.initial_value)) throw UsageError("nelder_mead: objective infinite at init");
  const double abs_tol = options.tol * options.tol * result.initial_value;

  Simplex s = build_simplex(objective, start, result.initial_value, options);
  std::size_t iter = 0;
  std::size_t restarts = 0;
  double last_restart_best = s.values.front();
  std::vector<double> centroid(n), trial(n), trial2(n);

  auto point = [&](std::vector<double>& out, double coeff) {
    const auto& worst = s.vertices.back();
    for (std::size_t i = 0; i < n; ++i) out[i] = centroid[i] + coeff * (worst[i] - centroid[i]);
  };

  while (true) {
    const double f_lo = s.values.front();
    const double f_hi = s.values.back();
    const bool flat = (f_hi - f_lo) <= options.tol * std::abs(f_lo) + abs_tol;
    if (flat || s.collapsed()) {
      const bool improved = restarts > 0 && (last_restart_best - f_lo) > options.tol * std::abs(f_lo) + abs_tol;
      if ((restarts > 0 && !improved) || restarts >= options.max_restarts || f_lo <= abs_tol) {
        result.converged = true;
        break;
      }
      last_restart_best = f_lo;
      ++restarts;
      s = build_simplex(objective, s.vertices.front(), f_lo, options);
      continue;
    }
    if (iter >= options.max_iter) break;
    ++iter;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) centroid[i] += s.vertices[j][i];
    }
    for (auto& c : centroid) c /= static_cast<double>(n);

    point(trial, -kReflect);
    const double f_r = safe_eval(objective, trial);
    if (f_r < s.values.front()) {
      point(trial2, -kReflect * kExpand);
      const double f_e = safe_eval(objective, trial2);
      if (f_e < f_r) {
        s.vertices.back() = trial2;
        s.values.back() = f_e;
      } else {
        s.vertices.back() = trial;
        s.values.back() = f_r;
      }
    } else if (f_r < s.values[n - 1]) {
      s.vertices.back() = trial;
      s.values.back() = f_r;
    } else {
      const bool outside = f_r < s.values.back();
      point(trial2, outside ? -kReflect * kContract : kContract);
      const double f_c = safe_eval(objective, trial2);
      if (f_c < (outside ? f_r : s.values.back())) {
        s.vertices.back() = trial2;
        s.values.back() = f_c;
      } else {
        const auto best = s.vertices.front();
        for (std::size_t j = 1; j <= n; ++j) {
          for (std::size_t i = 0; i < n; ++i) s.vertices[j][i] = best[i] + kShrink * (s.vertices[j][i] - best[i]);
          s.values[j] = safe_eval(objective, s.vertices[j]);
        }
      }
    }
    s.order();
  }

  result.x = s.vertices.front();
  result.value = s.values.front();
  result.iterations = iter;
  return result;
}

}  // namespace crashdyn
