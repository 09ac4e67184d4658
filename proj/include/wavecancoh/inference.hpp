#ifndef WAVECANCOH_INFERENCE_HPP
#define WAVECANCOH_INFERENCE_HPP

/** @file
 * Wald bands over replicate curves and the windowed trial-permutation test.
 *
 * The permutation p-value is the strict exceedance fraction
 * #{i : T_perm(i) >= T_obs} / n_perm, so the smallest attainable value is 0.
 * The (1 + count) / (n_perm + 1) variant is available through
 * PermTestOptions::corrected.
 */

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "wavecancoh/cancoh.hpp"
#include "wavecancoh/error.hpp"
#include "wavecancoh/rng.hpp"

namespace wavecancoh {

struct TrialCollection {
  std::string label;
  std::vector<CancohField> trials;
};

struct WaldBand {
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Mean +- z * sd / sqrt(R) per column, sd with the R - 1 denominator.
inline WaldBand wald_band(const std::vector<std::vector<double>>& curves, double level) {
  detail::require(curves.size() >= 2, Errc::invalid_argument, "a Wald band needs at least 2 curves");
  detail::require(level > 0.0 && level < 1.0, Errc::invalid_argument, "confidence level must lie in (0, 1)");
  const std::size_t n = curves.front().size();
  for (const auto& c : curves) {
    detail::require(c.size() == n, Errc::grid_mismatch, "curves have different lengths");
  }
  const boost::math::normal_distribution<double> standard;
  const double z = boost::math::quantile(standard, 0.5 + level / 2.0);
  const auto R = static_cast<double>(curves.size());
  WaldBand out;
  out.mean.resize(n);
  out.lo.resize(n);
  out.hi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (const auto& c : curves) sum += c[i];
    const double mean = sum / R;
    double ss = 0.0;
    for (const auto& c : curves) ss += (c[i] - mean) * (c[i] - mean);
    const double half = z * std::sqrt(ss / (R - 1.0)) / std::sqrt(R);
    out.mean[i] = mean;
    out.lo[i] = mean - half;
    out.hi[i] = mean + half;
  }
  return out;
}

namespace detail {

inline void require_same_grid(const CancohField& a, const CancohField& b) {
  require(a.grid == b.grid && a.scales == b.scales && a.length_ref == b.length_ref && a.fs == b.fs &&
              a.time_origin == b.time_origin,
          Errc::grid_mismatch, "trials do not share scale and time grids");
  require(a.family == b.family && a.num_scales == b.num_scales && a.half_width == b.half_width &&
              a.epsilon == b.epsilon && a.lag == b.lag,
          Errc::grid_mismatch, "trials were estimated with different configurations");
}

inline void validate_collection(const TrialCollection& c) {
  require(!c.trials.empty(), Errc::empty_group, "trial collection '" + c.label + "' is empty");
  for (const auto& t : c.trials) require_same_grid(c.trials.front(), t);
}

/// Smaller of the two central order statistics for even counts.
inline double lower_median(std::vector<double> v) {
  const std::size_t mid = (v.size() - 1) / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  return v[mid];
}

}  // namespace detail

inline WaldBand wald_band(const TrialCollection& collection, int j, double level) {
  detail::validate_collection(collection);
  std::vector<std::vector<double>> curves;
  curves.reserve(collection.trials.size());
  for (const auto& t : collection.trials) curves.push_back(t.rho_curve(j));
  return wald_band(curves, level);
}

struct PermTestOptions {
  int n_perm = 1000;
  std::uint64_t seed = 0;
  bool corrected = false;
  bool keep_distribution = true;
};

struct PermTestReport {
  int scale = 0;
  double t_star = 0.0;   // seconds relative to the time origin
  double window = 0.0;   // seconds
  int n_perm = 0;
  std::uint64_t seed = 0;
  double t_obs = 0.0;
  std::vector<double> perm_stats;
  int exceedances = 0;
  double p_value = 1.0;
  bool corrected = false;
  double median_difference = 0.0;  // median_A - median_B at the grid point nearest t_star
  std::size_t window_first = 0;
  std::size_t window_last = 0;
};

/// Grid indices i with t_star - w/2 <= seconds(i) <= t_star + w/2.
inline std::pair<std::size_t, std::size_t> window_indices(const CancohField& field, double t_star, double w) {
  detail::require(w >= 0.0, Errc::window_range, "window width must be >= 0");
  detail::require(field.size() > 0, Errc::window_range, "empty time grid");
  const double tol = 1e-9 / field.fs;
  const double start = t_star - w / 2.0;
  const double end = t_star + w / 2.0;
  detail::require(start >= field.seconds(0) - tol && end <= field.seconds(field.size() - 1) + tol,
                  Errc::window_range, "window [" + std::to_string(start) + ", " + std::to_string(end) +
                                          "] s lies outside the time grid");
  std::size_t first = field.size();
  std::size_t last = 0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double t = field.seconds(i);
    if (t >= start - tol && t <= end + tol) {
      first = std::min(first, i);
      last = i;
    }
  }
  detail::require(first < field.size(), Errc::window_range, "window contains no grid points");
  return {first, last};
}

namespace detail {

/// rho values of one scale for every trial, restricted to [first, last].
inline std::vector<std::vector<double>> window_rows(const TrialCollection& c, int j, std::size_t first,
                                                    std::size_t last) {
  std::vector<std::vector<double>> rows;
  rows.reserve(c.trials.size());
  for (const auto& t : c.trials) {
    const std::size_t base = t.scale_slot(j) * t.size();
    std::vector<double> r;
    r.reserve(last - first + 1);
    for (std::size_t i = first; i <= last; ++i) r.push_back(t.points[base + i].rho);
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Sum over the window of (median over group A - median over group B)^2,
/// where membership[r] == true marks group A.
inline double median_gap_statistic(const std::vector<std::vector<double>>& rows, const std::vector<bool>& in_a) {
  const std::size_t width = rows.front().size();
  double stat = 0.0;
  std::vector<double> a;
  std::vector<double> b;
  for (std::size_t i = 0; i < width; ++i) {
    a.clear();
    b.clear();
    for (std::size_t r = 0; r < rows.size(); ++r) (in_a[r] ? a : b).push_back(rows[r][i]);
    const double d = lower_median(a) - lower_median(b);
    stat += d * d;
  }
  return stat;
}

}  // namespace detail

inline PermTestReport perm_test(const TrialCollection& group_a, const TrialCollection& group_b, int j,
                                double t_star, double w, const PermTestOptions& opts) {
  detail::validate_collection(group_a);
  detail::validate_collection(group_b);
  detail::require_same_grid(group_a.trials.front(), group_b.trials.front());
  detail::require(opts.n_perm >= 1, Errc::invalid_argument, "n_perm must be >= 1");
  const CancohField& ref = group_a.trials.front();
  (void)ref.scale_slot(j);
  const auto [first, last] = window_indices(ref, t_star, w);

  auto rows = detail::window_rows(group_a, j, first, last);
  const std::size_t n_a = rows.size();
  for (auto& r : detail::window_rows(group_b, j, first, last)) rows.push_back(std::move(r));
  const std::size_t n = rows.size();

  std::vector<bool> labels(n, false);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_a), true);

  PermTestReport rep;
  rep.scale = j;
  rep.t_star = t_star;
  rep.window = w;
  rep.n_perm = opts.n_perm;
  rep.seed = opts.seed;
  rep.corrected = opts.corrected;
  rep.window_first = first;
  rep.window_last = last;
  rep.t_obs = detail::median_gap_statistic(rows, labels);

  std::size_t nearest = first;
  for (std::size_t i = first; i <= last; ++i) {
    if (std::abs(ref.seconds(i) - t_star) < std::abs(ref.seconds(nearest) - t_star)) nearest = i;
  }
  {
    std::vector<double> a;
    std::vector<double> b;
    for (std::size_t r = 0; r < n; ++r) (r < n_a ? a : b).push_back(rows[r][nearest - first]);
    rep.median_difference = detail::lower_median(a) - detail::lower_median(b);
  }

  rep.perm_stats.resize(static_cast<std::size_t>(opts.n_perm));
  std::vector<std::size_t> order(n);
  std::vector<bool> perm_labels(n);
  for (int i = 0; i < opts.n_perm; ++i) {
    Stream rng(derive_seed(opts.seed, static_cast<std::uint64_t>(i)));
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t m = n - 1; m > 0; --m) std::swap(order[m], order[rng.below(m + 1)]);
    std::fill(perm_labels.begin(), perm_labels.end(), false);
    for (std::size_t r = 0; r < n_a; ++r) perm_labels[order[r]] = true;
    rep.perm_stats[static_cast<std::size_t>(i)] = detail::median_gap_statistic(rows, perm_labels);
  }
  for (double s : rep.perm_stats) {
    if (s >= rep.t_obs) ++rep.exceedances;
  }
  rep.p_value = opts.corrected ? (1.0 + rep.exceedances) / (opts.n_perm + 1.0)
                               : static_cast<double>(rep.exceedances) / opts.n_perm;
  if (!opts.keep_distribution) rep.perm_stats.clear();
  return rep;
}

}  // namespace wavecancoh

#endif  // WAVECANCOH_INFERENCE_HPP
