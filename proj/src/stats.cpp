#include "apm/stats.hpp"

#include "apm/error.hpp"
#include "apm/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace apm {

double phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double phi_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("phi_inv needs p in (0, 1)");
  // Acklam's rational approximation, then one Halley step on phi.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double lo = 0.02425;
  double x;
  if (p < lo) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - lo) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = phi(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double ks_distance_sorted(std::span<const double> sorted, double center, double scale) {
  if (sorted.empty()) throw std::invalid_argument("ks_distance needs at least one value");
  if (!(scale > 0.0)) throw std::invalid_argument("ks_distance needs scale > 0");
  const double m = static_cast<double>(sorted.size());
  double best = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    // tie group [i, j): F_emp jumps from i/m to j/m at this point
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double f = phi((sorted[i] - center) / scale);
    best = std::max({best, static_cast<double>(j) / m - f, f - static_cast<double>(i) / m});
    i = j;
  }
  return best;
}

double ks_distance(std::span<const double> values, double center, double scale) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return ks_distance_sorted(sorted, center, scale);
}

Normalization parse_normalization(const std::string& text) {
  if (text == "sigma") return Normalization::Sigma;
  if (text == "sqrtmean" || text == "sqrt-mean") return Normalization::SqrtMean;
  throw std::invalid_argument("unknown normalization '" + text + "' (sigma|sqrtmean)");
}

std::string to_string(Normalization n) {
  return n == Normalization::Sigma ? "sigma" : "sqrtmean";
}

std::vector<double> default_grid_probabilities() {
  std::vector<double> out(21);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.025 + 0.95 * static_cast<double>(i) / 20.0;
  return out;
}

NormalityReport normality_report(std::vector<double>& values, double center, double scale,
                                 std::span<const double> grid_probabilities) {
  std::sort(values.begin(), values.end());
  NormalityReport r;
  r.sample_size = values.size();
  r.center = center;
  r.scale = scale;
  r.ks = ks_distance_sorted(values, center, scale);
  const double m = static_cast<double>(values.size());
  for (const double q : grid_probabilities) {
    CdfPoint pt;
    pt.x = phi_inv(q);
    const double cut = center + pt.x * scale;
    const auto below = std::upper_bound(values.begin(), values.end(), cut) - values.begin();
    pt.empirical = static_cast<double>(below) / m;
    pt.phi = phi(pt.x);
    r.grid.push_back(pt);
  }
  return r;
}

NormalityReport erdos_kac_report(const AdditiveFunction& fn, const Progression& prog,
                                 std::uint64_t n, Normalization normalization,
                                 const SieveConfig& config, std::vector<double>* values) {
  if (normalization == Normalization::SqrtMean &&
      (fn.spec.may_be_negative() || fn.spec.sup_abs() > 1.0)) {
    throw std::invalid_argument("the sqrt(A_n) normalization needs 0 <= f(p) <= 1; use sigma");
  }
  if (prog.count_upto(n) < 2) {
    throw DegenerateError("fewer than two members <= " + std::to_string(n) +
                          ": normalization undefined");
  }
  std::vector<double> v;
  const auto summary = empirical_moments(fn, prog, n, 2, config,
                                         [&](std::span<const double> block) {
                                           v.insert(v.end(), block.begin(), block.end());
                                         });
  const double center = summary.mean;
  const double scale =
      normalization == Normalization::Sigma ? summary.sigma : std::sqrt(std::max(0.0, center));
  if (!(scale > 0.0)) {
    throw DegenerateError(normalization == Normalization::Sigma
                              ? "sigma_n = 0: normalization undefined"
                              : "A_n <= 0: normalization undefined");
  }
  if (values) *values = v;
  auto r = normality_report(v, center, scale, default_grid_probabilities());
  r.n = n;
  r.prog = prog;
  r.normalization = normalization;
  return r;
}

}  // namespace apm
