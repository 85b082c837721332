#pragma once

// Normal CDF, Kolmogorov-Smirnov distance against it, and the Erdos-Kac
// style normality report for additive functions over a progression.

#include "apm/arith_fn.hpp"
#include "apm/progression.hpp"
#include "apm/sieve.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace apm {

// Standard normal CDF.
double phi(double x);
// Inverse of phi on (0, 1); throws std::invalid_argument outside.
double phi_inv(double p);

// sup |F_emp - phi| of (v - center) / scale. Throws std::invalid_argument on
// empty input or scale <= 0.
double ks_distance(std::span<const double> values, double center, double scale);
// Same, for values already sorted ascending.
double ks_distance_sorted(std::span<const double> sorted, double center, double scale);

enum class Normalization {
  Sigma,     // (A_n, sigma_n)
  SqrtMean,  // (A_n, sqrt(A_n)); for 0 <= f(p) <= 1
};

Normalization parse_normalization(const std::string& text);
std::string to_string(Normalization n);

struct CdfPoint {
  double x = 0.0;
  double empirical = 0.0;
  double phi = 0.0;
};

struct NormalityReport {
  std::uint64_t n = 0;
  Progression prog;
  std::uint64_t sample_size = 0;
  Normalization normalization = Normalization::Sigma;
  double center = 0.0;
  double scale = 1.0;
  double ks = 0.0;
  std::vector<CdfPoint> grid;
};

// 21 probabilities 0.025, 0.07125, ..., 0.975.
std::vector<double> default_grid_probabilities();

// values is sorted in place.
NormalityReport normality_report(std::vector<double>& values, double center, double scale,
                                 std::span<const double> grid_probabilities);

// Center is the empirical mean A_n of f over the members m <= n. Throws
// DegenerateError when fewer than two members exist or the scale is not
// positive; SqrtMean rejects functions with f(p) outside [0, 1]. values,
// when given, receives the raw f(m) in member order.
NormalityReport erdos_kac_report(const AdditiveFunction& fn, const Progression& prog,
                                 std::uint64_t n, Normalization normalization,
                                 const SieveConfig& config = {},
                                 std::vector<double>* values = nullptr);

}  // namespace apm
