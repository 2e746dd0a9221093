#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "roughkit/rng.hpp"

namespace roughkit {

struct SampleSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0;  // sqrt(variance / n)
  std::size_t count = 0;
};

// Mean, unbiased variance and standard error; pairwise sums in input order.
SampleSummary summarize(std::span<const double> values);

// (a - b) / sqrt(se_a^2 + se_b^2); zero when both errors vanish and a == b.
double z_score(double a, double se_a, double b, double se_b);

// Least-squares slope of log(error) against log(mesh).
struct RateFit {
  double rate = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
};
RateFit fit_rate(std::span<const double> mesh, std::span<const double> error);

double median(std::vector<double> values);

// Mesh-vs-error records: one row per (scale, metric) plus fitted rates.
struct ConvergenceRow {
  double scale = 0.0;
  std::string metric;
  double value = 0.0;
};

struct FittedRate {
  std::string metric;
  RateFit fit;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::vector<FittedRate> rates;

  void add(double scale, std::string metric, double value);
  std::vector<double> values(const std::string& metric) const;
  std::vector<double> scales(const std::string& metric) const;
};

// CSV with header `scale,metric,value`; fitted rates appended as rows with
// metric `rate:<name>` and scale 0.
void write_csv(std::ostream& out, const ConvergenceTable& table);

// 1-d Wasserstein-1 distance between two empirical measures with uniform
// weights (integral of |F_a^{-1} - F_b^{-1}|).
double wasserstein1(std::vector<double> a, std::vector<double> b);

// Sliced W1 over `projections` directions drawn from `seed`. Points are
// stored row-major with `dim` coordinates each. For dim == 1 this is W1.
double sliced_wasserstein1(std::span<const double> a, std::span<const double> b,
                           std::size_t dim, std::size_t projections, Seed seed);

// 17 significant digits; round-trips through strtod.
std::string format_double(double x);

}  // namespace roughkit
