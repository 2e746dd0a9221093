#include "roughkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "roughkit/errors.hpp"
#include "roughkit/parallel.hpp"

namespace roughkit {

SampleSummary summarize(std::span<const double> values) {
  SampleSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = pairwise_sum(values) / static_cast<double>(values.size());
  if (values.size() < 2) return s;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - s.mean;
    sq[i] = d * d;
  }
  s.variance = pairwise_sum(sq) / static_cast<double>(values.size() - 1);
  s.std_error = std::sqrt(s.variance / static_cast<double>(values.size()));
  return s;
}

double z_score(double a, double se_a, double b, double se_b) {
  const double se = std::sqrt(se_a * se_a + se_b * se_b);
  if (se == 0.0) return a == b ? 0.0 : std::copysign(INFINITY, a - b);
  return (a - b) / se;
}

RateFit fit_rate(std::span<const double> mesh, std::span<const double> error) {
  if (mesh.size() != error.size() || mesh.size() < 2)
    throw InvalidArgument("fit_rate: need at least two (mesh, error) pairs of equal length");
  const std::size_t n = mesh.size();
  double sx = 0, sy = 0;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(mesh[i] > 0.0) || !(error[i] > 0.0))
      throw InvalidArgument("fit_rate: mesh and error values must be positive");
    x[i] = std::log(mesh[i]);
    y[i] = std::log(error[i]);
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  RateFit fit;
  fit.rate = sxy / sxx;
  fit.intercept = my - fit.rate * mx;
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.rate * x[i]);
    rss += r * r;
  }
  fit.residual_rms = std::sqrt(rss / n);
  return fit;
}

double median(std::vector<double> values) {
  if (values.empty()) throw InsufficientData("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void ConvergenceTable::add(double scale, std::string metric, double value) {
  rows.push_back({scale, std::move(metric), value});
}

std::vector<double> ConvergenceTable::values(const std::string& metric) const {
  std::vector<double> v;
  for (const auto& r : rows)
    if (r.metric == metric) v.push_back(r.value);
  return v;
}

std::vector<double> ConvergenceTable::scales(const std::string& metric) const {
  std::vector<double> v;
  for (const auto& r : rows)
    if (r.metric == metric) v.push_back(r.scale);
  return v;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(std::ostream& out, const ConvergenceTable& table) {
  out << "scale,metric,value\n";
  for (const auto& r : table.rows)
    out << format_double(r.scale) << ',' << r.metric << ',' << format_double(r.value) << '\n';
  for (const auto& r : table.rates)
    out << "0,rate:" << r.metric << ',' << format_double(r.fit.rate) << '\n';
}

double wasserstein1(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InsufficientData("wasserstein1: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() == b.size()) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = std::abs(a[i] - b[i]);
    return pairwise_sum(d) / static_cast<double>(a.size());
  }
  // Merge the quantile-function breakpoints k/na and l/nb.
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double u = 0.0, total = 0.0;
  while (i < a.size() && j < b.size()) {
    const double next = std::min((i + 1) / na, (j + 1) / nb);
    total += (next - u) * std::abs(a[i] - b[j]);
    u = next;
    if ((i + 1) / na <= next) ++i;
    if ((j + 1) / nb <= next) ++j;
  }
  return total;
}

double sliced_wasserstein1(std::span<const double> a, std::span<const double> b,
                           std::size_t dim, std::size_t projections, Seed seed) {
  if (dim == 0 || a.size() % dim || b.size() % dim)
    throw InvalidArgument("sliced_wasserstein1: sample sizes are not multiples of dim");
  const std::size_t na = a.size() / dim, nb = b.size() / dim;
  auto project = [dim](std::span<const double> pts, std::size_t n, const std::vector<double>& dir) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t k = 0; k < dim; ++k) s += pts[i * dim + k] * dir[k];
      out[i] = s;
    }
    return out;
  };
  if (dim == 1) return wasserstein1({a.begin(), a.end()}, {b.begin(), b.end()});
  Rng rng(seed);
  double total = 0;
  std::vector<double> dir(dim);
  for (std::size_t p = 0; p < projections; ++p) {
    double norm = 0;
    for (auto& c : dir) {
      c = rng.normal();
      norm += c * c;
    }
    norm = std::sqrt(norm);
    for (auto& c : dir) c /= norm;
    total += wasserstein1(project(a, na, dir), project(b, nb, dir));
  }
  return total / static_cast<double>(projections);
}

}  // namespace roughkit
