#include "roughkit/rough_path.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roughkit/errors.hpp"

namespace roughkit {
namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double diff_norm(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

void check_alpha(double alpha) {
  if (!(alpha > 1.0 / 3.0 && alpha <= 0.5))
    throw InvalidArgument("alpha must lie in (1/3, 1/2], got " + std::to_string(alpha));
}

// Running increment (delta Y_{s,t}, YY_{s,t}) for fixed s, extended one
// interval at a time.
class RunningIncrement {
 public:
  RunningIncrement(const RoughPath& path, std::size_t start)
      : path_(path), d_(path.dim()), first_(d_, 0.0), second_(d_ * d_, 0.0), end_(start) {}

  void extend() {
    const auto y0 = path_.value(end_);
    const auto y1 = path_.value(end_ + 1);
    const auto area = path_.area(end_);
    for (std::size_t a = 0; a < d_; ++a)
      for (std::size_t b = 0; b < d_; ++b)
        second_[a * d_ + b] += area[a * d_ + b] + first_[a] * (y1[b] - y0[b]);
    for (std::size_t a = 0; a < d_; ++a) first_[a] += y1[a] - y0[a];
    ++end_;
  }

  std::span<const double> first() const { return first_; }
  std::span<const double> second() const { return second_; }
  std::size_t end() const { return end_; }

 private:
  const RoughPath& path_;
  std::size_t d_;
  std::vector<double> first_;
  std::vector<double> second_;
  std::size_t end_;
};

void check_compatible(const RoughPath& a, const RoughPath& b) {
  if (a.dim() != b.dim()) throw IncompatibleOperands("rough paths have different dimensions");
  if (!(a.grid() == b.grid())) throw IncompatibleOperands("rough paths live on different grids");
}

}  // namespace

RoughPath::RoughPath(TimeGrid grid, std::size_t dim, std::vector<double> first_level,
                     std::vector<double> second_level, double alpha)
    : grid_(std::move(grid)),
      dim_(dim),
      first_(std::move(first_level)),
      second_(std::move(second_level)),
      alpha_(alpha) {
  if (dim_ == 0) throw InvalidArgument("RoughPath: dimension must be positive");
  if (first_.size() != grid_.nodes() * dim_)
    throw InvalidArgument("RoughPath: first level must hold (N+1) * d values");
  if (second_.size() != grid_.intervals() * dim_ * dim_)
    throw InvalidArgument("RoughPath: second level must hold N * d * d values");
  check_alpha(alpha_);
}

Increment chen_compose(const Increment& left, const Increment& right) {
  const std::size_t d = left.first.size();
  if (right.first.size() != d || left.second.size() != d * d || right.second.size() != d * d)
    throw IncompatibleOperands("chen_compose: dimension mismatch");
  Increment out{std::vector<double>(d), std::vector<double>(d * d)};
  for (std::size_t a = 0; a < d; ++a) out.first[a] = left.first[a] + right.first[a];
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b)
      out.second[a * d + b] =
          left.second[a * d + b] + (right.second[a * d + b] + left.first[a] * right.first[b]);
  return out;
}

Increment chen_increment(const RoughPath& path, std::size_t i, std::size_t j) {
  if (i >= j) throw InvalidArgument("chen_increment: need i < j");
  if (j > path.intervals()) throw InvalidArgument("chen_increment: node index out of range");
  RunningIncrement run(path, i);
  while (run.end() < j) run.extend();
  return {{run.first().begin(), run.first().end()}, {run.second().begin(), run.second().end()}};
}

BracketPath::BracketPath(TimeGrid grid, std::size_t dim, std::vector<double> values)
    : grid_(std::move(grid)), dim_(dim), values_(std::move(values)) {
  if (values_.size() != grid_.nodes() * dim_ * dim_)
    throw InvalidArgument("BracketPath: need (N+1) * d * d values");
}

std::vector<double> BracketPath::increment(std::size_t i, std::size_t j) const {
  const auto a = at(i), b = at(j);
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = b[k] - a[k];
  return out;
}

namespace {

// Symmetric defect over one interval, computed on the upper triangle and
// mirrored so the result is exactly symmetric.
void interval_bracket(const RoughPath& path, std::size_t i, std::span<double> out) {
  const std::size_t d = path.dim();
  const auto y0 = path.value(i), y1 = path.value(i + 1);
  const auto area = path.area(i);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) {
      const double v = (y1[a] - y0[a]) * (y1[b] - y0[b]) - area[a * d + b] - area[b * d + a];
      out[a * d + b] = v;
      out[b * d + a] = v;
    }
}

}  // namespace

BracketPath bracket(const RoughPath& path) {
  const std::size_t d = path.dim(), n = path.intervals();
  std::vector<double> values((n + 1) * d * d, 0.0);
  std::vector<double> inc(d * d);
  for (std::size_t i = 0; i < n; ++i) {
    interval_bracket(path, i, inc);
    for (std::size_t k = 0; k < d * d; ++k) values[(i + 1) * d * d + k] = values[i * d * d + k] + inc[k];
  }
  return BracketPath(path.grid(), d, std::move(values));
}

RoughPath geometrize(const RoughPath& path) {
  const std::size_t d = path.dim(), n = path.intervals();
  std::vector<double> second(path.second_level().begin(), path.second_level().end());
  std::vector<double> inc(d * d);
  for (std::size_t i = 0; i < n; ++i) {
    interval_bracket(path, i, inc);
    for (std::size_t k = 0; k < d * d; ++k) second[i * d * d + k] += 0.5 * inc[k];
  }
  return RoughPath(path.grid(), d, {path.first_level().begin(), path.first_level().end()},
                   std::move(second), path.alpha());
}

HolderStats holder_stats(const RoughPath& path, double alpha) {
  check_alpha(alpha);
  const auto& grid = path.grid();
  const std::size_t n = path.intervals();
  const BracketPath br = bracket(path);
  HolderStats s;
  for (std::size_t i = 0; i < n; ++i) {
    RunningIncrement run(path, i);
    while (run.end() < n) {
      run.extend();
      const std::size_t j = run.end();
      const double dt = grid[j] - grid[i];
      s.first_level_holder = std::max(s.first_level_holder, norm(run.first()) / std::pow(dt, alpha));
      s.second_level_holder =
          std::max(s.second_level_holder, norm(run.second()) / std::pow(dt, 2 * alpha));
      s.bracket_lip = std::max(s.bracket_lip, diff_norm(br.at(j), br.at(i)) / dt);
    }
  }
  s.homogeneous_norm = std::max(s.first_level_holder, std::sqrt(s.second_level_holder));
  return s;
}

namespace {

double rho_alpha(const RoughPath& a, const RoughPath& b, double alpha) {
  const auto& grid = a.grid();
  const std::size_t n = a.intervals();
  double first = 0.0, second = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    RunningIncrement ra(a, i), rb(b, i);
    while (ra.end() < n) {
      ra.extend();
      rb.extend();
      const double dt = grid[ra.end()] - grid[i];
      first = std::max(first, diff_norm(ra.first(), rb.first()) / std::pow(dt, alpha));
      second = std::max(second, diff_norm(ra.second(), rb.second()) / std::pow(dt, 2 * alpha));
    }
  }
  return first + second;
}

}  // namespace

double rough_distance(const RoughPath& a, const RoughPath& b, double alpha, RoughMetric metric) {
  check_compatible(a, b);
  check_alpha(alpha);
  if (metric == RoughMetric::rho_alpha) return rho_alpha(a, b, alpha);

  const RoughPath ga = geometrize(a), gb = geometrize(b);
  const BracketPath ba = bracket(a), bb = bracket(b);
  const auto& grid = a.grid();
  const std::size_t n = a.intervals(), d = a.dim();
  double lip = 0.0;
  std::vector<double> diff(d * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j <= n; ++j) {
      for (std::size_t k = 0; k < d * d; ++k)
        diff[k] = (ba.at(j)[k] - ba.at(i)[k]) - (bb.at(j)[k] - bb.at(i)[k]);
      lip = std::max(lip, norm(diff) / (grid[j] - grid[i]));
    }
  return rho_alpha(ga, gb, alpha) + lip;
}

}  // namespace roughkit
