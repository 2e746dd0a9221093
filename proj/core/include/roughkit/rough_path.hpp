#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "roughkit/time_grid.hpp"

namespace roughkit {

inline constexpr double kDefaultAlpha = 0.4;

// Level-2 rough path sampled on a grid. Stores Y at every node and the
// second-level increment over every consecutive interval; increments over
// longer intervals are generated by Chen's relation, so they are consistent by
// construction. Matrices are d x d row-major, entry (a, b) approximating
// int (Y^a - Y^a_s) dY^b.
class RoughPath {
 public:
  RoughPath(TimeGrid grid, std::size_t dim, std::vector<double> first_level,
            std::vector<double> second_level, double alpha = kDefaultAlpha);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t dim() const noexcept { return dim_; }
  double alpha() const noexcept { return alpha_; }
  std::size_t intervals() const noexcept { return grid_.intervals(); }

  std::span<const double> value(std::size_t node) const noexcept {
    return {first_.data() + node * dim_, dim_};
  }
  std::span<const double> area(std::size_t interval) const noexcept {
    return {second_.data() + interval * dim_ * dim_, dim_ * dim_};
  }
  std::span<const double> first_level() const noexcept { return first_; }
  std::span<const double> second_level() const noexcept { return second_; }

 private:
  TimeGrid grid_;
  std::size_t dim_;
  std::vector<double> first_;
  std::vector<double> second_;
  double alpha_;
};

// (delta Y_{s,t}, YY_{s,t}) for a pair of grid nodes.
struct Increment {
  std::vector<double> first;
  std::vector<double> second;
};

// Chen composition of increments over adjacent intervals [s,t] and [t,u].
Increment chen_compose(const Increment& left, const Increment& right);

// Increment over [t_i, t_j], accumulated left to right over consecutive
// intervals. Requires i < j.
Increment chen_increment(const RoughPath& path, std::size_t i, std::size_t j);

// [Y]_{0,t_i} at every node; symmetric matrices, zero at t_0.
class BracketPath {
 public:
  BracketPath(TimeGrid grid, std::size_t dim, std::vector<double> values);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> at(std::size_t node) const noexcept {
    return {values_.data() + node * dim_ * dim_, dim_ * dim_};
  }
  // delta [Y]_{t_i, t_j}
  std::vector<double> increment(std::size_t i, std::size_t j) const;

 private:
  TimeGrid grid_;
  std::size_t dim_;
  std::vector<double> values_;
};

// Bracket defined through dY (x) dY = YY + YY^T + delta[Y], accumulated from
// the consecutive intervals.
BracketPath bracket(const RoughPath& path);

// Y° = (Y, YY + delta[Y]/2): the geometric part. First level is copied
// bit-exactly.
RoughPath geometrize(const RoughPath& path);

struct HolderStats {
  double first_level_holder = 0.0;
  double second_level_holder = 0.0;
  double homogeneous_norm = 0.0;
  double bracket_lip = 0.0;
};

// Grid-restricted Hölder quantities (max over all grid pairs). Euclidean norm
// on vectors, Frobenius norm on matrices. Requires 1/3 < alpha <= 1/2.
HolderStats holder_stats(const RoughPath& path, double alpha);

enum class RoughMetric { rho_alpha, rho_alpha_1 };

// rho_alpha: alpha-Hölder distance of first levels plus 2alpha-Hölder distance
// of second levels. rho_alpha_1: rho_alpha of the geometric parts plus the
// Lipschitz distance of the brackets. Grids and dimensions must agree.
double rough_distance(const RoughPath& a, const RoughPath& b, double alpha,
                      RoughMetric metric);

// Serialisation. Layout:
//   roughpath,<dim>,<alpha>,<intervals>
//   node,<t>,<Y components>          (intervals + 1 rows)
//   area,<i>,<YY row-major>          (intervals rows)
// Numbers are written as hexadecimal floats, so the round trip is exact.
void write_rough_path(std::ostream& out, const RoughPath& path);
RoughPath read_rough_path(std::istream& in);

}  // namespace roughkit
