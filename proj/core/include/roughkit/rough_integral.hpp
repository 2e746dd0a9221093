#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "roughkit/rough_path.hpp"
#include "roughkit/stats.hpp"

namespace roughkit {

// Controlled pair (F, F') on a grid. F_i is d_x x d_y, F'_i is
// d_x x d_y x d_y with F'[k][a][b] multiplying YY^{ab}. The remainder is
// R_{s,t}[k][b] = F_t[k][b] - F_s[k][b] - sum_a F'_s[k][a][b] dY^a_{s,t}.
class ControlledPath {
 public:
  ControlledPath(TimeGrid grid, std::size_t dx, std::size_t dy, std::vector<double> gartner,
                 std::vector<double> gubbins);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t dx() const noexcept { return dx_; }
  std::size_t dy() const noexcept { return dy_; }
  std::span<const double> gartner(std::size_t node) const noexcept {
    return {gartner_.data() + node * dx_ * dy_, dx_ * dy_};
  }
  std::span<const double> gubbins(std::size_t node) const noexcept {
    return {gubbins_.data() + node * dx_ * dy_ * dy_, dx_ * dy_ * dy_};
  }

 private:
  TimeGrid grid_;
  std::size_t dx_;
  std::size_t dy_;
  std::vector<double> gartner_;
  std::vector<double> gubbins_;
};

// Evaluates fn(t_i, Y_i, F_i, F'_i) at every node of the rough path.
using ControlledFunction = std::function<void(double, std::span<const double>, std::span<double>,
                                              std::span<double>)>;
ControlledPath make_controlled(const RoughPath& path, std::size_t dx, const ControlledFunction& fn);

// F = Y, F' = identity, flattened so that the integral is the d x d matrix
// int Y (x) dY: row (a, c) of F is Y^a e_c.
ControlledPath self_integrand(const RoughPath& path);

std::vector<double> controlled_remainder(const ControlledPath& cp, const RoughPath& path,
                                         std::size_t i, std::size_t j);

// Sum over consecutive partition points u < v of F_u dY_{u,v} + F'_u : YY_{u,v}.
std::vector<double> davie_sum(const ControlledPath& cp, const RoughPath& path,
                              std::span<const std::size_t> partition);

struct TraceEntry {
  std::size_t stride = 1;
  double mesh = 0.0;
  std::vector<double> value;
};

struct RoughIntegral {
  std::vector<double> value;           // full-grid Davie sum over the window
  std::vector<TraceEntry> refinement;  // strides 1, 2, 4, ... down to one interval
};

RoughIntegral rough_integral(const ControlledPath& cp, const RoughPath& path, std::size_t i,
                             std::size_t j);

// Full-grid Davie sums from t_0 to every node: (N + 1) x d_x, zero at node 0.
std::vector<double> cumulative_integral(const ControlledPath& cp, const RoughPath& path);

// Monte Carlo family of controlled paths. `drivers` holds either a single
// rough path shared by all samples or one per sample.
struct ControlledEnsemble {
  std::vector<ControlledPath> samples;
  std::vector<RoughPath> drivers;

  const RoughPath& driver(std::size_t k) const { return drivers.size() == 1 ? drivers[0] : drivers[k]; }
};

struct SeminormReport {
  double p = 0.0;
  double alpha = 0.0;
  double f_norm = 0.0;
  double fprime_norm = 0.0;
  double conditional_remainder_norm = 0.0;
  double fatnorm_total = 0.0;
};

// Empirical (alpha; p) norms of F and F' (sup of L^p norms plus the
// alpha-Hölder seminorm of increments, max over grid pairs) and the
// 2alpha-Hölder norm of the cross-sample mean of the remainder, which stands
// in for the conditional expectation E_s R_{s,t}.
SeminormReport estimate_fatnorm(const ControlledEnsemble& ens, double alpha, double p);

void write_report(std::ostream& out, const SeminormReport& report);

struct MomentCheck {
  ConvergenceTable table;  // metric "moment_ratio", scale = shortest window length in the band
  double median_ratio = 0.0;
  bool bounded = false;         // every ratio within a factor 2 of the median
  bool exponent_warning = false;  // alpha * p <= 1
};

// For each dyadic band of window lengths [2^k, 2^{k+1}) grid intervals, the
// max over windows of (mean |int_s^t|^p)^{1/p} / |t - s|^alpha.
MomentCheck increment_moment_check(const ControlledEnsemble& ens, double p, double alpha);

}  // namespace roughkit
