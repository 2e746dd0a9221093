#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "roughkit/lift.hpp"
#include "roughkit/rough_integral.hpp"
#include "roughkit/rough_path.hpp"

namespace roughkit {

// Read access to a driver path sampled on a grid, truncated at node `now`:
// at(i) returns the value at min(i, now), so a coefficient can only see
// Y_{. ^ t}. A non-causal solve exposes the whole path.
class DriverView {
 public:
  DriverView() = default;
  DriverView(const TimeGrid* grid, const double* values, std::size_t dim, std::size_t now)
      : grid_(grid), values_(values), dim_(dim), now_(now) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t now() const noexcept { return now_; }
  const TimeGrid& grid() const noexcept { return *grid_; }
  std::span<const double> at(std::size_t node) const noexcept {
    return {values_ + (node < now_ ? node : now_) * dim_, dim_};
  }
  std::span<const double> current() const noexcept { return at(now_); }
  DriverView until(std::size_t node) const noexcept { return {grid_, values_, dim_, node}; }

 private:
  const TimeGrid* grid_ = nullptr;
  const double* values_ = nullptr;
  std::size_t dim_ = 0;
  std::size_t now_ = 0;
};

// out = coefficient(t, x, driver). Shapes: drift d_x, Brownian d_x x d_B,
// rough d_x x d_Y, gubbins d_x x d_Y x d_Y, jacobian d_x x d_Y x d_x with
// entry [k][b][m] = d f_{k,b} / d x_m.
using Coefficient =
    std::function<void(double, std::span<const double>, const DriverView&, std::span<double>)>;

struct RsdeSpec {
  std::size_t dx = 1;
  std::size_t db = 1;
  std::size_t dy = 1;
  Coefficient drift;
  Coefficient brownian;
  Coefficient rough;
  Coefficient gubbins;   // explicit f'; empty means zero
  Coefficient jacobian;  // empty means central finite differences
  bool causal = true;
  double divergence_bound = 1e12;
};

// States on the coarse grid and the controlled pair
// (F, F') = (f, Df f + f')(t_i, X_i) along the solution.
struct SolutionPath {
  TimeGrid grid;
  std::size_t dx = 0;
  std::size_t dy = 0;
  std::vector<double> states;   // nodes x dx
  std::vector<double> gartner;  // nodes x dx x dy (empty when not recorded)
  std::vector<double> gubbins;  // nodes x dx x dy x dy (empty when not recorded)

  std::span<const double> state(std::size_t node) const noexcept {
    return {states.data() + node * dx, dx};
  }
  ControlledPath controlled() const;
};

// One-step scheme per coarse interval [u, v]:
//   X_v = X_u + sum over fine substeps (b dt + sigma dB) + f dY_{u,v} + F' : YY_{u,v}
// with f, F' frozen at (u, X_u) and b, sigma evaluated at each fine node.
// `bm` lives on rp.grid().refine(k) for some k >= 1.
SolutionPath solve_rsde(const RsdeSpec& spec, const RoughPath& rp, const BrownianDraw& bm,
                        std::span<const double> x0);

// Rough Itô process with coefficients that do not depend on the state:
// X_t = x0 + int A dt + int Sigma dB + int (F, F') dY.
using ProcessCoefficient = std::function<void(double, const DriverView&, std::span<double>)>;
using ControlledFactory =
    std::function<void(double, const DriverView&, std::span<double>, std::span<double>)>;

SolutionPath solve_rough_ito(std::size_t dx, std::size_t db, const ProcessCoefficient& A,
                             const ProcessCoefficient& Sigma, const ControlledFactory& cp,
                             const RoughPath& rp, const BrownianDraw& bm,
                             std::span<const double> x0);

// Observation function h(t, x, y) in R^{d_Y} with Jacobians d_Y x d_X and
// d_Y x d_Y (row b is the gradient of h_b). Empty Jacobians are computed by
// central finite differences.
struct ObservationFunction {
  std::function<void(double, std::span<const double>, std::span<const double>, std::span<double>)> h;
  std::function<void(double, std::span<const double>, std::span<const double>, std::span<double>)> dh_dx;
  std::function<void(double, std::span<const double>, std::span<const double>, std::span<double>)> dh_dy;
};

// I_t = int_0^t (h, D_x h f + D_y h)(s, X_s, Y_s) dY_s - 1/2 int_0^t |h|^2 ds at
// every grid node; the time integral uses the trapezoid rule.
std::vector<double> girsanov_exponent(const ObservationFunction& obs, const SolutionPath& sol,
                                      const RoughPath& rp);

// CSV: header `t,x0,x1,...`, one row per node.
void write_solution_csv(std::ostream& out, const SolutionPath& sol);

}  // namespace roughkit
