#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "roughkit/lift.hpp"
#include "roughkit/randomise.hpp"
#include "roughkit/rsde.hpp"

namespace roughkit {

// Signal dX = b dt + sigma dB + f dY with coefficients of (t, x, y), where y
// is read from the driver view. signal.gubbins carries D_y f, arranged as
// [k][a][b] = d f_{k,b} / d y_a. Observation dY = h dt + dB_perp under the
// signal measure.
struct FilterModel {
  RsdeSpec signal;
  ObservationFunction observation;
  std::function<void(Rng&, std::span<double>)> initial;
};

struct LinearFilterParams {
  std::size_t dx = 1;
  std::size_t db = 1;
  std::size_t dy = 1;
  std::vector<double> A;      // dx x dx
  std::vector<double> H;      // dy x dx
  std::vector<double> sigma;  // dx x db
  std::vector<double> f;      // dx x dy
  std::vector<double> m0;     // dx
  std::vector<double> P0;     // dx x dx, symmetric positive semi-definite
};

LinearFilterParams scalar_linear_params(double A, double H, double sigma, double f, double m0,
                                        double P0);

// b = A x, sigma and f constant, h = H x, X_0 ~ N(m0, P0).
FilterModel linear_filter_model(const LinearFilterParams& params);

// Reference measure: Y is a Brownian motion independent of B. Signal measure:
// dY = h dt + dB_perp.
enum class Measure { reference, signal };

struct SignalObservation {
  TimeGrid grid;  // the fine grid
  std::size_t dx = 0;
  std::size_t dy = 0;
  std::vector<double> signal;       // nodes x dx
  std::vector<double> observation;  // nodes x dy, starting at zero
};

// Euler-Maruyama for (X, Y) on grid.refine(fine_factor).
SignalObservation simulate_signal_observation(const FilterModel& model, const TimeGrid& grid,
                                              std::size_t fine_factor, Seed seed,
                                              Measure measure = Measure::reference);

// Lifts the fine observation path to `coarse` (Itô sums by default), takes the
// geometric part and sets the bracket to I (t - s).
RoughPath hardwire_bracket(std::span<const double> fine_values, std::size_t dim,
                           const TimeGrid& coarse, std::size_t fine_factor,
                           LiftConvention convention = LiftConvention::ito,
                           double alpha = kDefaultAlpha);

struct FilterEstimate {
  std::vector<double> times;
  std::vector<std::string> phi_ids;
  // times x phis
  std::vector<double> unnormalised;
  std::vector<double> unnormalised_se;
  std::vector<double> normalised;
  std::vector<double> normalised_se;
  // <mu_t, 1> per time
  std::vector<double> mass;
  std::vector<double> mass_se;
  std::size_t clipped = 0;

  double normalised_at(std::size_t time, std::size_t phi) const {
    return normalised[time * phi_ids.size() + phi];
  }
  double normalised_se_at(std::size_t time, std::size_t phi) const {
    return normalised_se[time * phi_ids.size() + phi];
  }
  double unnormalised_at(std::size_t time, std::size_t phi) const {
    return unnormalised[time * phi_ids.size() + phi];
  }
};

inline constexpr double kLogWeightClip = 700.0;

// M independent solves of the signal equation against the frozen observation
// path, weighted by exp(I) from the rough Girsanov exponent. Brownian noise
// lives on rp.grid().refine(fine_factor). Log-weights above 700 are clipped
// and counted; non-finite log-weights raise WeightOverflow.
FilterEstimate rough_filter(const FilterModel& model, const RoughPath& rp,
                            std::span<const TestFunction> phis, std::size_t samples, Seed seed,
                            std::size_t fine_factor = 1);

// Same solves and seeds without weights.
FilterEstimate prior_estimate(const FilterModel& model, const RoughPath& rp,
                              std::span<const TestFunction> phis, std::size_t samples, Seed seed,
                              std::size_t fine_factor = 1);

// Mean of exp(I_t) over joint draws of (Y, B) under the reference measure.
struct UnitMassRow {
  double time = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  double z = 0.0;
};
std::vector<UnitMassRow> unit_mass_check(const FilterModel& model, const TimeGrid& grid,
                                         std::size_t fine_factor, std::size_t samples, Seed seed);

struct KalmanPath {
  TimeGrid grid;
  std::size_t dx = 0;
  std::vector<double> mean;        // nodes x dx
  std::vector<double> covariance;  // nodes x dx x dx
  std::vector<double> mean_bound;  // nodes x dx, RK4 step-halving difference
};

// Correlated-noise Kalman-Bucy filter for the linear model
//   dm = A m dt + f dY + P H^T (dY - H m dt),  P' = A P + P A^T + sigma sigma^T - P H^T H P
// integrated by RK4 along the piecewise-linear interpolation of Y.
KalmanPath kalman_bucy_oracle(const LinearFilterParams& params, const TimeGrid& grid,
                              std::span<const double> observation);

// Observation CSV: header line, then `t,y0,y1,...` rows.
struct ObservationData {
  TimeGrid grid;
  std::size_t dim = 0;
  std::vector<double> values;
};
ObservationData read_observation_csv(std::istream& in);
void write_observation_csv(std::ostream& out, const TimeGrid& grid, std::size_t dim,
                           std::span<const double> values);

// CSV: time,phi_id,unnormalised,normalised,stderr (stderr of the ratio).
void write_csv(std::ostream& out, const FilterEstimate& est);

}  // namespace roughkit
