#include "roughkit/filtering.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "roughkit/errors.hpp"
#include "roughkit/parallel.hpp"
#include "roughkit/scheme.hpp"
#include "roughkit/stats.hpp"

namespace roughkit {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

Matrix as_matrix(const std::vector<double>& v, std::size_t rows, std::size_t cols,
                 const char* name) {
  if (v.size() != rows * cols)
    throw InvalidArgument(std::string("linear filter: ") + name + " has the wrong size");
  return Eigen::Map<const Matrix>(v.data(), static_cast<Eigen::Index>(rows),
                                  static_cast<Eigen::Index>(cols));
}

void check(const LinearFilterParams& p) {
  if (p.dx == 0 || p.db == 0 || p.dy == 0) throw InvalidArgument("linear filter: dimensions must be positive");
  as_matrix(p.A, p.dx, p.dx, "A");
  as_matrix(p.H, p.dy, p.dx, "H");
  as_matrix(p.sigma, p.dx, p.db, "sigma");
  as_matrix(p.f, p.dx, p.dy, "f");
  as_matrix(p.m0, p.dx, 1, "m0");
  const Matrix P0 = as_matrix(p.P0, p.dx, p.dx, "P0");
  if ((P0 - P0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + P0.cwiseAbs().maxCoeff()))
    throw InvalidArgument("linear filter: P0 must be symmetric");
}

}  // namespace

LinearFilterParams scalar_linear_params(double A, double H, double sigma, double f, double m0,
                                        double P0) {
  return LinearFilterParams{1, 1, 1, {A}, {H}, {sigma}, {f}, {m0}, {P0}};
}

FilterModel linear_filter_model(const LinearFilterParams& p) {
  check(p);
  FilterModel model;
  const std::size_t dx = p.dx, db = p.db, dy = p.dy;
  model.signal.dx = dx;
  model.signal.db = db;
  model.signal.dy = dy;
  model.signal.drift = [A = p.A, dx](double, std::span<const double> x, const DriverView&,
                                      std::span<double> out) {
    for (std::size_t k = 0; k < dx; ++k) {
      double s = 0.0;
      for (std::size_t m = 0; m < dx; ++m) s += A[k * dx + m] * x[m];
      out[k] = s;
    }
  };
  model.signal.brownian = [s = p.sigma](double, std::span<const double>, const DriverView&,
                                        std::span<double> out) { std::copy(s.begin(), s.end(), out.begin()); };
  model.signal.rough = [f = p.f](double, std::span<const double>, const DriverView&,
                                 std::span<double> out) { std::copy(f.begin(), f.end(), out.begin()); };
  model.signal.jacobian = [](double, std::span<const double>, const DriverView&, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  model.observation.h = [H = p.H, dx, dy](double, std::span<const double> x, std::span<const double>,
                                          std::span<double> out) {
    for (std::size_t b = 0; b < dy; ++b) {
      double s = 0.0;
      for (std::size_t m = 0; m < dx; ++m) s += H[b * dx + m] * x[m];
      out[b] = s;
    }
  };
  model.observation.dh_dx = [H = p.H](double, std::span<const double>, std::span<const double>,
                                      std::span<double> out) { std::copy(H.begin(), H.end(), out.begin()); };
  model.observation.dh_dy = [](double, std::span<const double>, std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  // Symmetric square root of P0; tiny negative eigenvalues are treated as zero.
  const Matrix P0 = as_matrix(p.P0, dx, dx, "P0");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(P0);
  const Vector root_vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix root = eig.eigenvectors() * root_vals.asDiagonal() * eig.eigenvectors().transpose();
  std::vector<double> L(root.data(), root.data() + dx * dx);
  model.initial = [m0 = p.m0, L, dx](Rng& rng, std::span<double> out) {
    std::vector<double> z(dx);
    for (auto& v : z) v = rng.normal();
    for (std::size_t k = 0; k < dx; ++k) {
      double s = m0[k];
      for (std::size_t m = 0; m < dx; ++m) s += L[k * dx + m] * z[m];
      out[k] = s;
    }
  };
  return model;
}

SignalObservation simulate_signal_observation(const FilterModel& model, const TimeGrid& grid,
                                              std::size_t fine_factor, Seed seed, Measure measure) {
  const RsdeSpec& s = model.signal;
  if (fine_factor == 0) throw InvalidArgument("simulate_signal_observation: fine_factor must be positive");
  if (!s.drift || !s.brownian || !s.rough || !model.initial)
    throw InvalidArgument("simulate_signal_observation: model is incomplete");
  if (measure == Measure::signal && !model.observation.h)
    throw InvalidArgument("simulate_signal_observation: observation function is required");
  const std::size_t dx = s.dx, db = s.db, dy = s.dy;
  const TimeGrid fine = grid.refine(fine_factor);
  const std::size_t n = fine.intervals();
  const BrownianDraw B = sample_brownian(fine, db, derive_seed(seed, "signal-noise"));
  const BrownianDraw W = sample_brownian(fine, dy, derive_seed(seed, "observation"));

  SignalObservation out{fine, dx, dy, std::vector<double>((n + 1) * dx), std::vector<double>((n + 1) * dy, 0.0)};
  Rng rng(derive_seed(seed, "initial"));
  model.initial(rng, std::span<double>(out.signal.data(), dx));
  std::vector<double> x(out.signal.begin(), out.signal.begin() + dx);
  std::vector<double> b(dx), sigma(dx * db), f(dx * dy), h(dy), dY(dy), r(dx);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = fine[j], dt = fine.step(j);
    const DriverView view(&out.grid, out.observation.data(), dy, j);
    const auto y = view.current();
    s.drift(t, x, view, b);
    s.brownian(t, x, view, sigma);
    s.rough(t, x, view, f);
    const auto dw = W.increment(j);
    if (measure == Measure::signal) {
      model.observation.h(t, x, y, h);
      for (std::size_t a = 0; a < dy; ++a) dY[a] = h[a] * dt + dw[a];
    } else {
      std::copy(dw.begin(), dw.end(), dY.begin());
    }
    for (std::size_t a = 0; a < dy; ++a) out.observation[(j + 1) * dy + a] = y[a] + dY[a];
    scheme::euler_step(x, b, sigma, dt, B.increment(j));
    for (std::size_t k = 0; k < dx; ++k) {
      double acc = 0.0;
      for (std::size_t a = 0; a < dy; ++a) acc += f[k * dy + a] * dY[a];
      r[k] = acc;
    }
    scheme::add_rough(x, r);
    if (scheme::diverged(x, s.divergence_bound))
      throw DivergenceError("simulate_signal_observation: signal diverged", j + 1, fine[j + 1]);
    std::copy(x.begin(), x.end(), out.signal.begin() + (j + 1) * dx);
  }
  return out;
}

RoughPath hardwire_bracket(std::span<const double> fine_values, std::size_t dim,
                           const TimeGrid& coarse, std::size_t fine_factor,
                           LiftConvention convention, double alpha) {
  if (dim == 0 || fine_factor == 0) throw InvalidArgument("hardwire_bracket: dimension and fine_factor must be positive");
  if (fine_values.size() != (coarse.intervals() * fine_factor + 1) * dim)
    throw InvalidArgument("hardwire_bracket: fine path does not match the coarse grid");
  const RoughPath geo = geometrize(lift_fine_path(coarse, fine_factor, dim, fine_values, convention, alpha));
  std::vector<double> second(geo.second_level().begin(), geo.second_level().end());
  for (std::size_t i = 0; i < coarse.intervals(); ++i)
    for (std::size_t a = 0; a < dim; ++a) second[(i * dim + a) * dim + a] -= 0.5 * coarse.step(i);
  std::vector<double> first(geo.first_level().begin(), geo.first_level().end());
  return RoughPath(coarse, dim, std::move(first), std::move(second), alpha);
}

namespace {

struct FilterRuns {
  std::size_t nodes = 0;
  std::vector<double> log_weights;  // samples x nodes
  std::vector<double> values;       // samples x nodes x phis
};

FilterRuns run_filter(const FilterModel& model, const RoughPath& rp,
                      std::span<const TestFunction> phis, std::size_t samples, Seed seed,
                      std::size_t fine_factor, bool weighted) {
  if (samples < 2) throw InvalidArgument("rough_filter: at least two samples are required");
  if (phis.empty()) throw InvalidArgument("rough_filter: no test functions");
  if (fine_factor == 0) throw InvalidArgument("rough_filter: fine_factor must be positive");
  if (!model.initial) throw InvalidArgument("rough_filter: initial law is required");
  if (weighted && !model.observation.h) throw InvalidArgument("rough_filter: observation function is required");
  const std::size_t nodes = rp.grid().nodes(), np = phis.size(), dx = model.signal.dx;
  const TimeGrid fine = rp.grid().refine(fine_factor);
  FilterRuns runs{nodes, std::vector<double>(samples * nodes, 0.0), std::vector<double>(samples * nodes * np)};
  parallel_for(samples, [&](std::size_t m) {
    Rng rng(derive_seed(seed, "initial", {m}));
    std::vector<double> x0(dx);
    model.initial(rng, x0);
    const BrownianDraw bm = sample_brownian(fine, model.signal.db, derive_seed(seed, "inner", {m}));
    const SolutionPath sol = solve_rsde(model.signal, rp, bm, x0);
    if (weighted) {
      const auto I = girsanov_exponent(model.observation, sol, rp);
      std::copy(I.begin(), I.end(), runs.log_weights.begin() + m * nodes);
    }
    for (std::size_t i = 0; i < nodes; ++i)
      for (std::size_t q = 0; q < np; ++q) runs.values[(m * nodes + i) * np + q] = phis[q].phi(sol.state(i));
  });
  return runs;
}

FilterEstimate aggregate(const FilterRuns& runs, const RoughPath& rp,
                         std::span<const TestFunction> phis, std::size_t samples) {
  const std::size_t nodes = runs.nodes, np = phis.size();
  FilterEstimate est;
  est.times.assign(rp.grid().times().begin(), rp.grid().times().end());
  for (const auto& p : phis) est.phi_ids.push_back(p.name);
  est.unnormalised.resize(nodes * np);
  est.unnormalised_se.resize(nodes * np);
  est.normalised.resize(nodes * np);
  est.normalised_se.resize(nodes * np);
  est.mass.resize(nodes);
  est.mass_se.resize(nodes);
  std::vector<double> lw(samples), w(samples), pw(samples), dev(samples);
  for (std::size_t i = 0; i < nodes; ++i) {
    for (std::size_t m = 0; m < samples; ++m) {
      double l = runs.log_weights[m * nodes + i];
      if (!std::isfinite(l)) {
        std::ostringstream msg;
        msg << "rough_filter: log-weight of sample " << m << " is not finite at t=" << format_double(est.times[i]);
        throw WeightOverflow(msg.str(), m);
      }
      if (l > kLogWeightClip) {
        l = kLogWeightClip;
        ++est.clipped;
      }
      lw[m] = l;
    }
    const double shift = *std::max_element(lw.begin(), lw.end());
    const double scale = std::exp(shift);
    for (std::size_t m = 0; m < samples; ++m) w[m] = std::exp(lw[m] - shift);
    const SampleSummary ws = summarize(w);
    const double wsum = pairwise_sum(w);
    est.mass[i] = scale * ws.mean;
    est.mass_se[i] = scale * ws.std_error;
    for (std::size_t q = 0; q < np; ++q) {
      for (std::size_t m = 0; m < samples; ++m) pw[m] = runs.values[(m * nodes + i) * np + q] * w[m];
      const SampleSummary s = summarize(pw);
      const std::size_t k = i * np + q;
      est.unnormalised[k] = scale * s.mean;
      est.unnormalised_se[k] = scale * s.std_error;
      est.normalised[k] = est.unnormalised[k] / est.mass[i];
      const double r = pairwise_sum(pw) / wsum;
      for (std::size_t m = 0; m < samples; ++m) {
        const double e = w[m] * (runs.values[(m * nodes + i) * np + q] - r);
        dev[m] = e * e;
      }
      est.normalised_se[k] = std::sqrt(pairwise_sum(dev)) / wsum;
    }
  }
  return est;
}

}  // namespace

FilterEstimate rough_filter(const FilterModel& model, const RoughPath& rp,
                            std::span<const TestFunction> phis, std::size_t samples, Seed seed,
                            std::size_t fine_factor) {
  return aggregate(run_filter(model, rp, phis, samples, seed, fine_factor, true), rp, phis, samples);
}

FilterEstimate prior_estimate(const FilterModel& model, const RoughPath& rp,
                              std::span<const TestFunction> phis, std::size_t samples, Seed seed,
                              std::size_t fine_factor) {
  return aggregate(run_filter(model, rp, phis, samples, seed, fine_factor, false), rp, phis, samples);
}

std::vector<UnitMassRow> unit_mass_check(const FilterModel& model, const TimeGrid& grid,
                                         std::size_t fine_factor, std::size_t samples, Seed seed) {
  if (samples < 2) throw InvalidArgument("unit_mass_check: at least two samples are required");
  const std::size_t nodes = grid.nodes(), dx = model.signal.dx, dy = model.signal.dy;
  std::vector<double> weights(samples * nodes);
  parallel_for(samples, [&](std::size_t m) {
    const Seed s = derive_seed(seed, "unit-mass", {m});
    const auto path = simulate_signal_observation(model, grid, fine_factor, derive_seed(s, "path"));
    const RoughPath rp = hardwire_bracket(path.observation, dy, grid, fine_factor);
    Rng rng(derive_seed(s, "initial"));
    std::vector<double> x0(dx);
    model.initial(rng, x0);
    const BrownianDraw bm = sample_brownian(path.grid, model.signal.db, derive_seed(s, "inner"));
    const auto I = girsanov_exponent(model.observation, solve_rsde(model.signal, rp, bm, x0), rp);
    for (std::size_t i = 0; i < nodes; ++i) weights[m * nodes + i] = std::exp(I[i]);
  });
  std::vector<UnitMassRow> rows;
  std::vector<double> column(samples);
  for (std::size_t i = 0; i < nodes; ++i) {
    for (std::size_t m = 0; m < samples; ++m) column[m] = weights[m * nodes + i];
    const SampleSummary s = summarize(column);
    rows.push_back({grid[i], s.mean, s.std_error, z_score(s.mean, s.std_error, 1.0, 0.0)});
  }
  return rows;
}

namespace {

struct KalmanState {
  Vector m;
  Matrix P;
};

KalmanState kalman_rhs(const KalmanState& s, const Matrix& A, const Matrix& H, const Matrix& Q,
                       const Matrix& f, const Vector& ydot) {
  const Matrix PHt = s.P * H.transpose();
  KalmanState d;
  d.m = A * s.m + f * ydot + PHt * (ydot - H * s.m);
  d.P = A * s.P + s.P * A.transpose() + Q - PHt * PHt.transpose();
  return d;
}

// RK4 along the interpolated observation; `substeps` equal steps per interval.
std::vector<KalmanState> integrate_kalman(const LinearFilterParams& p, const TimeGrid& grid,
                                          std::span<const double> y, std::size_t substeps) {
  const Matrix A = as_matrix(p.A, p.dx, p.dx, "A"), H = as_matrix(p.H, p.dy, p.dx, "H");
  const Matrix S = as_matrix(p.sigma, p.dx, p.db, "sigma"), f = as_matrix(p.f, p.dx, p.dy, "f");
  const Matrix Q = S * S.transpose();
  KalmanState s{as_matrix(p.m0, p.dx, 1, "m0"), as_matrix(p.P0, p.dx, p.dx, "P0")};
  std::vector<KalmanState> out{s};
  const auto dy = static_cast<Eigen::Index>(p.dy);
  auto axpy = [](const KalmanState& a, double c, const KalmanState& d) {
    return KalmanState{a.m + c * d.m, a.P + c * d.P};
  };
  for (std::size_t i = 0; i < grid.intervals(); ++i) {
    const double h = grid.step(i) / static_cast<double>(substeps);
    Vector ydot(dy);
    for (Eigen::Index a = 0; a < dy; ++a)
      ydot[a] = (y[(i + 1) * p.dy + a] - y[i * p.dy + a]) / grid.step(i);
    for (std::size_t k = 0; k < substeps; ++k) {
      const KalmanState k1 = kalman_rhs(s, A, H, Q, f, ydot);
      const KalmanState k2 = kalman_rhs(axpy(s, 0.5 * h, k1), A, H, Q, f, ydot);
      const KalmanState k3 = kalman_rhs(axpy(s, 0.5 * h, k2), A, H, Q, f, ydot);
      const KalmanState k4 = kalman_rhs(axpy(s, h, k3), A, H, Q, f, ydot);
      s.m += h / 6.0 * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m);
      s.P += h / 6.0 * (k1.P + 2.0 * k2.P + 2.0 * k3.P + k4.P);
      s.P = 0.5 * (s.P + s.P.transpose());
    }
    const double size = std::max(s.m.cwiseAbs().maxCoeff(), s.P.cwiseAbs().maxCoeff());
    if (!std::isfinite(size) || size > 1e12 || s.P.diagonal().minCoeff() < -1e-9) {
      std::ostringstream msg;
      msg << "kalman_bucy_oracle: Riccati solution blew up at t=" << format_double(grid[i + 1]);
      throw OracleFailure(msg.str());
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace

KalmanPath kalman_bucy_oracle(const LinearFilterParams& params, const TimeGrid& grid,
                              std::span<const double> observation) {
  check(params);
  if (observation.size() != grid.nodes() * params.dy)
    throw InvalidArgument("kalman_bucy_oracle: observation does not match the grid");
  const auto full = integrate_kalman(params, grid, observation, 1);
  const auto half = integrate_kalman(params, grid, observation, 2);
  const std::size_t dx = params.dx;
  KalmanPath out{grid, dx, {}, {}, {}};
  for (std::size_t i = 0; i < full.size(); ++i) {
    const Matrix& P = full[i].P;
    for (std::size_t k = 0; k < dx; ++k) {
      out.mean.push_back(full[i].m[static_cast<Eigen::Index>(k)]);
      out.mean_bound.push_back(std::abs(full[i].m[static_cast<Eigen::Index>(k)] -
                                        half[i].m[static_cast<Eigen::Index>(k)]));
    }
    out.covariance.insert(out.covariance.end(), P.data(), P.data() + dx * dx);
  }
  return out;
}

ObservationData read_observation_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("observation CSV: missing header");
  std::vector<double> times, values;
  std::size_t dim = 0;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        fields.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw InvalidArgument("observation CSV: bad number on line " + std::to_string(row));
      }
    }
    if (fields.size() < 2) throw InvalidArgument("observation CSV: line " + std::to_string(row) + " has no components");
    if (dim == 0) dim = fields.size() - 1;
    if (fields.size() - 1 != dim)
      throw InvalidArgument("observation CSV: inconsistent column count on line " + std::to_string(row));
    times.push_back(fields[0]);
    values.insert(values.end(), fields.begin() + 1, fields.end());
  }
  if (times.size() < 2) throw InvalidArgument("observation CSV: at least two rows are required");
  if (times.front() != 0.0) throw InvalidArgument("observation CSV: time must start at zero");
  return ObservationData{TimeGrid(std::move(times)), dim, std::move(values)};
}

void write_observation_csv(std::ostream& out, const TimeGrid& grid, std::size_t dim,
                           std::span<const double> values) {
  out << 't';
  for (std::size_t a = 0; a < dim; ++a) out << ",y" << a;
  out << '\n';
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    out << format_double(grid[i]);
    for (std::size_t a = 0; a < dim; ++a) out << ',' << format_double(values[i * dim + a]);
    out << '\n';
  }
}

void write_csv(std::ostream& out, const FilterEstimate& est) {
  out << "time,phi_id,unnormalised,normalised,stderr\n";
  const std::size_t np = est.phi_ids.size();
  for (std::size_t i = 0; i < est.times.size(); ++i)
    for (std::size_t q = 0; q < np; ++q)
      out << format_double(est.times[i]) << ',' << est.phi_ids[q] << ','
          << format_double(est.unnormalised[i * np + q]) << ',' << format_double(est.normalised[i * np + q])
          << ',' << format_double(est.normalised_se[i * np + q]) << '\n';
}

}  // namespace roughkit
