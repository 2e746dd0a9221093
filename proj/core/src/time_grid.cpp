#include "roughkit/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roughkit/errors.hpp"

namespace roughkit {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw InvalidArgument("TimeGrid: need at least two nodes");
  if (times_.front() != 0.0) throw InvalidArgument("TimeGrid: first node must be 0");
  for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
    if (!(times_[i + 1] > times_[i]) || !std::isfinite(times_[i + 1]))
      throw InvalidArgument("TimeGrid: nodes must be finite and strictly increasing (index " +
                            std::to_string(i + 1) + ")");
  }
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t intervals) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw InvalidArgument("TimeGrid: horizon must be positive");
  if (intervals == 0) throw InvalidArgument("TimeGrid: need at least one interval");
  std::vector<double> t(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i)
    t[i] = horizon * static_cast<double>(i) / static_cast<double>(intervals);
  t.back() = horizon;
  return TimeGrid(std::move(t));
}

double TimeGrid::mesh() const noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < times_.size(); ++i) m = std::max(m, step(i));
  return m;
}

TimeGrid TimeGrid::refine(std::size_t factor) const {
  if (factor == 0) throw InvalidArgument("TimeGrid::refine: factor must be positive");
  if (factor == 1) return *this;
  std::vector<double> t;
  t.reserve(intervals() * factor + 1);
  for (std::size_t i = 0; i < intervals(); ++i) {
    const double a = times_[i];
    const double h = step(i);
    t.push_back(a);
    for (std::size_t j = 1; j < factor; ++j)
      t.push_back(a + h * static_cast<double>(j) / static_cast<double>(factor));
  }
  t.push_back(times_.back());
  return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::coarsen(std::size_t stride) const {
  if (stride == 0) throw InvalidArgument("TimeGrid::coarsen: stride must be positive");
  std::vector<double> t;
  for (std::size_t i = 0; i < times_.size(); i += stride) t.push_back(times_[i]);
  if (t.back() != times_.back()) t.push_back(times_.back());
  return TimeGrid(std::move(t));
}

bool TimeGrid::is_refined_by(const TimeGrid& fine, std::size_t factor) const noexcept {
  if (factor == 0 || fine.intervals() != intervals() * factor) return false;
  for (std::size_t i = 0; i < nodes(); ++i) {
    const double a = times_[i];
    const double b = fine[i * factor];
    if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) return false;
  }
  return true;
}

TimeGrid make_grid(double horizon, std::int64_t intervals) {
  if (intervals <= 0) throw InvalidArgument("make_grid: N must be positive");
  return TimeGrid::uniform(horizon, static_cast<std::size_t>(intervals));
}

}  // namespace roughkit
