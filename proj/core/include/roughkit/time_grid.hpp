#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace roughkit {

// Strictly increasing partition 0 = t_0 < ... < t_N = T, N >= 1.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times);

  static TimeGrid uniform(double horizon, std::size_t intervals);

  std::size_t intervals() const noexcept { return times_.size() - 1; }
  std::size_t nodes() const noexcept { return times_.size(); }
  double operator[](std::size_t i) const noexcept { return times_[i]; }
  double horizon() const noexcept { return times_.back(); }
  double step(std::size_t i) const noexcept { return times_[i + 1] - times_[i]; }
  double mesh() const noexcept;
  std::span<const double> times() const noexcept { return times_; }

  // Splits every interval into `factor` equal pieces; node i of *this becomes
  // node i * factor of the result.
  TimeGrid refine(std::size_t factor) const;

  // Keeps every `stride`-th node (plus the last one).
  TimeGrid coarsen(std::size_t stride) const;

  // True when `fine` contains every node of *this at stride `factor`.
  bool is_refined_by(const TimeGrid& fine, std::size_t factor) const noexcept;

  bool operator==(const TimeGrid&) const = default;

 private:
  std::vector<double> times_;
};

// Uniform grid t_i = i T / N. Throws InvalidArgument for T <= 0 or N <= 0.
TimeGrid make_grid(double horizon, std::int64_t intervals);

}  // namespace roughkit
