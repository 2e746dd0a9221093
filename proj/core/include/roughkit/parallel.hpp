#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace roughkit {

// Worker count used by every Monte Carlo loop in the library. Defaults to the
// number of hardware threads. Results never depend on this value: each task
// writes to its own slot and reductions run afterwards in index order.
void set_thread_count(std::size_t threads);
std::size_t thread_count();

// Runs task(i) for i in [0, count). Exceptions from tasks are rethrown on the
// calling thread (the one with the smallest index wins).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task);

// Fixed-tree pairwise summation; bit-stable for a given input order.
double pairwise_sum(std::span<const double> values);

}  // namespace roughkit
