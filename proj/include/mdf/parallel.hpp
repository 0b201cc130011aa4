#pragma once
#include <cstddef>
#include <functional>

namespace mdf::par {

/// Runtime switch between the OpenMP kernel path and the serial reference
/// path. Thread count 1 (or a build without OpenMP) selects the reference
/// implementation; results are bitwise identical either way: pointwise maps
/// are order-independent and reductions use fixed-size blocked partial sums.
void set_threads(int n);
int threads();
bool parallel_enabled();

inline constexpr std::size_t kReduceBlock = 1024;

namespace detail {
void run_indexed(std::size_t n, const std::function<void(std::size_t)>& body);
void run_blocked(std::size_t n, const std::function<void(std::size_t, std::size_t, std::size_t)>& body);
std::size_t block_count(std::size_t n);
} // namespace detail

/// Serial reference loop. Kept separate (not just threads==1) so tests and the
/// benchmark can call it explicitly.
template <class F>
void serial_for(std::size_t n, F&& f) {
  for (std::size_t i = 0; i < n; ++i) f(i);
}

template <class F>
void parallel_for(std::size_t n, F&& f) {
  if (!parallel_enabled() || n < 2 * kReduceBlock) {
    serial_for(n, f);
    return;
  }
  detail::run_indexed(n, std::function<void(std::size_t)>(std::forward<F>(f)));
}

/// Deterministic sum: per-block partials (block size fixed) combined in block
/// order, so the result does not depend on the thread count.
double blocked_sum(std::size_t n, const std::function<double(std::size_t)>& term);
double serial_blocked_sum(std::size_t n, const std::function<double(std::size_t)>& term);

double max_reduce(std::size_t n, const std::function<double(std::size_t)>& term);
double min_reduce(std::size_t n, const std::function<double(std::size_t)>& term);

} // namespace mdf::par
