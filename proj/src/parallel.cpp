#include "mdf/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <vector>

#ifdef MDF_HAVE_OPENMP
#include <omp.h>
#endif

namespace mdf::par {

namespace {
std::atomic<int> g_threads{0}; // 0 = library default (all hardware threads)
}

void set_threads(int n) { g_threads.store(n < 0 ? 0 : n); }

int threads() {
#ifdef MDF_HAVE_OPENMP
  int t = g_threads.load();
  return t == 0 ? omp_get_max_threads() : t;
#else
  return 1;
#endif
}

bool parallel_enabled() { return threads() > 1; }

namespace detail {

std::size_t block_count(std::size_t n) { return (n + kReduceBlock - 1) / kReduceBlock; }

void run_indexed(std::size_t n, const std::function<void(std::size_t)>& body) {
#ifdef MDF_HAVE_OPENMP
  const int nt = threads();
#pragma omp parallel for schedule(static) num_threads(nt)
  for (long long i = 0; i < (long long)n; ++i) body((std::size_t)i);
#else
  for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

void run_blocked(std::size_t n, const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  const std::size_t nb = block_count(n);
#ifdef MDF_HAVE_OPENMP
  if (parallel_enabled() && nb > 1) {
    const int nt = threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (long long b = 0; b < (long long)nb; ++b) {
      const std::size_t lo = (std::size_t)b * kReduceBlock;
      body((std::size_t)b, lo, std::min(lo + kReduceBlock, n));
    }
    return;
  }
#endif
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t lo = b * kReduceBlock;
    body(b, lo, std::min(lo + kReduceBlock, n));
  }
}

} // namespace detail

double serial_blocked_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
  // Same blocking as the parallel path so both give bitwise-equal results.
  const std::size_t nb = detail::block_count(n);
  double total = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t lo = b * kReduceBlock, hi = std::min(lo + kReduceBlock, n);
    double part = 0.0;
    for (std::size_t i = lo; i < hi; ++i) part += term(i);
    total += part;
  }
  return total;
}

double blocked_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
  if (!parallel_enabled() || n < 2 * kReduceBlock) return serial_blocked_sum(n, term);
  const std::size_t nb = detail::block_count(n);
  std::vector<double> parts(nb, 0.0);
  detail::run_blocked(n, [&](std::size_t b, std::size_t lo, std::size_t hi) {
    double part = 0.0;
    for (std::size_t i = lo; i < hi; ++i) part += term(i);
    parts[b] = part;
  });
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

double max_reduce(std::size_t n, const std::function<double(std::size_t)>& term) {
  if (n == 0) return -std::numeric_limits<double>::infinity();
  const std::size_t nb = detail::block_count(n);
  std::vector<double> parts(nb, -std::numeric_limits<double>::infinity());
  detail::run_blocked(n, [&](std::size_t b, std::size_t lo, std::size_t hi) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = lo; i < hi; ++i) m = std::max(m, term(i));
    parts[b] = m;
  });
  double m = parts[0];
  for (double p : parts) m = std::max(m, p);
  return m;
}

double min_reduce(std::size_t n, const std::function<double(std::size_t)>& term) {
  return -max_reduce(n, [&](std::size_t i) { return -term(i); });
}

} // namespace mdf::par
