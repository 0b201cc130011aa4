#pragma once
#include <array>
#include <vector>

namespace mdf {

/// Strictly increasing radial coordinate labels. r.front() is the inner edge
/// (a smooth center or a reflection throat depending on the metric's
/// topology); it is 0 for freshly built grids but may be offset after surgery
/// re-coordinatization.
struct RadialGrid {
  std::vector<double> r;

  int n() const { return (int)r.size(); }
  double inner() const { return r.front(); }
  double outer() const { return r.back(); }
  double span() const { return r.back() - r.front(); }

  static RadialGrid uniform(int n, double r0, double r1);
  /// sinh-graded: node i at r0 + span*sinh(alpha*i/(n-1))/sinh(alpha), so the
  /// spacing is ~alpha/sinh(alpha) of uniform near r0 and grows smoothly
  /// outward. alpha = 0 reduces to uniform.
  static RadialGrid sinh_graded(int n, double r0, double r1, double alpha);

  void validate() const; // BadGrid on non-monotone / too small
};

/// Finite-difference weights for the m-th derivative at point t from the
/// given nodes (Fornberg's algorithm, exact for arbitrary spacing).
std::vector<double> fd_weights(double t, const std::vector<double>& x, int m);

/// Inner-edge closure for derivative stencils. `even`/`odd` reflect through
/// the first node (odd is odd-about-(r0, f0)); `none` falls back to one-sided
/// differences. Reflection uses a mirror ghost at r0 - (r1 - r0), which is the
/// exact continuation of the sinh-graded maps (odd about their origin).
enum class Parity { even, odd, none };

/// Precomputed first/second derivative stencils for one grid: 3-point
/// centered rows in the interior, parity ghosts at the inner edge, one-sided
/// second-order rows at the outer edge (4-point for the second derivative).
class Stencils {
public:
  explicit Stencils(const RadialGrid& g);

  void d1(const std::vector<double>& f, Parity inner, std::vector<double>& out) const;
  void d2(const std::vector<double>& f, Parity inner, std::vector<double>& out) const;
  std::vector<double> d1(const std::vector<double>& f, Parity inner) const;
  std::vector<double> d2(const std::vector<double>& f, Parity inner) const;

  int n() const { return n_; }

private:
  int n_;
  // interior rows i = 1..n-2: weights on (i-1, i, i+1)
  std::vector<std::array<double, 3>> c1_, c2_;
  // node-0 rows; parity rows use the mirror ghost, `none` is one-sided
  std::array<double, 3> d1_in_none_{};  // on (0,1,2)
  double d1_in_odd_ = 0;                // on (f1 - f0)
  double d2_in_even_ = 0;               // on (f1 - f0)
  std::array<double, 4> d2_in_none_{};  // on (0,1,2,3)
  // outer edge rows
  std::array<double, 3> d1_out_{};  // on (n-3, n-2, n-1)
  std::array<double, 4> d2_out_{};  // on (n-4, .., n-1)
};

} // namespace mdf
