#include "mdf/grid.hpp"

#include <cmath>

#include "mdf/errors.hpp"
#include "mdf/parallel.hpp"

namespace mdf {

RadialGrid RadialGrid::uniform(int n, double r0, double r1) {
  if (n < 4) fail(ErrorCode::BadGrid, "need at least 4 nodes");
  RadialGrid g;
  g.r.resize(n);
  const double h = (r1 - r0) / (n - 1);
  for (int i = 0; i < n; ++i) g.r[i] = r0 + h * i;
  g.r.back() = r1;
  g.validate();
  return g;
}

RadialGrid RadialGrid::sinh_graded(int n, double r0, double r1, double alpha) {
  if (alpha == 0.0) return uniform(n, r0, r1);
  if (n < 4) fail(ErrorCode::BadGrid, "need at least 4 nodes");
  RadialGrid g;
  g.r.resize(n);
  const double L = r1 - r0, s = std::sinh(alpha);
  for (int i = 0; i < n; ++i) {
    const double xi = (double)i / (n - 1);
    g.r[i] = r0 + L * std::sinh(alpha * xi) / s;
  }
  g.r.back() = r1;
  g.validate();
  return g;
}

void RadialGrid::validate() const {
  if (n() < 4) fail(ErrorCode::BadGrid, "need at least 4 nodes");
  for (int i = 1; i < n(); ++i)
    if (!(r[i] > r[i - 1])) fail(ErrorCode::BadGrid, "r must be strictly increasing");
  if (!std::isfinite(r.front()) || !std::isfinite(r.back()))
    fail(ErrorCode::BadGrid, "non-finite coordinates");
}

std::vector<double> fd_weights(double t, const std::vector<double>& x, int m) {
  // Fornberg 1988, weights for derivatives 0..m at t; returns the m-th row.
  const int nn = (int)x.size();
  std::vector<double> c((size_t)nn * (m + 1), 0.0);
  auto C = [&](int i, int j) -> double& { return c[(size_t)i * (m + 1) + j]; };
  double c1 = 1.0, c4 = x[0] - t;
  C(0, 0) = 1.0;
  for (int i = 1; i < nn; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - t;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) C(i, k) = c1 * (k * C(i - 1, k - 1) - c5 * C(i - 1, k)) / c2;
        C(i, 0) = -c1 * c5 * C(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) C(j, k) = (c4 * C(j, k) - k * C(j, k - 1)) / c3;
      C(j, 0) = c4 * C(j, 0) / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(nn);
  for (int i = 0; i < nn; ++i) w[i] = C(i, m);
  return w;
}

Stencils::Stencils(const RadialGrid& g) : n_(g.n()) {
  g.validate();
  const auto& r = g.r;
  c1_.resize(n_);
  c2_.resize(n_);
  for (int i = 1; i + 1 < n_; ++i) {
    const double hm = r[i] - r[i - 1], hp = r[i + 1] - r[i];
    const double d = hm * hp * (hm + hp);
    c1_[i] = {-hp * hp / d, (hp * hp - hm * hm) / d, hm * hm / d};
    c2_[i] = {2 * hp / d, -2 * (hm + hp) / d, 2 * hm / d};
  }

  auto take3 = [](const std::vector<double>& w) { return std::array<double, 3>{w[0], w[1], w[2]}; };
  auto take4 = [](const std::vector<double>& w) { return std::array<double, 4>{w[0], w[1], w[2], w[3]}; };

  {
    std::vector<double> x0(r.begin(), r.begin() + 3);
    d1_in_none_ = take3(fd_weights(r[0], x0, 1));
    std::vector<double> x1(r.begin(), r.begin() + 4);
    d2_in_none_ = take4(fd_weights(r[0], x1, 2));
  }
  const double h1 = r[1] - r[0];
  d1_in_odd_ = 1.0 / h1;        // (f1-f0)/h1, exact parity closure
  d2_in_even_ = 2.0 / (h1 * h1); // 2(f1-f0)/h1^2

  {
    std::vector<double> xe(r.end() - 3, r.end());
    d1_out_ = take3(fd_weights(r[n_ - 1], xe, 1));
    std::vector<double> xe2(r.end() - 4, r.end());
    d2_out_ = take4(fd_weights(r[n_ - 1], xe2, 2));
  }
}

void Stencils::d1(const std::vector<double>& f, Parity inner, std::vector<double>& out) const {
  out.resize(n_);
  switch (inner) {
    case Parity::even: out[0] = 0.0; break;
    case Parity::odd: out[0] = d1_in_odd_ * (f[1] - f[0]); break;
    case Parity::none:
      out[0] = d1_in_none_[0] * f[0] + d1_in_none_[1] * f[1] + d1_in_none_[2] * f[2];
      break;
  }
  par::parallel_for((size_t)(n_ - 2), [&](size_t k) {
    const size_t i = k + 1;
    out[i] = c1_[i][0] * f[i - 1] + c1_[i][1] * f[i] + c1_[i][2] * f[i + 1];
  });
  const int m = n_ - 1;
  out[m] = d1_out_[0] * f[m - 2] + d1_out_[1] * f[m - 1] + d1_out_[2] * f[m];
}

void Stencils::d2(const std::vector<double>& f, Parity inner, std::vector<double>& out) const {
  out.resize(n_);
  switch (inner) {
    case Parity::even: out[0] = d2_in_even_ * (f[1] - f[0]); break;
    case Parity::odd: out[0] = 0.0; break;
    case Parity::none:
      out[0] = d2_in_none_[0] * f[0] + d2_in_none_[1] * f[1] + d2_in_none_[2] * f[2] + d2_in_none_[3] * f[3];
      break;
  }
  par::parallel_for((size_t)(n_ - 2), [&](size_t k) {
    const size_t i = k + 1;
    out[i] = c2_[i][0] * f[i - 1] + c2_[i][1] * f[i] + c2_[i][2] * f[i + 1];
  });
  const int m = n_ - 1;
  out[m] = d2_out_[0] * f[m - 3] + d2_out_[1] * f[m - 2] + d2_out_[2] * f[m - 1] + d2_out_[3] * f[m];
}

std::vector<double> Stencils::d1(const std::vector<double>& f, Parity inner) const {
  std::vector<double> out;
  d1(f, inner, out);
  return out;
}

std::vector<double> Stencils::d2(const std::vector<double>& f, Parity inner) const {
  std::vector<double> out;
  d2(f, inner, out);
  return out;
}

const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::BadGrid: return "BadGrid";
    case ErrorCode::NonSmoothCenter: return "NonSmoothCenter";
    case ErrorCode::DegeneratePsi: return "DegeneratePsi";
    case ErrorCode::HorizonInProfile: return "HorizonInProfile";
    case ErrorCode::NonConvergentMass: return "NonConvergentMass";
    case ErrorCode::TailDivergence: return "TailDivergence";
    case ErrorCode::IndefiniteOperator: return "IndefiniteOperator";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NonPositiveW: return "NonPositiveW";
    case ErrorCode::NonPositiveConformalFactor: return "NonPositiveConformalFactor";
    case ErrorCode::CflViolation: return "CflViolation";
    case ErrorCode::NegativePsiInterior: return "NegativePsiInterior";
    case ErrorCode::NoNeckFound: return "NoNeckFound";
    case ErrorCode::CapCurvatureTooHigh: return "CapCurvatureTooHigh";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::BadCheckpoint: return "BadCheckpoint";
    case ErrorCode::Io: return "Io";
  }
  return "UnknownError";
}

} // namespace mdf
