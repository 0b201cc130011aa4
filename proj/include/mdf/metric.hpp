#pragma once
#include <memory>
#include <vector>

#include "mdf/grid.hpp"

namespace mdf {

/// Inner-edge structure of the spatial slice.
///  - center: smooth origin of an R^3 slice; psi(r0) = 0, dpsi/ds -> 1.
///  - throat: reflection-symmetric minimal sphere (even continuation through
///    r0); psi(r0) > 0, psi_s(r0) = 0. Models the exterior of a symmetric
///    wormhole slice; all volume integrals cover the represented half, which
///    is exactly what the flux identities at the represented end see.
///  - open_inner: bare truncated exterior, one-sided stencils, geometry
///    operators only (no flow/elliptic boundary conditions defined).
enum class Topology { center, throat, open_inner };

const char* to_string(Topology t);

/// g = phi^2 dr^2 + psi^2 dOmega^2 sampled on a radial grid. phi is the
/// radial lapse (ds = phi dr), psi the areal radius.
struct WarpedMetric {
  RadialGrid grid;
  std::vector<double> phi, psi;
  Topology topology = Topology::center;

  int n() const { return grid.n(); }
  const Stencils& stencils() const;
  void refresh_stencils(); // call after any grid change

  Parity psi_parity() const;
  Parity phi_parity() const { return topology == Topology::open_inner ? Parity::none : Parity::even; }
  Parity scalar_parity() const { return topology == Topology::open_inner ? Parity::none : Parity::even; }

  /// Structural checks (sizes, positivity, inner-edge conditions). `strict`
  /// additionally vets asymptotic flatness and center smoothness at
  /// construction tolerances; evolution uses the cheap variant.
  void validate(bool strict = false) const;

  static WarpedMetric make(RadialGrid g, std::vector<double> phi, std::vector<double> psi,
                           Topology topo, bool strict = true);

private:
  mutable std::shared_ptr<const Stencils> sten_;
};

} // namespace mdf
