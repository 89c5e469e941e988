#pragma once

// Densities rho and j_a of the quasi-local energy, the energy itself, and the
// Newton-Krylov solver for the optimal isometric embedding equation div j = 0.

#include "qlcq/reference_embedding.hpp"
#include "qlcq/surface_geometry.hpp"

namespace qlcq {

struct DensityFields {
  SphericalField rho;
  SphericalOneForm j;
  SphericalField theta, theta0;
  SphericalField divj;
};

/// All derivatives of tau are taken with respect to the physical metric.
DensityFields densities(const SurfaceGeometry& geom, const ReferenceData& ref, const SphericalField& tau);
SphericalField density_rho(const SurfaceGeometry& geom, const ReferenceData& ref, const SphericalField& tau);
SphericalOneForm momentum_density_j(const SurfaceGeometry& geom, const ReferenceData& ref, const SphericalField& tau);

struct EnergyResult {
  double energy = 0.0;     // the sinh^-1 form
  double identity = 0.0;   // (1/8 pi) int (rho + j . grad tau)
  double deviation = 0.0;  // |energy - identity|
};

EnergyResult energy(const SurfaceGeometry& geom, const ReferenceData& ref, const SphericalField& tau);

/// Embedding X of the surface in R^{3,1} together with the observer t0.
struct EmbeddingState {
  Embedding4 X;
  Vec4 t0 = Vec4(1.0, 0.0, 0.0, 0.0);
  /// tau = -<t0, X>
  SphericalField tau() const;
};

struct OIEOptions {
  double tolerance = 1e-10;  // on R^2 sup of the band-limited part of div j, R the area radius
  int max_iterations = 40;
  int max_krylov = 200;
  WeylOptions weyl;
};

struct OIESolution {
  EmbeddingState embedding;
  ReferenceData reference;
  DensityFields densities;
  EnergyResult energy;
  double residual = 0.0;  // resolved R^2 sup |div j|
  int iterations = 0;
  int krylov_iterations = 0;
  bool converged = false;
  double pointwise_residual = 0.0;  // R^2 sup |div j| on the grid, truncation included
};

/// Solves div j = 0 for tau with t0 = (1, 0, 0, 0). The constant mode of tau
/// is fixed to zero. On nearly flat data the degree-one modes of tau (the
/// boost directions, which are then a kernel) keep their seed values.
/// Throws SolverError when Newton fails and GeometryError when an iterate
/// loses convexity.
OIESolution solve_oie(const SurfaceGeometry& geom, const SphericalField* tau_seed = nullptr,
                      const OIEOptions& opts = {});

struct ReferenceHamiltonian {
  double surface = 0.0;    // over i(Sigma)
  double projected = 0.0;  // over the projection onto the hyperplane orthogonal to t0
};

ReferenceHamiltonian reference_hamiltonian(GridPtr grid, const EmbeddingState& embedding);

}  // namespace qlcq
