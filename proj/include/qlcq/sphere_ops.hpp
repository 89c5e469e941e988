#pragma once

// Covariant calculus on S^2 for the round metric and for general metrics
// sigma_ab given by coordinate components on a SphereGrid.
//
// Derivatives are always taken of smooth scalars: one-forms and two-tensors
// are mapped to Cartesian ambient components (which are smooth across the
// poles), differentiated spectrally, and projected back.

#include "qlcq/sphere_grid.hpp"

#include <array>

namespace qlcq {

/// Covariant derivative T_ab = nabla_a omega_b of a one-form (not symmetric).
struct CovariantOneForm {
  SphericalField tt, tp, pt, pp;
};

/// Covariant derivative nabla_c T_ab of a symmetric two-tensor, c = theta, phi.
struct CovariantTwoTensor {
  SphericalTwoTensor dth;
  SphericalTwoTensor dph;
};

/// Partial derivatives of a nodal scalar, via spectral differentiation.
SphericalOneForm gradient(const SphereGrid& grid, const SphericalField& f);

/// Batched partial derivatives of the columns of `fields`.
void partials(const SphereGrid& grid, const Eigen::MatrixXd& fields, Eigen::MatrixXd& d_theta,
              Eigen::MatrixXd& d_phi);

/// Round unit-sphere covariant derivatives.
CovariantOneForm round_covariant(const SphereGrid& grid, const SphericalOneForm& w);
CovariantTwoTensor round_covariant(const SphereGrid& grid, const SphericalTwoTensor& t);

/// Round unit-sphere metric components at the nodes.
SphericalTwoTensor round_metric(const SphereGrid& grid, double radius = 1.0);

/// A Riemannian metric on the grid with its derived data: inverse, area
/// density relative to the unit round sphere, and the Christoffel difference
/// tensor D^c_ab = Gamma(sigma)^c_ab - Gamma(round)^c_ab.
class SurfaceMetric {
public:
  SurfaceMetric(GridPtr grid, SphericalTwoTensor sigma);

  static SurfaceMetric round(GridPtr grid, double radius = 1.0);

  const SphereGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const SphericalTwoTensor& sigma() const { return sigma_; }
  const SphericalTwoTensor& inverse() const { return inv_; }
  /// sqrt(det sigma) / sin(theta): ratio to the unit round area density.
  const SphericalField& area_ratio() const { return ratio_; }
  /// Per-node quadrature weights for the sigma area measure.
  const SphericalField& area_weights() const { return dA_; }
  const CovariantTwoTensor& round_derivative() const { return dsigma_; }
  /// D^theta_ab and D^phi_ab.
  const SphericalTwoTensor& christoffel_difference(int upper) const { return D_[upper]; }

  double area() const { return dA_.sum(); }
  double integrate(const SphericalField& f) const { return dA_.dot(f); }

  double norm2(const SphericalOneForm& w, int node) const;
  SphericalOneForm raise(const SphericalOneForm& w) const;

private:
  GridPtr grid_;
  SphericalTwoTensor sigma_, inv_;
  SphericalField ratio_, dA_;
  CovariantTwoTensor dsigma_;
  std::array<SphericalTwoTensor, 2> D_;
};

enum class OperatorKind { gradient, divergence, laplacian, covariant_hessian, rotational_divergence };

SphericalField divergence(const SurfaceMetric& metric, const SphericalOneForm& w);
SphericalField laplacian(const SurfaceMetric& metric, const SphericalField& f);
SphericalTwoTensor hessian(const SurfaceMetric& metric, const SphericalField& f);
/// epsilon^{ab} nabla_b omega_a with the right-handed (theta, phi) orientation.
SphericalField rotational_divergence(const SurfaceMetric& metric, const SphericalOneForm& w);
/// |grad f|^2 = sigma^{ab} d_a f d_b f.
SphericalField gradient_norm2(const SurfaceMetric& metric, const SphericalOneForm& df);

/// Gauss curvature of the metric.
SphericalField gauss_curvature(const SurfaceMetric& metric);

struct PoissonOptions {
  double tolerance = 1e-12;
  int max_iterations = 400;
  double solvability_tolerance = 1e-8;
};

struct PoissonResult {
  SphericalField u;
  double relative_residual = 0.0;
  int iterations = 0;
};

/// Solves Laplacian_sigma u = source with zero sigma-mean of u, by GMRES
/// preconditioned with the round inverse Laplacian.
PoissonResult solve_poisson(const SurfaceMetric& metric, const SphericalField& source,
                            const PoissonOptions& opts = {});

}  // namespace qlcq
