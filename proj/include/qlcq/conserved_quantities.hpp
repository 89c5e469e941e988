#pragma once

// The antisymmetric matrix Phi^{alpha gamma} of conserved quantities of an
// optimal embedding, its Lorentz and translation laws, angular momentum and
// center of mass, and the Komar angular momentum for comparison.

#include "qlcq/optimal_embedding.hpp"

namespace qlcq {

struct ConservedSet {
  Mat4 Phi = Mat4::Zero();  // antisymmetric
  Vec4 p = Vec4::Zero();    // energy-momentum, parallel to t0
  double m = 0.0;           // (1/8 pi) int rho
  Vec4 t0 = Vec4(1.0, 0.0, 0.0, 0.0);
};

/// Phi^{ag} = -(1/8 pi) int (rho X^[a t0^g] + j_a X^[a grad^a X^g]), with the
/// bracket carrying the factor 1/2. `sigma` is the physical metric.
ConservedSet conserved_matrix(const SurfaceMetric& sigma, const EmbeddingState& embedding,
                              const DensityFields& densities);

/// The embedding is fixed only up to translations. This shifts it so that its
/// round-measure mean matches the mean coordinate position of the surface.
EmbeddingState anchor_to_coordinates(const EmbeddingState& embedding, const InducedData& data);

/// Solved embedding, anchored to the surface coordinates.
ConservedSet conserved_matrix(const InducedData& data, const OIESolution& solution);

/// Throws ValidationError unless L^T eta L = eta to 1e-12.
void check_lorentz(const Mat4& L);

/// p -> L p, Phi -> L Phi L^T, t0 -> L t0.
ConservedSet lorentz_act(const ConservedSet& set, const Mat4& L);
EmbeddingState lorentz_act(const EmbeddingState& embedding, const Mat4& L);

/// Phi -> Phi - b p^T / 2 + p b^T / 2 (the effect of X -> X + b).
ConservedSet translate(const ConservedSet& set, const Vec4& b);
EmbeddingState translate(const EmbeddingState& embedding, const Vec4& b);

/// Pure boost carrying (1, 0, 0, 0) to the unit timelike vector u.
Mat4 boost_to(const Vec4& u);

/// Least-squares fit tau = b . Xhat + c and the boost with velocity b, which
/// maps the flat-slice image of the surface to the solved embedding at
/// leading order.
Mat4 fit_observer_boost(const EmbeddingState& embedding);

struct AngularMomentumCenter {
  Eigen::Vector3d J = Eigen::Vector3d::Zero();
  Eigen::Vector3d C = Eigen::Vector3d::Zero();
};

/// With L the boost carrying (1,0,0,0) to p/m:
///   C^i = (1/m) [Phi^{i g} L_{0 g} + Phi^{0 g} L_{i g}]
///   J_i = Phi^{j g} L_{k g} - Phi^{k g} L_{j g},  (i, j, k) cyclic,
/// with the orientation chosen so that Kerr with a > 0 gives J_z = +ma.
/// Throws ValidationError when m <= 1e-12.
AngularMomentumCenter extract_J_C(const ConservedSet& set);

/// The same contraction with an explicit Lorentz matrix (row 0 is the
/// observer) and mass.
AngularMomentumCenter contract_J_C(const Mat4& Phi, const Mat4& L, double m);

/// Komar angular momentum of the axial Killing field x d_y - y d_x.
/// Throws ValidationError unless both spacetime and surface are axisymmetric.
double komar_angular_momentum(const Spacetime& spacetime, const Surface& surface, GridPtr grid);

}  // namespace qlcq
