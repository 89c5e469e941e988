#pragma once

// Initial data (g_ij, k_ij) on R^3 minus a ball, and the vacuum constraint
// residuals R(g) + (tr k)^2 - |k|^2 and div(k - (tr k) g).

#include "qlcq/spacetime.hpp"

namespace qlcq {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

class InitialDataSlice {
public:
  virtual ~InitialDataSlice() = default;
  virtual Mat3 metric(const Vec3& x) const = 0;
  virtual Mat3 extrinsic_curvature(const Vec3& x) const = 0;
  /// Points with |x| <= excluded_radius() are outside the domain.
  virtual double excluded_radius() const = 0;
  /// Length scale used to size finite-difference steps.
  virtual double length_scale() const { return 1.0; }
};

using SlicePtr = std::shared_ptr<const InitialDataSlice>;

/// The t = 0 slice of a catalog spacetime.
///   k_ij = (D_i beta_j + D_j beta_i - d_t g_ij) / (2N)
SlicePtr spacetime_slice(SpacetimePtr spacetime);

/// Flat metric with k_ij = delta_ij / r^2; violates the momentum constraint.
SlicePtr artificial_slice();

struct ConstraintResidual {
  double hamiltonian = 0.0;
  Vec3 momentum = Vec3::Zero();
};

/// Derivatives of the data are taken by fourth-order central differences
/// with one Richardson step.
ConstraintResidual constraint_residual(const InitialDataSlice& slice, const Vec3& x);

}  // namespace qlcq
