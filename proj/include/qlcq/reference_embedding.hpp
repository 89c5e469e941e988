#pragma once

// Isometric embedding of a convex metric into R^3 (the Weyl problem) and the
// flat-space data |H0|, alpha_H0 of the resulting surface X = (tau, Xhat) in
// Minkowski space.

#include "qlcq/sphere_ops.hpp"

#include <Eigen/Cholesky>

#include <memory>

namespace qlcq {

using Vec4 = Eigen::Vector4d;
using Embedding3 = std::array<SphericalField, 3>;
using Embedding4 = std::array<SphericalField, 4>;

struct WeylOptions {
  /// Stop once the sup-norm metric mismatch, relative to the mean squared
  /// radius, is below this and Newton has stopped improving.
  double tolerance = 1e-10;
  int max_iterations = 50;
  /// When positive, a solve that stagnates above `tolerance` but below this
  /// is returned with converged = false instead of throwing. Used for
  /// intermediate iterates of outer solvers.
  double stagnation_limit = 0.0;
};

/// Gauss-Newton normal matrix at the final iterate; solves the linearized
/// problem  d(dX . dX) = delta_sigma  for dX in the same gauge.
class WeylLinearization {
public:
  WeylLinearization(GridPtr grid, std::array<Eigen::MatrixXd, 2> dX, Eigen::LLT<Eigen::MatrixXd> llt);
  Embedding3 solve(const SphericalTwoTensor& delta_sigma) const;

private:
  GridPtr grid_;
  std::array<Eigen::MatrixXd, 2> dX_;  // nodes x 3, theta and phi derivatives
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

struct WeylResult {
  Embedding3 X;
  double residual = 0.0;  // sup-norm mismatch relative to the mean squared radius
  int iterations = 0;
  bool converged = false;
  std::shared_ptr<const WeylLinearization> linearization;
};

/// Embeds sigma_hat in R^3. Gauge: zero centroid of each component in the
/// parameter measure, and a symmetric matrix of degree-one coefficients
/// (no rigid rotation relative to the coordinate sphere).
/// Throws GeometryError when the Gauss curvature is not positive and
/// SolverError when Newton fails to converge.
WeylResult embed_weyl(const SurfaceMetric& sigma_hat, const WeylOptions& opts = {},
                      const Embedding3* seed = nullptr);

/// Induced metric of a map into R^3 or R^{3,1}.
SphericalTwoTensor induced_metric(const SphereGrid& grid, const Embedding3& X);
SphericalTwoTensor induced_metric(const SphereGrid& grid, const Embedding4& X);

struct ReferenceData {
  SurfaceMetric metric;  // induced by X itself
  SphericalField normH0;
  SphericalOneForm alphaH0;
  SphericalField k0, p0;  // h0 = -k0 v0 + p0 u0
  SphericalField hatK;    // Gauss curvature of the metric of the projection along t0
};

/// Data of X in R^{3,1}, with u0 the normalized projection of t0 to the
/// normal plane and v0 pointing away from the centroid.
ReferenceData reference_data(GridPtr grid, const Embedding4& X, const Vec4& t0 = Vec4(1.0, 0.0, 0.0, 0.0));
ReferenceData reference_data(GridPtr grid, const Embedding3& Xhat, const SphericalField& tau);

}  // namespace qlcq
