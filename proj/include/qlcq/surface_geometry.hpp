#pragma once

// Physical data of a spacelike 2-sphere in a spacetime: induced metric
// sigma_ab, mean curvature norm |H| and the normal connection one-form
// alpha_H, together with the normal frame they were computed in.

#include "qlcq/sphere_ops.hpp"
#include "qlcq/spacetime.hpp"

#include <vector>

namespace qlcq {

/// Per-node frame in the ambient coordinates.
struct NormalFrame {
  std::vector<Vec4> x;                 // position
  std::array<std::vector<Vec4>, 2> e;  // d x / d theta, d x / d phi
  std::vector<Vec4> u;                 // future timelike unit normal
  std::vector<Vec4> v;                 // outward spacelike unit normal
  std::vector<MetricSample> metric;    // g and dg at the node
};

struct SurfaceGeometry {
  SurfaceMetric metric;
  SphericalField normH;
  SphericalField k, p;  // h = -k v + p u
  SphericalOneForm alphaH;

  const SphericalTwoTensor& sigma() const { return metric.sigma(); }
  const SphereGrid& grid() const { return metric.grid(); }
  const GridPtr& grid_ptr() const { return metric.grid_ptr(); }
};

struct InducedData {
  SurfaceGeometry geometry;
  NormalFrame frame;
};

/// Samples the surface on the grid and computes (sigma, |H|, alpha_H).
/// `frame_rapidity`, if given, boosts the default (u, v) pointwise inside
/// the normal plane before k and p are formed.
InducedData induced_data(const Spacetime& spacetime, const Surface& surface, GridPtr grid,
                         const SphericalField* frame_rapidity = nullptr);

/// Largest violation of g(u,u) = -1, g(v,v) = 1, g(u,v) = 0 and
/// orthogonality of u, v to the tangent vectors.
double frame_orthonormality_error(const NormalFrame& frame);

/// Sup-norm difference of (|H|, alpha_H) between two computations.
double geometry_deviation(const SurfaceGeometry& a, const SurfaceGeometry& b);

/// Recomputes the data in a boosted normal frame and returns the deviation.
double frame_gauge_invariance_check(const Spacetime& spacetime, const Surface& surface, GridPtr grid,
                                    const SphericalField& rapidity);

}  // namespace qlcq
