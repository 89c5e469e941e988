#pragma once

// Analytic spacetimes in Cartesian-like coordinates (t, x, y, z) and the
// spacelike 2-surfaces we place in them.

#include "qlcq/dual.hpp"

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace qlcq {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

template <class T>
using Array4 = std::array<T, 4>;
template <class T>
using Array44 = std::array<std::array<T, 4>, 4>;

/// Metric and its first partial derivatives at a point; dg[l](m, n) = d_l g_mn.
struct MetricSample {
  Mat4 g;
  std::array<Mat4, 4> dg;

  /// Christoffel symbols of the second kind, gamma[m](n, l) = Gamma^m_nl.
  std::array<Mat4, 4> christoffel() const;
};

struct SpacetimeParams {
  double mass = 1.0;
  double spin = 0.0;
  /// Rapidity of the coordinate boost; the source moves along +x.
  double rapidity = 0.0;
  /// Spatial position of the source in the new coordinates.
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

class Surface;

/// Closed-form Lorentzian metric g_mn(x) with exact first derivatives.
class Spacetime {
public:
  virtual ~Spacetime() = default;

  virtual std::string name() const = 0;
  virtual const SpacetimeParams& params() const = 0;

  /// True when d/dphi = -y d/dx + x d/dy is a Killing field.
  virtual bool axisymmetric() const = 0;

  /// Coordinate radius |x| inside which the metric is not evaluated.
  virtual double excluded_radius() const = 0;

  Mat4 metric(const Vec4& x) const;
  MetricSample sample(const Vec4& x) const;

  /// Coordinate sphere of radius r in the t = 0 slice; for Kerr this is a
  /// Boyer-Lindquist r = const sphere.
  virtual std::shared_ptr<const Surface> coordinate_sphere(double r) const;

protected:
  virtual Array44<double> evaluate(const Array4<double>& x) const = 0;
  virtual Array44<Dual<4>> evaluate(const Array4<Dual<4>>& x) const = 0;
};

using SpacetimePtr = std::shared_ptr<const Spacetime>;

/// Names accepted by catalog_get.
const std::vector<std::string>& catalog_names();

/// Builds a catalog spacetime. Throws ValidationError on an unknown name or
/// parameters outside the domain (|a| >= m for Kerr, non-finite rapidity).
SpacetimePtr catalog_get(const std::string& name, const SpacetimeParams& params = {});

// ---------------------------------------------------------------------------
// Surfaces

/// Embedding data of one surface point: x^mu, d_a x^mu, d_a d_b x^mu, and an
/// outward spatial hint vector used to orient the spacelike normal.
struct SurfacePoint {
  Vec4 x;
  std::array<Vec4, 2> dx;
  std::array<std::array<Vec4, 2>, 2> ddx;
  Vec4 outward;
};

class Surface {
public:
  virtual ~Surface() = default;
  virtual SurfacePoint evaluate(double theta, double phi) const = 0;
  /// True when the surface is invariant under rotations about the z axis.
  virtual bool axisymmetric() const = 0;
};

/// Surface x = center + R(theta) (sqrt(r^2 + a^2) sin t cos p, sqrt(r^2 + a^2)
/// sin t sin p, r cos t) at t = 0, with R(theta) = 1 + eps P2(cos theta),
/// optionally pushed through a Lorentz boost along x of rapidity `boost`
/// (which tilts it into a boosted hyperplane).
struct SphereSpec {
  double radius = 1.0;
  double oblateness = 0.0;  // a: 0 for round coordinate spheres
  double p2_amplitude = 0.0;
  double boost = 0.0;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
};

std::shared_ptr<const Surface> make_sphere(const SphereSpec& spec);

/// Lorentz boost along x with rapidity w (acting on (t, x, y, z)).
Mat4 boost_x(double w);

}  // namespace qlcq
