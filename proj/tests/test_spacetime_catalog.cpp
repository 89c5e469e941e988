#include "qlcq/errors.hpp"
#include "qlcq/spacetime.hpp"

#include <doctest.h>

#include <cmath>

using namespace qlcq;

namespace {

double max_abs(const Mat4& m) { return m.cwiseAbs().maxCoeff(); }

// Central differences of the metric, used only to check the AD derivatives.
Mat4 fd_derivative(const Spacetime& st, Vec4 x, int dir, double h) {
  Vec4 xp = x, xm = x, xp2 = x, xm2 = x;
  xp[dir] += h;
  xm[dir] -= h;
  xp2[dir] += 2 * h;
  xm2[dir] -= 2 * h;
  return (8.0 * (st.metric(xp) - st.metric(xm)) - (st.metric(xp2) - st.metric(xm2))) / (12.0 * h);
}

}  // namespace

TEST_CASE("minkowski is flat") {
  auto st = catalog_get("minkowski", {});
  const MetricSample s = st->sample(Vec4(0.3, 1.0, -2.0, 0.5));
  Mat4 eta = Mat4::Identity();
  eta(0, 0) = -1.0;
  CHECK(max_abs(s.g - eta) == 0.0);
  for (int i = 0; i < 4; ++i) CHECK(max_abs(s.dg[i]) == 0.0);
}

TEST_CASE("isotropic schwarzschild conformal factor") {
  SpacetimeParams p;
  p.mass = 1.0;
  auto st = catalog_get("schwarzschild-isotropic", p);
  const Mat4 g = st->metric(Vec4(0.0, 0.0, 6.0, 8.0));
  const double psi4 = std::pow(1.0 + 1.0 / 20.0, 4);
  CHECK(g(1, 1) == doctest::Approx(psi4).epsilon(1e-15));
  CHECK(g(3, 3) == doctest::Approx(psi4).epsilon(1e-15));
  CHECK(std::abs(g(1, 2)) == 0.0);
  const double lapse = (1.0 - 1.0 / 20.0) / (1.0 + 1.0 / 20.0);
  CHECK(g(0, 0) == doctest::Approx(-lapse * lapse).epsilon(1e-15));
}

TEST_CASE("standard schwarzschild in areal radius") {
  SpacetimeParams p;
  p.mass = 1.5;
  auto st = catalog_get("schwarzschild-standard", p);
  const Vec4 x(0.0, 3.0, 4.0, 12.0);  // r = 13
  const Mat4 g = st->metric(x);
  const double r = 13.0, f = 1.0 - 2.0 * 1.5 / r;
  CHECK(g(0, 0) == doctest::Approx(-f).epsilon(1e-14));
  // radial-radial component in the unit radial direction is 1/f
  const Eigen::Vector3d n = x.tail<3>() / r;
  CHECK(n.dot(g.block<3, 3>(1, 1) * n) == doctest::Approx(1.0 / f).epsilon(1e-13));
  // tangential directions are flat
  const Eigen::Vector3d t = Eigen::Vector3d(4.0, -3.0, 0.0) / 5.0;
  CHECK(t.dot(g.block<3, 3>(1, 1) * t) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("kerr with zero spin equals schwarzschild") {
  SpacetimeParams p;
  p.mass = 1.0;
  auto k = catalog_get("kerr-bl", p);
  auto s = catalog_get("schwarzschild-standard", p);
  const Vec4 x(0.0, 2.0, -3.0, 5.0);
  CHECK(max_abs(k->metric(x) - s->metric(x)) < 1e-15);
}

TEST_CASE("kerr boyer-lindquist components") {
  SpacetimeParams p;
  p.mass = 1.0;
  p.spin = 0.6;
  auto st = catalog_get("kerr-bl", p);
  // Point at r = 5, theta = 1.1, phi = 0.4.
  const double r = 5.0, th = 1.1, ph = 0.4, a = 0.6, m = 1.0;
  const double rho = std::sqrt(r * r + a * a);
  const Vec4 x(0.0, rho * std::sin(th) * std::cos(ph), rho * std::sin(th) * std::sin(ph), r * std::cos(th));
  const Mat4 g = st->metric(x);
  const double Sigma = r * r + a * a * std::cos(th) * std::cos(th);
  CHECK(g(0, 0) == doctest::Approx(-(1.0 - 2.0 * m * r / Sigma)).epsilon(1e-14));
  // coordinate basis vector d/dphi = (-y, x, 0)
  Eigen::Vector4d dphi(0.0, -x[2], x[1], 0.0);
  const double s2 = std::sin(th) * std::sin(th);
  const double gphph = (r * r + a * a + 2 * m * r * a * a * s2 / Sigma) * s2;
  CHECK(dphi.dot(g * dphi) == doctest::Approx(gphph).epsilon(1e-13));
  Eigen::Vector4d dt(1.0, 0.0, 0.0, 0.0);
  CHECK(dt.dot(g * dphi) == doctest::Approx(-2 * m * r * a * s2 / Sigma).epsilon(1e-13));
  // d/dr at fixed angles
  Eigen::Vector4d dr(0.0, r / rho * std::sin(th) * std::cos(ph), r / rho * std::sin(th) * std::sin(ph), std::cos(th));
  const double Delta = r * r - 2 * m * r + a * a;
  CHECK(dr.dot(g * dr) == doctest::Approx(Sigma / Delta).epsilon(1e-13));
  // d/dtheta
  Eigen::Vector4d dth(0.0, rho * std::cos(th) * std::cos(ph), rho * std::cos(th) * std::sin(ph), -r * std::sin(th));
  CHECK(dth.dot(g * dth) == doctest::Approx(Sigma).epsilon(1e-13));
  CHECK(std::abs(dth.dot(g * dr)) < 1e-13);
}

TEST_CASE("automatic derivatives match finite differences") {
  SpacetimeParams p;
  p.mass = 1.0;
  p.spin = 0.7;
  const Vec4 x(0.2, 2.5, -1.5, 3.0);
  for (const auto& name : {"kerr-bl", "schwarzschild-isotropic"}) {
    SpacetimeParams q = p;
    if (std::string(name) != "kerr-bl") {
      q.spin = 0.0;
      q.rapidity = 0.4;
      q.translation = Eigen::Vector3d(0.3, 0.1, -0.2);
    }
    auto st = catalog_get(name, q);
    const MetricSample s = st->sample(x);
    CHECK(max_abs(s.g - st->metric(x)) < 1e-15);
    for (int d = 0; d < 4; ++d) CHECK(max_abs(s.dg[d] - fd_derivative(*st, x, d, 1e-3)) < 1e-9);
  }
}

TEST_CASE("kerr is regular on the axis") {
  SpacetimeParams p;
  p.mass = 1.0;
  p.spin = 0.5;
  auto st = catalog_get("kerr-bl", p);
  const MetricSample s = st->sample(Vec4(0.0, 0.0, 0.0, 4.0));
  CHECK(s.g.allFinite());
  for (int d = 0; d < 4; ++d) CHECK(s.dg[d].allFinite());
}

TEST_CASE("boost and translation act as coordinate changes") {
  SpacetimeParams p;
  p.mass = 1.0;
  p.rapidity = 0.3;
  p.translation = Eigen::Vector3d(0.5, -0.2, 0.1);
  auto moving = catalog_get("schwarzschild-isotropic", p);
  SpacetimeParams q;
  q.mass = 1.0;
  auto rest = catalog_get("schwarzschild-isotropic", q);
  const Mat4 L = boost_x(-p.rapidity);
  const Vec4 x(0.4, 3.0, 2.0, -1.0);
  Vec4 xb = L * x;
  xb.tail<3>() -= p.translation;
  const Mat4 expect = L.transpose() * rest->metric(xb) * L;
  CHECK(max_abs(moving->metric(x) - expect) < 1e-14);

  // boosted flat space is still flat
  SpacetimeParams f;
  f.rapidity = 0.8;
  auto flat = catalog_get("minkowski-boosted-slice", f);
  Mat4 eta = Mat4::Identity();
  eta(0, 0) = -1.0;
  CHECK(max_abs(flat->metric(x) - eta) < 1e-14);
}

TEST_CASE("catalog validation") {
  SpacetimeParams p;
  p.mass = 1.0;
  p.spin = 1.1;
  CHECK_THROWS_AS(catalog_get("kerr-bl", p), ValidationError);
  p.spin = 1.0;
  CHECK_THROWS_AS(catalog_get("kerr-bl", p), ValidationError);
  p.spin = 0.0;
  p.rapidity = std::nan("");
  CHECK_THROWS_AS(catalog_get("schwarzschild-isotropic", p), ValidationError);
  CHECK_THROWS_AS(catalog_get("reissner-nordstrom", {}), ValidationError);
  for (const auto& n : catalog_names()) CHECK_NOTHROW(catalog_get(n, {}));
}

TEST_CASE("sphere surface jets") {
  SphereSpec spec;
  spec.radius = 3.0;
  spec.oblateness = 0.5;
  spec.p2_amplitude = 0.1;
  spec.center = Eigen::Vector3d(0.2, 0.0, -0.1);
  auto surf = make_sphere(spec);
  const double th = 0.9, ph = 2.1, h = 1e-4;
  const SurfacePoint p = surf->evaluate(th, ph);
  auto at = [&](double t, double f) { return surf->evaluate(t, f).x; };
  const Vec4 dth = (at(th + h, ph) - at(th - h, ph)) / (2 * h);
  const Vec4 dph = (at(th, ph + h) - at(th, ph - h)) / (2 * h);
  CHECK((p.dx[0] - dth).norm() < 1e-7);
  CHECK((p.dx[1] - dph).norm() < 1e-7);
  const Vec4 dtt = (at(th + h, ph) - 2 * p.x + at(th - h, ph)) / (h * h);
  const Vec4 dtp = (at(th + h, ph + h) - at(th + h, ph - h) - at(th - h, ph + h) + at(th - h, ph - h)) / (4 * h * h);
  CHECK((p.ddx[0][0] - dtt).norm() < 1e-5);
  CHECK((p.ddx[0][1] - dtp).norm() < 1e-5);
  CHECK((p.ddx[1][0] - dtp).norm() < 1e-5);
  CHECK(p.outward.tail<3>().dot(p.x.tail<3>() - spec.center) > 0.0);
}
