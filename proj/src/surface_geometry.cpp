#include "qlcq/surface_geometry.hpp"

#include "qlcq/errors.hpp"

#include <cmath>

namespace qlcq {

namespace {

double dot(const Mat4& g, const Vec4& a, const Vec4& b) { return a.dot(g * b); }

// Gamma^mu(a, b) = Gamma^mu_{nu lambda} a^nu b^lambda
Vec4 contract(const std::array<Mat4, 4>& G, const Vec4& a, const Vec4& b) {
  Vec4 out;
  for (int m = 0; m < 4; ++m) out[m] = a.dot(G[m] * b);
  return out;
}

}  // namespace

InducedData induced_data(const Spacetime& spacetime, const Surface& surface, GridPtr grid,
                         const SphericalField* frame_rapidity) {
  const SphereGrid& G = *grid;
  const int n = G.size();
  if (frame_rapidity) G.check_field(*frame_rapidity, "frame rapidity");

  NormalFrame F;
  F.x.resize(n);
  F.e[0].resize(n);
  F.e[1].resize(n);
  F.u.resize(n);
  F.v.resize(n);
  F.metric.resize(n);

  SphericalTwoTensor sigma{SphericalField(n), SphericalField(n), SphericalField(n)};
  SphericalField k(n), p(n);
  std::vector<std::array<Mat4, 4>> gamma(n);

  for (int i = 0; i < n; ++i) {
    const SurfacePoint sp = surface.evaluate(G.theta()[i], G.phi()[i]);
    if (!sp.x.allFinite()) throw GeometryError("surface point is not finite");
    const MetricSample ms = spacetime.sample(sp.x);
    const Mat4& g = ms.g;
    const Vec4& et = sp.dx[0];
    const Vec4& ep = sp.dx[1];

    Eigen::Matrix2d s;
    s << dot(g, et, et), dot(g, et, ep), dot(g, et, ep), dot(g, ep, ep);
    if (!(s(0, 0) > 0.0 && s.determinant() > 0.0))
      throw GeometryError("induced metric is not positive definite at node " + std::to_string(i));
    sigma.tt[i] = s(0, 0);
    sigma.tp[i] = s(0, 1);
    sigma.pp[i] = s(1, 1);
    const Eigen::Matrix2d sinv = s.inverse();

    auto project_normal = [&](const Vec4& w) {
      const Eigen::Vector2d c(dot(g, et, w), dot(g, ep, w));
      const Eigen::Vector2d a = sinv * c;
      return Vec4(w - a[0] * et - a[1] * ep);
    };

    // -grad t is future timelike for every catalog slice
    const Mat4 ginv = g.inverse();
    Vec4 u = project_normal(-ginv.col(0));
    const double uu = dot(g, u, u);
    if (!(uu < 0.0)) throw GeometryError("normal space is not Lorentzian");
    u /= std::sqrt(-uu);

    Vec4 v = project_normal(sp.outward);
    v += dot(g, v, u) * u;
    const double vv = dot(g, v, v);
    if (!(vv > 0.0)) throw GeometryError("outward direction is degenerate in the normal plane");
    v /= std::sqrt(vv);

    if (frame_rapidity) {
      const double b = (*frame_rapidity)[i];
      const Vec4 u2 = std::cosh(b) * u + std::sinh(b) * v;
      const Vec4 v2 = std::sinh(b) * u + std::cosh(b) * v;
      u = u2;
      v = v2;
    }

    gamma[i] = ms.christoffel();
    Vec4 trace = Vec4::Zero();  // sigma^{ab} nabla_a e_b
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        trace += sinv(a, b) * (sp.ddx[a][b] + contract(gamma[i], sp.dx[a], sp.dx[b]));
    k[i] = -dot(g, trace, v);
    p[i] = -dot(g, trace, u);

    F.x[i] = sp.x;
    F.e[0][i] = et;
    F.e[1][i] = ep;
    F.u[i] = u;
    F.v[i] = v;
    F.metric[i] = ms;
  }

  SphericalField normH(n);
  for (int i = 0; i < n; ++i) {
    const double H2 = k[i] * k[i] - p[i] * p[i];
    if (!(H2 > 0.0))
      throw GeometryError("mean curvature vector is not spacelike at node " + std::to_string(i));
    normH[i] = std::sqrt(H2);
  }

  // j = k u - p v; alpha_H(e_a) = g(h, nabla_a j) / |H|^2
  Eigen::MatrixXd J(n, 4);
  for (int i = 0; i < n; ++i) J.row(i) = (k[i] * F.u[i] - p[i] * F.v[i]).transpose();
  Eigen::MatrixXd dJt, dJp;
  partials(G, J, dJt, dJp);

  SphericalOneForm alpha{SphericalField(n), SphericalField(n)};
  for (int i = 0; i < n; ++i) {
    const Vec4 j = J.row(i).transpose();
    const Vec4 h = -k[i] * F.v[i] + p[i] * F.u[i];
    const Mat4& g = F.metric[i].g;
    const double H2 = normH[i] * normH[i];
    const Vec4 Dt = dJt.row(i).transpose() + contract(gamma[i], F.e[0][i], j);
    const Vec4 Dp = dJp.row(i).transpose() + contract(gamma[i], F.e[1][i], j);
    alpha.th[i] = dot(g, h, Dt) / H2;
    alpha.ph[i] = dot(g, h, Dp) / H2;
  }

  InducedData out{SurfaceGeometry{SurfaceMetric(grid, std::move(sigma)), std::move(normH), std::move(k),
                                  std::move(p), std::move(alpha)},
                  std::move(F)};
  return out;
}

double frame_orthonormality_error(const NormalFrame& f) {
  double err = 0.0;
  for (size_t i = 0; i < f.u.size(); ++i) {
    const Mat4& g = f.metric[i].g;
    err = std::max(err, std::abs(dot(g, f.u[i], f.u[i]) + 1.0));
    err = std::max(err, std::abs(dot(g, f.v[i], f.v[i]) - 1.0));
    err = std::max(err, std::abs(dot(g, f.u[i], f.v[i])));
    for (int a = 0; a < 2; ++a) {
      const double scale = std::sqrt(dot(g, f.e[a][i], f.e[a][i]));
      if (scale == 0.0) continue;  // e_phi vanishes only if a node sits on the pole
      err = std::max(err, std::abs(dot(g, f.u[i], f.e[a][i])) / scale);
      err = std::max(err, std::abs(dot(g, f.v[i], f.e[a][i])) / scale);
    }
  }
  return err;
}

double geometry_deviation(const SurfaceGeometry& a, const SurfaceGeometry& b) {
  double d = (a.normH - b.normH).cwiseAbs().maxCoeff();
  d = std::max(d, (a.alphaH.th - b.alphaH.th).cwiseAbs().maxCoeff());
  d = std::max(d, (a.alphaH.ph - b.alphaH.ph).cwiseAbs().maxCoeff());
  return d;
}

double frame_gauge_invariance_check(const Spacetime& spacetime, const Surface& surface, GridPtr grid,
                                    const SphericalField& rapidity) {
  const InducedData a = induced_data(spacetime, surface, grid);
  const InducedData b = induced_data(spacetime, surface, grid, &rapidity);
  return geometry_deviation(a.geometry, b.geometry);
}

}  // namespace qlcq
