#include "qlcq/constraints.hpp"

#include "qlcq/errors.hpp"

#include <cmath>

namespace qlcq {

namespace {

class SpacetimeSlice : public InitialDataSlice {
public:
  explicit SpacetimeSlice(SpacetimePtr st) : st_(std::move(st)) {}

  Mat3 metric(const Vec3& x) const override {
    return st_->metric(Vec4(0.0, x[0], x[1], x[2])).block<3, 3>(1, 1);
  }

  Mat3 extrinsic_curvature(const Vec3& x) const override {
    const MetricSample s = st_->sample(Vec4(0.0, x[0], x[1], x[2]));
    const Mat3 g = s.g.block<3, 3>(1, 1);
    const Mat3 ginv = g.inverse();
    const Vec3 beta = s.g.block<3, 1>(1, 0);
    const double N = std::sqrt(beta.dot(ginv * beta) - s.g(0, 0));
    // spatial Christoffels of the first kind lowered by ginv
    std::array<Mat3, 3> G;
    for (int k = 0; k < 3; ++k) {
      G[k].setZero();
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int l = 0; l < 3; ++l)
            G[k](i, j) += 0.5 * ginv(k, l) *
                          (s.dg[i + 1](l + 1, j + 1) + s.dg[j + 1](l + 1, i + 1) - s.dg[l + 1](i + 1, j + 1));
    }
    Mat3 K;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double Db = s.dg[i + 1](j + 1, 0) + s.dg[j + 1](i + 1, 0);
        for (int k = 0; k < 3; ++k) Db -= 2.0 * G[k](i, j) * beta[k];
        K(i, j) = (Db - s.dg[0](i + 1, j + 1)) / (2.0 * N);
      }
    return K;
  }

  double excluded_radius() const override { return st_->excluded_radius(); }
  double length_scale() const override { return std::max(1.0, st_->params().mass); }

private:
  SpacetimePtr st_;
};

class ArtificialSlice : public InitialDataSlice {
public:
  Mat3 metric(const Vec3&) const override { return Mat3::Identity(); }
  Mat3 extrinsic_curvature(const Vec3& x) const override { return Mat3::Identity() / x.squaredNorm(); }
  double excluded_radius() const override { return 0.0; }
};

// Partial derivative d/dx^dir of a matrix-valued function: fourth-order
// central stencil at steps h and h/2, combined by Richardson.
template <class F>
Mat3 derivative(const F& f, const Vec3& x, int dir, double h) {
  auto stencil = [&](double s) {
    Vec3 a = x, b = x, c = x, d = x;
    a[dir] += s;
    b[dir] -= s;
    c[dir] += 2 * s;
    d[dir] -= 2 * s;
    return Mat3((8.0 * (f(a) - f(b)) - (f(c) - f(d))) / (12.0 * s));
  };
  const Mat3 coarse = stencil(h), fine = stencil(0.5 * h);
  return (16.0 * fine - coarse) / 15.0;
}

}  // namespace

SlicePtr spacetime_slice(SpacetimePtr spacetime) { return std::make_shared<SpacetimeSlice>(std::move(spacetime)); }

SlicePtr artificial_slice() { return std::make_shared<ArtificialSlice>(); }

ConstraintResidual constraint_residual(const InitialDataSlice& slice, const Vec3& x) {
  if (!x.allFinite()) throw ValidationError("constraint point must be finite");
  const double r = x.norm();
  if (r <= slice.excluded_radius())
    throw ValidationError("constraint point lies inside the excluded ball (|x| = " + std::to_string(r) + ")");
  const double h = 1e-2 * std::max(slice.length_scale(), std::min(r - slice.excluded_radius(), r));

  auto metric = [&](const Vec3& y) { return slice.metric(y); };
  const Mat3 g = slice.metric(x);
  const Mat3 ginv = g.inverse();

  std::array<Mat3, 3> dg;
  for (int k = 0; k < 3; ++k) dg[k] = derivative(metric, x, k, h);

  auto christoffel = [&](const Vec3& y) {
    std::array<Mat3, 3> G;
    const Mat3 gy = slice.metric(y);
    const Mat3 gyinv = gy.inverse();
    std::array<Mat3, 3> d;
    for (int k = 0; k < 3; ++k) d[k] = derivative(metric, y, k, h);
    for (int k = 0; k < 3; ++k) {
      G[k].setZero();
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int l = 0; l < 3; ++l) G[k](i, j) += 0.5 * gyinv(k, l) * (d[i](l, j) + d[j](l, i) - d[l](i, j));
    }
    return G;
  };
  const std::array<Mat3, 3> G = christoffel(x);

  // dG[m][k](i,j) = d_m Gamma^k_ij
  std::array<std::array<Mat3, 3>, 3> dG;
  for (int k = 0; k < 3; ++k)
    for (int m = 0; m < 3; ++m)
      dG[m][k] = derivative([&](const Vec3& y) { return christoffel(y)[k]; }, x, m, h);

  double R = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double Ric = 0.0;
      for (int k = 0; k < 3; ++k) {
        Ric += dG[k][k](i, j) - dG[j][k](i, k);
        for (int l = 0; l < 3; ++l) Ric += G[k](k, l) * G[l](i, j) - G[k](j, l) * G[l](i, k);
      }
      R += ginv(i, j) * Ric;
    }

  const Mat3 K = slice.extrinsic_curvature(x);
  const double trK = (ginv * K).trace();
  const Mat3 Kup = ginv * K * ginv;
  const double K2 = (Kup.cwiseProduct(K)).sum();

  ConstraintResidual out;
  out.hamiltonian = R + trK * trK - K2;

  auto P = [&](const Vec3& y) {
    const Mat3 gy = slice.metric(y);
    const Mat3 Ky = slice.extrinsic_curvature(y);
    return Mat3(Ky - (gy.inverse() * Ky).trace() * gy);
  };
  const Mat3 P0 = P(x);
  std::array<Mat3, 3> dP;
  for (int k = 0; k < 3; ++k) dP[k] = derivative(P, x, k, h);
  for (int j = 0; j < 3; ++j) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) {
        double cov = dP[k](i, j);
        for (int l = 0; l < 3; ++l) cov -= G[l](k, i) * P0(l, j) + G[l](k, j) * P0(i, l);
        s += ginv(i, k) * cov;
      }
    out.momentum[j] = s;
  }
  return out;
}

}  // namespace qlcq
