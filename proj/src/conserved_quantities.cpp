#include "qlcq/conserved_quantities.hpp"

#include "qlcq/errors.hpp"

#include <cmath>

namespace qlcq {

namespace {

// below this the mass is numerically zero and C is undefined
constexpr double kMinimumMass = 1e-12;

const Mat4& eta() {
  static const Mat4 e = Vec4(-1.0, 1.0, 1.0, 1.0).asDiagonal();
  return e;
}

}  // namespace

EmbeddingState translate(const EmbeddingState& emb, const Vec4& b);

ConservedSet conserved_matrix(const SurfaceMetric& sigma, const EmbeddingState& emb, const DensityFields& d) {
  const SphereGrid& G = sigma.grid();
  for (const auto& x : emb.X) G.check_field(x, "embedding component");
  G.check_field(d.rho, "rho");

  // grad^a X^g
  std::array<SphericalOneForm, 4> up;
  for (int g = 0; g < 4; ++g) up[g] = sigma.raise(gradient(G, emb.X[g]));
  std::array<SphericalField, 4> jX;  // j_a grad^a X^g
  for (int g = 0; g < 4; ++g) jX[g] = d.j.th.cwiseProduct(up[g].th) + d.j.ph.cwiseProduct(up[g].ph);

  ConservedSet s;
  s.t0 = emb.t0;
  s.m = sigma.integrate(d.rho) / (8.0 * M_PI);
  s.p = s.m * emb.t0;
  for (int a = 0; a < 4; ++a)
    for (int g = a + 1; g < 4; ++g) {
      const SphericalField f = 0.5 * d.rho.cwiseProduct(emb.X[a] * emb.t0[g] - emb.X[g] * emb.t0[a]) +
                               0.5 * (emb.X[a].cwiseProduct(jX[g]) - emb.X[g].cwiseProduct(jX[a]));
      s.Phi(a, g) = -sigma.integrate(f) / (8.0 * M_PI);
      s.Phi(g, a) = -s.Phi(a, g);
    }
  return s;
}

EmbeddingState anchor_to_coordinates(const EmbeddingState& emb, const InducedData& data) {
  const SphereGrid& G = data.geometry.grid();
  const NormalFrame& frame = data.frame;
  for (const auto& x : emb.X) G.check_field(x, "embedding component");
  const Eigen::VectorXd& w = G.weights();
  Vec4 shift = Vec4::Zero();
  for (int i = 0; i < G.size(); ++i) {
    const Vec4 xi(emb.X[0][i], emb.X[1][i], emb.X[2][i], emb.X[3][i]);
    shift += w[i] * (frame.x[i] - xi);
  }
  return translate(emb, shift / (4.0 * M_PI));
}

ConservedSet conserved_matrix(const InducedData& data, const OIESolution& sol) {
  return conserved_matrix(data.geometry.metric, anchor_to_coordinates(sol.embedding, data), sol.densities);
}

void check_lorentz(const Mat4& L) {
  if (!L.allFinite() || (L.transpose() * eta() * L - eta()).cwiseAbs().maxCoeff() > 1e-12)
    throw ValidationError("matrix is not a Lorentz transformation");
}

ConservedSet lorentz_act(const ConservedSet& set, const Mat4& L) {
  check_lorentz(L);
  ConservedSet out = set;
  out.p = L * set.p;
  out.t0 = L * set.t0;
  out.Phi = L * set.Phi * L.transpose();
  out.Phi = 0.5 * (out.Phi - out.Phi.transpose()).eval();
  return out;
}

EmbeddingState lorentz_act(const EmbeddingState& emb, const Mat4& L) {
  check_lorentz(L);
  EmbeddingState out;
  for (int a = 0; a < 4; ++a) {
    out.X[a] = SphericalField::Zero(emb.X[0].size());
    for (int b = 0; b < 4; ++b) out.X[a] += L(a, b) * emb.X[b];
  }
  out.t0 = L * emb.t0;
  return out;
}

ConservedSet translate(const ConservedSet& set, const Vec4& b) {
  ConservedSet out = set;
  out.Phi += 0.5 * (set.p * b.transpose() - b * set.p.transpose());
  return out;
}

EmbeddingState translate(const EmbeddingState& emb, const Vec4& b) {
  EmbeddingState out = emb;
  for (int a = 0; a < 4; ++a) out.X[a] = emb.X[a].array() + b[a];
  return out;
}

Mat4 boost_to(const Vec4& u) {
  const double n = -u[0] * u[0] + u.tail<3>().squaredNorm();
  if (std::abs(n + 1.0) > 1e-10 || u[0] <= 0.0) throw ValidationError("boost target must be a future unit timelike vector");
  Mat4 L;
  L(0, 0) = u[0];
  L.block<1, 3>(0, 1) = u.tail<3>().transpose();
  L.block<3, 1>(1, 0) = u.tail<3>();
  L.block<3, 3>(1, 1) = Eigen::Matrix3d::Identity() + u.tail<3>() * u.tail<3>().transpose() / (1.0 + u[0]);
  return L;
}

Mat4 fit_observer_boost(const EmbeddingState& emb) {
  const int n = static_cast<int>(emb.X[0].size());
  Eigen::MatrixXd A(n, 4);
  for (int j = 0; j < 3; ++j) A.col(j) = emb.X[j + 1];
  A.col(3).setOnes();
  const SphericalField tau = emb.tau();
  const Eigen::Vector4d c = A.colPivHouseholderQr().solve(tau);
  const Eigen::Vector3d v = c.head<3>();
  if (!(v.norm() < 1.0)) throw GeometryError("fitted observer velocity is not subluminal");
  const double gamma = 1.0 / std::sqrt(1.0 - v.squaredNorm());
  Vec4 u;
  u << gamma, gamma * v;
  // B(v) maps (0, Y) to (gamma v.Y, ...): u is the image of (1, 0, 0, 0)
  return boost_to(u);
}

AngularMomentumCenter contract_J_C(const Mat4& P, const Mat4& L, double m) {
  check_lorentz(L);
  const Mat4 Llow = L * eta();  // L_{a g} = L_a^n eta_{n g}
  AngularMomentumCenter out;
  for (int i = 1; i <= 3; ++i) {
    double c = 0.0;
    for (int g = 0; g < 4; ++g) c += P(i, g) * Llow(0, g) + P(0, g) * Llow(i, g);
    out.C[i - 1] = c / m;
    const int j = i % 3 + 1, k = (i + 1) % 3 + 1;
    double J = 0.0;
    for (int g = 0; g < 4; ++g) J += P(j, g) * Llow(k, g) - P(k, g) * Llow(j, g);
    out.J[i - 1] = 0.0 - J;
  }
  return out;
}

AngularMomentumCenter extract_J_C(const ConservedSet& set) {
  if (!(set.m > kMinimumMass)) throw ValidationError("center of mass is undefined for non-positive mass");
  return contract_J_C(set.Phi, boost_to(set.p / set.m), set.m);
}

double komar_angular_momentum(const Spacetime& st, const Surface& surface, GridPtr grid) {
  if (!st.axisymmetric()) throw ValidationError("spacetime '" + st.name() + "' is not declared axisymmetric");
  if (!surface.axisymmetric()) throw ValidationError("surface is not axisymmetric");
  const InducedData d = induced_data(st, surface, grid);
  const SphereGrid& G = *grid;
  SphericalField f(G.size());
  for (int i = 0; i < G.size(); ++i) {
    const MetricSample& ms = d.frame.metric[i];
    const Vec4& x = d.frame.x[i];
    const Vec4 xi(0.0, -x[2], x[1], 0.0);
    Mat4 dxi = Mat4::Zero();  // d_mu xi^lambda (row mu)
    dxi(1, 2) = 1.0;
    dxi(2, 1) = -1.0;
    const auto Gam = ms.christoffel();
    // nabla_mu xi_nu = g_{nu l} (d_mu xi^l + Gamma^l_{mu k} xi^k)
    Mat4 D;
    for (int mu = 0; mu < 4; ++mu) {
      Vec4 cov;
      for (int l = 0; l < 4; ++l) cov[l] = dxi(mu, l) + Gam[l].row(mu).dot(xi);
      D.row(mu) = (ms.g * cov).transpose();
    }
    f[i] = d.frame.u[i].dot(D * d.frame.v[i]);
  }
  return -d.geometry.metric.integrate(f) / (8.0 * M_PI);
}

}  // namespace qlcq
