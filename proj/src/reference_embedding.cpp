#include "qlcq/reference_embedding.hpp"

#include "qlcq/errors.hpp"

#include <cmath>
#include <cstdio>

namespace qlcq {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Cartesian axis i <-> coefficient index of the degree-one harmonic
// proportional to that coordinate.
constexpr int kAxisHarmonic[3] = {3, 1, 2};

// Residual rows in orthonormal-round normalization, weighted so that the
// squared norm approximates the integral of |delta sigma|^2.
struct Rows {
  VectorXd sw;   // sqrt(w)
  VectorXd sw2;  // sqrt(2 w) / sin
  VectorXd sw3;  // sqrt(w) / sin^2
  explicit Rows(const SphereGrid& G) {
    sw = G.weights().cwiseSqrt();
    sw2 = (2.0 * G.weights()).cwiseSqrt().cwiseQuotient(G.sin_theta());
    sw3 = sw.cwiseQuotient(G.sin_theta().cwiseAbs2());
  }
};

struct State {
  MatrixXd X, Xt, Xp;  // nodes x 3
};

State evaluate(const SphereGrid& G, const MatrixXd& c) {
  return {G.Y() * c, G.dY_dtheta() * c, G.dY_dphi() * c};
}

VectorXd residual(const SphereGrid& G, const Rows& R, const State& s, const SphericalTwoTensor& sigma,
                  const MatrixXd& c, double penalty) {
  const int n = G.size();
  VectorXd r(3 * n + 3);
  r.segment(0, n) = R.sw.cwiseProduct(s.Xt.rowwise().squaredNorm() - sigma.tt);
  r.segment(n, n) = R.sw2.cwiseProduct((s.Xt.cwiseProduct(s.Xp)).rowwise().sum() - sigma.tp);
  r.segment(2 * n, n) = R.sw3.cwiseProduct(s.Xp.rowwise().squaredNorm() - sigma.pp);
  int row = 3 * n;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) r[row++] = penalty * (c(kAxisHarmonic[i], j) - c(kAxisHarmonic[j], i));
  return r;
}

// sup-norm of the metric mismatch in orthonormal-round components
double mismatch(const SphereGrid& G, const State& s, const SphericalTwoTensor& sigma) {
  const VectorXd& st = G.sin_theta();
  double m = (s.Xt.rowwise().squaredNorm() - sigma.tt).cwiseAbs().maxCoeff();
  m = std::max(m, ((s.Xt.cwiseProduct(s.Xp)).rowwise().sum() - sigma.tp).cwiseQuotient(st).cwiseAbs().maxCoeff());
  m = std::max(m, (s.Xp.rowwise().squaredNorm() - sigma.pp).cwiseQuotient(st.cwiseAbs2()).cwiseAbs().maxCoeff());
  return m;
}

// J^T v without forming J: columns are the l >= 1 coefficients of the three
// components.
VectorXd apply_transpose(const SphereGrid& G, const Rows& R, const MatrixXd& Xt, const MatrixXd& Xp,
                         const VectorXd& v) {
  const int n = G.size(), m = G.n_coeffs() - 1;
  const auto vtt = v.segment(0, n), vtp = v.segment(n, n), vpp = v.segment(2 * n, n);
  MatrixXd qt(n, 3), qp(n, 3);
  for (int j = 0; j < 3; ++j) {
    qt.col(j) = 2.0 * R.sw.cwiseProduct(Xt.col(j)).cwiseProduct(vtt) + R.sw2.cwiseProduct(Xp.col(j)).cwiseProduct(vtp);
    qp.col(j) = R.sw2.cwiseProduct(Xt.col(j)).cwiseProduct(vtp) + 2.0 * R.sw3.cwiseProduct(Xp.col(j)).cwiseProduct(vpp);
  }
  const MatrixXd full = G.dY_dtheta().transpose() * qt + G.dY_dphi().transpose() * qp;
  VectorXd out(3 * m);
  for (int j = 0; j < 3; ++j) out.segment(j * m, m) = full.col(j).tail(m);
  return out;
}

MatrixXd normal_matrix(const SphereGrid& G, const Rows& R, const State& s, double penalty) {
  const int n = G.size(), m = G.n_coeffs() - 1;
  const auto Yt = G.dY_dtheta().rightCols(m);
  const auto Yp = G.dY_dphi().rightCols(m);
  MatrixXd J = MatrixXd::Zero(3 * n, 3 * m);
  for (int j = 0; j < 3; ++j) {
    J.block(0, j * m, n, m).noalias() = (2.0 * R.sw.cwiseProduct(s.Xt.col(j))).asDiagonal() * Yt;
    J.block(n, j * m, n, m).noalias() = R.sw2.cwiseProduct(s.Xt.col(j)).asDiagonal() * Yp;
    J.block(n, j * m, n, m).noalias() += R.sw2.cwiseProduct(s.Xp.col(j)).asDiagonal() * Yt;
    J.block(2 * n, j * m, n, m).noalias() = (2.0 * R.sw3.cwiseProduct(s.Xp.col(j))).asDiagonal() * Yp;
  }
  MatrixXd A = MatrixXd::Zero(3 * m, 3 * m);
  A.selfadjointView<Eigen::Lower>().rankUpdate(J.transpose());
  J.resize(0, 0);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      // row: penalty * (c[axis i, comp j] - c[axis j, comp i])
      const int a = j * m + kAxisHarmonic[i] - 1, b = i * m + kAxisHarmonic[j] - 1;
      const double p2 = penalty * penalty;
      A(a, a) += p2;
      A(b, b) += p2;
      A(std::max(a, b), std::min(a, b)) -= p2;
    }
  A.triangularView<Eigen::StrictlyUpper>() = A.transpose();
  return A;
}

VectorXd penalty_transpose(const MatrixXd& c, int m, double penalty) {
  VectorXd g = VectorXd::Zero(3 * m);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const double r = penalty * (c(kAxisHarmonic[i], j) - c(kAxisHarmonic[j], i));
      g[j * m + kAxisHarmonic[i] - 1] += penalty * r;
      g[i * m + kAxisHarmonic[j] - 1] -= penalty * r;
    }
  return g;
}

}  // namespace

WeylLinearization::WeylLinearization(GridPtr grid, std::array<Eigen::MatrixXd, 2> dX, Eigen::LLT<Eigen::MatrixXd> llt)
    : grid_(std::move(grid)), dX_(std::move(dX)), llt_(std::move(llt)) {}

Embedding3 WeylLinearization::solve(const SphericalTwoTensor& ds) const {
  const SphereGrid& G = *grid_;
  G.check_field(ds.tt, "metric variation");
  const int n = G.size(), m = G.n_coeffs() - 1;
  const Rows R(G);
  VectorXd v(3 * n + 3);
  v.segment(0, n) = R.sw.cwiseProduct(ds.tt);
  v.segment(n, n) = R.sw2.cwiseProduct(ds.tp);
  v.segment(2 * n, n) = R.sw3.cwiseProduct(ds.pp);
  const VectorXd dc = llt_.solve(apply_transpose(G, R, dX_[0], dX_[1], v));
  MatrixXd c = MatrixXd::Zero(G.n_coeffs(), 3);
  for (int j = 0; j < 3; ++j) c.col(j).tail(m) = dc.segment(j * m, m);
  const MatrixXd X = G.Y() * c;
  return {X.col(0), X.col(1), X.col(2)};
}

SphericalTwoTensor induced_metric(const SphereGrid& G, const Embedding3& X) {
  MatrixXd F(G.size(), 3), Ft, Fp;
  for (int j = 0; j < 3; ++j) F.col(j) = X[j];
  partials(G, F, Ft, Fp);
  return {Ft.rowwise().squaredNorm(), (Ft.cwiseProduct(Fp)).rowwise().sum(), Fp.rowwise().squaredNorm()};
}

SphericalTwoTensor induced_metric(const SphereGrid& G, const Embedding4& X) {
  MatrixXd F(G.size(), 4), Ft, Fp;
  for (int j = 0; j < 4; ++j) F.col(j) = X[j];
  partials(G, F, Ft, Fp);
  auto eta = [](const auto& a, const auto& b) {
    return SphericalField((a.cwiseProduct(b)).rowwise().sum() - 2.0 * a.col(0).cwiseProduct(b.col(0)));
  };
  return {eta(Ft, Ft), eta(Ft, Fp), eta(Fp, Fp)};
}

WeylResult embed_weyl(const SurfaceMetric& sigma_hat, const WeylOptions& opts, const Embedding3* seed) {
  const GridPtr& grid = sigma_hat.grid_ptr();
  const SphereGrid& G = *grid;
  const SphericalTwoTensor& sigma = sigma_hat.sigma();

  const SphericalField K = gauss_curvature(sigma_hat);
  if (!(K.minCoeff() > 0.0))
    throw GeometryError("metric is non-convex (minimum Gauss curvature " + std::to_string(K.minCoeff()) + ")");

  const int m = G.n_coeffs() - 1;
  const double R2 = sigma_hat.area() / (4.0 * M_PI);
  const double scale = std::sqrt(R2);
  const double penalty = scale;
  const Rows rows(G);

  MatrixXd c(G.n_coeffs(), 3);
  if (seed) {
    for (int j = 0; j < 3; ++j) c.col(j) = G.analyze((*seed)[j]);
  } else {
    const SphericalField psi = sigma_hat.area_ratio().cwiseSqrt();
    for (int j = 0; j < 3; ++j) c.col(j) = G.analyze(SphericalField(psi.cwiseProduct(G.unit_normal()[j])));
  }
  c.row(0).setZero();

  State s = evaluate(G, c);
  VectorXd r = residual(G, rows, s, sigma, c, penalty);
  double err = mismatch(G, s, sigma) / R2;
  double prev = std::numeric_limits<double>::infinity();

  WeylResult out;
  std::array<MatrixXd, 2> lin_dX;
  Eigen::LLT<MatrixXd> llt;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    // converged: below tolerance and the last step no longer helped much
    if (err < opts.tolerance && (err > 0.1 * prev || err < 1e-14)) break;
    llt.compute(normal_matrix(G, rows, s, penalty));
    if (llt.info() != Eigen::Success) throw SolverError("Weyl normal matrix is singular");
    lin_dX = {s.Xt, s.Xp};
    VectorXd g = apply_transpose(G, rows, s.Xt, s.Xp, r.head(3 * G.size())) + penalty_transpose(c, m, penalty);
    const VectorXd step = -llt.solve(g);

    const double f0 = r.squaredNorm();
    double t = 1.0;
    MatrixXd trial;
    State ts;
    VectorXd tr;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      trial = c;
      for (int j = 0; j < 3; ++j) trial.col(j).tail(m) += t * step.segment(j * m, m);
      ts = evaluate(G, trial);
      tr = residual(G, rows, ts, sigma, trial, penalty);
      if (tr.squaredNorm() < f0 || f0 == 0.0) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // stagnated at round-off
    c = std::move(trial);
    s = std::move(ts);
    r = std::move(tr);
    prev = err;
    err = mismatch(G, s, sigma) / R2;
  }
  if (!(err < opts.tolerance) && !(err < opts.stagnation_limit))
    throw SolverError("Weyl embedding did not converge (relative mismatch " + [&] { char b[32]; std::snprintf(b, sizeof b, "%.3g", err); return std::string(b); }() + " after " +
                      std::to_string(it) + " iterations)");
  if (!llt.rows()) {
    // converged at the seed: still provide the linearization
    llt.compute(normal_matrix(G, rows, s, penalty));
    lin_dX = {s.Xt, s.Xp};
  }
  out.X = {s.X.col(0), s.X.col(1), s.X.col(2)};
  out.residual = err;
  out.iterations = it;
  out.converged = err < opts.tolerance;
  out.linearization = std::make_shared<WeylLinearization>(grid, std::move(lin_dX), std::move(llt));
  return out;
}

ReferenceData reference_data(GridPtr grid, const Embedding4& X, const Vec4& t0) {
  const SphereGrid& G = *grid;
  const int n = G.size();
  for (int j = 0; j < 4; ++j) G.check_field(X[j], "embedding component");
  const double tt = -t0[0] * t0[0] + t0.tail<3>().squaredNorm();
  if (std::abs(tt + 1.0) > 1e-12 || t0[0] <= 0.0) throw ValidationError("t0 must be a future unit timelike vector");

  SurfaceMetric metric(grid, induced_metric(G, X));
  MatrixXd F(n, 4), Ft, Fp;
  for (int j = 0; j < 4; ++j) F.col(j) = X[j];
  partials(G, F, Ft, Fp);
  MatrixXd H(n, 4);  // Laplacian of the position: the mean curvature vector
  for (int j = 0; j < 4; ++j) H.col(j) = laplacian(metric, X[j]);

  const Eigen::Vector4d etad(-1.0, 1.0, 1.0, 1.0);
  auto eta = [&](const Vec4& a, const Vec4& b) { return a.dot(etad.cwiseProduct(b)); };

  Vec4 centroid;
  for (int j = 0; j < 4; ++j) centroid[j] = metric.integrate(X[j]) / metric.area();

  const SphericalTwoTensor& inv = metric.inverse();
  SphericalField k0(n), p0(n), normH0(n);
  MatrixXd Jm(n, 4);
  std::vector<Vec4> h(n);
  for (int i = 0; i < n; ++i) {
    const Vec4 et = Ft.row(i).transpose(), ep = Fp.row(i).transpose();
    auto project = [&](const Vec4& w) {
      const double a = eta(et, w), b = eta(ep, w);
      return Vec4(w - (inv.tt[i] * a + inv.tp[i] * b) * et - (inv.tp[i] * a + inv.pp[i] * b) * ep);
    };
    Vec4 u = project(t0);
    const double uu = eta(u, u);
    if (!(uu < 0.0)) throw GeometryError("reference surface is tangent to the observer direction");
    u /= std::sqrt(-uu);
    Vec4 out = F.row(i).transpose() - centroid;
    out[0] = 0.0;
    Vec4 v = project(out);
    v += eta(v, u) * u;
    const double vv = eta(v, v);
    if (!(vv > 0.0)) throw GeometryError("reference surface has no outward normal direction");
    v /= std::sqrt(vv);

    h[i] = H.row(i).transpose();
    k0[i] = -eta(h[i], v);
    p0[i] = -eta(h[i], u);
    const double H2 = k0[i] * k0[i] - p0[i] * p0[i];
    if (!(H2 > 0.0)) throw GeometryError("reference mean curvature vector is not spacelike");
    normH0[i] = std::sqrt(H2);
    Jm.row(i) = (k0[i] * u - p0[i] * v).transpose();
  }

  MatrixXd dJt, dJp;
  partials(G, Jm, dJt, dJp);
  SphericalOneForm alpha{SphericalField(n), SphericalField(n)};
  for (int i = 0; i < n; ++i) {
    const double H2 = normH0[i] * normH0[i];
    alpha.th[i] = eta(h[i], dJt.row(i).transpose()) / H2;
    alpha.ph[i] = eta(h[i], dJp.row(i).transpose()) / H2;
  }

  // metric of the projection along t0: sigma + d tau d tau, tau = -<t0, X>
  SphericalField tau = SphericalField::Zero(n);
  for (int j = 0; j < 4; ++j) tau -= etad[j] * t0[j] * X[j];
  const SphericalOneForm dtau = gradient(G, tau);
  const SphericalTwoTensor& s = metric.sigma();
  SphericalTwoTensor shat{s.tt + dtau.th.cwiseAbs2(), s.tp + dtau.th.cwiseProduct(dtau.ph), s.pp + dtau.ph.cwiseAbs2()};
  SphericalField hatK = gauss_curvature(SurfaceMetric(grid, std::move(shat)));

  return {std::move(metric), std::move(normH0), std::move(alpha), std::move(k0), std::move(p0), std::move(hatK)};
}

ReferenceData reference_data(GridPtr grid, const Embedding3& Xhat, const SphericalField& tau) {
  return reference_data(std::move(grid), Embedding4{tau, Xhat[0], Xhat[1], Xhat[2]});
}

}  // namespace qlcq
