#include "qlcq/sphere_ops.hpp"

#include "qlcq/errors.hpp"
#include "qlcq/gmres.hpp"

#include <cmath>

namespace qlcq {

namespace {

using Eigen::ArrayXd;
using Eigen::MatrixXd;

// Component (a, b) of a symmetric tensor, a, b in {0 = theta, 1 = phi}.
const SphericalField& comp(const SphericalTwoTensor& t, int a, int b) {
  if (a == 0 && b == 0) return t.tt;
  if (a == 1 && b == 1) return t.pp;
  return t.tp;
}

// Round-metric divergence of a vector with coordinate components (vth, vph).
SphericalField round_divergence_of_vector(const SphereGrid& grid, const SphericalField& vth,
                                          const SphericalField& vph) {
  const ArrayXd s2 = grid.sin_theta().array().square();
  SphericalOneForm low{vth, (vph.array() * s2).matrix()};
  const CovariantOneForm c = round_covariant(grid, low);
  return (c.tt.array() + c.pp.array() / s2).matrix();
}

}  // namespace

void partials(const SphereGrid& grid, const MatrixXd& fields, MatrixXd& d_theta, MatrixXd& d_phi) {
  const MatrixXd coeffs = grid.analyze(fields);
  d_theta = grid.dY_dtheta() * coeffs;
  d_phi = grid.dY_dphi() * coeffs;
}

SphericalOneForm gradient(const SphereGrid& grid, const SphericalField& f) {
  grid.check_field(f, "gradient");
  const Eigen::VectorXd c = grid.analyze(f);
  return {grid.dY_dtheta() * c, grid.dY_dphi() * c};
}

CovariantOneForm round_covariant(const SphereGrid& grid, const SphericalOneForm& w) {
  grid.check_field(w.th, "one-form");
  grid.check_field(w.ph, "one-form");
  const ArrayXd s = grid.sin_theta().array();
  const auto& et = grid.e_theta();
  const auto& ep = grid.e_phi();
  MatrixXd W(grid.size(), 3);
  for (int i = 0; i < 3; ++i)
    W.col(i) = (w.th.array() * et[i].array() + w.ph.array() / s * ep[i].array()).matrix();
  MatrixXd Wt, Wp;
  partials(grid, W, Wt, Wp);
  CovariantOneForm out;
  out.tt = SphericalField::Zero(grid.size());
  out.tp = out.tt;
  out.pt = out.tt;
  out.pp = out.tt;
  for (int i = 0; i < 3; ++i) {
    out.tt.array() += Wt.col(i).array() * et[i].array();
    out.tp.array() += Wt.col(i).array() * ep[i].array() * s;
    out.pt.array() += Wp.col(i).array() * et[i].array();
    out.pp.array() += Wp.col(i).array() * ep[i].array() * s;
  }
  return out;
}

CovariantTwoTensor round_covariant(const SphereGrid& grid, const SphericalTwoTensor& t) {
  grid.check_field(t.tt, "two-tensor");
  grid.check_field(t.tp, "two-tensor");
  grid.check_field(t.pp, "two-tensor");
  const ArrayXd s = grid.sin_theta().array();
  const auto& et = grid.e_theta();
  const auto& ep = grid.e_phi();
  // Ambient symmetric 3x3 tensor, 6 independent components.
  static constexpr int I[6] = {0, 0, 0, 1, 1, 2};
  static constexpr int J[6] = {0, 1, 2, 1, 2, 2};
  MatrixXd T(grid.size(), 6);
  for (int c = 0; c < 6; ++c) {
    const int i = I[c], j = J[c];
    T.col(c) = (t.tt.array() * et[i].array() * et[j].array() +
                t.tp.array() / s * (et[i].array() * ep[j].array() + ep[i].array() * et[j].array()) +
                t.pp.array() / (s * s) * ep[i].array() * ep[j].array())
                   .matrix();
  }
  MatrixXd Tt, Tp;
  partials(grid, T, Tt, Tp);
  auto project = [&](const MatrixXd& dT) {
    SphericalTwoTensor r;
    r.tt = SphericalField::Zero(grid.size());
    r.tp = r.tt;
    r.pp = r.tt;
    for (int c = 0; c < 6; ++c) {
      const int i = I[c], j = J[c];
      const double mult = (i == j) ? 1.0 : 2.0;
      const ArrayXd d = dT.col(c).array();
      // A_theta = e_theta, A_phi = sin(theta) e_phi.
      r.tt.array() += mult * d * et[i].array() * et[j].array();
      r.pp.array() += mult * d * ep[i].array() * ep[j].array() * s * s;
      const ArrayXd cross = i == j ? (et[i].array() * ep[j].array()).eval()
                                   : (et[i].array() * ep[j].array() + ep[i].array() * et[j].array()).eval();
      r.tp.array() += d * cross * s;
    }
    return r;
  };
  return {project(Tt), project(Tp)};
}

SphericalTwoTensor round_metric(const SphereGrid& grid, double radius) {
  const double r2 = radius * radius;
  SphericalTwoTensor t;
  t.tt = SphericalField::Constant(grid.size(), r2);
  t.tp = SphericalField::Zero(grid.size());
  t.pp = (r2 * grid.sin_theta().array().square()).matrix();
  return t;
}

SurfaceMetric::SurfaceMetric(GridPtr grid, SphericalTwoTensor sigma)
    : grid_(std::move(grid)), sigma_(std::move(sigma)) {
  const SphereGrid& g = *grid_;
  g.check_field(sigma_.tt, "metric");
  g.check_field(sigma_.tp, "metric");
  g.check_field(sigma_.pp, "metric");
  const ArrayXd det = sigma_.tt.array() * sigma_.pp.array() - sigma_.tp.array().square();
  for (int k = 0; k < g.size(); ++k)
    if (!(det[k] > 0.0) || !(sigma_.tt[k] > 0.0))
      throw GeometryError("metric is not positive definite at node " + std::to_string(k));
  inv_.tt = (sigma_.pp.array() / det).matrix();
  inv_.pp = (sigma_.tt.array() / det).matrix();
  inv_.tp = (-sigma_.tp.array() / det).matrix();
  ratio_ = (det.sqrt() / g.sin_theta().array()).matrix();
  dA_ = (ratio_.array() * g.weights().array()).matrix();
  dsigma_ = round_covariant(g, sigma_);

  // Lowered difference tensor Gamma_{d|ab} = (S_a,bd + S_b,ad - S_d,ab) / 2.
  auto S = [&](int c, int a, int b) -> const SphericalField& {
    return comp(c == 0 ? dsigma_.dth : dsigma_.dph, a, b);
  };
  std::array<std::array<std::array<ArrayXd, 2>, 2>, 2> low;
  for (int d = 0; d < 2; ++d)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        low[d][a][b] = 0.5 * (S(a, b, d).array() + S(b, a, d).array() - S(d, a, b).array());
  for (int c = 0; c < 2; ++c) {
    auto raised = [&](int a, int b) {
      return (comp(inv_, c, 0).array() * low[0][a][b] + comp(inv_, c, 1).array() * low[1][a][b])
          .matrix();
    };
    D_[c].tt = raised(0, 0);
    D_[c].tp = raised(0, 1);
    D_[c].pp = raised(1, 1);
  }
}

SurfaceMetric SurfaceMetric::round(GridPtr grid, double radius) {
  const SphereGrid& g = *grid;
  return SurfaceMetric(std::move(grid), round_metric(g, radius));
}

double SurfaceMetric::norm2(const SphericalOneForm& w, int k) const {
  return inv_.tt[k] * w.th[k] * w.th[k] + 2.0 * inv_.tp[k] * w.th[k] * w.ph[k] +
         inv_.pp[k] * w.ph[k] * w.ph[k];
}

SphericalOneForm SurfaceMetric::raise(const SphericalOneForm& w) const {
  return {(inv_.tt.array() * w.th.array() + inv_.tp.array() * w.ph.array()).matrix(),
          (inv_.tp.array() * w.th.array() + inv_.pp.array() * w.ph.array()).matrix()};
}

SphericalField gradient_norm2(const SurfaceMetric& metric, const SphericalOneForm& df) {
  const auto& inv = metric.inverse();
  return (inv.tt.array() * df.th.array().square() + 2.0 * inv.tp.array() * df.th.array() * df.ph.array() +
          inv.pp.array() * df.ph.array().square())
      .matrix();
}

SphericalField divergence(const SurfaceMetric& metric, const SphericalOneForm& w) {
  const CovariantOneForm c = round_covariant(metric.grid(), w);
  const auto& inv = metric.inverse();
  const auto& D0 = metric.christoffel_difference(0);
  const auto& D1 = metric.christoffel_difference(1);
  // nabla_a w_b = c_ab - D^e_ab w_e
  auto cov = [&](const SphericalField& cab, const SphericalField& d0, const SphericalField& d1) {
    return cab.array() - d0.array() * w.th.array() - d1.array() * w.ph.array();
  };
  return (inv.tt.array() * cov(c.tt, D0.tt, D1.tt) + inv.tp.array() * cov(c.tp, D0.tp, D1.tp) +
          inv.tp.array() * cov(c.pt, D0.tp, D1.tp) + inv.pp.array() * cov(c.pp, D0.pp, D1.pp))
      .matrix();
}

SphericalField laplacian(const SurfaceMetric& metric, const SphericalField& f) {
  return divergence(metric, gradient(metric.grid(), f));
}

SphericalTwoTensor hessian(const SurfaceMetric& metric, const SphericalField& f) {
  const SphericalOneForm df = gradient(metric.grid(), f);
  const CovariantOneForm c = round_covariant(metric.grid(), df);
  const auto& D0 = metric.christoffel_difference(0);
  const auto& D1 = metric.christoffel_difference(1);
  SphericalTwoTensor h;
  h.tt = (c.tt.array() - D0.tt.array() * df.th.array() - D1.tt.array() * df.ph.array()).matrix();
  h.pp = (c.pp.array() - D0.pp.array() * df.th.array() - D1.pp.array() * df.ph.array()).matrix();
  h.tp = (0.5 * (c.tp.array() + c.pt.array()) - D0.tp.array() * df.th.array() -
          D1.tp.array() * df.ph.array())
             .matrix();
  return h;
}

SphericalField rotational_divergence(const SurfaceMetric& metric, const SphericalOneForm& w) {
  const CovariantOneForm c = round_covariant(metric.grid(), w);
  const ArrayXd sqrt_det = metric.area_ratio().array() * metric.grid().sin_theta().array();
  return ((c.pt.array() - c.tp.array()) / sqrt_det).matrix();
}

SphericalField gauss_curvature(const SurfaceMetric& metric) {
  const SphereGrid& grid = metric.grid();
  const ArrayXd s2 = grid.sin_theta().array().square();
  const auto& inv = metric.inverse();
  const auto& ds = metric.round_derivative();
  const std::array<const SphericalTwoTensor*, 2> D = {&metric.christoffel_difference(0),
                                                      &metric.christoffel_difference(1)};
  auto Dc = [&](int c, int a, int b) { return comp(*D[c], a, b).array(); };
  auto inv_ab = [&](int a, int b) { return comp(inv, a, b).array(); };

  // nabla~_c sigma^{ab} = -sigma^{ad} sigma^{be} nabla~_c sigma_de
  auto dinv = [&](int c, int a, int b) {
    const SphericalTwoTensor& dc = c == 0 ? ds.dth : ds.dph;
    ArrayXd r = ArrayXd::Zero(grid.size());
    for (int d = 0; d < 2; ++d)
      for (int e = 0; e < 2; ++e) r -= inv_ab(a, d) * inv_ab(b, e) * comp(dc, d, e).array();
    return r;
  };

  // Round part: sigma^{ab} sigma~_ab.
  ArrayXd R = inv.tt.array() + inv.pp.array() * s2;

  // sigma^{ab} nabla~_c D^c_ab = div~(W) - D^c_ab nabla~_c sigma^{ab},  W^c = sigma^{ab} D^c_ab.
  std::array<ArrayXd, 2> W;
  for (int c = 0; c < 2; ++c)
    W[c] = inv.tt.array() * Dc(c, 0, 0) + 2.0 * inv.tp.array() * Dc(c, 0, 1) + inv.pp.array() * Dc(c, 1, 1);
  R += round_divergence_of_vector(grid, W[0].matrix(), W[1].matrix()).array();
  for (int c = 0; c < 2; ++c)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) R -= Dc(c, a, b) * dinv(c, a, b);

  // sigma^{ab} nabla~_b D^c_ac with D^c_ac = d_a l:  div~(V) - d_a l nabla~_b sigma^{ab}.
  std::array<ArrayXd, 2> dl;
  for (int a = 0; a < 2; ++a) dl[a] = Dc(0, a, 0) + Dc(1, a, 1);
  std::array<ArrayXd, 2> V;
  for (int b = 0; b < 2; ++b) V[b] = inv_ab(b, 0) * dl[0] + inv_ab(b, 1) * dl[1];
  R -= round_divergence_of_vector(grid, V[0].matrix(), V[1].matrix()).array();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) R += dl[a] * dinv(b, a, b);

  // Quadratic terms.
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      ArrayXd q = ArrayXd::Zero(grid.size());
      for (int d = 0; d < 2; ++d) {
        q += dl[d] * Dc(d, a, b);
        for (int c = 0; c < 2; ++c) q -= Dc(c, b, d) * Dc(d, a, c);
      }
      R += inv_ab(a, b) * q;
    }
  return (0.5 * R).matrix();
}

PoissonResult solve_poisson(const SurfaceMetric& metric, const SphericalField& source,
                            const PoissonOptions& opts) {
  const SphereGrid& grid = metric.grid();
  grid.check_field(source, "poisson source");
  const double total = metric.integrate(source);
  const double scale = metric.area_weights().dot(source.cwiseAbs());
  if (std::abs(total) > opts.solvability_tolerance * std::max(scale, 1e-300) && scale > 0.0)
    throw ValidationError("solvability violation: source has nonzero mean (integral " +
                          std::to_string(total) + ")");

  const int C = grid.n_coeffs();
  const int n = C - 1;
  const SphericalField& s = metric.area_ratio();
  auto to_field = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(C);
    c.tail(n) = x;
    return grid.synthesize(c);
  };
  auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const SphericalField lap = laplacian(metric, to_field(x));
    return grid.analyze(SphericalField(s.cwiseProduct(lap))).tail(n);
  };
  Eigen::VectorXd inv_eig(n);
  for (int l = 1, k = 0; l <= grid.band_limit(); ++l)
    for (int m = -l; m <= l; ++m) inv_eig[k++] = -1.0 / (l * (l + 1.0));
  auto precondition = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return v.cwiseProduct(inv_eig);
  };
  const Eigen::VectorXd b = grid.analyze(SphericalField(s.cwiseProduct(source))).tail(n);
  Eigen::VectorXd x = precondition(b);
  const GmresResult r = gmres(apply, precondition, b, x, opts.tolerance, opts.max_iterations);
  if (!r.converged)
    throw SolverError("Poisson solve did not converge (relative residual " +
                      std::to_string(r.relative_residual) + ")");
  PoissonResult out;
  out.u = to_field(x);
  out.u.array() -= metric.integrate(out.u) / metric.area();
  out.relative_residual = r.relative_residual;
  out.iterations = r.iterations;
  return out;
}

}  // namespace qlcq
