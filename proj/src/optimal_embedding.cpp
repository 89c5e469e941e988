#include "qlcq/optimal_embedding.hpp"

#include "qlcq/errors.hpp"
#include "qlcq/gmres.hpp"

#include <cmath>
#include <cstdio>

namespace qlcq {

namespace {

using Eigen::VectorXd;

SphericalField dot(const SurfaceMetric& metric, const SphericalOneForm& a, const SphericalOneForm& b) {
  const SphericalTwoTensor& s = metric.inverse();
  return (s.tt.cwiseProduct(a.th).cwiseProduct(b.th) + s.tp.cwiseProduct(a.th.cwiseProduct(b.ph) + a.ph.cwiseProduct(b.th)) +
          s.pp.cwiseProduct(a.ph).cwiseProduct(b.ph));
}

void check_inputs(const SurfaceGeometry& geom, const ReferenceData& ref, const SphericalField& tau) {
  geom.grid().check_field(tau, "tau");
  geom.grid().check_field(ref.normH0, "|H0|");
  if (!(geom.normH.minCoeff() > 0.0)) throw GeometryError("|H| vanishes on the surface");
  if (!(ref.normH0.minCoeff() > 0.0)) throw GeometryError("|H0| vanishes on the reference surface");
}

SphericalField asinh(const SphericalField& x) { return x.unaryExpr([](double v) { return std::asinh(v); }); }

}  // namespace

DensityFields densities(const SurfaceGeometry& geom, const ReferenceData& ref, const SphericalField& tau) {
  check_inputs(geom, ref, tau);
  const SurfaceMetric& metric = geom.metric;
  const SphereGrid& G = geom.grid();
  const SphericalOneForm dtau = gradient(G, tau);
  const Eigen::ArrayXd N = (1.0 + gradient_norm2(metric, dtau).array()).sqrt();
  const Eigen::ArrayXd lap = laplacian(metric, tau).array();
  const Eigen::ArrayXd H = geom.normH.array(), H0 = ref.normH0.array();
  const Eigen::ArrayXd s = (lap / N).square();
  const Eigen::ArrayXd a = (H0.square() + s).sqrt(), b = (H.square() + s).sqrt();

  DensityFields d;
  // (a - b) / N in the cancellation-free form
  d.rho = ((H0.square() - H.square()) / ((a + b) * N)).matrix();
  d.theta = asinh((-lap / (H * N)).matrix());
  d.theta0 = asinh((-lap / (H0 * N)).matrix());
  const SphericalOneForm dq = gradient(G, asinh((d.rho.array() * lap / (H0 * H)).matrix()));
  d.j.th = d.rho.cwiseProduct(dtau.th) - dq.th - ref.alphaH0.th + geom.alphaH.th;
  d.j.ph = d.rho.cwiseProduct(dtau.ph) - dq.ph - ref.alphaH0.ph + geom.alphaH.ph;
  d.divj = divergence(metric, d.j);
  return d;
}

SphericalField density_rho(const SurfaceGeometry& geom, const ReferenceData& ref, const SphericalField& tau) {
  return densities(geom, ref, tau).rho;
}

SphericalOneForm momentum_density_j(const SurfaceGeometry& geom, const ReferenceData& ref, const SphericalField& tau) {
  return densities(geom, ref, tau).j;
}

EnergyResult energy(const SurfaceGeometry& geom, const ReferenceData& ref, const SphericalField& tau) {
  const DensityFields d = densities(geom, ref, tau);
  const SurfaceMetric& metric = geom.metric;
  const SphereGrid& G = geom.grid();
  const SphericalOneForm dtau = gradient(G, tau);
  const Eigen::ArrayXd N = (1.0 + gradient_norm2(metric, dtau).array()).sqrt();
  const Eigen::ArrayXd H = geom.normH.array(), H0 = ref.normH0.array();
  const Eigen::ArrayXd c0 = d.theta0.array().cosh() * H0, c = d.theta.array().cosh() * H;

  const SphericalOneForm dt0 = gradient(G, d.theta0), dt = gradient(G, d.theta);
  const SphericalOneForm w{dt0.th - dt.th + ref.alphaH0.th - geom.alphaH.th,
                           dt0.ph - dt.ph + ref.alphaH0.ph - geom.alphaH.ph};
  const SphericalField integrand = ((c0 - c) * N).matrix() - dot(metric, w, dtau);
  EnergyResult e;
  e.energy = metric.integrate(integrand) / (8.0 * M_PI);
  e.identity = metric.integrate(d.rho + dot(metric, d.j, dtau)) / (8.0 * M_PI);
  e.deviation = std::abs(e.energy - e.identity);
  return e;
}

SphericalField EmbeddingState::tau() const {
  return t0[0] * X[0] - t0[1] * X[1] - t0[2] * X[2] - t0[3] * X[3];
}

namespace {

class OieProblem {
public:
  OieProblem(const SurfaceGeometry& geom, const OIEOptions& opts) : geom_(geom), opts_(opts), G_(geom.grid()) {}

  int unknowns() const { return G_.n_coeffs() - 1; }

  SphericalField tau_of(const VectorXd& a) const {
    VectorXd c = VectorXd::Zero(G_.n_coeffs());
    c.tail(unknowns()) = a;
    return G_.synthesize(c);
  }

  VectorXd project(const SphericalField& divj) const {
    return G_.analyze(SphericalField(divj.cwiseProduct(geom_.metric.area_ratio()))).tail(unknowns());
  }

  struct Point {
    VectorXd a;
    SphericalField tau;
    WeylResult weyl;
    std::shared_ptr<ReferenceData> ref;
    DensityFields dens;
    VectorXd F;
    double sup = 0.0;
    double pointwise = 0.0;
  };

  Point evaluate(const VectorXd& a, const Embedding3* seed, bool intermediate = false) const {
    Point p;
    p.a = a;
    p.tau = tau_of(a);
    const SphericalOneForm dt = gradient(G_, p.tau);
    const SphericalTwoTensor& s = geom_.sigma();
    SphericalTwoTensor shat{s.tt + dt.th.cwiseAbs2(), s.tp + dt.th.cwiseProduct(dt.ph), s.pp + dt.ph.cwiseAbs2()};
    WeylOptions wo = opts_.weyl;
    if (intermediate) wo.stagnation_limit = std::max(wo.stagnation_limit, 1e-6);
    p.weyl = embed_weyl(SurfaceMetric(geom_.grid_ptr(), std::move(shat)), wo, seed);
    p.ref = std::make_shared<ReferenceData>(reference_data(geom_.grid_ptr(), p.weyl.X, p.tau));
    p.dens = densities(geom_, *p.ref, p.tau);
    p.F = project(p.dens.divj);
    const double R = radius();
    VectorXd c = VectorXd::Zero(G_.n_coeffs());
    c.tail(unknowns()) = p.F;
    // the band-limited part is what Newton controls; the rest is truncation
    p.sup = G_.synthesize(c).cwiseQuotient(geom_.metric.area_ratio()).cwiseAbs().maxCoeff() * R * R;
    p.pointwise = p.dens.divj.cwiseAbs().maxCoeff() * R * R;
    return p;
  }

  // Residual with the embedding held fixed (no Weyl solve).
  VectorXd fixed(const SphericalField& tau, const Embedding3& X) const {
    const ReferenceData ref = reference_data(geom_.grid_ptr(), X, tau);
    return project(densities(geom_, ref, tau).divj);
  }

  VectorXd jvp(const Point& p, const VectorXd& da) const {
    const SphericalField dtau = tau_of(da);
    const double mag = dtau.cwiseAbs().maxCoeff();
    if (mag == 0.0) return VectorXd::Zero(da.size());
    const SphericalOneForm t = gradient(G_, p.tau), d = gradient(G_, dtau);
    const SphericalTwoTensor ds{2.0 * t.th.cwiseProduct(d.th), t.th.cwiseProduct(d.ph) + t.ph.cwiseProduct(d.th),
                                2.0 * t.ph.cwiseProduct(d.ph)};
    const Embedding3 dX = p.weyl.linearization->solve(ds);
    const double eps = 1e-5 * radius() / mag;
    auto shifted = [&](double e) {
      Embedding3 X;
      for (int j = 0; j < 3; ++j) X[j] = p.weyl.X[j] + e * dX[j];
      return fixed(SphericalField(p.tau + e * dtau), X);
    };
    return (shifted(eps) - shifted(-eps)) / (2.0 * eps);
  }

  double radius() const { return std::sqrt(geom_.metric.area() / (4.0 * M_PI)); }

  // Diagonal inverse of the linearization on a round sphere with constant
  // |H| and rho and vanishing alpha_H.
  VectorXd preconditioner(const Point& p) const {
    const double R = radius();
    const double area = geom_.metric.area();
    const double h = geom_.metric.integrate(geom_.normH) / area;
    const double rho = geom_.metric.integrate(p.dens.rho) / area;
    const double h0 = 2.0 / R;
    // Degree one is an exact kernel (boosts) when the data is flat, and
    // nearly one when the Brown-York-type mass estimate (h0 - mean |H|) is
    // negligible; it is then left at its seed value.
    const bool flat = std::abs(h0 - h) * R < 1e-6;
    VectorXd m(unknowns());
    for (int l = 1; l <= G_.band_limit(); ++l) {
      const double lam = -l * (l + 1.0) / (R * R);
      const double mu = lam * (rho - 1.0 / R) - lam * lam * (rho + h) / (h0 * h);
      const double inv = (l == 1 && flat) ? 0.0 : 1.0 / mu;
      for (int k = l * l; k < (l + 1) * (l + 1); ++k) m[k - 1] = inv;
    }
    return m;
  }

private:
  const SurfaceGeometry& geom_;
  const OIEOptions& opts_;
  const SphereGrid& G_;
};

}  // namespace

OIESolution solve_oie(const SurfaceGeometry& geom, const SphericalField* tau_seed, const OIEOptions& opts) {
  const SphereGrid& G = geom.grid();
  OieProblem problem(geom, opts);
  VectorXd a = VectorXd::Zero(problem.unknowns());
  if (tau_seed) {
    G.check_field(*tau_seed, "tau seed");
    a = G.analyze(*tau_seed).tail(problem.unknowns());
  }

  OieProblem::Point p = problem.evaluate(a, nullptr);
  int it = 0, krylov = 0;
  for (; it < opts.max_iterations && !(p.sup < opts.tolerance); ++it) {
    const VectorXd minv = problem.preconditioner(p);
    // rows of frozen modes are dropped from the linear system
    const VectorXd mask = (minv.array() != 0.0).cast<double>().matrix();
    auto apply = [&](const VectorXd& v) { return VectorXd(problem.jvp(p, v).cwiseProduct(mask)); };
    auto precondition = [&](const VectorXd& v) { return VectorXd(minv.cwiseProduct(v)); };
    VectorXd step = VectorXd::Zero(a.size());
    const GmresResult gr =
        gmres(apply, precondition, VectorXd(-p.F.cwiseProduct(mask)), step, 1e-6, opts.max_krylov, 60);
    krylov += gr.iterations;

    const double f0 = p.F.norm();
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 12; ++ls, t *= 0.5) {
      OieProblem::Point trial;
      try {
        trial = problem.evaluate(a + t * step, &p.weyl.X, true);
      } catch (const Error&) {
        continue;  // iterate lost convexity or the Weyl solve failed: shorten the step
      }
      if (trial.F.norm() < f0) {
        a = trial.a;
        p = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }

  if (!(p.sup < opts.tolerance)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "optimal embedding equation did not converge: resolved R^2 sup |div j| = %.3e after %d Newton iterations",
                  p.sup, it);
    throw SolverError(buf);
  }
  EmbeddingState emb{{p.tau, p.weyl.X[0], p.weyl.X[1], p.weyl.X[2]}, Vec4(1.0, 0.0, 0.0, 0.0)};
  const EnergyResult e = energy(geom, *p.ref, p.tau);
  return OIESolution{std::move(emb), std::move(*p.ref), std::move(p.dens), e, p.sup, it, krylov, true, p.pointwise};
}

ReferenceHamiltonian reference_hamiltonian(GridPtr grid, const EmbeddingState& emb) {
  const SphereGrid& G = *grid;
  const ReferenceData ref = reference_data(grid, emb.X, emb.t0);
  const SurfaceMetric& metric = ref.metric;
  const SphericalField tau = emb.tau();
  const SphericalOneForm dtau = gradient(G, tau);
  const Eigen::ArrayXd N = (1.0 + gradient_norm2(metric, dtau).array()).sqrt();
  const Eigen::ArrayXd lap = laplacian(metric, tau).array();
  const Eigen::ArrayXd H0 = ref.normH0.array();
  const SphericalField theta0 = asinh((-lap / (H0 * N)).matrix());
  const SphericalOneForm dth = gradient(G, theta0);
  const SphericalOneForm w{dth.th + ref.alphaH0.th, dth.ph + ref.alphaH0.ph};
  const SphericalField integrand = (theta0.array().cosh() * H0 * N).matrix() - dot(metric, w, dtau);

  ReferenceHamiltonian out;
  out.surface = metric.integrate(integrand) / (8.0 * M_PI);

  // projection X - tau t0 into the hyperplane orthogonal to t0
  Embedding4 P;
  for (int j = 0; j < 4; ++j) P[j] = emb.X[j] - tau * emb.t0[j];
  SurfaceMetric pm(grid, induced_metric(G, P));
  Eigen::MatrixXd H(G.size(), 4);
  for (int j = 0; j < 4; ++j) H.col(j) = laplacian(pm, P[j]);
  const SphericalField Hn =
      (H.rightCols<3>().rowwise().squaredNorm() - H.col(0).cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
  out.projected = pm.integrate(Hn) / (8.0 * M_PI);
  return out;
}

}  // namespace qlcq
