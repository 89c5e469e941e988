#include "qlcq/errors.hpp"
#include "qlcq/optimal_embedding.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace qlcq;

namespace {

double sup(const SphericalField& f) { return f.cwiseAbs().maxCoeff(); }
double sup(const SphericalOneForm& w) { return std::max(sup(w.th), sup(w.ph)); }

SpacetimeParams mass(double m) {
  SpacetimeParams p;
  p.mass = m;
  return p;
}

InducedData sphere_data(const std::string& name, const SpacetimeParams& p, double r, int L) {
  auto st = catalog_get(name, p);
  return induced_data(*st, *st->coordinate_sphere(r), make_grid(L));
}

// Reference data of (tau, Xhat) with Xhat the Weyl embedding of sigma + dtau dtau.
ReferenceData reference_for(const SurfaceGeometry& geom, const SphericalField& tau) {
  const SphericalOneForm dt = gradient(geom.grid(), tau);
  const SphericalTwoTensor& s = geom.sigma();
  const SurfaceMetric shat(geom.grid_ptr(), SphericalTwoTensor{s.tt + dt.th.cwiseAbs2(),
                                                                s.tp + dt.th.cwiseProduct(dt.ph),
                                                                s.pp + dt.ph.cwiseAbs2()});
  return reference_data(geom.grid_ptr(), embed_weyl(shat).X, tau);
}

SphericalField l2_bump(const SphereGrid& g, double amp) {
  const auto& n = g.unit_normal();
  return (amp * (n[0].array() * n[1].array() + 0.5 * n[2].array().square() - 0.5 * n[0].array() * n[2].array()))
      .matrix();
}

}  // namespace

TEST_CASE("flat slice sphere has vanishing densities") {
  const InducedData d = sphere_data("minkowski", {}, 3.0, 12);
  const SphericalField zero = SphericalField::Zero(d.geometry.grid().size());
  const ReferenceData ref = reference_for(d.geometry, zero);
  const DensityFields f = densities(d.geometry, ref, zero);
  CHECK(sup(f.rho) < 1e-12);
  CHECK(sup(f.j) < 1e-12);
  const EnergyResult e = energy(d.geometry, ref, zero);
  CHECK(std::abs(e.energy) < 1e-10);
  CHECK(e.deviation < 1e-12);
}

TEST_CASE("schwarzschild sphere: constant rho and the Brown-York energy") {
  for (double r : {3.0, 5.0, 10.0}) {
    const InducedData d = sphere_data("schwarzschild-standard", mass(1.0), r, 12);
    const SphericalField zero = SphericalField::Zero(d.geometry.grid().size());
    const ReferenceData ref = reference_for(d.geometry, zero);
    const SphericalField rho = density_rho(d.geometry, ref, zero);
    const double expect = 2.0 / r * (1.0 - std::sqrt(1.0 - 2.0 / r));
    CHECK(sup(rho.array() - expect) < 1e-12);
    CHECK(sup(momentum_density_j(d.geometry, ref, zero)) < 1e-12);
    const EnergyResult e = energy(d.geometry, ref, zero);
    CHECK(e.energy == doctest::Approx(r * (1.0 - std::sqrt(1.0 - 2.0 / r))).epsilon(1e-10));
    CHECK(e.deviation < 1e-10);
  }
}

TEST_CASE("reference data equal to the physical data gives rho = 0") {
  const InducedData d = sphere_data("kerr-bl", [] {
    SpacetimeParams p;
    p.mass = 1.0;
    p.spin = 0.5;
    return p;
  }(), 6.0, 12);
  const SphericalField zero = SphericalField::Zero(d.geometry.grid().size());
  ReferenceData ref = reference_for(d.geometry, zero);
  ref.normH0 = d.geometry.normH;
  ref.alphaH0 = d.geometry.alphaH;
  const DensityFields f = densities(d.geometry, ref, zero);
  CHECK(sup(f.rho) < 1e-15);
  CHECK(sup(f.j) == 0.0);
  CHECK(energy(d.geometry, ref, zero).energy == 0.0);
}

TEST_CASE("sinh identities of the density fields") {
  const InducedData d = sphere_data("schwarzschild-isotropic", mass(1.0), 5.0, 14);
  const SphereGrid& g = d.geometry.grid();
  const SphericalField tau = l2_bump(g, 0.4) + 0.3 * g.unit_normal()[0];
  const ReferenceData ref = reference_for(d.geometry, tau);
  const DensityFields f = densities(d.geometry, ref, tau);
  const SphericalOneForm dt = gradient(g, tau);
  const Eigen::ArrayXd N = (1.0 + gradient_norm2(d.geometry.metric, dt).array()).sqrt();
  const Eigen::ArrayXd lap = laplacian(d.geometry.metric, tau).array();
  const SphericalField lhs = (f.theta.array().sinh() * d.geometry.normH.array() * N).matrix();
  CHECK(sup(lhs + lap.matrix()) < 1e-10 * sup(lap.matrix()));
  const SphericalField lhs0 = (f.theta0.array().sinh() * ref.normH0.array() * N).matrix();
  CHECK(sup(lhs0 + lap.matrix()) < 1e-10 * sup(lap.matrix()));
  const SphericalField addition =
      (f.rho.array() * lap / (ref.normH0.array() * d.geometry.normH.array())).asinh().matrix();
  CHECK(sup(f.theta0 - f.theta - addition) < 1e-10);
  const EnergyResult e = energy(d.geometry, ref, tau);
  CHECK(e.deviation < 1e-10);
}

TEST_CASE("time-symmetric data: tau = 0 solves at once") {
  const InducedData d = sphere_data("schwarzschild-standard", mass(1.0), 5.0, 12);
  const OIESolution s = solve_oie(d.geometry);
  CHECK(s.iterations == 0);
  CHECK(s.residual < 1e-12);
  CHECK(sup(s.embedding.tau()) == 0.0);
  CHECK(sup(s.densities.j) < 1e-12);
  CHECK(s.energy.energy == doctest::Approx(5.0 * (1.0 - std::sqrt(0.6))).epsilon(1e-10));
}

TEST_CASE("boosted flat slice: Newton returns the boosted hyperplane") {
  SpacetimeParams p;
  p.rapidity = 0.3;
  const double r = 2.0;
  const InducedData d = sphere_data("minkowski-boosted-slice", p, r, 12);
  const SphereGrid& g = d.geometry.grid();
  // the sphere sits in the hyperplane t_base = -sinh(w) x_base
  SphericalField plane(g.size());
  for (int i = 0; i < g.size(); ++i) plane[i] = d.frame.x[i][1] * 0.0 - std::sinh(0.3) * r * g.unit_normal()[0][i];
  const SphericalField seed = plane + l2_bump(g, 0.1 * 2 * r);
  const OIESolution s = solve_oie(d.geometry, &seed);
  CHECK(s.iterations > 0);
  CHECK(sup(s.embedding.tau() - plane) < 1e-8);
  CHECK(sup(s.densities.rho) < 1e-8);
  CHECK(sup(s.densities.j) < 1e-8);
  CHECK(std::abs(s.energy.energy) < 1e-8);
}

TEST_CASE("flat perturbed sphere: everything vanishes") {
  auto mink = catalog_get("minkowski", {});
  SphereSpec spec;
  spec.radius = 5.0;
  spec.p2_amplitude = 0.05;
  const InducedData d = induced_data(*mink, *make_sphere(spec), make_grid(16));
  const OIESolution s = solve_oie(d.geometry);
  CHECK(sup(s.densities.rho) < 1e-8);
  CHECK(sup(s.densities.j) < 1e-8);
  CHECK(std::abs(s.energy.energy) < 1e-8);
}

TEST_CASE("boosted schwarzschild: nontrivial solution, critical point, local uniqueness") {
  SpacetimeParams p;
  p.mass = 1.0;
  p.rapidity = 0.3;
  const InducedData d = sphere_data("schwarzschild-isotropic", p, 10.0, 12);
  const SphereGrid& g = d.geometry.grid();
  const OIESolution s = solve_oie(d.geometry);
  MESSAGE("newton " << s.iterations << " krylov " << s.krylov_iterations << " residual " << s.residual);
  CHECK(s.residual < 1e-10);
  CHECK(sup(s.embedding.tau()) > 0.1);
  CHECK(s.densities.rho.minCoeff() > 0.0);
  CHECK(s.energy.deviation < 1e-10);

  // first variation vanishes: E(tau + e dtau) - E(tau) = O(e^2)
  const SphericalField dtau = l2_bump(g, 1.0) + 0.5 * g.unit_normal()[1];
  auto E = [&](double e) {
    const SphericalField t = s.embedding.tau() + e * dtau;
    return energy(d.geometry, reference_for(d.geometry, t), t).energy;
  };
  const double E0 = s.energy.energy;
  const double d1 = std::abs(E(1e-3) - E0), d2 = std::abs(E(1e-4) - E0);
  MESSAGE("dE(1e-3) " << d1 << " dE(1e-4) " << d2);
  CHECK(d2 < d1 / 50.0);

  // perturbed seeds return to the same solution
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 2; ++trial) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(g.n_coeffs());
    for (int k = 1; k < 16; ++k) c[k] = normal(rng);
    SphericalField pert = g.synthesize(c);
    pert *= 0.1 * 2 * 10.0 * 0.1 / sup(pert);
    const SphericalField seed = s.embedding.tau() + pert;
    const OIESolution s2 = solve_oie(d.geometry, &seed);
    CHECK(sup(s2.embedding.tau() - s.embedding.tau()) < 1e-8);
  }
}

TEST_CASE("reference hamiltonian equals its projection") {
  auto g = make_grid(12);
  const auto& n = g->unit_normal();
  const double r = 2.0;
  EmbeddingState round{{SphericalField::Zero(g->size()), r * n[0], r * n[1], r * n[2]}};
  const ReferenceHamiltonian a = reference_hamiltonian(g, round);
  CHECK(a.surface == doctest::Approx(r).epsilon(1e-12));
  CHECK(a.projected == doctest::Approx(r).epsilon(1e-12));

  const double w = 0.5;
  EmbeddingState boosted{{std::sinh(w) * r * n[0], std::cosh(w) * r * n[0], r * n[1], r * n[2]}};
  const ReferenceHamiltonian b = reference_hamiltonian(g, boosted);
  CHECK(std::abs(b.surface - b.projected) < 1e-9);
  CHECK(std::abs(b.surface - r) > 1e-3);

  EmbeddingState bent{{0.3 * n[2].cwiseAbs2() + 0.2 * n[0].cwiseProduct(n[1]), r * n[0], 1.1 * r * n[1], r * n[2]}};
  const ReferenceHamiltonian c = reference_hamiltonian(g, bent);
  CHECK(std::abs(c.surface - c.projected) < 1e-9);

  EmbeddingState tangent{{1.2 * r * n[0], r * n[0], r * n[1], r * n[2]}};
  CHECK_THROWS_AS(reference_hamiltonian(g, tangent), GeometryError);
}
