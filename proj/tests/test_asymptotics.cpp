#include "qlcq/asymptotics.hpp"
#include "qlcq/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace qlcq;

namespace {

SpacetimeParams params(double m, double a = 0.0, double w = 0.0) {
  SpacetimeParams p;
  p.mass = m;
  p.spin = a;
  p.rapidity = w;
  return p;
}

AsymptoticFamily sweep(const std::string& name, const SpacetimeParams& p, const std::vector<double>& radii, int L,
                       bool parallel = false) {
  SweepOptions o;
  o.band_limit = L;
  o.parallel = parallel;
  return sweep_family(*catalog_get(name, p), radii, o);
}

const std::vector<double> kFar{40.0, 80.0, 160.0, 320.0, 640.0, 1280.0};

}  // namespace

TEST_CASE("fit_expansion: exact, noisy and rejected inputs") {
  const std::vector<double> r{10.0, 20.0, 40.0, 80.0};
  Eigen::VectorXd f(4);
  for (int k = 0; k < 4; ++k) f[k] = 2.0 / r[k] + 3.0 / (r[k] * r[k]);
  const ExpansionFit fit = fit_expansion(r, f, {1, 2});
  CHECK(fit.coefficients(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(fit.coefficients(1, 0) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(fit.accepted);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1e-12, 1e-12);
  Eigen::VectorXd g = f;
  for (int k = 0; k < 4; ++k) g[k] += U(rng);
  const ExpansionFit noisy = fit_expansion(r, g, {1, 2});
  CHECK(std::abs(noisy.coefficients(0, 0) - 2.0) < 1e-9);
  CHECK(std::abs(noisy.coefficients(1, 0) - 3.0) < 1e-9);

  CHECK_THROWS_AS(fit_expansion(r, f, {1, 2, 3, 4}), ValidationError);          // too few radii
  CHECK_THROWS_AS(fit_expansion({10.0, 12.0, 14.0, 16.0}, f, {1, 2}), ValidationError);  // span < 4
  CHECK_THROWS_AS(fit_expansion({10.0, 40.0, 20.0, 80.0}, f, {1, 2}), ValidationError);  // not increasing
  CHECK_THROWS_AS(fit_expansion(r, f, {1, 2, 3}, 1.5), SolverError);            // conditioning
}

TEST_CASE("fit_expansion: schwarzschild mean curvature gives h(-2) = -2m") {
  Eigen::VectorXd f(kFar.size());
  for (std::size_t k = 0; k < kFar.size(); ++k) {
    const double r = kFar[k];
    f[k] = 2.0 / r * std::sqrt(1.0 - 2.0 / r) - 2.0 / r;
  }
  const ExpansionFit fit = fit_expansion(kFar, f, {2, 3, 4, 5, 6});
  CHECK(fit.coefficients(0, 0) == doctest::Approx(-2.0).epsilon(1e-8));
  CHECK(fit.coefficients(1, 0) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("extrapolate: convergent and divergent ladders") {
  const std::vector<double> r{8.0, 16.0, 32.0, 64.0};
  Eigen::VectorXd v(4), d(4);
  for (int k = 0; k < 4; ++k) {
    v[k] = 0.5 + 1.0 / r[k] - 2.0 / (r[k] * r[k]);
    d[k] = 3.0 * r[k] + 1.0;
  }
  const Extrapolated e = extrapolate(r, v, "v");
  CHECK(e.value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(e.error < 1e-2);
  CHECK_THROWS_AS(extrapolate(r, d, "d"), SolverError);
}

TEST_CASE("minkowski ladders: everything vanishes") {
  for (const char* name : {"minkowski", "minkowski-boosted-slice"}) {
    const AsymptoticFamily fam = sweep(name, params(0.0, 0.0, 0.3), {4.0, 8.0, 16.0, 32.0}, 12);
    for (const auto& q : fam.results) {
      CHECK(std::abs(q.energy) < 1e-8);
      CHECK(std::abs(q.rest.m) < 1e-8);
      CHECK(q.rest.Phi.cwiseAbs().maxCoeff() < 1e-8);
      CHECK(q.rest.p.cwiseAbs().maxCoeff() < 1e-8);
      CHECK(q.mass_vanishes);
    }
    const TotalCharges t = total_charges(fam);
    CHECK(t.mass_vanishes);
    CHECK(t.J.norm() < 1e-8);
    CHECK(t.C.norm() == 0.0);
  }
}

TEST_CASE("schwarzschild ladder: Brown-York energies decrease to m") {
  const AsymptoticFamily fam = sweep("schwarzschild-standard", params(1.0), {8.0, 16.0, 32.0, 64.0}, 12);
  double prev = INFINITY;
  for (const auto& q : fam.results) {
    const double r = q.radius;
    CHECK(q.energy == doctest::Approx(r * (1.0 - std::sqrt(1.0 - 2.0 / r))).epsilon(1e-8));
    CHECK(q.energy < prev);
    CHECK(q.energy > 1.0);
    prev = q.energy;
  }
  // standard coordinate spheres embed as exact round spheres of radius r
  for (const auto& q : fam.results) CHECK(q.round_deviation < 1e-12);
  CHECK(sweep_energy_momentum(fam).p[0] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("kerr ladder: J(r) stays at ma") {
  const AsymptoticFamily fam = sweep("kerr-bl", params(1.0, 0.5), {8.0, 16.0, 32.0}, 16);
  for (const auto& q : fam.results) CHECK(std::abs(q.jc.J[2] - 0.5) < 1e-8);
}

TEST_CASE("ADM energy-momentum: coefficient route and sweep limit") {
  {
    const AsymptoticFamily fam = sweep("schwarzschild-isotropic", params(1.0), kFar, 12);
    const ExpansionCoefficients c = expansion_coefficients(fam);
    CHECK(c.accepted);
    CHECK(c.h_m2.mean() == doctest::Approx(-4.0).epsilon(1e-8));  // isotropic: -2m - 2m
    CHECK(c.h0_m2.mean() == doctest::Approx(-2.0).epsilon(1e-8));
    const Vec4 p = adm_energy_momentum(c);
    const EnergyMomentumLimit s = sweep_energy_momentum(fam);
    CHECK((p - Vec4(1.0, 0.0, 0.0, 0.0)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((s.p - Vec4(1.0, 0.0, 0.0, 0.0)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(finiteness_integrals(c).max_abs() < 1e-8);
  }
  {
    const double w = 0.3;
    const AsymptoticFamily fam = sweep("schwarzschild-isotropic", params(1.0, 0.0, w), kFar, 12);
    const ExpansionCoefficients c = expansion_coefficients(fam);
    const Vec4 expected(std::cosh(w), std::sinh(w), 0.0, 0.0);
    const Vec4 p = adm_energy_momentum(c);
    const EnergyMomentumLimit s = sweep_energy_momentum(fam);
    CHECK((p - expected).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((s.p - expected).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(finiteness_integrals(c).max_abs() < 1e-8);
    for (std::size_t k = 1; k < fam.results.size(); ++k)
      CHECK(fam.results[k].round_deviation < fam.results[k - 1].round_deviation);
  }
}

TEST_CASE("finiteness integrals on catalog slices and a planted violation") {
  const ExpansionCoefficients schw = expansion_coefficients(sweep("schwarzschild-standard", params(1.0), kFar, 12));
  CHECK(finiteness_integrals(schw).max_abs() < 1e-8);
  CHECK(adm_energy_momentum(schw)[0] == doctest::Approx(1.0).epsilon(1e-6));
  const ExpansionCoefficients kerr = expansion_coefficients(sweep("kerr-bl", params(1.0, 0.5), kFar, 16));
  CHECK(finiteness_integrals(kerr).max_abs() < 1e-7);

  // h0(-2) - h(-2) gains amp X^1
  const double amp = 0.37;
  ExpansionCoefficients planted = schw;
  planted.h_m2 -= amp * planted.grid->unit_normal()[0];
  const Finiteness f = finiteness_integrals(planted);
  CHECK(f.energy_type[0] == doctest::Approx(amp * 4.0 * M_PI / 3.0).epsilon(1e-8));
  CHECK(std::abs(f.energy_type[1]) < 1e-8);
  CHECK(f.rotational_type.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("parallel and sequential sweeps agree") {
  const std::vector<double> radii{10.0, 20.0, 40.0};
  const AsymptoticFamily a = sweep("schwarzschild-isotropic", params(1.0, 0.0, 0.3), radii, 12, false);
  const AsymptoticFamily b = sweep("schwarzschild-isotropic", params(1.0, 0.0, 0.3), radii, 12, true);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    CHECK(std::abs(a.results[k].energy - b.results[k].energy) < 1e-9);
    CHECK((a.results[k].rest.Phi - b.results[k].rest.Phi).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((a.results[k].tau - b.results[k].tau).cwiseAbs().maxCoeff() < 1e-7 * radii[k]);
  }
}

TEST_CASE("total charges") {
  SUBCASE("kerr") {
    const TotalCharges t = total_charges(sweep("kerr-bl", params(1.0, 0.5), {8.0, 16.0, 32.0, 64.0}, 16));
    CHECK(std::abs(t.J[2] - 0.5) < 1e-3);
    CHECK(t.J_error.maxCoeff() <= 1e-3);
    CHECK(t.J.head<2>().norm() < 1e-6);
    CHECK(t.C.norm() < 1e-6);
  }
  SUBCASE("centered schwarzschild") {
    const TotalCharges t = total_charges(sweep("schwarzschild-isotropic", params(1.0), {8.0, 16.0, 32.0, 64.0}, 12));
    CHECK(t.C.norm() < 1e-6);
    CHECK(t.J.norm() < 1e-6);
    CHECK(t.m == doctest::Approx(1.0).epsilon(1e-4));
  }
  SUBCASE("translated schwarzschild, two disjoint ladders") {
    SpacetimeParams p = params(1.0);
    p.translation = Eigen::Vector3d(2.0, 0.0, 0.0);
    const TotalCharges a = total_charges(sweep("schwarzschild-translated", p, {10.0, 20.0, 40.0, 80.0, 160.0}, 16));
    const TotalCharges b = total_charges(sweep("schwarzschild-translated", p, {15.0, 30.0, 60.0, 120.0, 240.0}, 16));
    CHECK(std::abs(a.C[0] - 2.0) < 1e-3);
    CHECK(a.C.tail<2>().norm() < 1e-6);
    CHECK(a.J.norm() < 1e-6);
    CHECK(std::abs(a.C[0] - b.C[0]) <= a.C_error[0] + b.C_error[0] + 1e-12);
  }
}

TEST_CASE("sweep errors") {
  auto kerr = catalog_get("kerr-bl", params(1.0, 0.5));
  CHECK_THROWS_AS(sweep_family(*kerr, {1.5, 8.0}), ValidationError);  // inside the excluded region
  CHECK_THROWS_AS(sweep_family(*kerr, {8.0, 8.0}), ValidationError);
  SweepOptions o;
  o.band_limit = 12;
  o.oie.max_iterations = 0;
  auto boosted = catalog_get("schwarzschild-isotropic", params(1.0, 0.0, 0.3));
  try {
    sweep_family(*boosted, {10.0, 20.0}, o);
    FAIL("expected a solver failure");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("r = 10") != std::string::npos);
  }
}
