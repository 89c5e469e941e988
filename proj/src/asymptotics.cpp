#include "qlcq/asymptotics.hpp"

#include "qlcq/errors.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <atomic>
#include <limits>
#include <optional>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

namespace qlcq {

namespace {

constexpr double kMassFloor = 1e-10;

std::string radius_tag(double r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, " (coordinate sphere r = %.17g)", r);
  return buf;
}

template <class F>
auto at_radius(double r, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SolverError& e) {
    throw SolverError(e.what() + radius_tag(r));
  } catch (const GeometryError& e) {
    throw GeometryError(e.what() + radius_tag(r));
  } catch (const ValidationError& e) {
    throw ValidationError(e.what() + radius_tag(r));
  }
}

Mat4 lorentz_inverse(const Mat4& L) {
  const Mat4 eta = Vec4(-1.0, 1.0, 1.0, 1.0).asDiagonal();
  return eta * L.transpose() * eta;
}

void check_radii(const std::vector<double>& radii, std::size_t min_count) {
  if (radii.size() < min_count)
    throw ValidationError("need at least " + std::to_string(min_count) + " radii, got " + std::to_string(radii.size()));
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(std::isfinite(radii[k]) && radii[k] > 0.0)) throw ValidationError("radii must be positive and finite");
    if (k > 0 && !(radii[k] > radii[k - 1])) throw ValidationError("radii must be strictly increasing");
  }
}

}  // namespace

QuasiLocalResult quasi_local(const Spacetime& st, const Surface& surface, double radius, GridPtr grid,
                             const OIEOptions& opts, const SphericalField* tau_seed) {
  const InducedData d = induced_data(st, surface, grid);
  const OIESolution sol = solve_oie(d.geometry, tau_seed, opts);
  const SphereGrid& G = *grid;

  QuasiLocalResult q;
  q.radius = radius;
  q.energy = sol.energy.energy;
  q.residual = sol.residual;
  q.iterations = sol.iterations;
  q.krylov_iterations = sol.krylov_iterations;
  q.set = conserved_matrix(d, sol);
  q.observer_boost = fit_observer_boost(sol.embedding);
  const Mat4 inv = lorentz_inverse(q.observer_boost);
  q.rest = lorentz_act(q.set, inv);
  q.mass_vanishes = !(q.rest.m > kMassFloor);
  if (!q.mass_vanishes) q.jc = extract_J_C(q.rest);

  const EmbeddingState X = lorentz_act(anchor_to_coordinates(sol.embedding, d), inv);
  Vec4 mean = Vec4::Zero();
  for (int i = 0; i < G.size(); ++i)
    mean += G.weights()[i] * Vec4(X.X[0][i], X.X[1][i], X.X[2][i], X.X[3][i]);
  mean /= 4.0 * M_PI;
  for (int i = 0; i < G.size(); ++i) {
    const Vec4 round(0.0, radius * G.unit_normal()[0][i], radius * G.unit_normal()[1][i],
                     radius * G.unit_normal()[2][i]);
    const Vec4 xi(X.X[0][i], X.X[1][i], X.X[2][i], X.X[3][i]);
    q.round_deviation = std::max(q.round_deviation, (xi - mean - round).norm() / radius);
  }

  q.sigma = d.geometry.sigma();
  q.normH = d.geometry.normH;
  q.alphaH = d.geometry.alphaH;
  q.tau = sol.embedding.tau();
  if (q.tau.cwiseAbs().maxCoeff() == 0.0) {
    q.normH0 = sol.reference.normH0;
  } else {
    const SphericalField zero = SphericalField::Zero(G.size());
    q.normH0 = reference_data(grid, embed_weyl(d.geometry.metric, opts.weyl).X, zero).normH0;
  }
  return q;
}

AsymptoticFamily sweep_family(const Spacetime& st, const std::vector<double>& radii, const SweepOptions& opts) {
  check_radii(radii, 1);
  if (radii.front() <= st.excluded_radius())
    throw ValidationError("smallest radius lies inside the excluded region of '" + st.name() + "'");
  AsymptoticFamily fam;
  fam.grid = make_grid(opts.band_limit);
  fam.radii = radii;
  const int n = static_cast<int>(radii.size());
  std::vector<std::optional<QuasiLocalResult>> out(n);

  auto solve_one = [&](int k, const SphericalField* seed) {
    const double r = radii[k];
    out[k] = at_radius(r, [&] { return quasi_local(st, *st.coordinate_sphere(r), r, fam.grid, opts.oie, seed); });
  };

  if (!opts.parallel) {
    for (int k = 0; k < n; ++k) {
      SphericalField seed;
      if (k > 0) seed = out[k - 1]->tau * (radii[k] / radii[k - 1]);
      solve_one(k, k > 0 ? &seed : nullptr);
    }
  } else {
    int threads = opts.threads > 0 ? opts.threads : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, n));
    std::vector<std::exception_ptr> errors(n);
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int k = next++; k < n; k = next++) {
          try {
            solve_one(k, nullptr);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  for (auto& r : out) fam.results.push_back(std::move(*r));
  return fam;
}

ExpansionFit fit_expansion(const std::vector<double>& radii, const Eigen::MatrixXd& samples,
                           const std::vector<int>& powers, double max_condition, double noise_floor) {
  if (powers.empty()) throw ValidationError("no powers to fit");
  check_radii(radii, powers.size() + 1);
  if (radii.back() < 4.0 * radii.front()) throw ValidationError("radii must span a factor of at least 4");
  const int n = static_cast<int>(radii.size()), P = static_cast<int>(powers.size());
  if (samples.rows() != n) throw ValidationError("one sample row per radius is required");
  if (!samples.allFinite()) throw ValidationError("samples must be finite");

  const double r0 = radii.front();
  Eigen::MatrixXd A(n, P);
  for (int k = 0; k < n; ++k)
    for (int p = 0; p < P; ++p) A(k, p) = std::pow(radii[k] / r0, -powers[p]);
  const Eigen::VectorXd scale = A.colwise().norm().transpose();
  A = A * scale.cwiseInverse().asDiagonal();

  ExpansionFit fit;
  fit.powers = powers;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  fit.condition = s(0) / s(P - 1);
  if (!(fit.condition <= max_condition)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "ill-conditioned expansion fit (Vandermonde condition %.3e)", fit.condition);
    throw SolverError(buf);
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  const Eigen::MatrixXd c = qr.solve(samples);
  fit.coefficients.resize(P, samples.cols());
  for (int p = 0; p < P; ++p) fit.coefficients.row(p) = c.row(p) * (std::pow(r0, powers[p]) / scale[p]);
  fit.residual = ((A * c - samples).colwise().norm() / std::sqrt(static_cast<double>(n))).transpose();

  // judged over all series at once: a coefficient field may cross zero at some nodes
  const double rmin = radii.front();
  const double floor = std::max(noise_floor, 1e-13 * samples.cwiseAbs().maxCoeff());
  double smallest = std::numeric_limits<double>::infinity();
  for (int p = 0; p < P; ++p) {
    const double term = fit.coefficients.row(p).cwiseAbs().maxCoeff() * std::pow(rmin, -powers[p]);
    if (term > 10.0 * floor) smallest = std::min(smallest, term);
  }
  const double ok = std::isfinite(smallest) ? std::max(1e-3 * smallest, floor) : floor;
  fit.accepted = fit.residual.maxCoeff() <= ok;
  return fit;
}

ExpansionFit fit_expansion(const std::vector<double>& radii, const Eigen::VectorXd& samples,
                           const std::vector<int>& powers, double max_condition, double noise_floor) {
  return fit_expansion(radii, Eigen::MatrixXd(samples), powers, max_condition, noise_floor);
}

ExpansionCoefficients expansion_coefficients(const AsymptoticFamily& fam) {
  const int n = static_cast<int>(fam.results.size());
  if (n < 3) throw ValidationError("expansion fits need at least 3 radii");
  const SphereGrid& G = *fam.grid;
  const int N = G.size();
  const int K = std::min(n - 1, 5);
  auto range = [&](int first) {
    std::vector<int> p(K);
    for (int i = 0; i < K; ++i) p[i] = first + i;
    return p;
  };

  ExpansionCoefficients out;
  out.grid = fam.grid;
  out.accepted = true;
  auto take = [&](const ExpansionFit& f) {
    out.condition = std::max(out.condition, f.condition);
    out.accepted = out.accepted && f.accepted;
  };
  auto row = [&](const ExpansionFit& f, int p, int block) -> SphericalField {
    if (p >= static_cast<int>(f.powers.size())) return SphericalField::Zero(N);
    return f.coefficients.row(p).segment(block * N, N).transpose();
  };

  // |H| - 2/r and |H0| - 2/r: powers 2, 3, ...
  Eigen::MatrixXd h(n, 2 * N);
  for (int k = 0; k < n; ++k) {
    const auto& q = fam.results[k];
    h.row(k) << (q.normH.array() - 2.0 / q.radius).matrix().transpose(),
        (q.normH0.array() - 2.0 / q.radius).matrix().transpose();
  }
  const ExpansionFit fh = fit_expansion(fam.radii, h, range(2));
  take(fh);
  out.h_m2 = row(fh, 0, 0);
  out.h_m3 = row(fh, 1, 0);
  out.h0_m2 = row(fh, 0, 1);

  // sigma / r^2 - sigma~: powers 1, 2, ... (dimensionless, so round-off stays relative)
  const SphericalField sin2 = G.sin_theta().array().square().matrix();
  Eigen::MatrixXd s(n, 3 * N);
  for (int k = 0; k < n; ++k) {
    const auto& q = fam.results[k];
    const double r2 = q.radius * q.radius;
    s.row(k) << (q.sigma.tt.array() / r2 - 1.0).matrix().transpose(), (q.sigma.tp / r2).transpose(),
        (q.sigma.pp / r2 - sin2).transpose();
  }
  const ExpansionFit fs = fit_expansion(fam.radii, s, range(1), 1e10, 1e-14);
  take(fs);
  out.sigma1 = SphericalTwoTensor{row(fs, 0, 0), row(fs, 0, 1), row(fs, 0, 2)};
  out.sigma0 = SphericalTwoTensor{row(fs, 1, 0), row(fs, 1, 1), row(fs, 1, 2)};

  // alpha_H: powers 1, 2, ...; it is a difference of O(1) terms, so its round-off is absolute
  Eigen::MatrixXd a(n, 2 * N);
  for (int k = 0; k < n; ++k) a.row(k) << fam.results[k].alphaH.th.transpose(), fam.results[k].alphaH.ph.transpose();
  const ExpansionFit fa = fit_expansion(fam.radii, a, range(1), 1e10, 1e-13);
  take(fa);
  out.alpha_m1 = SphericalOneForm{row(fa, 0, 0), row(fa, 0, 1)};
  out.alpha_m2 = SphericalOneForm{row(fa, 1, 0), row(fa, 1, 1)};
  return out;
}

Vec4 adm_energy_momentum(const ExpansionCoefficients& c) {
  if (!c.grid) throw ValidationError("expansion coefficients are missing");
  const SurfaceMetric U = SurfaceMetric::round(c.grid, 1.0);
  const SphereGrid& G = *c.grid;
  for (const SphericalField* f : {&c.h_m2, &c.h0_m2, &c.alpha_m1.th, &c.alpha_m1.ph})
    G.check_field(*f, "expansion coefficient");
  Vec4 p;
  p[0] = U.integrate(c.h0_m2 - c.h_m2) / (8.0 * M_PI);
  const SphericalField div = divergence(U, c.alpha_m1);
  // alpha_H carries the opposite orientation to the one this formula assumes
  // (alpha(e_a) = K(e_a, v) with K = -nabla n): a source moving along +x has p^1 > 0
  for (int i = 0; i < 3; ++i) p[i + 1] = -U.integrate(G.unit_normal()[i].cwiseProduct(div)) / (8.0 * M_PI);
  return p;
}

Finiteness finiteness_integrals(const ExpansionCoefficients& c) {
  if (!c.grid) throw ValidationError("expansion coefficients are missing");
  const SurfaceMetric U = SurfaceMetric::round(c.grid, 1.0);
  const SphereGrid& G = *c.grid;
  const SphericalField dh = c.h0_m2 - c.h_m2;
  const SphericalField rot = rotational_divergence(U, c.alpha_m1);
  Finiteness f;
  for (int i = 0; i < 3; ++i) {
    f.energy_type[i] = U.integrate(G.unit_normal()[i].cwiseProduct(dh));
    f.rotational_type[i] = U.integrate(G.unit_normal()[i].cwiseProduct(rot));
  }
  return f;
}

Extrapolated extrapolate(const std::vector<double>& radii, const Eigen::VectorXd& v, const std::string& what) {
  check_radii(radii, 3);
  const int n = static_cast<int>(radii.size());
  if (v.size() != n) throw ValidationError("one value per radius is required for " + what);
  const double tol = 1e-9 * std::max(1.0, v.cwiseAbs().maxCoeff());
  const double last = std::abs(v[n - 1] - v[n - 2]), prev = std::abs(v[n - 2] - v[n - 3]);
  if (last > tol && last > 0.9 * prev) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s does not converge along the radius ladder (last increments %.3e, %.3e)",
                  what.c_str(), prev, last);
    throw SolverError(buf);
  }
  const int K = std::min(n - 1, 4);
  std::vector<int> hi(K), lo(K - 1);
  for (int p = 0; p < K; ++p) hi[p] = p;
  for (int p = 0; p < K - 1; ++p) lo[p] = p;
  const double a = fit_expansion(radii, v, hi).coefficients(0, 0);
  const double b = fit_expansion(radii, v, lo).coefficients(0, 0);
  return {a, std::abs(a - b)};
}

EnergyMomentumLimit sweep_energy_momentum(const AsymptoticFamily& fam) {
  const int n = static_cast<int>(fam.results.size());
  EnergyMomentumLimit out;
  for (int nu = 0; nu < 4; ++nu) {
    Eigen::VectorXd v(n);
    for (int k = 0; k < n; ++k) v[k] = fam.results[k].rest.p[nu];
    const Extrapolated e = extrapolate(fam.radii, v, "p^" + std::to_string(nu));
    out.p[nu] = e.value;
    out.error[nu] = e.error;
  }
  return out;
}

TotalCharges total_charges(const AsymptoticFamily& fam) {
  const int n = static_cast<int>(fam.results.size());
  TotalCharges out;
  Eigen::VectorXd m(n);
  for (int k = 0; k < n; ++k) m[k] = fam.results[k].rest.m;
  out.m = extrapolate(fam.radii, m, "m").value;
  out.mass_vanishes = !(out.m > kMassFloor);

  for (int nu = 0; nu < 4; ++nu) {
    Eigen::VectorXd v(n);
    for (int k = 0; k < n; ++k) v[k] = fam.results[k].rest.t0[nu];
    out.t0[nu] = extrapolate(fam.radii, v, "t0^" + std::to_string(nu)).value;
  }
  const double norm2 = out.t0[0] * out.t0[0] - out.t0.tail<3>().squaredNorm();
  if (!(norm2 > 0.0 && out.t0[0] > 0.0)) throw SolverError("limit observer is not future timelike");
  out.t0 /= std::sqrt(norm2);
  const Mat4 L = boost_to(out.t0);

  Eigen::MatrixXd CJ(n, 6);
  for (int k = 0; k < n; ++k) {
    const AngularMomentumCenter jc = contract_J_C(fam.results[k].rest.Phi, L, out.mass_vanishes ? 1.0 : out.m);
    CJ.row(k) << jc.C.transpose(), jc.J.transpose();
  }
  static const char* names[6] = {"C^1", "C^2", "C^3", "J_1", "J_2", "J_3"};
  for (int c = 0; c < 6; ++c) {
    if (c < 3 && out.mass_vanishes) continue;
    const Extrapolated e = extrapolate(fam.radii, CJ.col(c), names[c]);
    (c < 3 ? out.C : out.J)[c % 3] = e.value;
    (c < 3 ? out.C_error : out.J_error)[c % 3] = e.error;
  }
  return out;
}

}  // namespace qlcq
