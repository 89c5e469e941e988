#include "qlcq/cli_reports.hpp"

#include "qlcq/constraints.hpp"
#include "qlcq/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace qlcq {

namespace {

using ojson = nlohmann::ordered_json;

constexpr const char* kSchema = "qlcq-result/1";
constexpr const char* kVersion = "0.1.0";

// Tolerances of the validate pipeline.
constexpr double kConstraintTol = 1e-7;
constexpr double kFrameTol = 1e-12;
constexpr double kWeylRoundtripTol = 1e-9;
constexpr double kEnergyIdentityTol = 1e-9;
constexpr double kGaugeTol = 1e-8;

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw ValidationError("config field '" + field + "': " + what);
}

void reject_unknown(const nlohmann::json& j, const std::string& where, std::initializer_list<const char*> known) {
  if (!j.is_object()) bad(where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) bad(where.empty() ? it.key() : where + "." + it.key(), "unknown field");
  }
}

template <class T>
void read(const nlohmann::json& j, const char* key, const std::string& where, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    bad(where + "." + key, "wrong type");
  }
}

void read_vec3(const nlohmann::json& j, const char* key, const std::string& where, Eigen::Vector3d& out) {
  if (!j.contains(key)) return;
  std::vector<double> v;
  read(j, key, where, v);
  if (v.size() != 3) bad(where + "." + key, "expected three numbers");
  out = Eigen::Vector3d(v[0], v[1], v[2]);
}

ojson vec(const Eigen::VectorXd& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ojson mat(const Mat4& m) {
  ojson a = ojson::array();
  for (int i = 0; i < 4; ++i) a.push_back(vec(m.row(i).transpose()));
  return a;
}

std::shared_ptr<const Surface> surface_for(const RunConfig& c, const Spacetime& st, double r) {
  if (c.p2_amplitude == 0.0 && c.center.isZero()) return st.coordinate_sphere(r);
  SphereSpec spec;
  spec.radius = r;
  spec.oblateness = c.spacetime == "kerr-bl" ? c.params.spin : 0.0;
  spec.p2_amplitude = c.p2_amplitude;
  spec.center = c.center;
  return make_sphere(spec);
}

OIEOptions oie_options(const RunConfig& c) {
  OIEOptions o;
  o.tolerance = c.tolerance;
  o.max_iterations = c.max_iterations;
  o.weyl.tolerance = c.weyl_tolerance;
  return o;
}

ojson grid_json(const SphereGrid& G) {
  ojson g;
  g["band_limit"] = G.band_limit();
  g["n_theta"] = G.n_theta();
  g["n_phi"] = G.n_phi();
  g["nodes"] = G.size();
  return g;
}

const std::vector<std::string> kSurfaceColumns{"radius", "energy", "mass", "p0", "p1", "p2", "p3",
                                                "J1", "J2", "J3", "C1", "C2", "C3", "residual", "iterations"};

std::vector<double> surface_row(const QuasiLocalResult& q) {
  return {q.radius,    q.energy,    q.rest.m,    q.rest.p[0], q.rest.p[1], q.rest.p[2],  q.rest.p[3],          q.jc.J[0],
          q.jc.J[1],   q.jc.J[2],   q.jc.C[0],   q.jc.C[1],   q.jc.C[2],   q.residual, double(q.iterations)};
}

ojson surface_json(const QuasiLocalResult& q) {
  ojson s;
  s["radius"] = q.radius;
  s["energy"] = q.energy;
  s["mass"] = q.rest.m;
  s["p"] = vec(q.rest.p);
  s["Phi"] = mat(q.rest.Phi);
  s["J"] = vec(q.jc.J);
  s["C"] = vec(q.jc.C);
  s["center_of_mass_defined"] = !q.mass_vanishes;
  s["observer"] = vec(q.rest.t0);
  s["solved_gauge"] = {{"p", vec(q.set.p)}, {"Phi", mat(q.set.Phi)}};
  s["round_deviation"] = q.round_deviation;
  s["solver"] = {{"residual", q.residual}, {"newton_iterations", q.iterations},
                 {"krylov_iterations", q.krylov_iterations}};
  return s;
}

ResultDocument header(const RunConfig& c) {
  ResultDocument doc;
  doc.json["schema"] = kSchema;
  doc.json["version"] = kVersion;
  doc.json["mode"] = c.mode;
  doc.json["input"] = config_to_json(c);
  return doc;
}

ResultDocument run_compute(const RunConfig& c) {
  ResultDocument doc = header(c);
  const SpacetimePtr st = catalog_get(c.spacetime, c.params);
  const auto surface = surface_for(c, *st, c.radius);
  const GridPtr grid = make_grid(c.band_limit);
  doc.json["grid"] = grid_json(*grid);
  const QuasiLocalResult q = quasi_local(*st, *surface, c.radius, grid, oie_options(c));
  ojson s = surface_json(q);
  if (st->axisymmetric() && surface->axisymmetric())
    s["komar_angular_momentum"] = komar_angular_momentum(*st, *surface, grid);
  doc.json["surfaces"] = ojson::array({s});
  doc.columns = kSurfaceColumns;
  doc.rows.push_back(surface_row(q));
  return doc;
}

ResultDocument run_sweep(const RunConfig& c) {
  ResultDocument doc = header(c);
  const SpacetimePtr st = catalog_get(c.spacetime, c.params);
  if (c.p2_amplitude != 0.0 || !c.center.isZero())
    throw ValidationError("config field 'surface': sweeps use coordinate spheres (no p2_amplitude or center)");
  SweepOptions so;
  so.band_limit = c.band_limit;
  so.oie = oie_options(c);
  so.parallel = c.parallel;
  so.threads = c.threads;
  const AsymptoticFamily fam = sweep_family(*st, c.radii, so);
  doc.json["grid"] = grid_json(*fam.grid);
  ojson surfaces = ojson::array();
  doc.columns = kSurfaceColumns;
  for (const auto& q : fam.results) {
    surfaces.push_back(surface_json(q));
    doc.rows.push_back(surface_row(q));
  }
  doc.json["surfaces"] = surfaces;

  ojson family;
  const bool enough = c.radii.size() >= 3 && c.radii.back() >= 4.0 * c.radii.front();
  family["analyzed"] = enough;
  if (enough) {
    const ExpansionCoefficients coeffs = expansion_coefficients(fam);
    const EnergyMomentumLimit lim = sweep_energy_momentum(fam);
    const Finiteness fin = finiteness_integrals(coeffs);
    const TotalCharges tot = total_charges(fam);
    family["expansion"] = {{"condition", coeffs.condition}, {"accepted", coeffs.accepted}};
    family["energy_momentum"] = {{"coefficients", vec(adm_energy_momentum(coeffs))},
                                 {"sweep_limit", vec(lim.p)},
                                 {"sweep_limit_error", vec(lim.error)}};
    family["finiteness"] = {{"energy_type", vec(fin.energy_type)}, {"rotational_type", vec(fin.rotational_type)}};
    family["totals"] = {{"mass", tot.m},
                        {"observer", vec(tot.t0)},
                        {"C", vec(tot.C)},
                        {"C_error", vec(tot.C_error)},
                        {"J", vec(tot.J)},
                        {"J_error", vec(tot.J_error)},
                        {"center_of_mass_defined", !tot.mass_vanishes}};
  } else {
    family["note"] = "family analysis needs at least 3 radii spanning a factor of 4";
  }
  doc.json["family"] = family;
  return doc;
}

ResultDocument run_embed(const RunConfig& c) {
  ResultDocument doc = header(c);
  const SpacetimePtr st = catalog_get(c.spacetime, c.params);
  const GridPtr grid = make_grid(c.band_limit);
  const InducedData d = induced_data(*st, *surface_for(c, *st, c.radius), grid);
  WeylOptions wo;
  wo.tolerance = c.weyl_tolerance;
  wo.max_iterations = c.max_iterations;
  const WeylResult w = embed_weyl(d.geometry.metric, wo);
  const SphereGrid& G = *grid;
  const SphericalField zero = SphericalField::Zero(G.size());
  const ReferenceData ref = reference_data(grid, w.X, zero);
  const SphericalTwoTensor back = induced_metric(G, w.X);
  const SphericalTwoTensor& s = d.geometry.sigma();
  const double scale = d.geometry.metric.area() / (4.0 * M_PI);
  const double roundtrip =
      std::max({(back.tt - s.tt).cwiseAbs().maxCoeff(), (back.tp - s.tp).cwiseAbs().maxCoeff(),
                (back.pp - s.pp).cwiseAbs().maxCoeff()}) / scale;
  doc.json["grid"] = grid_json(G);
  doc.json["embedding"] = {{"iterations", w.iterations},
                           {"residual", w.residual},
                           {"roundtrip_error", roundtrip},
                           {"area", d.geometry.metric.area()},
                           {"mean_curvature_min", ref.normH0.minCoeff()},
                           {"mean_curvature_max", ref.normH0.maxCoeff()}};
  doc.columns = {"theta", "phi", "x", "y", "z", "mean_curvature"};
  for (int i = 0; i < G.size(); ++i)
    doc.rows.push_back({G.theta()[i], G.phi()[i], w.X[0][i], w.X[1][i], w.X[2][i], ref.normH0[i]});
  return doc;
}

ResultDocument run_validate(const RunConfig& c) {
  ResultDocument doc = header(c);
  const SpacetimePtr st = catalog_get(c.spacetime, c.params);
  const GridPtr grid = make_grid(c.band_limit);
  doc.json["grid"] = grid_json(*grid);
  ojson checks = ojson::array();
  auto check = [&](const std::string& name, double radius, double value, double tol) {
    const bool pass = value < tol;
    checks.push_back({{"check", name}, {"radius", radius}, {"value", value}, {"tolerance", tol}, {"pass", pass}});
    if (!pass) ++doc.failed_checks;
  };

  const std::vector<double> radii = c.radii.empty() ? std::vector<double>{c.radius} : c.radii;
  const SlicePtr slice = spacetime_slice(st);
  const GridPtr coarse = make_grid(8);
  for (double r : radii) {
    const auto surface = surface_for(c, *st, r);
    const InducedData d = induced_data(*st, *surface, grid);

    double ham = 0.0, mom = 0.0;
    const InducedData dc = induced_data(*st, *surface, coarse);
    for (const Vec4& x : dc.frame.x) {
      const ConstraintResidual cr = constraint_residual(*slice, x.tail<3>());
      ham = std::max(ham, std::abs(cr.hamiltonian));
      mom = std::max(mom, cr.momentum.cwiseAbs().maxCoeff());
    }
    check("hamiltonian_constraint", r, ham, kConstraintTol);
    check("momentum_constraint", r, mom, kConstraintTol);
    check("frame_orthonormality", r, frame_orthonormality_error(d.frame), kFrameTol);

    const SphericalField rapidity = 0.2 * grid->unit_normal()[2];
    check("frame_gauge_invariance", r, frame_gauge_invariance_check(*st, *surface, grid, rapidity), kGaugeTol);

    const WeylResult w = embed_weyl(d.geometry.metric);
    const SphericalTwoTensor back = induced_metric(*grid, w.X);
    const SphericalTwoTensor& s = d.geometry.sigma();
    const double scale = d.geometry.metric.area() / (4.0 * M_PI);
    check("weyl_roundtrip", r,
          std::max({(back.tt - s.tt).cwiseAbs().maxCoeff(), (back.tp - s.tp).cwiseAbs().maxCoeff(),
                    (back.pp - s.pp).cwiseAbs().maxCoeff()}) / scale,
          kWeylRoundtripTol);

    const OIESolution sol = solve_oie(d.geometry, nullptr, oie_options(c));
    check("oie_residual", r, sol.residual, c.tolerance);
    check("energy_identity", r, sol.energy.deviation, kEnergyIdentityTol);
  }
  doc.json["checks"] = checks;
  doc.json["failed"] = doc.failed_checks;
  return doc;
}

}  // namespace

void apply_config_json(RunConfig& c, const nlohmann::json& j) {
  reject_unknown(j, "", {"spacetime", "surface", "solver", "output"});
  if (j.contains("spacetime")) {
    const auto& s = j["spacetime"];
    reject_unknown(s, "spacetime", {"name", "mass", "spin", "rapidity", "translation"});
    read(s, "name", "spacetime", c.spacetime);
    read(s, "mass", "spacetime", c.params.mass);
    read(s, "spin", "spacetime", c.params.spin);
    read(s, "rapidity", "spacetime", c.params.rapidity);
    read_vec3(s, "translation", "spacetime", c.params.translation);
  }
  if (j.contains("surface")) {
    const auto& s = j["surface"];
    reject_unknown(s, "surface", {"radius", "radii", "p2_amplitude", "center"});
    read(s, "radius", "surface", c.radius);
    read(s, "radii", "surface", c.radii);
    read(s, "p2_amplitude", "surface", c.p2_amplitude);
    read_vec3(s, "center", "surface", c.center);
  }
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    reject_unknown(s, "solver",
                   {"band_limit", "tolerance", "weyl_tolerance", "max_iterations", "parallel", "threads"});
    read(s, "band_limit", "solver", c.band_limit);
    read(s, "tolerance", "solver", c.tolerance);
    read(s, "weyl_tolerance", "solver", c.weyl_tolerance);
    read(s, "max_iterations", "solver", c.max_iterations);
    read(s, "parallel", "solver", c.parallel);
    read(s, "threads", "solver", c.threads);
  }
  if (j.contains("output")) {
    const auto& s = j["output"];
    reject_unknown(s, "output", {"path", "format"});
    read(s, "path", "output", c.out);
    read(s, "format", "output", c.format);
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  RunConfig c;
  apply_config_json(c, j);
  return c;
}

nlohmann::ordered_json config_to_json(const RunConfig& c) {
  ojson j;
  j["spacetime"] = {{"name", c.spacetime},
                    {"mass", c.params.mass},
                    {"spin", c.params.spin},
                    {"rapidity", c.params.rapidity},
                    {"translation", vec(c.params.translation)}};
  ojson radii = ojson::array();
  for (double r : c.radii) radii.push_back(r);
  j["surface"] = {{"radius", c.radius}, {"radii", radii}, {"p2_amplitude", c.p2_amplitude}, {"center", vec(c.center)}};
  j["solver"] = {{"band_limit", c.band_limit},         {"tolerance", c.tolerance}, {"weyl_tolerance", c.weyl_tolerance},
                 {"max_iterations", c.max_iterations}, {"parallel", c.parallel},   {"threads", c.threads}};
  j["output"] = {{"path", c.out}, {"format", c.format}};
  return j;
}

void validate_config(const RunConfig& c) {
  if (c.mode != "compute" && c.mode != "sweep" && c.mode != "embed" && c.mode != "validate")
    bad("mode", "must be compute, sweep, embed or validate");
  try {
    catalog_get(c.spacetime, c.params);
  } catch (const ValidationError& e) {
    bad("spacetime", e.what());
  }
  if (c.band_limit < 8) bad("solver.band_limit", "must be at least 8");
  if (c.band_limit > 64) bad("solver.band_limit", "must be at most 64");
  if (!(c.tolerance > 0.0) || !std::isfinite(c.tolerance)) bad("solver.tolerance", "must be positive");
  if (!(c.weyl_tolerance > 0.0) || !std::isfinite(c.weyl_tolerance)) bad("solver.weyl_tolerance", "must be positive");
  if (c.max_iterations < 0) bad("solver.max_iterations", "must be non-negative");
  if (c.threads < 0) bad("solver.threads", "must be non-negative");
  if (!(c.radius > 0.0) || !std::isfinite(c.radius)) bad("surface.radius", "must be positive");
  for (std::size_t k = 0; k < c.radii.size(); ++k) {
    if (!(c.radii[k] > 0.0) || !std::isfinite(c.radii[k])) bad("surface.radii", "must be positive");
    if (k > 0 && !(c.radii[k] > c.radii[k - 1])) bad("surface.radii", "must be strictly increasing");
  }
  if (c.mode == "sweep" && c.radii.empty()) bad("surface.radii", "a sweep needs a radius ladder");
  if (!std::isfinite(c.p2_amplitude) || std::abs(c.p2_amplitude) >= 0.5)
    bad("surface.p2_amplitude", "must be finite with magnitude below 0.5");
  if (!c.center.allFinite()) bad("surface.center", "must be finite");
  if (c.format != "json" && c.format != "csv") bad("output.format", "must be json or csv");
}

ResultDocument run(const RunConfig& c) {
  validate_config(c);
  if (c.mode == "compute") return run_compute(c);
  if (c.mode == "sweep") return run_sweep(c);
  if (c.mode == "embed") return run_embed(c);
  return run_validate(c);
}

std::string to_json_text(const ResultDocument& doc) { return doc.json.dump(2) + "\n"; }

std::string to_csv(const ResultDocument& doc) {
  std::ostringstream out;
  for (std::size_t i = 0; i < doc.columns.size(); ++i) out << (i ? "," : "") << doc.columns[i];
  out << "\n";
  char buf[32];
  for (const auto& row : doc.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      out << (i ? "," : "") << buf;
    }
    out << "\n";
  }
  return out.str();
}

void emit(const ResultDocument& doc, const std::string& format, const std::string& out) {
  if (format != "json" && format != "csv") throw ValidationError("output format must be json or csv");
  const std::string text = format == "json" ? to_json_text(doc) : to_csv(doc);
  if (out.empty()) {
    std::cout << text;
    return;
  }
  auto write = [](const std::filesystem::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary);
    if (!f || !(f << s)) throw Error("cannot write '" + p.string() + "'");
  };
  write(out, text);
  if (!doc.rows.empty()) {
    std::string plot = "#";
    for (const auto& c : doc.columns) plot += " " + c;
    plot += "\n";
    const std::string csv = to_csv(doc);
    std::string body = csv.substr(csv.find('\n') + 1);
    for (char& ch : body)
      if (ch == ',') ch = ' ';
    std::filesystem::path p(out);
    write(p.parent_path() / (p.stem().string() + ".plot.dat"), plot + body);
  }
}

}  // namespace qlcq
