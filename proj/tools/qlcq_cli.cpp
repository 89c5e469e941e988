// Command-line front end: compute, sweep, embed and validate.
#include "qlcq/cli_reports.hpp"
#include "qlcq/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

enum Exit { kOk = 0, kInternal = 1, kValidation = 2, kNoConvergence = 3 };

struct Flags {
  std::string config;
  std::optional<std::string> spacetime;
  std::optional<double> mass, spin, radius, tol;
  std::vector<double> radii;
  std::optional<int> band_limit;
  std::optional<std::string> out, format;
  bool parallel = false;
};

void add_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON configuration file")->check(CLI::ExistingFile);
  app->add_option("--spacetime", f.spacetime, "catalog entry (minkowski, schwarzschild-standard, kerr-bl, ...)");
  app->add_option("--mass", f.mass, "mass parameter");
  app->add_option("--spin", f.spin, "Kerr spin parameter a");
  app->add_option("--radius", f.radius, "coordinate radius of the surface");
  app->add_option("--radii", f.radii, "radius ladder for sweeps (strictly increasing)")->delimiter(',');
  app->add_option("--band-limit", f.band_limit, "spherical harmonic band limit L");
  app->add_option("--tol", f.tol, "optimal embedding tolerance");
  app->add_option("--out", f.out, "output file (stdout if omitted)");
  app->add_option("--format", f.format, "json or csv");
  app->add_flag("--parallel", f.parallel, "solve the radius ladder on a thread pool");
}

qlcq::RunConfig resolve(const std::string& mode, const Flags& f) {
  qlcq::RunConfig c = f.config.empty() ? qlcq::RunConfig{} : qlcq::load_config(f.config);
  c.mode = mode;
  if (f.spacetime) c.spacetime = *f.spacetime;
  if (f.mass) c.params.mass = *f.mass;
  if (f.spin) c.params.spin = *f.spin;
  if (f.radius) c.radius = *f.radius;
  if (!f.radii.empty()) c.radii = f.radii;
  if (f.band_limit) c.band_limit = *f.band_limit;
  if (f.tol) c.tolerance = *f.tol;
  if (f.out) c.out = *f.out;
  if (f.format) c.format = *f.format;
  if (f.parallel) c.parallel = true;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-local energy, angular momentum and center of mass of 2-surfaces"};
  app.require_subcommand(1);
  Flags flags;
  std::string mode;
  for (const char* name : {"compute", "sweep", "embed", "validate"}) {
    CLI::App* sub = app.add_subcommand(name);
    add_flags(sub, flags);
    sub->callback([&mode, name] { mode = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    const qlcq::RunConfig cfg = resolve(mode, flags);
    const qlcq::ResultDocument doc = qlcq::run(cfg);
    qlcq::emit(doc, cfg.format, cfg.out);
    if (doc.failed_checks > 0) {
      std::cerr << "validate: " << doc.failed_checks << " check(s) failed\n";
      return kValidation;
    }
    return kOk;
  } catch (const qlcq::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const qlcq::GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << "\n";
    return kValidation;
  } catch (const qlcq::SolverError& e) {
    std::cerr << "solver did not converge: " << e.what() << "\n";
    return kNoConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
}
