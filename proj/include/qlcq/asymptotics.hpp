#pragma once

// Coordinate-sphere families, 1/r expansions, ADM limits, the finiteness
// integrals and the total charges.

#include "qlcq/conserved_quantities.hpp"

#include <string>
#include <vector>

namespace qlcq {

struct SweepOptions {
  int band_limit = 16;
  OIEOptions oie;
  /// Solve the radii concurrently (no warm start) instead of in sequence.
  bool parallel = false;
  /// 0: hardware concurrency.
  int threads = 0;
};

struct QuasiLocalResult {
  double radius = 0.0;
  double energy = 0.0;
  ConservedSet set;        // solved gauge, t0 = (1, 0, 0, 0)
  Mat4 observer_boost = Mat4::Identity();
  ConservedSet rest;       // set with the observer boost removed; rest.t0 is t0(r)
  AngularMomentumCenter jc;  // extract_J_C(rest); zero when the mass vanishes
  bool mass_vanishes = false;
  /// sup |X - (0, r n)| / r after removing the observer boost and the mean.
  double round_deviation = 0.0;
  double residual = 0.0;
  int iterations = 0;
  int krylov_iterations = 0;
  // raw fields for the coefficient route
  SphericalTwoTensor sigma;
  SphericalField normH, normH0;  // normH0: mean curvature of the embedding of sigma in R^3
  SphericalOneForm alphaH;
  SphericalField tau;
};

struct AsymptoticFamily {
  GridPtr grid;
  std::vector<double> radii;
  std::vector<QuasiLocalResult> results;
};

/// Coordinate spheres of `spacetime` at increasing radii. Sequential mode
/// seeds each solve with the previous tau scaled by the radius ratio.
/// A failure at any radius is rethrown with the radius in the message.
AsymptoticFamily sweep_family(const Spacetime& spacetime, const std::vector<double>& radii,
                              const SweepOptions& options = {});

/// Solve a single surface the same way sweep_family does.
QuasiLocalResult quasi_local(const Spacetime& spacetime, const Surface& surface, double radius, GridPtr grid,
                             const OIEOptions& options = {}, const SphericalField* tau_seed = nullptr);

struct ExpansionFit {
  std::vector<int> powers;
  Eigen::MatrixXd coefficients;  // row p: coefficient of r^{-powers[p]}, one column per series
  Eigen::VectorXd residual;      // RMS misfit per series
  double condition = 0.0;        // of the column-scaled Vandermonde matrix
  bool accepted = false;         // largest residual below 1e-3 of the smallest retained term at the smallest radius
};

/// Least squares f(r) = sum_p c_p r^{-p}. Needs at least powers + 1 radii
/// spanning a factor of 4; throws SolverError above `max_condition`.
/// Terms below ten times `noise_floor` (absolute; at least 1e-13 of the
/// largest sample) do not count as retained for `accepted`.
ExpansionFit fit_expansion(const std::vector<double>& radii, const Eigen::MatrixXd& samples,
                           const std::vector<int>& powers, double max_condition = 1e10, double noise_floor = 0.0);
ExpansionFit fit_expansion(const std::vector<double>& radii, const Eigen::VectorXd& samples,
                           const std::vector<int>& powers, double max_condition = 1e10, double noise_floor = 0.0);

struct ExpansionCoefficients {
  GridPtr grid;
  SphericalTwoTensor sigma1, sigma0;
  SphericalField h_m2, h_m3, h0_m2;
  SphericalOneForm alpha_m1, alpha_m2;
  double condition = 0.0;
  bool accepted = false;
};

/// Per-node fits over the family's radii, then the fields on S^2.
ExpansionCoefficients expansion_coefficients(const AsymptoticFamily& family);

/// p^0 = (1/8 pi) int (h0_m2 - h_m2),  p^i = -(1/8 pi) int X^i div(alpha_m1), on the unit sphere.
/// The sign of p^i follows the orientation of alpha_H used here.
Vec4 adm_energy_momentum(const ExpansionCoefficients& coeffs);

struct Finiteness {
  Eigen::Vector3d energy_type;      // int X^i (h0_m2 - h_m2)
  Eigen::Vector3d rotational_type;  // int X^i eps^{ab} nabla_b (alpha_m1)_a
  double max_abs() const { return std::max(energy_type.cwiseAbs().maxCoeff(), rotational_type.cwiseAbs().maxCoeff()); }
};

Finiteness finiteness_integrals(const ExpansionCoefficients& coeffs);

struct Extrapolated {
  double value = 0.0;
  double error = 0.0;
};

/// Limit r -> infinity of f(r) = c_0 + c_1 / r + ...; the error is the change
/// of c_0 when the highest power is dropped. Throws SolverError when the
/// increments along the ladder stop shrinking (divergent sequence).
Extrapolated extrapolate(const std::vector<double>& radii, const Eigen::VectorXd& values, const std::string& what);

/// lim m(r) t0(r) of the per-radius results.
struct EnergyMomentumLimit {
  Vec4 p = Vec4::Zero();
  Vec4 error = Vec4::Zero();
};
EnergyMomentumLimit sweep_energy_momentum(const AsymptoticFamily& family);

struct TotalCharges {
  Eigen::Vector3d C = Eigen::Vector3d::Zero(), J = Eigen::Vector3d::Zero();
  Eigen::Vector3d C_error = Eigen::Vector3d::Zero(), J_error = Eigen::Vector3d::Zero();
  double m = 0.0;
  Vec4 t0 = Vec4(1.0, 0.0, 0.0, 0.0);  // limit observer
  bool mass_vanishes = false;            // C is reported as zero
};

/// Limits of the center of mass and angular momentum with L the boost to lim t0(r).
TotalCharges total_charges(const AsymptoticFamily& family);

}  // namespace qlcq
