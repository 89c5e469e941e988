#pragma once

#include <Eigen/Dense>

#include <array>
#include <memory>

namespace qlcq {

/// Nodal values of a scalar function on the sphere grid.
using SphericalField = Eigen::VectorXd;

/// One-form in the (theta, phi) coordinate frame.
struct SphericalOneForm {
  SphericalField th;
  SphericalField ph;
};

/// Symmetric two-tensor in the (theta, phi) coordinate frame.
struct SphericalTwoTensor {
  SphericalField tt;
  SphericalField tp;
  SphericalField pp;
};

/// Gauss-Legendre x equispaced-longitude product grid carrying real,
/// orthonormal spherical harmonics up to degree L.
///
/// Node (i, j) has flat index i * n_phi() + j, with i running over the
/// colatitude nodes and j over longitudes. Harmonic (l, m), -l <= m <= l,
/// sits at coefficient index l*l + l + m; m > 0 carries cos(m phi), m < 0
/// carries sin(|m| phi).
class SphereGrid {
public:
  explicit SphereGrid(int band_limit, int n_phi = 0);

  int band_limit() const { return L_; }
  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  int size() const { return n_theta_ * n_phi_; }
  int n_coeffs() const { return (L_ + 1) * (L_ + 1); }
  static int coeff_index(int l, int m) { return l * l + l + m; }

  /// Per-node quadrature weight for the unit round measure; sums to 4 pi.
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  const Eigen::VectorXd& phi() const { return phi_; }
  const Eigen::VectorXd& sin_theta() const { return sin_theta_; }
  const Eigen::VectorXd& cos_theta() const { return cos_theta_; }

  /// Cartesian coordinate functions of the unit sphere, and the unit
  /// coordinate directions e_theta, e_phi, as 3 nodal fields each.
  const std::array<SphericalField, 3>& unit_normal() const { return n_; }
  const std::array<SphericalField, 3>& e_theta() const { return e_theta_; }
  const std::array<SphericalField, 3>& e_phi() const { return e_phi_; }

  /// Synthesis tables (nodes x coefficients): Y, dY/dtheta, dY/dphi.
  const Eigen::MatrixXd& Y() const { return Y_; }
  const Eigen::MatrixXd& dY_dtheta() const { return Yt_; }
  const Eigen::MatrixXd& dY_dphi() const { return Yp_; }

  /// c_lm = integral of f * Y_lm over the unit sphere, by quadrature.
  Eigen::VectorXd analyze(const SphericalField& f) const;
  /// Column-wise analysis of several fields at once.
  Eigen::MatrixXd analyze(const Eigen::MatrixXd& fields) const;

  SphericalField synthesize(const Eigen::VectorXd& coeffs) const;
  Eigen::MatrixXd synthesize(const Eigen::MatrixXd& coeffs) const;

  /// Integral over the unit round sphere.
  double integrate(const SphericalField& f) const;

  /// Evaluates a single real harmonic at the nodes.
  SphericalField harmonic(int l, int m) const;

  void check_field(const SphericalField& f, const char* what) const;

private:
  int L_;
  int n_theta_;
  int n_phi_;
  Eigen::VectorXd weights_, theta_, phi_, sin_theta_, cos_theta_;
  std::array<SphericalField, 3> n_, e_theta_, e_phi_;
  Eigen::MatrixXd Y_, Yt_, Yp_;
  Eigen::MatrixXd Y_weighted_t_;  // (w * Y)^T, used by analysis
};

using GridPtr = std::shared_ptr<const SphereGrid>;

/// Shared grid instance for a band limit; grids are immutable so sharing
/// is safe across threads.
GridPtr make_grid(int band_limit);

/// Gauss-Legendre nodes (descending in x) and weights on [-1, 1].
void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w);

}  // namespace qlcq
