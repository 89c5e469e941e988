#include "qlcq/sphere_grid.hpp"

#include "qlcq/errors.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace qlcq {

void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = z;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

SphereGrid::SphereGrid(int band_limit, int n_phi) : L_(band_limit) {
  if (band_limit < 1) throw ValidationError("band limit must be >= 1");
  n_theta_ = L_ + 1;
  n_phi_ = n_phi > 0 ? n_phi : 2 * L_ + 2;
  if (n_phi_ < 2 * L_ + 1) throw ValidationError("n_phi must be >= 2L+1");

  Eigen::VectorXd x, wx;
  gauss_legendre(n_theta_, x, wx);

  const int N = size();
  const int C = n_coeffs();
  weights_.resize(N);
  theta_.resize(N);
  phi_.resize(N);
  sin_theta_.resize(N);
  cos_theta_.resize(N);
  for (auto* arr : {&n_, &e_theta_, &e_phi_})
    for (auto& f : *arr) f.resize(N);

  const double dphi = 2.0 * std::numbers::pi / n_phi_;
  for (int i = 0; i < n_theta_; ++i) {
    const double ct = x[i];
    const double st = std::sqrt(1.0 - ct * ct);
    for (int j = 0; j < n_phi_; ++j) {
      const int k = i * n_phi_ + j;
      const double ph = j * dphi;
      const double cp = std::cos(ph), sp = std::sin(ph);
      weights_[k] = wx[i] * dphi;
      theta_[k] = std::acos(ct);
      phi_[k] = ph;
      sin_theta_[k] = st;
      cos_theta_[k] = ct;
      n_[0][k] = st * cp;
      n_[1][k] = st * sp;
      n_[2][k] = ct;
      e_theta_[0][k] = ct * cp;
      e_theta_[1][k] = ct * sp;
      e_theta_[2][k] = -st;
      e_phi_[0][k] = -sp;
      e_phi_[1][k] = cp;
      e_phi_[2][k] = 0.0;
    }
  }

  // Fully normalized associated Legendre functions and theta-derivatives.
  Y_.resize(N, C);
  Yt_.resize(N, C);
  Yp_.resize(N, C);
  Eigen::MatrixXd P(L_ + 1, L_ + 1), dP(L_ + 1, L_ + 1);
  const double sqrt2 = std::sqrt(2.0);
  for (int i = 0; i < n_theta_; ++i) {
    const double ct = x[i];
    const double st = std::sqrt(1.0 - ct * ct);
    P.setZero();
    dP.setZero();
    P(0, 0) = 1.0 / std::sqrt(4.0 * std::numbers::pi);
    for (int m = 1; m <= L_; ++m)
      P(m, m) = std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * st * P(m - 1, m - 1);
    for (int m = 0; m < L_; ++m) P(m + 1, m) = std::sqrt(2.0 * m + 3.0) * ct * P(m, m);
    for (int m = 0; m <= L_; ++m) {
      for (int l = m + 2; l <= L_; ++l) {
        const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
        const double a1 =
            std::sqrt((4.0 * (l - 1.0) * (l - 1.0) - 1.0) / ((l - 1.0) * (l - 1.0) - double(m) * m));
        P(l, m) = a * (ct * P(l - 1, m) - P(l - 2, m) / a1);
      }
    }
    for (int l = 0; l <= L_; ++l) {
      for (int m = 0; m <= l; ++m) {
        double prev = 0.0;
        if (l > m)
          prev = std::sqrt((2.0 * l + 1.0) * (double(l) * l - double(m) * m) / (2.0 * l - 1.0)) *
                 P(l - 1, m);
        dP(l, m) = (l * ct * P(l, m) - prev) / st;
      }
    }
    for (int j = 0; j < n_phi_; ++j) {
      const int k = i * n_phi_ + j;
      const double ph = phi_[k];
      for (int l = 0; l <= L_; ++l) {
        Y_(k, coeff_index(l, 0)) = P(l, 0);
        Yt_(k, coeff_index(l, 0)) = dP(l, 0);
        Yp_(k, coeff_index(l, 0)) = 0.0;
        for (int m = 1; m <= l; ++m) {
          const double c = std::cos(m * ph), s = std::sin(m * ph);
          const int ip = coeff_index(l, m), im = coeff_index(l, -m);
          Y_(k, ip) = sqrt2 * P(l, m) * c;
          Y_(k, im) = sqrt2 * P(l, m) * s;
          Yt_(k, ip) = sqrt2 * dP(l, m) * c;
          Yt_(k, im) = sqrt2 * dP(l, m) * s;
          Yp_(k, ip) = -m * sqrt2 * P(l, m) * s;
          Yp_(k, im) = m * sqrt2 * P(l, m) * c;
        }
      }
    }
  }
  Y_weighted_t_ = (weights_.asDiagonal() * Y_).transpose();
}

void SphereGrid::check_field(const SphericalField& f, const char* what) const {
  if (f.size() != size())
    throw ValidationError(std::string("grid mismatch for ") + what + ": field has " +
                          std::to_string(f.size()) + " nodes, grid has " + std::to_string(size()));
}

Eigen::VectorXd SphereGrid::analyze(const SphericalField& f) const {
  check_field(f, "analyze");
  return Y_weighted_t_ * f;
}

Eigen::MatrixXd SphereGrid::analyze(const Eigen::MatrixXd& fields) const {
  if (fields.rows() != size()) throw ValidationError("grid mismatch in batched analyze");
  return Y_weighted_t_ * fields;
}

SphericalField SphereGrid::synthesize(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() != n_coeffs()) throw ValidationError("coefficient count does not match band limit");
  return Y_ * coeffs;
}

Eigen::MatrixXd SphereGrid::synthesize(const Eigen::MatrixXd& coeffs) const {
  if (coeffs.rows() != n_coeffs()) throw ValidationError("coefficient count does not match band limit");
  return Y_ * coeffs;
}

double SphereGrid::integrate(const SphericalField& f) const {
  check_field(f, "integrate");
  return weights_.dot(f);
}

SphericalField SphereGrid::harmonic(int l, int m) const {
  if (l < 0 || l > L_ || std::abs(m) > l) throw ValidationError("harmonic index out of range");
  return Y_.col(coeff_index(l, m));
}

GridPtr make_grid(int band_limit) {
  static std::mutex mu;
  static std::map<int, GridPtr> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(band_limit);
  if (it != cache.end()) return it->second;
  auto g = std::make_shared<const SphereGrid>(band_limit);
  cache.emplace(band_limit, g);
  return g;
}

}  // namespace qlcq
