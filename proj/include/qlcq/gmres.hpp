#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace qlcq {

struct GmresResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Right-preconditioned restarted GMRES for A x = b. `apply` computes A v,
/// `precondition` applies an approximate inverse M^{-1} v. x holds the
/// initial guess on entry.
template <class Apply, class Precondition>
GmresResult gmres(Apply&& apply, Precondition&& precondition, const Eigen::VectorXd& b,
                  Eigen::VectorXd& x, double tol, int max_iterations, int restart = 60) {
  GmresResult out;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    out.converged = true;
    return out;
  }
  const int n = static_cast<int>(b.size());
  restart = std::min(restart, n);
  while (out.iterations < max_iterations) {
    Eigen::VectorXd r = b - apply(x);
    double beta = r.norm();
    out.relative_residual = beta / bnorm;
    if (out.relative_residual <= tol) {
      out.converged = true;
      return out;
    }
    std::vector<Eigen::VectorXd> V, Z;
    V.push_back(r / beta);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(restart + 1, restart);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(restart), sn = Eigen::VectorXd::Zero(restart);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(restart + 1);
    g[0] = beta;
    int k = 0;
    for (; k < restart && out.iterations < max_iterations; ++k, ++out.iterations) {
      Z.push_back(precondition(V[k]));
      Eigen::VectorXd w = apply(Z[k]);
      for (int i = 0; i <= k; ++i) {
        H(i, k) = w.dot(V[i]);
        w -= H(i, k) * V[i];
      }
      // One reorthogonalization pass keeps the basis orthogonal at tight tolerances.
      for (int i = 0; i <= k; ++i) {
        const double c = w.dot(V[i]);
        H(i, k) += c;
        w -= c * V[i];
      }
      H(k + 1, k) = w.norm();
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = t;
      }
      const double denom = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = denom == 0.0 ? 1.0 : H(k, k) / denom;
      sn[k] = denom == 0.0 ? 0.0 : H(k + 1, k) / denom;
      H(k, k) = denom;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      const double hk1 = w.norm();
      out.relative_residual = std::abs(g[k + 1]) / bnorm;
      if (out.relative_residual <= tol || hk1 == 0.0) {
        ++k;
        ++out.iterations;
        break;
      }
      V.push_back(w / hk1);
    }
    Eigen::VectorXd y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    for (int i = 0; i < k; ++i) x += y[i] * Z[i];
    if (out.relative_residual <= tol) {
      // Confirm with the true residual.
      out.relative_residual = (b - apply(x)).norm() / bnorm;
      out.converged = out.relative_residual <= 10.0 * tol;
      if (out.converged) return out;
    }
  }
  out.relative_residual = (b - apply(x)).norm() / bnorm;
  out.converged = out.relative_residual <= tol;
  return out;
}

}  // namespace qlcq
