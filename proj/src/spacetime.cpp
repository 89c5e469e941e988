#include "qlcq/spacetime.hpp"

#include "qlcq/errors.hpp"

#include <cmath>

namespace qlcq {

std::array<Mat4, 4> MetricSample::christoffel() const {
  const Mat4 ginv = g.inverse();
  std::array<Mat4, 4> G;
  for (int m = 0; m < 4; ++m) {
    G[m].setZero();
    for (int n = 0; n < 4; ++n)
      for (int l = 0; l < 4; ++l) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) s += ginv(m, k) * (dg[n](k, l) + dg[l](k, n) - dg[k](n, l));
        G[m](n, l) = 0.5 * s;
      }
  }
  return G;
}

Mat4 Spacetime::metric(const Vec4& x) const {
  const Array44<double> g = evaluate(Array4<double>{x[0], x[1], x[2], x[3]});
  Mat4 out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out(i, j) = g[i][j];
  return out;
}

MetricSample Spacetime::sample(const Vec4& x) const {
  Array4<Dual<4>> xd;
  for (int i = 0; i < 4; ++i) xd[i] = Dual<4>::variable(x[i], i);
  const Array44<Dual<4>> g = evaluate(xd);
  MetricSample s;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      s.g(i, j) = g[i][j].v;
      for (int l = 0; l < 4; ++l) s.dg[l](i, j) = g[i][j].d[l];
    }
  return s;
}

std::shared_ptr<const Surface> Spacetime::coordinate_sphere(double r) const {
  SphereSpec spec;
  spec.radius = r;
  return make_sphere(spec);
}

Mat4 boost_x(double w) {
  Mat4 L = Mat4::Identity();
  L(0, 0) = L(1, 1) = std::cosh(w);
  L(0, 1) = L(1, 0) = std::sinh(w);
  return L;
}

namespace {

template <class T>
Array44<T> minkowski_metric() {
  Array44<T> g{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) g[i][j] = T(0.0);
  g[0][0] = T(-1.0);
  g[1][1] = g[2][2] = g[3][3] = T(1.0);
  return g;
}

// Kerr in Cartesian-like Boyer-Lindquist coordinates:
//   x = sqrt(r^2 + a^2) sin(th) cos(ph), y = sqrt(r^2 + a^2) sin(th) sin(ph), z = r cos(th).
// The spatial part is written as the flat metric plus smooth corrections built
// from dr and sin^2(th) dph = (x dy - y dx) / (r^2 + a^2), so it stays regular
// on the rotation axis.
template <class T>
Array44<T> kerr_metric(const Array4<T>& X, double m, double a) {
  const T& x = X[1];
  const T& y = X[2];
  const T& z = X[3];
  const double a2 = a * a;
  const T rho2 = x * x + y * y + z * z;
  const T b = rho2 - a2;
  const T r2 = 0.5 * (b + sqrt(b * b + 4.0 * a2 * z * z));
  const T r = sqrt(r2);
  const T Sigma = r2 + a2 * z * z / r2;
  const T Delta = r2 - 2.0 * m * r + a2;
  const T ra2 = r2 + a2;
  std::array<T, 3> dr, w;
  dr[0] = r * x / Sigma;
  dr[1] = r * y / Sigma;
  dr[2] = (r * z + a2 * z / r) / Sigma;
  w[0] = -y / ra2;
  w[1] = x / ra2;
  w[2] = T(0.0);
  const T A = Sigma * (1.0 / Delta - 1.0 / ra2);
  const T B = 2.0 * m * r * a2 / Sigma;
  const T C = -2.0 * m * r * a / Sigma;

  Array44<T> g = minkowski_metric<T>();
  g[0][0] = -(1.0 - 2.0 * m * r / Sigma);
  for (int i = 0; i < 3; ++i) {
    g[0][i + 1] = C * w[i];
    g[i + 1][0] = g[0][i + 1];
    for (int j = 0; j < 3; ++j) g[i + 1][j + 1] = g[i + 1][j + 1] + A * dr[i] * dr[j] + B * w[i] * w[j];
  }
  return g;
}

template <class T>
Array44<T> isotropic_metric(const Array4<T>& X, double m) {
  const T R = sqrt(X[1] * X[1] + X[2] * X[2] + X[3] * X[3]);
  const T psi = 1.0 + m / (2.0 * R);
  const T lapse = (1.0 - m / (2.0 * R)) / psi;
  const T psi2 = psi * psi;
  const T psi4 = psi2 * psi2;
  Array44<T> g = minkowski_metric<T>();
  g[0][0] = -lapse * lapse;
  g[1][1] = g[2][2] = g[3][3] = psi4;
  return g;
}

class Minkowski : public Spacetime {
public:
  explicit Minkowski(SpacetimeParams p) : p_(std::move(p)) {}
  std::string name() const override { return "minkowski"; }
  const SpacetimeParams& params() const override { return p_; }
  bool axisymmetric() const override { return true; }
  double excluded_radius() const override { return 0.0; }

protected:
  Array44<double> evaluate(const Array4<double>&) const override { return minkowski_metric<double>(); }
  Array44<Dual<4>> evaluate(const Array4<Dual<4>>&) const override { return minkowski_metric<Dual<4>>(); }

private:
  SpacetimeParams p_;
};

class Kerr : public Spacetime {
public:
  Kerr(std::string name, SpacetimeParams p) : name_(std::move(name)), p_(std::move(p)) {}
  std::string name() const override { return name_; }
  const SpacetimeParams& params() const override { return p_; }
  bool axisymmetric() const override { return true; }
  double excluded_radius() const override {
    const double m = p_.mass, a = p_.spin;
    return std::sqrt((m + std::sqrt(m * m - a * a)) * (m + std::sqrt(m * m - a * a)) + a * a);
  }
  std::shared_ptr<const Surface> coordinate_sphere(double r) const override {
    SphereSpec spec;
    spec.radius = r;
    spec.oblateness = p_.spin;
    return make_sphere(spec);
  }

protected:
  Array44<double> evaluate(const Array4<double>& x) const override { return kerr_metric(x, p_.mass, p_.spin); }
  Array44<Dual<4>> evaluate(const Array4<Dual<4>>& x) const override {
    return kerr_metric(x, p_.mass, p_.spin);
  }

private:
  std::string name_;
  SpacetimeParams p_;
};

class Isotropic : public Spacetime {
public:
  explicit Isotropic(SpacetimeParams p) : p_(std::move(p)) {}
  std::string name() const override { return "schwarzschild-isotropic"; }
  const SpacetimeParams& params() const override { return p_; }
  bool axisymmetric() const override { return true; }
  double excluded_radius() const override { return 0.5 * p_.mass; }

protected:
  Array44<double> evaluate(const Array4<double>& x) const override { return isotropic_metric(x, p_.mass); }
  Array44<Dual<4>> evaluate(const Array4<Dual<4>>& x) const override { return isotropic_metric(x, p_.mass); }

private:
  SpacetimeParams p_;
};

// Pulls a base metric back through x_base = Lambda x - (0, d), where Lambda is
// the boost of rapidity -w along x; the source then moves with velocity
// tanh(w) along +x and sits at x = d at t = 0.
class Composed : public Spacetime {
public:
  Composed(std::string name, SpacetimePtr base, SpacetimeParams p)
      : name_(std::move(name)), base_(std::move(base)), p_(std::move(p)), L_(boost_x(-p_.rapidity)) {}
  std::string name() const override { return name_; }
  const SpacetimeParams& params() const override { return p_; }
  bool axisymmetric() const override {
    return base_->axisymmetric() && p_.rapidity == 0.0 && p_.translation.head<2>().norm() == 0.0;
  }
  double excluded_radius() const override {
    return std::cosh(p_.rapidity) * base_->excluded_radius() + p_.translation.norm();
  }

protected:
  Array44<double> evaluate(const Array4<double>& x) const override { return pull_back(x); }
  Array44<Dual<4>> evaluate(const Array4<Dual<4>>& x) const override { return pull_back(x); }

private:
  template <class T>
  Array44<T> pull_back(const Array4<T>& x) const {
    Array4<T> xb;
    for (int i = 0; i < 4; ++i) {
      xb[i] = T(0.0);
      for (int j = 0; j < 4; ++j) xb[i] = xb[i] + L_(i, j) * x[j];
    }
    for (int i = 0; i < 3; ++i) xb[i + 1] = xb[i + 1] - p_.translation[i];
    const Array44<T> gb = base_eval(xb);
    Array44<T> g;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        T s(0.0);
        for (int k = 0; k < 4; ++k)
          for (int l = 0; l < 4; ++l)
            if (L_(k, i) != 0.0 && L_(l, j) != 0.0) s = s + L_(k, i) * L_(l, j) * gb[k][l];
        g[i][j] = s;
      }
    return g;
  }
  Array44<double> base_eval(const Array4<double>& x) const { return Access::eval(*base_, x); }
  Array44<Dual<4>> base_eval(const Array4<Dual<4>>& x) const { return Access::eval(*base_, x); }

  struct Access : Spacetime {
    template <class T>
    static Array44<T> eval(const Spacetime& s, const Array4<T>& x) {
      return (s.*(static_cast<Array44<T> (Spacetime::*)(const Array4<T>&) const>(&Access::evaluate)))(x);
    }
  };

  std::string name_;
  SpacetimePtr base_;
  SpacetimeParams p_;
  Mat4 L_;
};

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ValidationError(std::string(what) + " must be finite");
}

}  // namespace

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names = {"minkowski",
                                                 "minkowski-boosted-slice",
                                                 "schwarzschild-standard",
                                                 "schwarzschild-isotropic",
                                                 "schwarzschild-translated",
                                                 "kerr-bl"};
  return names;
}

SpacetimePtr catalog_get(const std::string& name, const SpacetimeParams& params) {
  require_finite(params.mass, "mass");
  require_finite(params.spin, "spin");
  require_finite(params.rapidity, "rapidity");
  for (int i = 0; i < 3; ++i) require_finite(params.translation[i], "translation");
  if (params.mass < 0.0) throw ValidationError("mass must be non-negative");

  auto wrap = [&](const std::string& n, SpacetimePtr base) -> SpacetimePtr {
    if (params.rapidity == 0.0 && params.translation.norm() == 0.0) return base;
    return std::make_shared<Composed>(n, std::move(base), params);
  };

  if (name == "minkowski" || name == "minkowski-boosted-slice") {
    SpacetimeParams p = params;
    p.mass = 0.0;
    p.spin = 0.0;
    return wrap(name, std::make_shared<Minkowski>(p));
  }
  if (name == "schwarzschild-standard" || name == "schwarzschild-translated") {
    SpacetimeParams p = params;
    p.spin = 0.0;
    SpacetimeParams base = p;
    base.rapidity = 0.0;
    base.translation.setZero();
    return wrap(name, std::make_shared<Kerr>("schwarzschild-standard", base));
  }
  if (name == "schwarzschild-isotropic") {
    SpacetimeParams base = params;
    base.spin = 0.0;
    base.rapidity = 0.0;
    base.translation.setZero();
    return wrap(name, std::make_shared<Isotropic>(base));
  }
  if (name == "kerr-bl") {
    if (!(std::abs(params.spin) < params.mass))
      throw ValidationError("kerr-bl requires |a| < m (got a = " + std::to_string(params.spin) +
                            ", m = " + std::to_string(params.mass) + ")");
    SpacetimeParams base = params;
    base.rapidity = 0.0;
    base.translation.setZero();
    return wrap(name, std::make_shared<Kerr>("kerr-bl", base));
  }
  throw ValidationError("unknown spacetime '" + name + "'");
}

// ---------------------------------------------------------------------------

namespace {

// Second-order jet in the two surface parameters.
struct Jet {
  double v = 0.0;
  std::array<double, 2> g{};
  std::array<std::array<double, 2>, 2> h{};
};

Jet operator+(const Jet& a, const Jet& b) {
  Jet r;
  r.v = a.v + b.v;
  for (int i = 0; i < 2; ++i) {
    r.g[i] = a.g[i] + b.g[i];
    for (int j = 0; j < 2; ++j) r.h[i][j] = a.h[i][j] + b.h[i][j];
  }
  return r;
}
Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  r.v = a.v * b.v;
  for (int i = 0; i < 2; ++i) {
    r.g[i] = a.g[i] * b.v + a.v * b.g[i];
    for (int j = 0; j < 2; ++j)
      r.h[i][j] = a.h[i][j] * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] + a.v * b.h[i][j];
  }
  return r;
}
Jet operator*(double s, Jet a) {
  a.v *= s;
  for (int i = 0; i < 2; ++i) {
    a.g[i] *= s;
    for (int j = 0; j < 2; ++j) a.h[i][j] *= s;
  }
  return a;
}
Jet constant(double c) {
  Jet r;
  r.v = c;
  return r;
}
// f(a) with f, f', f'' given.
Jet apply(const Jet& a, double f, double f1, double f2) {
  Jet r;
  r.v = f;
  for (int i = 0; i < 2; ++i) {
    r.g[i] = f1 * a.g[i];
    for (int j = 0; j < 2; ++j) r.h[i][j] = f1 * a.h[i][j] + f2 * a.g[i] * a.g[j];
  }
  return r;
}
Jet jsin(const Jet& a) { return apply(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
Jet jcos(const Jet& a) { return apply(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }

class SphereSurface : public Surface {
public:
  explicit SphereSurface(SphereSpec s) : s_(std::move(s)), L_(boost_x(s_.boost)) {
    if (!(s_.radius > 0.0)) throw ValidationError("sphere radius must be positive");
  }

  SurfacePoint evaluate(double theta, double phi) const override {
    Jet th, ph;
    th.v = theta;
    th.g = {1.0, 0.0};
    ph.v = phi;
    ph.g = {0.0, 1.0};
    const Jet st = jsin(th), ct = jcos(th), sp = jsin(ph), cp = jcos(ph);
    const Jet R = constant(1.0) + s_.p2_amplitude * (1.5 * (ct * ct) + constant(-0.5));
    const double rho = std::sqrt(s_.radius * s_.radius + s_.oblateness * s_.oblateness);
    std::array<Jet, 4> X;
    X[0] = constant(0.0);
    X[1] = constant(s_.center[0]) + rho * (R * st * cp);
    X[2] = constant(s_.center[1]) + rho * (R * st * sp);
    X[3] = constant(s_.center[2]) + s_.radius * (R * ct);

    SurfacePoint p;
    Vec4 x, o;
    std::array<Vec4, 2> dx;
    std::array<std::array<Vec4, 2>, 2> ddx;
    for (int mu = 0; mu < 4; ++mu) {
      x[mu] = X[mu].v;
      for (int a = 0; a < 2; ++a) {
        dx[a][mu] = X[mu].g[a];
        for (int b = 0; b < 2; ++b) ddx[a][b][mu] = X[mu].h[a][b];
      }
    }
    o << 0.0, x[1] - s_.center[0], x[2] - s_.center[1], x[3] - s_.center[2];
    p.x = L_ * x;
    p.outward = L_ * o;
    for (int a = 0; a < 2; ++a) {
      p.dx[a] = L_ * dx[a];
      for (int b = 0; b < 2; ++b) p.ddx[a][b] = L_ * ddx[a][b];
    }
    return p;
  }

  bool axisymmetric() const override {
    return s_.boost == 0.0 && s_.center.head<2>().norm() == 0.0;
  }

private:
  SphereSpec s_;
  Mat4 L_;
};

}  // namespace

std::shared_ptr<const Surface> make_sphere(const SphereSpec& spec) {
  return std::make_shared<SphereSurface>(spec);
}

}  // namespace qlcq
