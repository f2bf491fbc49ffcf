#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "core.hpp"

namespace ikern {

// exp(-1/(1-u^2)) on (-1, 1), zero outside
template <class Real>
Real mollifier(const Real& u) {
  using std::exp;
  if (!(u > -1 && u < 1)) return Real(0);
  return exp(Real(-1) / (Real(1) - u * u));
}

// integral of the mollifier over (-1, 1)
template <class Real = double>
Real mollifier_mass() {
  static const Real mass = [] {
    boost::math::quadrature::tanh_sinh<Real> ts;
    const Real tol = 16 * std::numeric_limits<Real>::epsilon();
    return ts.integrate([](Real u) { return mollifier(u); }, Real(-1), Real(1), tol);
  }();
  return mass;
}

// smooth step 0 -> 1 on [0, 1] assembled from exp(-1/x)
inline double smooth_step(double t, double* d1 = nullptr, double* d2 = nullptr) {
  auto e = [](double x, double& f1, double& f2) {
    if (x <= 0) {
      f1 = f2 = 0;
      return 0.0;
    }
    const double v = std::exp(-1.0 / x);
    f1 = v / (x * x);
    f2 = v * (1.0 - 2.0 * x) / (x * x * x * x);
    return v;
  };
  double a1, a2, b1, b2;
  const double a = e(t, a1, a2), b = e(1.0 - t, b1, b2);
  b1 = -b1;
  const double s = a + b, s1 = a1 + b1, s2 = a2 + b2;
  if (s == 0) {
    if (d1) *d1 = 0;
    if (d2) *d2 = 0;
    return t >= 1 ? 1.0 : 0.0;
  }
  const double f = a / s;
  if (d1) *d1 = (a1 * s - a * s1) / (s * s);
  if (d2) *d2 = (a2 * s - a * s2) / (s * s) - 2.0 * (a1 * s - a * s1) * s1 / (s * s * s);
  return f;
}

// Compactly supported smooth weight. Two shapes share the exp(-1/x) mollifier:
//   bump:    amplitude * exp(-1/(1-u^2)), u = (x - center)/radius
//   plateau: amplitude, identically 1 on [inner_lo, inner_hi], with smooth edges down to [lo, hi]
// An optional factor x^power (power in {0, 1}) multiplies either shape.
class SmoothWeight {
 public:
  enum class Shape { bump, plateau };

  static SmoothWeight bump(double center, double radius, double amplitude = 1.0) {
    require(radius > 0, "radius must be positive");
    SmoothWeight w;
    w.shape_ = Shape::bump;
    w.center_ = center;
    w.radius_ = radius;
    w.amp_ = amplitude;
    w.lo_ = center - radius;
    w.hi_ = center + radius;
    return w;
  }
  // bump on (lo, hi) with total integral `mass`
  static SmoothWeight normalized_bump(double lo, double hi, double mass = 1.0) {
    const double r = 0.5 * (hi - lo);
    return bump(0.5 * (lo + hi), r, mass / (r * mollifier_mass<double>()));
  }
  static SmoothWeight plateau(double lo, double inner_lo, double inner_hi, double hi, double amplitude = 1.0) {
    require(lo < inner_lo && inner_lo <= inner_hi && inner_hi < hi, "plateau needs lo < inner_lo <= inner_hi < hi");
    SmoothWeight w;
    w.shape_ = Shape::plateau;
    w.lo_ = lo;
    w.hi_ = hi;
    w.ilo_ = inner_lo;
    w.ihi_ = inner_hi;
    w.amp_ = amplitude;
    w.center_ = 0.5 * (lo + hi);
    w.radius_ = 0.5 * (hi - lo);
    return w;
  }

  SmoothWeight times_x() const {
    require(power_ == 0, "only one x factor is supported");
    SmoothWeight w = *this;
    w.power_ = 1;
    return w;
  }
  SmoothWeight scaled(double s) const {
    SmoothWeight w = *this;
    w.amp_ *= s;
    return w;
  }

  Shape shape() const { return shape_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double center() const { return center_; }
  double radius() const { return radius_; }
  double amplitude() const { return amp_; }
  int power() const { return power_; }
  std::pair<double, double> plateau_interval() const { return {ilo_, ihi_}; }

  double operator()(double x) const { return eval(x, 0); }
  double derivative(double x) const { return eval(x, 1); }
  double second_derivative(double x) const { return eval(x, 2); }

  // f, f', f'' at x
  std::array<double, 3> jet(double x) const {
    double s0, s1, s2;
    shape_jet(x, s0, s1, s2);
    if (power_ == 1) return {amp_ * x * s0, amp_ * (s0 + x * s1), amp_ * (2 * s1 + x * s2)};
    return {amp_ * s0, amp_ * s1, amp_ * s2};
  }

 private:
  double eval(double x, int order) const { return jet(x)[order]; }

  void shape_jet(double x, double& f0, double& f1, double& f2) const {
    f0 = f1 = f2 = 0;
    if (!(x > lo_ && x < hi_)) return;
    if (shape_ == Shape::bump) {
      const double u = (x - center_) / radius_;
      const double w = 1.0 - u * u;
      const double g = std::exp(-1.0 / w);
      const double r = radius_;
      f0 = g;
      f1 = g * (-2.0 * u / (w * w)) / r;
      f2 = g * (4.0 * u * u / (w * w * w * w) - 2.0 / (w * w) - 8.0 * u * u / (w * w * w)) / (r * r);
      return;
    }
    double a1, a2, b1, b2;
    const double la = ilo_ - lo_, lb = hi_ - ihi_;
    const double a = smooth_step((x - lo_) / la, &a1, &a2);
    const double b = smooth_step((hi_ - x) / lb, &b1, &b2);
    a1 /= la;
    a2 /= la * la;
    b1 = -b1 / lb;
    b2 /= lb * lb;
    f0 = a * b;
    f1 = a1 * b + a * b1;
    f2 = a2 * b + 2 * a1 * b1 + a * b2;
  }

  Shape shape_ = Shape::bump;
  double center_ = 0, radius_ = 1, amp_ = 1, lo_ = -1, hi_ = 1, ilo_ = 0, ihi_ = 0;
  int power_ = 0;
};

struct QuadratureSpec {
  enum class Method { adaptive_1d, tensor_product, low_discrepancy, fourier_factored };
  Method method = Method::adaptive_1d;
  std::int64_t budget = 1 << 22;
  std::uint64_t seed = 20240601;
  double tolerance = 1e-11;
  unsigned max_depth = 12;
  unsigned workers = 0;
};

template <class T>
struct QuadResult {
  T value{};
  double error = 0;
  bool flagged = false;
};

namespace detail {
// Gauss-Kronrod bisection to an absolute error target or the roundoff floor
template <class T, class F>
T adaptive_gk(const F& f, double a, double b, double abs_tol, unsigned depth, double& err) {
  using boost::math::quadrature::gauss_kronrod;
  double e = 0, l1 = 0;
  const T v = gauss_kronrod<double, 61>::integrate(f, a, b, 0, 0.0, &e, &l1);
  if (e <= abs_tol || e <= 1024 * std::numeric_limits<double>::epsilon() * l1 || depth == 0) {
    err += e;
    return v;
  }
  const double mid = 0.5 * (a + b);
  const T left = adaptive_gk<T>(f, a, mid, abs_tol / 2, depth - 1, err);
  return left + adaptive_gk<T>(f, mid, b, abs_tol / 2, depth - 1, err);
}

template <class T, class F>
QuadResult<T> integrate_pieces(F f, double a, double b, const QuadratureSpec& spec, int pieces) {
  QuadResult<T> r;
  const double h = (b - a) / pieces;
  std::vector<T> parts;
  for (int i = 0; i < pieces; ++i)
    parts.push_back(adaptive_gk<T>(f, a + i * h, a + (i + 1) * h, spec.tolerance / pieces, spec.max_depth, r.error));
  r.value = pairwise_sum(parts);
  r.flagged = r.error > spec.tolerance;
  return r;
}
}  // namespace detail

// adaptive Gauss-Kronrod over [a, b] to absolute tolerance spec.tolerance, split into pieces first
template <class F>
QuadResult<std::complex<double>> integrate_complex(F f, double a, double b, const QuadratureSpec& spec = {},
                                                    int pieces = 1) {
  return detail::integrate_pieces<std::complex<double>>(f, a, b, spec, pieces);
}

template <class F>
QuadResult<double> integrate_real(F f, double a, double b, const QuadratureSpec& spec = {}, int pieces = 1) {
  return detail::integrate_pieces<double>(f, a, b, spec, pieces);
}

// e^{2 pi i x y}, with x y reduced mod 1 through an exact two-product
inline std::complex<double> unit_phase(double x, double y) {
  const double p = x * y;
  const double e = std::fma(x, y, -p);
  const double frac = (p - std::nearbyint(p)) + e;
  return std::polar(1.0, 2.0 * std::numbers::pi * frac);
}

// number of pieces so each holds a bounded number of oscillations
inline int oscillation_pieces(double width, double freq) {
  return std::max(1, static_cast<int>(std::ceil(std::abs(freq) * width / 4.0)));
}

// W^(xi) = int W(x) e^{2 pi i x xi} dx
inline QuadResult<std::complex<double>> fourier_1d(const SmoothWeight& w, double xi, const QuadratureSpec& spec = {}) {
  auto f = [&](double x) { return w(x) * unit_phase(x, xi); };
  auto r = integrate_complex(f, w.lo(), w.hi(), spec, oscillation_pieces(w.hi() - w.lo(), xi));
  r.flagged = r.error > 1e-10;
  return r;
}

// int_0^inf V(x) x^s dx / x
inline QuadResult<std::complex<double>> mellin_transform(const SmoothWeight& v, std::complex<double> s,
                                                         const QuadratureSpec& spec = {}) {
  require(v.lo() >= 0, "Mellin transform needs support in (0, inf)");
  auto f = [&](double x) { return v(x) * std::pow(std::complex<double>(x), s - 1.0); };
  return integrate_complex(f, v.lo(), v.hi(), spec, 1 + static_cast<int>(std::abs(s.imag())));
}

struct Poisson1dReport {
  double Q = 0;
  int kMax = 0;
  double lhs = 0;
  std::complex<double> rhs = 0;
  double difference = 0, tail_bound = 0, quadrature_error = 0, tolerance = 0;
  bool pass = false;
};

// sum_n W(n/Q) against Q sum_{|k| <= kMax} W^(Qk); tolerance from the measured tail and quadrature errors
inline Poisson1dReport poisson_1d_check(const SmoothWeight& w, double Q, int kMax, const QuadratureSpec& spec = {}) {
  require(Q > 0, "Q must be positive");
  require(kMax >= 0, "kMax must be nonnegative");
  Poisson1dReport r;
  r.Q = Q;
  r.kMax = kMax;
  std::vector<double> terms;
  const auto n0 = static_cast<std::int64_t>(std::floor(w.lo() * Q)), n1 = static_cast<std::int64_t>(std::ceil(w.hi() * Q));
  for (auto n = n0; n <= n1; ++n) terms.push_back(w(static_cast<double>(n) / Q));
  r.lhs = pairwise_sum(terms);
  std::vector<std::complex<double>> dual;
  for (int k = -kMax; k <= kMax; ++k) {
    const auto f = fourier_1d(w, Q * k, spec);
    dual.push_back(Q * f.value);
    r.quadrature_error += Q * f.error;
  }
  r.rhs = pairwise_sum(dual);
  // omitted terms, summed until they fall below the quadrature floor; W real gives the factor 2
  for (int k = kMax + 1; k <= kMax + 64; ++k) {
    const auto f = fourier_1d(w, Q * k, spec);
    const double t = 2 * Q * std::abs(f.value);
    r.tail_bound += t;
    r.quadrature_error += 2 * Q * f.error;
    if (t < 2 * Q * f.error) break;
  }
  r.difference = std::abs(r.lhs - r.rhs);
  r.tolerance = 2 * r.tail_bound + r.quadrature_error + 1e-13 * (1 + std::abs(r.lhs));
  r.pass = r.difference <= r.tolerance;
  return r;
}

}  // namespace ikern
