#pragma once

#include <boost/math/interpolators/quintic_hermite.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/random/sobol.hpp>
#include <random>

#include "smooth.hpp"

namespace ikern {

namespace detail {

// G(w) = int_{-1}^{1} exp(-1/(1-u^2)) e(w u) du, real and even; tabulated with two derivatives
class MollifierTransform {
 public:
  static constexpr double omega_max = 256.0;
  static constexpr double step = 1.0 / 64;

  static const MollifierTransform& instance() {
    static const MollifierTransform t;
    return t;
  }

  double operator()(double w) const {
    w = std::abs(w);
    return w >= omega_max ? 0.0 : interp_(w);
  }
  // int_{w0}^inf |G|
  double tail(double w0) const {
    w0 = std::abs(w0);
    const auto k = static_cast<std::size_t>(std::floor(w0 / step));
    return k + 1 >= suffix_.size() ? 0.0 : suffix_[k];
  }
  // sup_{|v| >= |w|} |G(v)|
  double envelope(double w) const {
    w = std::abs(w);
    const auto k = static_cast<std::size_t>(std::floor(w / step));
    return k >= envelope_.size() ? 0.0 : envelope_[k];
  }
  // least w with envelope(w) <= eps
  double envelope_radius(double eps) const {
    auto it = std::lower_bound(envelope_.begin(), envelope_.end(), eps, [](double e, double v) { return e > v; });
    return static_cast<double>(it - envelope_.begin()) * step;
  }
  // least w with int_w^inf |G| <= eps
  double tail_radius(double eps) const {
    for (std::size_t k = 0; k < suffix_.size(); ++k)
      if (suffix_[k] <= eps) return k * step;
    return omega_max;
  }

 private:
  MollifierTransform() : interp_(make()) {}

  boost::math::interpolators::cardinal_quintic_hermite<std::vector<double>> make() {
    const std::size_t n = static_cast<std::size_t>(omega_max / step) + 1;
    std::vector<double> g(n), g1(n), g2(n);
    // composite 20-point Gauss-Legendre on [0, 1], folded by symmetry
    using gl = boost::math::quadrature::gauss<double, 20>;
    const int panels = 256;
    std::vector<double> us, ws;
    for (int p = 0; p < panels; ++p) {
      const double a = static_cast<double>(p) / panels, h = 1.0 / panels, c = a + h / 2;
      for (std::size_t i = 0; i < gl::abscissa().size(); ++i) {
        const double x = gl::abscissa()[i], w = gl::weights()[i];
        for (double s : {1.0, -1.0}) {
          if (x == 0 && s < 0) continue;
          const double u = c + s * x * h / 2;
          us.push_back(u);
          ws.push_back(2 * w * h / 2 * mollifier(u));
        }
      }
    }
    const std::int64_t block = 256;
    parallel_map_reduce<int>(
        static_cast<std::int64_t>(n), block, 0,
        [&](std::int64_t lo, std::int64_t hi) {
          std::vector<std::complex<double>> z(us.size()), rot(us.size());
          for (std::size_t j = 0; j < us.size(); ++j) {
            z[j] = std::polar(1.0, 2 * std::numbers::pi * lo * step * us[j]);
            rot[j] = std::polar(1.0, 2 * std::numbers::pi * step * us[j]);
          }
          for (std::int64_t k = lo; k < hi; ++k) {
            double s0 = 0, s1 = 0, s2 = 0;
            for (std::size_t j = 0; j < us.size(); ++j) {
              const double tu = 2 * std::numbers::pi * us[j];
              s0 += ws[j] * z[j].real();
              s1 -= ws[j] * tu * z[j].imag();
              s2 -= ws[j] * tu * tu * z[j].real();
              z[j] *= rot[j];
            }
            g[k] = s0;
            g1[k] = s1;
            g2[k] = s2;
          }
          return 0;
        },
        [](int a, int) { return a; });
    // the interpolant can exceed the node values between nodes by its own error
    envelope_.assign(n + 1, 0.0);
    for (std::size_t k = n; k-- > 0;) envelope_[k] = std::max(envelope_[k + 1], 1.01 * std::abs(g[k]) + 1e-16);
    suffix_.assign(n + 1, 0.0);
    for (std::size_t k = n - 1; k-- > 0;) suffix_[k] = suffix_[k + 1] + step * 0.5 * (std::abs(g[k]) + std::abs(g[k + 1]));
    return {std::move(g), std::move(g1), std::move(g2), 0.0, step};
  }

  std::vector<double> suffix_, envelope_;
  boost::math::interpolators::cardinal_quintic_hermite<std::vector<double>> interp_;
};

}  // namespace detail

// W^(xi) for a mollifier bump from the tabulated transform
inline std::complex<double> bump_fourier(const SmoothWeight& g, double xi) {
  require(g.shape() == SmoothWeight::Shape::bump && g.power() == 0, "tabulated transform needs a plain bump");
  const double r = g.radius();
  return g.amplitude() * r * unit_phase(g.center(), xi) * detail::MollifierTransform::instance()(r * xi);
}

// sup_{|eta| >= |xi|} |W^(eta)|
inline double bump_fourier_envelope(const SmoothWeight& g, double xi) {
  return std::abs(g.amplitude()) * g.radius() * detail::MollifierTransform::instance().envelope(g.radius() * xi);
}

// int_{|xi| > X} |W^|
inline double bump_fourier_tail(const SmoothWeight& g, double X) {
  return 2 * std::abs(g.amplitude()) * detail::MollifierTransform::instance().tail(g.radius() * X);
}

// X with int_{|xi| > X} |W^| <= eps
inline double bump_fourier_radius(const SmoothWeight& g, double eps) {
  return detail::MollifierTransform::instance().tail_radius(eps / (2 * std::abs(g.amplitude()))) / g.radius();
}

using Mat8 = std::array<double, 8>;

// f(T1, T2) = prod of 8 entry bumps; T_i = [[a, b], [c, d]] stored row-major, T1 first
class MatrixBump {
 public:
  explicit MatrixBump(std::array<SmoothWeight, 8> entries) : e_(std::move(entries)) {
    for (const auto& g : e_)
      require(g.shape() == SmoothWeight::Shape::bump && g.power() == 0, "matrix entries must be plain bumps");
    for (int i = 0; i < 2; ++i) {
      const auto [lo, hi] = det_range(i);
      require(lo > 0 || hi < 0, "support box of f meets det T = 0");
      min_abs_det_[i] = std::min(std::abs(lo), std::abs(hi));
    }
  }
  // entry bumps of common radius and amplitude centred at the given matrices
  static MatrixBump around(const Mat8& center, double radius, double amplitude = 1.0) {
    std::array<SmoothWeight, 8> e;
    for (int k = 0; k < 8; ++k) e[k] = SmoothWeight::bump(center[k], radius, amplitude);
    return MatrixBump(e);
  }

  const SmoothWeight& entry(int block, int k) const { return e_[4 * block + k]; }
  const std::array<SmoothWeight, 8>& entries() const { return e_; }
  double min_abs_det(int block) const { return min_abs_det_[block]; }
  double lo(int k) const { return e_[k].lo(); }
  double hi(int k) const { return e_[k].hi(); }

  double operator()(const Mat8& T) const {
    double v = 1;
    for (int k = 0; k < 8 && v != 0; ++k) v *= e_[k](T[k]);
    return v;
  }
  // int |f_i| over gl2(R)
  double block_l1(int block) const {
    double v = 1;
    for (int k = 0; k < 4; ++k) v *= std::abs(entry(block, k).amplitude()) * entry(block, k).radius() * mollifier_mass<double>();
    return v;
  }
  // range of det T_i over the box
  std::pair<double, double> det_range(int i) const {
    auto prod = [](double a0, double a1, double b0, double b1) {
      const double c[4] = {a0 * b0, a0 * b1, a1 * b0, a1 * b1};
      return std::pair{*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
    };
    const auto ad = prod(lo(4 * i), hi(4 * i), lo(4 * i + 3), hi(4 * i + 3));
    const auto bc = prod(lo(4 * i + 1), hi(4 * i + 1), lo(4 * i + 2), hi(4 * i + 2));
    return {ad.first - bc.second, ad.second - bc.first};
  }
  // sup |b1 det T1 - b2 det T2| over the box
  double sup_abs_P(const std::array<double, 2>& b) const {
    const auto d1 = det_range(0), d2 = det_range(1);
    const double lo = std::min(b[0] * d1.first, b[0] * d1.second) - std::max(b[1] * d2.first, b[1] * d2.second);
    const double hi = std::max(b[0] * d1.first, b[0] * d1.second) - std::min(b[1] * d2.first, b[1] * d2.second);
    return std::max(std::abs(lo), std::abs(hi));
  }

 private:
  std::array<SmoothWeight, 8> e_;
  std::array<double, 2> min_abs_det_{};
};

inline double P_of(const std::array<double, 2>& b, const Mat8& T) {
  return b[0] * (T[0] * T[3] - T[1] * T[2]) - b[1] * (T[4] * T[7] - T[5] * T[6]);
}

// tr(gamma1 T1) + tr(gamma2 T2)
inline double trace_pairing(const Mat8& g, const Mat8& T) {
  double s = 0;
  for (int i = 0; i < 2; ++i) {
    const int o = 4 * i;
    s += g[o] * T[o] + g[o + 1] * T[o + 2] + g[o + 2] * T[o + 1] + g[o + 3] * T[o + 3];
  }
  return s;
}

enum class ArchKernel { weight_of_t, weight_of_ratio };

struct ArchResult {
  std::complex<double> value = 0;
  double error = 0;
  double truncation = 0;
  bool flagged = false;
  bool exact_zero = false;
  QuadratureSpec::Method method = QuadratureSpec::Method::fourier_factored;
};

namespace detail {

inline void check_arch_args(const std::array<double, 2>& b, double t) {
  require(t != 0, "t must be nonzero");
  for (double x : b) require(std::abs(x) >= 0.5 && std::abs(x) <= 2.0, "|b_i| must lie in [1/2, 2]");
}

struct PairBound {
  double lo = 0, hi = 0;
  double bound = 0;
};

// a-range where |h^(beta + kappa a)| can exceed eps, and a bound for |int g(a) e(alpha a) h^(beta + kappa a) da|
inline PairBound pair_bound(const SmoothWeight& g, const SmoothWeight& h, double beta, double kappa, double eps) {
  const auto& G = MollifierTransform::instance();
  const double hs = std::abs(h.amplitude()) * h.radius();
  const double reach = G.envelope_radius(eps / hs) / h.radius();
  PairBound pb{g.lo(), g.hi(), 0};
  if (kappa != 0) {
    double a0 = (-reach - beta) / kappa, a1 = (reach - beta) / kappa;
    if (a0 > a1) std::swap(a0, a1);
    pb.lo = std::max(pb.lo, a0);
    pb.hi = std::min(pb.hi, a1);
  } else if (std::abs(beta) >= reach) {
    pb.hi = pb.lo;
  }
  const double l1g = std::abs(g.amplitude()) * g.radius() * mollifier_mass<double>();
  // least |beta + kappa a| over the support of g
  const double e0 = beta + kappa * g.lo(), e1 = beta + kappa * g.hi();
  const double dmin = (e0 > 0) != (e1 > 0) ? 0.0 : std::min(std::abs(e0), std::abs(e1));
  pb.bound = l1g * hs * G.envelope(h.radius() * dmin);
  if (!(pb.hi > pb.lo)) pb.bound = std::min(pb.bound, eps * (g.hi() - g.lo()) * std::abs(g.amplitude()));
  return pb;
}

// int g(a) e(alpha a) h^(beta + kappa a) da to absolute tolerance tol
inline QuadResult<std::complex<double>> pair_integral(const SmoothWeight& g, const SmoothWeight& h, double alpha,
                                                      double beta, double kappa, double tol) {
  const double l1g = std::abs(g.amplitude()) * g.radius() * mollifier_mass<double>();
  const auto pb = pair_bound(g, h, beta, kappa, 0.1 * tol / l1g);
  QuadResult<std::complex<double>> r;
  if (!(pb.hi > pb.lo)) {
    r.error = pb.bound;
    return r;
  }
  auto f = [&](double a) { return g(a) * unit_phase(a, alpha) * bump_fourier(h, beta + kappa * a); };
  QuadratureSpec spec;
  spec.tolerance = tol;
  spec.max_depth = 8;
  const double freq = std::abs(alpha) + std::abs(kappa) * (std::abs(h.center()) + h.radius()) + 1;
  r = integrate_complex(f, pb.lo, pb.hi, spec, oscillation_pieces(pb.hi - pb.lo, freq));
  r.error += 0.1 * tol;
  return r;
}

}  // namespace detail

// W(t) prod of entry transforms at the dual coefficients gamma_ji / t
inline ArchResult arch_weight_of_t(const MatrixBump& f, const SmoothWeight& W, const Mat8& gamma, double t) {
  ArchResult r;
  r.method = QuadratureSpec::Method::tensor_product;
  const double w = W(t);
  if (w == 0) {
    r.exact_zero = true;
    return r;
  }
  static constexpr int dual[4] = {0, 2, 1, 3};
  std::complex<double> v = w;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 4; ++k) v *= bump_fourier(f.entry(i, k), gamma[4 * i + dual[k]] / t);
  r.value = v;
  r.error = 1e-13 * std::abs(w) * f.block_l1(0) * f.block_l1(1);
  return r;
}

// int W^(x) J_1(x) J_2(x) dx, J_i the Fourier-factored gl2 integrals.
// Tolerances are relative to the trivial bound B = int |W^| * int |f_1| * int |f_2|.
inline ArchResult arch_fourier_factored(const MatrixBump& f, const SmoothWeight& W, const std::array<double, 2>& b,
                                        const Mat8& gamma, double t, const QuadratureSpec& spec) {
  ArchResult r;
  r.method = QuadratureSpec::Method::fourier_factored;
  if (std::abs(t) * W.lo() >= f.sup_abs_P(b)) {
    r.exact_zero = true;
    return r;
  }
  const double l1 = f.block_l1(0) * f.block_l1(1);
  const double B = 2 * std::abs(W.amplitude()) * detail::MollifierTransform::instance().tail(0) * l1;
  const double tol = std::max(spec.tolerance, 1e-10) * B;
  const double X = bump_fourier_radius(W, 0.25 * tol / l1);
  r.truncation = bump_fourier_tail(W, X) * l1;
  double skipped = 0, propagated = 0;
  struct Pair {
    int g, h;
    double alpha, beta, kappa;
  };
  auto pairs = [&](int i, double x) {
    const double kappa = x * (i == 0 ? 1.0 : -1.0) * b[i] / t;
    const int o = 4 * i;
    // a-d pair: phase g11 a + g22 d - kappa a d; b-c pair: g21 b + g12 c + kappa b c
    return std::array<Pair, 2>{Pair{0, 3, gamma[o] / t, gamma[o + 3] / t, -kappa},
                               Pair{1, 2, gamma[o + 2] / t, gamma[o + 1] / t, kappa}};
  };
  auto integrand = [&](double x) -> std::complex<double> {
    const auto w = bump_fourier(W, x);
    std::array<double, 4> bound;
    for (int i = 0; i < 2; ++i) {
      const auto ps = pairs(i, x);
      for (int k = 0; k < 2; ++k)
        bound[2 * i + k] = detail::pair_bound(f.entry(i, ps[k].g), f.entry(i, ps[k].h), ps[k].beta, ps[k].kappa, 0).bound;
    }
    const double total = std::abs(w) * bound[0] * bound[1] * bound[2] * bound[3];
    if (total <= 1e-3 * tol / (2 * X)) {
      skipped = std::max(skipped, total);
      return 0.0;
    }
    std::complex<double> value = w;
    double err = 0;
    for (int i = 0; i < 2; ++i) {
      const auto ps = pairs(i, x);
      for (int k = 0; k < 2; ++k) {
        const auto& g = f.entry(i, ps[k].g);
        const auto& h = f.entry(i, ps[k].h);
        const double scale = std::abs(g.amplitude() * h.amplitude()) * g.radius() * h.radius() * mollifier_mass<double>() *
                             mollifier_mass<double>();
        const auto q = detail::pair_integral(g, h, ps[k].alpha, ps[k].beta, ps[k].kappa, 1e-12 * scale);
        err = std::abs(value) * q.error + err * (std::abs(q.value) + q.error);
        value *= q.value;
      }
    }
    propagated = std::max(propagated, err);
    return value;
  };
  QuadratureSpec xs = spec;
  xs.tolerance = 0.5 * tol;
  xs.max_depth = 10;
  const int pieces = std::max(8, static_cast<int>(std::ceil(2 * X * (std::abs(W.center()) + W.radius()))));
  const auto q = integrate_complex(integrand, -X, X, xs, pieces);
  r.value = q.value;
  r.error = q.error + r.truncation + 2 * X * (propagated + skipped);
  r.flagged = r.error > 0.1 * std::abs(r.value);
  return r;
}

// randomly shifted Sobol points over the support box; error from the spread of the shifts
template <class Integrand>
ArchResult qmc_box_integral(const MatrixBump& f, Integrand g, const QuadratureSpec& spec) {
  const int shifts = 8;
  const std::int64_t per = std::max<std::int64_t>(1024, spec.budget / shifts);
  Mat8 lo, len;
  double vol = 1;
  for (int k = 0; k < 8; ++k) {
    lo[k] = f.lo(k);
    len[k] = f.hi(k) - f.lo(k);
    vol *= len[k];
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<Mat8> shift(shifts);
  for (auto& s : shift)
    for (auto& v : s) v = u01(rng);
  // one Sobol stream, cut into fixed blocks so the reduction order is fixed
  const std::int64_t block = 1 << 14;
  std::vector<std::complex<double>> means(shifts);
  for (int s = 0; s < shifts; ++s) {
    auto map = [&](std::int64_t b0, std::int64_t b1) {
      boost::random::sobol gen(8);
      gen.discard(static_cast<std::uintmax_t>(b0) * 8);
      const double scale = 1.0 / (static_cast<double>(gen.max()) + 1.0);
      std::vector<std::complex<double>> part;
      part.reserve(static_cast<std::size_t>(b1 - b0));
      Mat8 T;
      for (std::int64_t n = b0; n < b1; ++n) {
        for (int k = 0; k < 8; ++k) {
          double x = static_cast<double>(gen()) * scale + shift[s][k];
          if (x >= 1) x -= 1;
          T[k] = lo[k] + len[k] * x;
        }
        part.push_back(g(T));
      }
      return std::vector<std::complex<double>>{pairwise_sum(part)};
    };
    auto fold = [](std::vector<std::complex<double>> acc, const std::vector<std::complex<double>>& p) {
      acc.insert(acc.end(), p.begin(), p.end());
      return acc;
    };
    const auto partial = parallel_map_reduce<std::vector<std::complex<double>>>(per, block, {}, map, fold, spec.workers);
    means[s] = vol * pairwise_sum(partial) / static_cast<double>(per);
  }
  ArchResult r;
  r.method = QuadratureSpec::Method::low_discrepancy;
  r.value = pairwise_sum(means) / static_cast<double>(shifts);
  double var = 0;
  for (const auto& m : means) var += std::norm(m - r.value);
  r.error = std::sqrt(var / (shifts * (shifts - 1.0)));
  r.flagged = r.error > 0.1 * std::abs(r.value);
  return r;
}

// int h0 f(T) e(tr(gamma T)/t) dT over gl2(R)^2, h0 = W(t) or W(P(b, T)/t)
inline ArchResult arch_osc_integral(const MatrixBump& f, ArchKernel kernel, const SmoothWeight& W,
                                    const std::array<double, 2>& b, const Mat8& gamma, double t,
                                    const QuadratureSpec& spec = {}) {
  detail::check_arch_args(b, t);
  if (spec.method == QuadratureSpec::Method::low_discrepancy) {
    const double wt = kernel == ArchKernel::weight_of_t ? W(t) : 1.0;
    if (wt == 0 || (kernel == ArchKernel::weight_of_ratio && std::abs(t) * W.lo() >= f.sup_abs_P(b))) {
      ArchResult r;
      r.method = spec.method;
      r.exact_zero = true;
      return r;
    }
    auto r = qmc_box_integral(
        f,
        [&](const Mat8& T) {
          const double h = kernel == ArchKernel::weight_of_t ? wt : W(P_of(b, T) / t);
          if (h == 0) return std::complex<double>(0);
          return h * f(T) * unit_phase(trace_pairing(gamma, T), 1.0 / t);
        },
        spec);
    double gmax = 0;
    for (double g : gamma) gmax = std::max(gmax, std::abs(g));
    if (gmax / std::abs(t) > 64) r.flagged = true;
    return r;
  }
  if (kernel == ArchKernel::weight_of_t) return arch_weight_of_t(f, W, gamma, t);
  return arch_fourier_factored(f, W, b, gamma, t, spec);
}

struct DecayRow {
  double parameter = 0;
  double magnitude = 0;
  double error = 0;
  bool usable = false;
  bool exact_zero = false;
};

// least-squares slope of log|v| against log(parameter)
inline double log_log_slope(const std::vector<DecayRow>& rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(rows.size());
  require(rows.size() >= 2, "slope fit needs two points");
  for (const auto& r : rows) {
    const double x = std::log(r.parameter), y = std::log(r.magnitude);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct DecayConfig {
  double eps = 0.5;
  double N_test = 6;
  std::vector<double> small_t{0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
  double gamma_t = 0.25;
  std::vector<double> gamma_scales{1, 1.41421356, 2, 2.82842712, 4, 5.65685425, 8};
  std::vector<double> large_t_factors{1.0, 1.5, 2, 4, 8, 16};
  int fit_points = 4;
};

struct DecayReport {
  DecayConfig config;
  std::vector<DecayRow> small_t, large_t, large_gamma;
  double small_t_exponent = 0;
  double large_t_exponent = 0;
  double large_gamma_exponent = 0;
  double support_radius = 0;
  bool small_t_pass = false, large_t_pass = false, large_gamma_pass = false;
  bool pass = false;
};

// decay exponents of int W(P/t) f e(tr gamma T / t) dT in small t, large t and along a ray in gamma
inline DecayReport decay_report(const MatrixBump& f, const SmoothWeight& W, const std::array<double, 2>& b,
                                const Mat8& gamma0, const DecayConfig& cfg = {}, const QuadratureSpec& spec = {}) {
  DecayReport rep;
  rep.config = cfg;
  auto row = [&](double param, const Mat8& g, double t) {
    const auto r = arch_osc_integral(f, ArchKernel::weight_of_ratio, W, b, g, t, spec);
    DecayRow d;
    d.parameter = param;
    d.magnitude = std::abs(r.value);
    d.error = r.error;
    d.exact_zero = r.exact_zero;
    d.usable = !r.exact_zero && d.magnitude > 0 && r.error <= 0.1 * d.magnitude;
    return d;
  };
  auto pick = [&](const std::vector<DecayRow>& rows, bool smallest) {
    std::vector<DecayRow> u;
    for (const auto& r : rows)
      if (r.usable) u.push_back(r);
    std::sort(u.begin(), u.end(), [&](const DecayRow& a, const DecayRow& c) {
      return smallest ? a.parameter < c.parameter : a.parameter > c.parameter;
    });
    if (u.size() > static_cast<std::size_t>(cfg.fit_points)) u.resize(cfg.fit_points);
    return u;
  };
  for (double t : cfg.small_t) rep.small_t.push_back(row(t, gamma0, t));
  const auto st = pick(rep.small_t, true);
  if (st.size() >= 2) {
    rep.small_t_exponent = log_log_slope(st);
    rep.small_t_pass = rep.small_t_exponent >= 4 - cfg.eps - 0.25;
  }
  // beyond sup|P| / inf supp W the kernel vanishes identically
  rep.support_radius = f.sup_abs_P(b) / W.lo();
  bool all_zero = true;
  for (double k : cfg.large_t_factors) {
    rep.large_t.push_back(row(k * rep.support_radius, gamma0, k * rep.support_radius));
    all_zero = all_zero && rep.large_t.back().exact_zero;
  }
  rep.large_t_exponent = all_zero ? std::numeric_limits<double>::infinity() : 0.0;
  rep.large_t_pass = all_zero;
  for (double lam : cfg.gamma_scales) {
    Mat8 g = gamma0;
    for (auto& x : g) x *= lam;
    rep.large_gamma.push_back(row(lam, g, cfg.gamma_t));
  }
  const auto lg = pick(rep.large_gamma, false);
  if (lg.size() >= 2) {
    rep.large_gamma_exponent = -log_log_slope(lg);
    rep.large_gamma_pass = rep.large_gamma_exponent >= cfg.N_test;
  }
  rep.pass = rep.small_t_pass && rep.large_t_pass && rep.large_gamma_pass;
  return rep;
}

// configuration with a critical manifold: f_1 near I, f_2 near -I, gamma = (I, I), b = (1, 1)
struct CriticalExample {
  MatrixBump f = MatrixBump::around({1, 0, 0, 1, -1, 0, 0, -1}, 0.3);
  std::array<double, 2> b{1, 1};
  Mat8 gamma{1, 0, 0, 1, 1, 0, 0, 1};
};

}  // namespace ikern
