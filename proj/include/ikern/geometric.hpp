#pragma once

#include <complex>
#include <map>
#include <unordered_map>

#include "arch.hpp"
#include "delta.hpp"
#include "local_zeta.hpp"

namespace ikern {

// S = {inf, 2} over Q: O^S = Z[1/2], units +-2^Z, F_S = R x Q_2, d_F = 1
struct SCtx {
  static constexpr std::int64_t dyadic = 2;
  static constexpr double d_F = 1.0;

  // |x|_S = |x|_inf |x|_2
  static double s_norm(const mpq_class& x) {
    require(x != 0, "|0|_S is not defined here");
    return std::ldexp(std::abs(x.get_d()), -valuation(x, dyadic));
  }
  static bool is_s_unit(const mpq_class& x) {
    if (x == 0) return false;
    mpz_class n = abs(x.get_num()), d = x.get_den();
    while (n % 2 == 0) n /= 2;
    while (d % 2 == 0) d /= 2;
    return n == 1 && d == 1;
  }
  static bool is_s_integral(const mpq_class& x) {
    mpz_class d = x.get_den();
    while (d % 2 == 0) d /= 2;
    return d == 1;
  }
  // fundamental domain R_{>0} x Z_2^x for the units acting on R^x x Q_2^x
  static bool in_fundamental_domain(const mpq_class& x) { return x > 0 && valuation(x, dyadic) == 0; }
  // the unique unit u = +-2^j with u x in the fundamental domain
  static mpq_class fundamental_unit(const mpq_class& x) {
    require(x != 0, "0 has no unit translate");
    const int v = valuation(x, dyadic);
    mpq_class u(x > 0 ? 1 : -1);
    if (v > 0) mpq_div_2exp(u.get_mpq_t(), u.get_mpq_t(), v);
    if (v < 0) mpq_mul_2exp(u.get_mpq_t(), u.get_mpq_t(), -v);
    return u;
  }
  // 1_F(b) = 1_{F_S}(b1) 1_{O^{S x}}(b1) 1_{O^{S x}}(b2) on diagonally embedded rationals
  static bool indicator_F(const mpq_class& b1, const mpq_class& b2) {
    return is_s_unit(b1) && is_s_unit(b2) && in_fundamental_domain(b1);
  }
};

inline mpq_class power_of_two(int e) {
  mpq_class r(1);
  if (e > 0) mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), e);
  if (e < 0) mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), -e);
  return r;
}

inline std::int64_t det2(const IntMat2& g) { return g[0] * g[3] - g[1] * g[2]; }

// Phi = 1_{gl2(Z_p), v(det) = 2} - (p^2 + p + 1) 1_{p GL2(Z_p)}, a spherical function with mass 0
struct HeckeA {
  std::int64_t p = 2;
  int k = 2;

  std::int64_t coset_factor() const { return p * p + p + 1; }
  // period: the value on gl2(Z_p) depends on g mod p^3
  int period_exponent() const { return 3; }
  // value at an integral matrix (its image in gl2(Z_p))
  std::int64_t operator()(const IntMat2& g) const {
    const std::int64_t d = det2(g);
    if (d == 0 || valuation(d, p) != 2) return 0;
    const bool scalar = std::all_of(g.begin(), g.end(), [&](std::int64_t x) { return x % p == 0; });
    return scalar ? 1 - coset_factor() : 1;
  }
  bool satisfies_support(const IntMat2& g) const { return (*this)(g) == 0 || valuation(det2(g), p) == k; }
};

inline HeckeA hecke_A_function(std::int64_t p, int k = 2) {
  require(is_prime(p), "hecke_A_function needs a prime");
  require(k == 2, "only the k = 2 function is implemented");
  return {p, k};
}

// left cosets g GL2(Z_p) in {g in gl2(Z_p) : v(det g) = 2}, via Hermite forms [[p^a, b], [0, p^c]], b mod p^c
inline std::int64_t hecke_coset_count(std::int64_t p, int k) {
  std::int64_t n = 0;
  for (int a = 0; a <= k; ++a) n += checked_pow(p, k - a);
  return n;
}

struct HeckeMassReport {
  std::int64_t p = 0;
  std::int64_t coset_count = 0;
  std::int64_t coset_formula = 0;
  std::int64_t support_count = 0;   // #{T mod p^3 : v(det T) = 2}
  std::int64_t scalar_count = 0;    // #{T mod p^3 : T in p GL2(Z_p)}
  std::int64_t cosets_times_volume = 0;  // (p^2 + p + 1) * #{T mod p^3 : T in p GL2(Z_p)}
  std::int64_t signed_sum = 0;      // sum_{T mod p^3} Phi(T)
  mpq_class mass_support, mass_subtracted, total;
  bool bi_invariant = false;
  bool pass = false;
};

// exact mass identities and bi-invariance by enumeration of gl2(Z/p^3)
inline HeckeMassReport hecke_mass_check(const HeckeA& phi) {
  HeckeMassReport r;
  const std::int64_t p = phi.p, m = checked_pow(p, phi.period_exponent());
  r.p = p;
  r.coset_count = hecke_coset_count(p, phi.k);
  r.coset_formula = p * p + p + 1;
  const std::int64_t n = m * m * m * m;
  std::vector<std::int8_t> table(n);
  auto index = [&](const IntMat2& g) {
    return ((mod(g[0], m) * m + mod(g[1], m)) * m + mod(g[2], m)) * m + mod(g[3], m);
  };
  for (std::int64_t i = 0; i < n; ++i) {
    const IntMat2 g{i / (m * m * m), (i / (m * m)) % m, (i / m) % m, i % m};
    const std::int64_t v = phi(g);
    table[i] = v == 0 ? 0 : (v == 1 ? 1 : 2);
    if (v != 0) ++r.support_count;
    if (v < 0) ++r.scalar_count;
    r.signed_sum += v;
  }
  r.cosets_times_volume = phi.coset_factor() * r.scalar_count;
  // additive volumes with vol(gl2(Z_p)) = 1
  const mpq_class cell(mpz_class(1), mpz_class(static_cast<unsigned long>(n)));
  r.mass_support = cell * static_cast<long>(r.support_count);
  r.mass_subtracted = cell * static_cast<long>(r.cosets_times_volume);
  r.total = cell * static_cast<long>(r.signed_sum);
  const std::int64_t g0 = p == 2 ? 3 : primitive_root(p);
  const std::vector<IntMat2> gens{{1, 1, 0, 1}, {1, 0, 1, 1}, {g0, 0, 0, 1}, {1, 0, 0, g0}, {-1, 0, 0, 1}};
  r.bi_invariant = true;
  for (std::int64_t i = 0; i < n && r.bi_invariant; ++i) {
    if (table[i] == 0 && i % 7 != 0) continue;
    const IntMat2 g{i / (m * m * m), (i / (m * m)) % m, (i / m) % m, i % m};
    for (const auto& k : gens) {
      const IntMat2 kg{k[0] * g[0] + k[1] * g[2], k[0] * g[1] + k[1] * g[3], k[2] * g[0] + k[3] * g[2],
                       k[2] * g[1] + k[3] * g[3]};
      const IntMat2 gk{g[0] * k[0] + g[1] * k[2], g[0] * k[1] + g[1] * k[3], g[2] * k[0] + g[3] * k[2],
                       g[2] * k[1] + g[3] * k[3]};
      if (table[index(kg)] != table[i] || table[index(gk)] != table[i]) {
        r.bi_invariant = false;
        break;
      }
    }
  }
  r.pass = r.coset_count == r.coset_formula && r.support_count == r.cosets_times_volume && r.signed_sum == 0 &&
           r.total == 0 && r.bi_invariant;
  return r;
}

struct SatakePair {
  std::complex<double> alpha{1, 0}, beta{1, 0};
};

// q (alpha^2 + alpha beta + beta^2) - (q^2 + q + 1) alpha beta
inline std::complex<double> hecke_eigenvalue(const SatakePair& sp, double q) {
  const auto a = sp.alpha, b = sp.beta;
  return q * (a * a + a * b + b * b) - (q * q + q + 1) * a * b;
}

struct EigenScanReport {
  double q = 0;
  double delta = 0.05;
  std::int64_t points = 0;
  double min_abs = std::numeric_limits<double>::infinity();
  SatakePair argmin;
  bool pass = false;
};

// min |eigenvalue| over alpha beta = e^{i phi}, |alpha| in [q^{-(1/2 - delta)}, q^{1/2 - delta}]
inline EigenScanReport eigenvalue_nonvanishing_scan(double q, int n_radius = 25, int n_arg = 20, int n_phi = 20,
                                                    double delta = 0.05) {
  EigenScanReport r;
  r.q = q;
  r.delta = delta;
  const double smax = 0.5 - delta;
  const double two_pi = 2 * std::acos(-1.0);
  for (int i = 0; i < n_radius; ++i) {
    const double s = n_radius == 1 ? 0 : -smax + 2 * smax * i / (n_radius - 1);
    const double rho = std::pow(q, s);
    for (int j = 0; j < n_arg; ++j)
      for (int l = 0; l < n_phi; ++l) {
        const double theta = two_pi * j / n_arg, phi = two_pi * l / n_phi;
        SatakePair sp{std::polar(rho, theta), std::polar(1 / rho, phi - theta)};
        const double v = std::abs(hecke_eigenvalue(sp, q));
        ++r.points;
        if (v < r.min_abs) {
          r.min_abs = v;
          r.argmin = sp;
        }
      }
  }
  r.pass = r.min_abs > 0;
  return r;
}

// |eigenvalue| along alpha = q^s, beta = q^{-s}: vanishes at s = 1/2, where alpha / beta = q
inline std::vector<std::pair<double, double>> eigenvalue_boundary_ray(double q, const std::vector<double>& s) {
  std::vector<std::pair<double, double>> out;
  for (double x : s) out.emplace_back(x, std::abs(hecke_eigenvalue({std::pow(q, x), std::pow(q, -x)}, q)));
  return out;
}

// f = f_inf (f_{1,2} x f_{2,2}); f_{1,2} = Phi at p = 2, f_{2,2} = 1_{GL2(Z_2)}
struct GlobalTestFunction {
  MatrixBump arch;  // at unit height; at height X the archimedean factor is arch(T / sqrt X)
  HeckeA hecke{2, 2};

  // f_1 near 2I and f_2 near I, so that det T1 = 4 det T2 has solutions with b = (1, 4)
  static GlobalTestFunction standard(double radius1 = 0.6, double radius2 = 0.3) {
    const double amp = std::exp(1.0);
    std::array<SmoothWeight, 8> e;
    const double c1[4] = {2, 0, 0, 2}, c2[4] = {1, 0, 0, 1};
    for (int k = 0; k < 4; ++k) {
      e[k] = SmoothWeight::bump(c1[k], radius1, amp);
      e[4 + k] = SmoothWeight::bump(c2[k], radius2, amp);
    }
    return {MatrixBump(e), {2, 2}};
  }
  GlobalTestFunction scaled_first(double s) const {
    auto e = arch.entries();
    e[0] = e[0].scaled(s);
    return {MatrixBump(e), hecke};
  }
  double finite_first(const IntMat2& g) const { return static_cast<double>(hecke(g)); }
  static double finite_second(const IntMat2& g) { return det2(g) % 2 != 0 ? 1.0 : 0.0; }
};

struct SigmaParams {
  double X = 100;
  double Q = 10;
  double y_scale = 0.25;
  DeltaConfig delta;
  SmoothWeight V1, V2, V3;  // V3 is the archimedean factor; the dyadic factor is 1_{Z_2^x}

  // V1(y) = y on the |det T1|_S range of supp f, V2 = 1 on supp V1 and on the |b2 det T2|_S range,
  // V3 = 1 on the range of b2 det T2 / det T1
  static SigmaParams standard(double X, const GlobalTestFunction& f) {
    require(X > 0, "X must be positive");
    SigmaParams s;
    s.X = X;
    s.Q = std::sqrt(X);
    s.delta = DeltaConfig::standard(s.Q, PlaceSet::archimedean_and_2);
    const auto d1 = f.arch.det_range(0), d2 = f.arch.det_range(1);
    require(d1.first > 0 && d2.first > 0, "the standard V family needs positive determinants");
    // |det T1|_S = det T1 * 2^{v2(X) - 2} for an integral gamma1 with v2(det gamma1) = 2
    const double scale = std::ldexp(1.0, valuation(mpq_class(X), 2) - 2);
    s.y_scale = scale;
    const double y_lo = d1.first * scale, y_hi = d1.second * scale;
    s.V1 = SmoothWeight::plateau(0.6 * y_lo, 0.95 * y_lo, 1.05 * y_hi, 1.4 * y_hi).times_x();
    const double z_lo = std::min(0.6 * y_lo, d2.first), z_hi = std::max(1.4 * y_hi, d2.second);
    s.V2 = SmoothWeight::plateau(0.5 * z_lo, 0.9 * z_lo, 1.1 * z_hi, 1.5 * z_hi);
    const double r_lo = std::min(1.0, 4 * d2.first / d1.second), r_hi = std::max(1.0, 4 * d2.second / d1.first);
    s.V3 = SmoothWeight::plateau(0.5 * r_lo, 0.9 * r_lo, 1.1 * r_hi, 1.5 * r_hi);
    return s;
  }

  // V(x1, x2) = V1(|x1|_S) V2(|x2|_S) V3(x2 / x1) on diagonally embedded rationals
  double V(const mpq_class& x1, const mpq_class& x2) const {
    if (x1 == 0 || x2 == 0) return 0;
    const mpq_class ratio = x2 / x1;
    if (valuation(ratio, 2) != 0) return 0;
    const double v3 = V3(ratio.get_d());
    if (v3 == 0) return 0;
    return V1(SCtx::s_norm(x1)) * V2(SCtx::s_norm(x2)) * v3;
  }
  double V(double x1, double x2) const { return V(mpq_class(x1), mpq_class(x2)); }
};

struct SigmaInvariantReport {
  bool V2_one_on_V1 = false;
  bool V3_one_near_1 = false;
  bool V1_linear_on_support = false;
  bool pass = false;
};

// pointwise grid checks of the V family
inline SigmaInvariantReport check_sigma_params(const SigmaParams& s, const GlobalTestFunction& f, int grid = 2001) {
  SigmaInvariantReport r;
  r.V2_one_on_V1 = r.V3_one_near_1 = r.V1_linear_on_support = true;
  for (int i = 0; i <= grid; ++i) {
    const double y = s.V1.lo() + (s.V1.hi() - s.V1.lo()) * i / grid;
    if (s.V1(y) != 0 && s.V2(y) != 1.0) r.V2_one_on_V1 = false;
    const double z = 0.9 + 0.2 * i / grid;
    if (s.V3(z) != 1.0) r.V3_one_near_1 = false;
    const auto d = f.arch.det_range(0);
    const double w = (d.first + (d.second - d.first) * i / grid) * s.y_scale;
    if (s.V1(w) != w) r.V1_linear_on_support = false;
  }
  r.pass = r.V2_one_on_V1 && r.V3_one_near_1 && r.V1_linear_on_support;
  return r;
}

struct SigmaValue {
  double value = 0;
  double error = 0;
  std::int64_t lattice_points = 0;
  std::int64_t det_pairs = 0;
  double c_q_minus_1 = 0;
};

namespace detail {

// weighted lattice points grouped by determinant: sum_{gamma in block, det = D} f_inf(gamma / sqrt X) f_fin(gamma)
struct DetBuckets {
  std::map<std::int64_t, double> sums;
  std::int64_t points = 0;
};

inline DetBuckets det_buckets(const MatrixBump& f, int block, double X, double (*finite)(const GlobalTestFunction&, const IntMat2&),
                              const GlobalTestFunction& gtf, std::int64_t budget) {
  const double s = std::sqrt(X);
  std::array<std::int64_t, 4> lo, hi;
  std::int64_t count = 1;
  for (int k = 0; k < 4; ++k) {
    const auto& g = f.entry(block, k);
    lo[k] = static_cast<std::int64_t>(std::floor(s * g.lo())) + 1;
    hi[k] = static_cast<std::int64_t>(std::ceil(s * g.hi())) - 1;
    if (hi[k] < lo[k]) return {};
    count *= hi[k] - lo[k] + 1;
    if (count > budget) throw budget_exceeded("direct_sigma: lattice enumeration exceeds the budget");
  }
  DetBuckets out;
  std::map<std::int64_t, std::vector<double>> terms;
  for (std::int64_t a = lo[0]; a <= hi[0]; ++a)
    for (std::int64_t b = lo[1]; b <= hi[1]; ++b)
      for (std::int64_t c = lo[2]; c <= hi[2]; ++c)
        for (std::int64_t d = lo[3]; d <= hi[3]; ++d) {
          ++out.points;
          const IntMat2 g{a, b, c, d};
          const double fin = finite(gtf, g);
          if (fin == 0) continue;
          const double w = f.entry(block, 0)(a / s) * f.entry(block, 1)(b / s) * f.entry(block, 2)(c / s) *
                           f.entry(block, 3)(d / s);
          if (w == 0) continue;
          terms[det2(g)].push_back(w * fin);
        }
  for (auto& [D, v] : terms) out.sums[D] = pairwise_sum(v);
  return out;
}

inline double finite_first(const GlobalTestFunction& gtf, const IntMat2& g) { return gtf.finite_first(g); }
inline double finite_second(const GlobalTestFunction&, const IntMat2& g) { return GlobalTestFunction::finite_second(g); }

inline std::int64_t odd_abs(std::int64_t a) {
  a = std::abs(a);
  while (a != 0 && a % 2 == 0) a /= 2;
  return a;
}

}  // namespace detail

inline constexpr std::int64_t default_sigma_budget = 50'000'000;

// sum over gamma in GL2(Q)^2 and b with delta(P(b, gamma)) imposed exactly:
// V(b det gamma / X) / (|b1 det gamma1|_S X) 1_F(b) f 1_{gl2(O^S)}(gamma)
inline SigmaValue direct_sigma(const SigmaParams& sp, const GlobalTestFunction& gtf,
                               std::int64_t budget = default_sigma_budget) {
  SigmaValue r;
  const auto A1 = detail::det_buckets(gtf.arch, 0, sp.X, detail::finite_first, gtf, budget);
  const auto A2 = detail::det_buckets(gtf.arch, 1, sp.X, detail::finite_second, gtf, budget);
  r.lattice_points = A1.points + A2.points;
  r.c_q_minus_1 = c_q(sp.delta) - 1;
  // b1 = 1 is forced by 1_F; b2 = D1 / D2 must be an S-unit
  std::map<std::int64_t, std::vector<std::pair<std::int64_t, double>>> by_odd;
  for (const auto& [D2, w2] : A2.sums) by_odd[detail::odd_abs(D2)].emplace_back(D2, w2);
  std::vector<double> terms;
  const mpq_class Xq(sp.X);
  for (const auto& [D1, w1] : A1.sums) {
    const auto it = by_odd.find(detail::odd_abs(D1));
    if (it == by_odd.end()) continue;
    for (const auto& [D2, w2] : it->second) {
      ++r.det_pairs;
      const mpq_class x1 = mpq_class(static_cast<long>(D1)) / Xq;
      const mpq_class b2 = mpq_class(static_cast<long>(D1)) / mpq_class(static_cast<long>(D2));
      if (!SCtx::indicator_F(mpq_class(1), b2)) continue;
      const double v = sp.V(x1, b2 * mpq_class(static_cast<long>(D2)) / Xq);
      if (v == 0) continue;
      terms.push_back(v / (SCtx::s_norm(mpq_class(static_cast<long>(D1))) * sp.X) * w1 * w2);
    }
  }
  r.value = pairwise_sum(terms);
  r.error = 1e-15 * static_cast<double>(terms.size()) * (std::abs(r.value) + 1e-300);
  return r;
}

// the same sum with delta^S(P(b, gamma)) replaced by its finite d-expansion at Q = sqrt X
inline SigmaValue delta_inserted_sigma(const SigmaParams& sp, const GlobalTestFunction& gtf, bool drop_c_q = false,
                                       std::int64_t budget = default_sigma_budget) {
  SigmaValue r;
  const auto A1 = detail::det_buckets(gtf.arch, 0, sp.X, detail::finite_first, gtf, budget);
  const auto A2 = detail::det_buckets(gtf.arch, 1, sp.X, detail::finite_second, gtf, budget);
  r.lattice_points = A1.points + A2.points;
  const double cq = c_q(sp.delta);
  r.c_q_minus_1 = cq - 1;
  std::map<mpq_class, double> cache;
  auto delta = [&](const mpq_class& m) {
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    double v = delta_expansion(sp.delta, m);
    if (drop_c_q) v /= cq;
    cache.emplace(m, v);
    return v;
  };
  std::vector<double> terms;
  const mpq_class Xq(sp.X);
  for (const auto& [D1, w1] : A1.sums)
    for (const auto& [D2, w2] : A2.sums) {
      // V3 at 2 forces v2(b2) = v2(D1) - v2(D2); other powers of 2 give V = 0
      const int j = valuation(D1, 2) - valuation(D2, 2);
      for (int sign : {1, -1}) {
        const mpq_class b2 = power_of_two(j) * sign;
        const mpq_class x1 = mpq_class(static_cast<long>(D1)) / Xq;
        const mpq_class x2 = b2 * mpq_class(static_cast<long>(D2)) / Xq;
        const double v = sp.V(x1, x2);
        if (v == 0) continue;
        ++r.det_pairs;
        const mpq_class m = mpq_class(static_cast<long>(D1)) - b2 * mpq_class(static_cast<long>(D2));
        const double dv = delta(m);
        if (dv == 0) continue;
        terms.push_back(v / (SCtx::s_norm(mpq_class(static_cast<long>(D1))) * sp.X) * dv * w1 * w2);
      }
    }
  r.value = pairwise_sum(terms);
  r.error = 1e-15 * static_cast<double>(terms.size()) * (std::abs(r.value) + 1e-300);
  return r;
}

struct Sigma0Row {
  mpq_class b2;
  int t_valuation = 0;
  mpq_class value;
  bool empty = false;
};

struct Sigma0Report {
  mpq_class plain;
  std::vector<Sigma0Row> weighted;
  bool pass = false;
};

// the two local integrals at p = 2 behind Sigma_0 = 0, as exact finite sums:
// int f_{1,2} f_{2,2} dT and int 1_{Z_2^x}(P(b, T) / t) 1_F(b) f_{1,2} f_{2,2} dT.
// Both depend on T only through (det T1, det T2), so they are sums over determinant histograms mod 2^m.
inline Sigma0Report sigma0_vanishing_check(const GlobalTestFunction& gtf, const std::vector<mpq_class>& b2_grid,
                                           const std::vector<int>& t_valuations, int m = 6) {
  require(m >= gtf.hecke.period_exponent(), "histogram precision must cover the period of Phi");
  Sigma0Report rep;
  const std::int64_t M = checked_pow(2, m);
  std::vector<std::int64_t> H1(M, 0), H2(M, 0), S1(M, 0);
  for (std::int64_t a = 0; a < M; ++a)
    for (std::int64_t b = 0; b < M; ++b)
      for (std::int64_t c = 0; c < M; ++c)
        for (std::int64_t d = 0; d < M; ++d) {
          const IntMat2 g{a, b, c, d};
          const std::int64_t D = mod(a * d - b * c, M);
          const std::int64_t v = gtf.hecke(g);
          H1[D] += v;
          if (v != 0) ++S1[D];
          if (D % 2 != 0) ++H2[D];
        }
  const mpq_class cell = inverse_power(2, 8 * m);
  std::int64_t h1 = 0, h2 = 0;
  for (std::int64_t D = 0; D < M; ++D) {
    h1 += H1[D];
    h2 += H2[D];
  }
  rep.plain = cell * mpq_class(mpz_class(static_cast<long>(h1)) * static_cast<long>(h2));
  bool ok = rep.plain == 0;
  for (const auto& b2 : b2_grid) {
    const bool indicator = SCtx::indicator_F(mpq_class(1), b2);
    const int j = valuation(b2, 2);
    for (int vt : t_valuations) {
      // P mod 2^{vt+1} is fixed by D1, D2 mod 2^m when m >= vt + 1 - min(j, 0)
      require(vt + 1 - std::min(j, 0) <= m && vt + 1 <= m, "t-valuation beyond the histogram precision");
      Sigma0Row row;
      row.b2 = b2;
      row.t_valuation = vt;
      mpz_class acc = 0;
      bool any = false;
      if (indicator)
        for (std::int64_t D1 = 0; D1 < M; ++D1) {
          if (S1[D1] == 0) continue;
          for (std::int64_t D2 = 0; D2 < M; ++D2) {
            if (H2[D2] == 0) continue;
            const mpq_class P = mpq_class(static_cast<long>(D1)) - b2 * mpq_class(static_cast<long>(D2));
            // v(P) is read off modulo 2^m; the class of P modulo 2^{vt+1} decides v(P) = vt
            const int vp = P == 0 ? 1 << 20 : valuation(P, 2);
            const bool exact = vp < std::min(m, m + j);
            const bool hit = exact ? vp == vt : false;
            if (!hit) continue;
            any = true;
            acc += mpz_class(static_cast<long>(H1[D1])) * static_cast<long>(H2[D2]);
          }
        }
      row.value = cell * mpq_class(acc);
      row.empty = !any;
      ok = ok && row.value == 0;
      rep.weighted.push_back(row);
    }
  }
  rep.pass = ok;
  return rep;
}

}  // namespace ikern
