#pragma once

#include "padic.hpp"

namespace ikern {

inline constexpr std::int64_t default_enumeration_budget = 100'000'000;

struct PhaseData {
  PAdicContext ctx;
  ResidueMat2 gamma0;
  std::int64_t x = 1;
  int tExp = 1;

  PhaseData(const PAdicContext& c, const ResidueMat2& g, std::int64_t xx, int t)
      : ctx(c), gamma0(g), x(c.reduce(xx)), tExp(t) {
    require(g.ctx() == c, "gamma0 must live in the phase context");
    require(c.is_unit(x), "quadratic coefficient x must be a unit");
    require(tExp >= 1 && tExp <= c.n, "need 1 <= tExp <= n");
  }
  std::int64_t modulus() const { return ctx.pow(tExp); }
};

inline mpq_class inverse_power(std::int64_t p, int e) {
  mpz_class d;
  mpz_ui_pow_ui(d.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(e));
  return mpq_class(mpz_class(1), d);
}

// Exponent histogram of x det T + tr(g T) over T mod m, in parallel blocks over (t11, t12).
inline std::vector<std::int64_t> quadratic_phase_histogram(std::int64_t m, std::int64_t x, std::int64_t g11,
                                                           std::int64_t g12, std::int64_t g21, std::int64_t g22,
                                                           unsigned workers = 0) {
  using Hist = std::vector<std::int64_t>;
  auto map = [&](std::int64_t lo, std::int64_t hi) {
    Hist h(m, 0);
    for (std::int64_t i = lo; i < hi; ++i) {
      const std::int64_t a = i / m, b = i % m;
      // T = [[a, b], [c, d]]; tr(gT) = g11 a + g12 c + g21 b + g22 d
      const std::int64_t step_d = mod(x * a + g22, m);
      for (std::int64_t c = 0; c < m; ++c) {
        std::int64_t ph = mod(g11 * a + g21 * b + g12 * c - mulmod(x, mulmod(b, c, m), m), m);
        for (std::int64_t d = 0; d < m; ++d) {
          ++h[ph];
          ph += step_d;
          if (ph >= m) ph -= m;
        }
      }
    }
    return h;
  };
  auto fold = [](Hist acc, const Hist& part) {
    if (acc.empty()) return part;
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += part[k];
    return acc;
  };
  return parallel_map_reduce<Hist>(m * m, std::max<std::int64_t>(1, (m * m) / 64), Hist{}, map, fold, workers);
}

// p^{-4t} sum_{T mod p^t} psi((x det T + tr g0 T)/p^t)
inline CycloRational brute_force_integral(const PhaseData& ph, std::int64_t budget = default_enumeration_budget,
                                          unsigned workers = 0) {
  const std::int64_t m = ph.modulus();
  std::int64_t terms;
  if (__builtin_mul_overflow(m * m, m * m, &terms) || terms > budget)
    throw budget_exceeded("brute_force_integral: p^(4 tExp) exceeds the enumeration budget");
  const auto& g = ph.gamma0;
  auto h = quadratic_phase_histogram(m, mod(ph.x, m), mod(g(0, 0), m), mod(g(0, 1), m), mod(g(1, 0), m),
                                     mod(g(1, 1), m), workers);
  // psi(k/m) = zeta_m^{-k}: reverse the histogram
  std::vector<std::int64_t> counts(m, 0);
  for (std::int64_t k = 0; k < m; ++k) counts[mod(-k, m)] = h[k];
  const auto sum = CyclotomicNumber::from_exponent_counts(static_cast<int>(m), counts);
  return inverse_power(ph.ctx.p, 4 * ph.tExp) * to_rational(sum);
}

// exponent k with psi(-det g0 / (x p^t)) = zeta_{p^t}^k
inline std::int64_t closed_form_exponent(const PhaseData& ph) {
  const std::int64_t m = ph.modulus();
  return mulmod(mod(ph.gamma0.det(), m), egcd_inverse(ph.x, m), m);
}

// p^{-2t} psi(-det g0 / (x p^t))
inline CycloRational closed_form_integral(const PhaseData& ph) {
  return CycloRational::monomial(static_cast<int>(ph.modulus()), closed_form_exponent(ph),
                                 inverse_power(ph.ctx.p, 2 * ph.tExp));
}

// gradient of x det T + tr(g0 T) in the coordinates (t11, t12, t21, t22), mod p^n
inline std::array<std::int64_t, 4> phase_gradient(const PhaseData& ph, const ResidueMat2& t) {
  const auto& g = ph.gamma0;
  const auto& c = ph.ctx;
  return {c.reduce(mulmod(ph.x, t(1, 1), c.pn) + g(0, 0)), c.reduce(-mulmod(ph.x, t(1, 0), c.pn) + g(1, 0)),
          c.reduce(-mulmod(ph.x, t(0, 1), c.pn) + g(0, 1)), c.reduce(mulmod(ph.x, t(0, 0), c.pn) + g(1, 1))};
}

// (1/x) [[-g22, g12], [g21, -g11]]
inline ResidueMat2 stationary_point(const PhaseData& ph) {
  const auto& g = ph.gamma0;
  const std::int64_t xi = egcd_inverse(ph.x, ph.ctx.pn);
  ResidueMat2 t(ph.ctx, -g(1, 1), g(0, 1), g(1, 0), -g(0, 0));
  t = xi * t;
  const std::int64_t mt = ph.modulus();
  for (auto v : phase_gradient(ph, t))
    if (mod(v, mt) != 0) throw std::logic_error("stationary point does not annihilate the gradient");
  return t;
}

// q^{-2} sum_{X in F_p^4} psi(X^T (H/2) X / p), H = s * antidiag(1, -1, -1, 1)
inline CycloRational gauss_factor(const PAdicContext& ctx, std::int64_t scale) {
  const std::int64_t p = ctx.p;
  require(ctx.is_unit(scale), "Hessian scale must be a unit");
  const std::int64_t s = mod(scale, p), inv2 = egcd_inverse(2, p);
  std::vector<std::int64_t> counts(p, 0);
  for (std::int64_t x0 = 0; x0 < p; ++x0)
    for (std::int64_t x1 = 0; x1 < p; ++x1)
      for (std::int64_t x2 = 0; x2 < p; ++x2)
        for (std::int64_t x3 = 0; x3 < p; ++x3) {
          // X^T H X = 2 s (x0 x3 - x1 x2)
          const std::int64_t form = mod(2 * s * (x0 * x3 - x1 * x2), p);
          ++counts[mod(-mulmod(inv2, form, p), p)];
        }
  return inverse_power(p, 2) * to_rational(CyclotomicNumber::from_exponent_counts(static_cast<int>(p), counts));
}

inline CycloRational gauss_factor(const PhaseData& ph, std::int64_t b = 1) {
  return gauss_factor(ph.ctx, mulmod(ph.x, mod(b, ph.ctx.pn), ph.ctx.pn));
}

// #{T in gl2(F_p) : det T = 0}
inline std::int64_t singular_count(std::int64_t p) {
  require(is_prime(p), "singular_count needs a prime");
  std::int64_t n = 0;
  for (std::int64_t a = 0; a < p; ++a)
    for (std::int64_t b = 0; b < p; ++b)
      for (std::int64_t c = 0; c < p; ++c)
        for (std::int64_t d = 0; d < p; ++d)
          if (mod(a * d - b * c, p) == 0) ++n;
  return n;
}

// X = [[x1, x2], [x3, x4]] -> [[x4, -x2], [-x3, x1]]
inline ResidueMat2 flip(const ResidueMat2& x) { return {x.ctx(), x(1, 1), -x(0, 1), -x(1, 0), x(0, 0)}; }

}  // namespace ikern
