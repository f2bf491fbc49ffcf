#pragma once

#include <map>
#include <optional>

#include "padic_osc.hpp"

namespace ikern {

using IntMat2 = std::array<std::int64_t, 4>;  // [[a, b], [c, d]] row major

struct LocalInput {
  PAdicContext ctx;
  std::int64_t b1 = 1, b2 = 1;
  ResidueMat2 g1, g2;

  LocalInput(const PAdicContext& c, std::int64_t bb1, std::int64_t bb2, const ResidueMat2& gg1, const ResidueMat2& gg2)
      : ctx(c), b1(c.reduce(bb1)), b2(c.reduce(bb2)), g1(gg1), g2(gg2) {
    require(c.is_unit(b1) && c.is_unit(b2), "b1, b2 must be units");
    require(g1.ctx() == c && g2.ctx() == c, "gamma lives in a different residue ring");
    require(!(g1.is_zero() && g2.is_zero()), "gamma = (0, 0) is excluded");
  }
  int min_valuation() const { return std::min(g1.min_valuation(), g2.min_valuation()); }
};

// Truncated series sum_{n <= M} sum_w c[n][w] omega^w u^n
class LocalSeries {
 public:
  LocalSeries(const PAdicContext& ctx, int maxOrder) : ctx_(ctx), m_(maxOrder), c_(maxOrder + 1) {}
  const PAdicContext& ctx() const { return ctx_; }
  int max_order() const { return m_; }

  void add(int n, int w, const CycloRational& v) {
    if (n > m_) return;
    auto it = c_[n].find(w);
    if (it == c_[n].end())
      c_[n].emplace(w, v);
    else
      it->second += v;
    prune(n, w);
  }
  CycloRational coeff(int n, int w) const {
    if (n < 0 || n > m_) return CycloRational(1);
    auto it = c_[n].find(w);
    return it == c_[n].end() ? CycloRational(1) : it->second;
  }
  const std::map<int, CycloRational>& row(int n) const { return c_.at(n); }

  std::complex<double> evaluate(std::complex<double> omega, std::complex<double> u) const {
    std::complex<double> s = 0;
    for (int n = 0; n <= m_; ++n)
      for (const auto& [w, v] : c_[n]) s += v.embed() * std::pow(omega, w) * std::pow(u, n);
    return s;
  }

  friend bool operator==(const LocalSeries& a, const LocalSeries& b) {
    if (a.m_ != b.m_) return false;
    for (int n = 0; n <= a.m_; ++n) {
      std::map<int, bool> keys;
      for (const auto& [w, v] : a.c_[n]) keys[w] = true;
      for (const auto& [w, v] : b.c_[n]) keys[w] = true;
      for (const auto& [w, unused] : keys)
        if (!(a.coeff(n, w) == b.coeff(n, w))) return false;
    }
    return true;
  }

 private:
  void prune(int n, int w) {
    auto it = c_[n].find(w);
    if (it != c_[n].end() && it->second.is_zero()) c_[n].erase(it);
  }
  PAdicContext ctx_;
  int m_;
  std::vector<std::map<int, CycloRational>> c_;
};

// Histogram of (det T mod p^c, tr(gT) mod p^m) over T mod p^N, N = max(c, m).
struct FiberTable {
  std::int64_t cmod = 1, mmod = 1;
  std::vector<std::int64_t> count;  // index d * mmod + phase
  std::int64_t at(std::int64_t d, std::int64_t ph) const { return count[d * mmod + ph]; }
};

inline FiberTable fiber_table(std::int64_t p, int cexp, int mexp, const IntMat2& g, unsigned workers = 0) {
  const int N = std::max(cexp, mexp);
  const std::int64_t M = checked_pow(p, N);
  FiberTable ft;
  ft.cmod = checked_pow(p, cexp);
  ft.mmod = checked_pow(p, mexp);
  const std::int64_t cm = ft.cmod, mm = ft.mmod;
  const std::int64_t g11 = mod(g[0], mm), g12 = mod(g[1], mm), g21 = mod(g[2], mm), g22 = mod(g[3], mm);
  using Hist = std::vector<std::int64_t>;
  auto map = [&](std::int64_t lo, std::int64_t hi) {
    Hist h(cm * mm, 0);
    for (std::int64_t i = lo; i < hi; ++i) {
      const std::int64_t a = i / M, b = i % M;
      for (std::int64_t c = 0; c < M; ++c) {
        const std::int64_t base_ph = mod(g11 * a + g21 * b + g12 * c, mm);
        const std::int64_t base_det = mod(-mulmod(b, c, cm), cm);
        const std::int64_t sd = mod(a, cm), sp = g22;
        std::int64_t det = base_det, ph = base_ph;
        for (std::int64_t d = 0; d < M; ++d) {
          ++h[det * mm + ph];
          det += sd;
          if (det >= cm) det -= cm;
          ph += sp;
          if (ph >= mm) ph -= mm;
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
  ft.count = parallel_map_reduce<Hist>(M * M, std::max<std::int64_t>(1, (M * M) / 64), Hist{}, map, fold, workers);
  return ft;
}

// p^{-8k} * vol-normalized sum over T' in gl2(Z_p)^2 of 1[v(b1 det T1' - b2 det T2') >= n - 2k]
//   * psi(tr(g1 T1' + g2 T2') / p^{n+e-k}),
// i.e. the n-th shell of the local integral with support 1_{p^k gl2(Z_p)^2} and gamma = p^{-e} g.
// An optional unit twist u^{-1} multiplies the phase.
inline CycloRational shell_value(std::int64_t p, std::int64_t b1, std::int64_t b2, const IntMat2& g1, const IntMat2& g2,
                                 int e, int k, int n, std::int64_t twist = 1, unsigned workers = 0) {
  const int cexp = std::max(0, n - 2 * k), mexp = std::max(0, n + e - k);
  const int N = std::max(cexp, mexp);
  const std::int64_t mm = checked_pow(p, mexp), cm = checked_pow(p, cexp);
  const std::int64_t tw = mexp ? egcd_inverse(twist, mm) : 1;
  auto scaled = [&](const IntMat2& g) {
    IntMat2 r;
    for (int i = 0; i < 4; ++i) r[i] = mulmod(mod(g[i], mm), tw, mm);
    return r;
  };
  const auto A1 = fiber_table(p, cexp, mexp, scaled(g1), workers);
  const auto A2 = fiber_table(p, cexp, mexp, scaled(g2), workers);
  // phase histograms per det class, then convolve along b1 d1 = b2 d2
  std::vector<mpz_class> counts(mm, 0);
  const std::int64_t bb1 = mod(b1, cm), bb2 = mod(b2, cm);
  const std::int64_t b2inv = cexp ? egcd_inverse(bb2, cm) : 0;
  for (std::int64_t d1 = 0; d1 < cm; ++d1) {
    const std::int64_t d2 = cexp ? mulmod(mulmod(bb1, d1, cm), b2inv, cm) : 0;
    for (std::int64_t p1 = 0; p1 < mm; ++p1) {
      const auto c1 = A1.at(d1, p1);
      if (!c1) continue;
      for (std::int64_t p2 = 0; p2 < mm; ++p2) {
        const auto c2 = A2.at(d2, p2);
        if (!c2) continue;
        std::int64_t s = p1 + p2;
        if (s >= mm) s -= mm;
        counts[mod(-s, mm)] += mpz_class(static_cast<long>(c1)) * static_cast<long>(c2);
      }
    }
  }
  CycloRational r(static_cast<int>(mm));
  for (std::int64_t j = 0; j < mm; ++j)
    if (counts[j] != 0) r.add_power(j, mpq_class(counts[j]));
  return inverse_power(p, 8 * N + 8 * k) * r;
}

inline IntMat2 to_int(const ResidueMat2& m) { return m.entries(); }

enum class LhsMethod { brute_force, fiber, closed_form };

namespace detail {

// p^{-8n} sum over all pairs T mod p^n with P(b,T) = 0 mod p^n, pair by pair
inline CycloRational lhs_coefficient_pairs(const LocalInput& inp, int n, std::int64_t budget, unsigned workers) {
  const std::int64_t p = inp.ctx.p, m = checked_pow(p, n);
  if (n == 0) return CycloRational(1, mpq_class(1));
  const std::int64_t cnt = m * m * m * m;
  std::int64_t terms;
  if (__builtin_mul_overflow(cnt, cnt, &terms) || terms > budget)
    throw budget_exceeded("lhs_series: pair enumeration exceeds the budget");
  auto encode = [&](const ResidueMat2& g) {
    std::vector<std::int64_t> det(cnt), ph(cnt);
    for (std::int64_t i = 0; i < cnt; ++i) {
      const std::int64_t a = i % m, b = (i / m) % m, c = (i / (m * m)) % m, d = i / (m * m * m);
      det[i] = mod(a * d - b * c, m);
      ph[i] = mod(g(0, 0) * a + g(0, 1) * c + g(1, 0) * b + g(1, 1) * d, m);
    }
    return std::pair{det, ph};
  };
  const auto [d1, p1] = encode(inp.g1);
  const auto [d2, p2] = encode(inp.g2);
  const std::int64_t b1 = mod(inp.b1, m), b2 = mod(inp.b2, m);
  using Hist = std::vector<std::int64_t>;
  auto map = [&](std::int64_t lo, std::int64_t hi) {
    Hist h(m, 0);
    for (std::int64_t i = lo; i < hi; ++i) {
      const std::int64_t lhs = mulmod(b1, d1[i], m);
      for (std::int64_t j = 0; j < cnt; ++j)
        if (mulmod(b2, d2[j], m) == lhs) ++h[(p1[i] + p2[j]) % m];
    }
    return h;
  };
  auto fold = [](Hist acc, const Hist& part) {
    if (acc.empty()) return part;
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += part[k];
    return acc;
  };
  auto h = parallel_map_reduce<Hist>(cnt, std::max<std::int64_t>(1, cnt / 64), Hist{}, map, fold, workers);
  std::vector<std::int64_t> counts(m, 0);
  for (std::int64_t k = 0; k < m; ++k) counts[mod(-k, m)] = h[k];
  return inverse_power(p, 8 * n) * to_rational(CyclotomicNumber::from_exponent_counts(static_cast<int>(m), counts));
}

// p^{-n} sum_{x mod p^n} I(x b1, g1) I(-x b2, g2), each factor a closed-form Gaussian integral
inline CycloRational lhs_coefficient_closed(const LocalInput& inp, int n) {
  const std::int64_t p = inp.ctx.p;
  if (n == 0) return CycloRational(1, mpq_class(1));
  require(n <= inp.ctx.n, "precision does not cover the requested order");
  const std::int64_t m = checked_pow(p, n);
  PAdicContext ctx(p, n);
  PowerAccumulator<mpq_class> acc(static_cast<int>(m));
  auto factor = [&](const ResidueMat2& g, std::int64_t unit, int a) -> std::optional<std::pair<mpq_class, std::int64_t>> {
    // x = p^a x'; integral vanishes unless p^a divides gamma
    const std::int64_t pa = checked_pow(p, a);
    for (auto v : g.entries())
      if (mod(v, pa) != 0) return std::nullopt;
    const int t = n - a;
    if (t == 0) return std::pair{mpq_class(1), std::int64_t{0}};
    const std::int64_t mt = checked_pow(p, t);
    PAdicContext ct(p, t);
    ResidueMat2 gs(ct, g(0, 0) / pa, g(0, 1) / pa, g(1, 0) / pa, g(1, 1) / pa);
    // the closed form is the monomial p^{-2t} zeta_{p^t}^k; lift the exponent to order p^n
    const std::int64_t k = closed_form_exponent(PhaseData(ct, gs, unit, t));
    return std::pair{inverse_power(p, 2 * t), k * (m / mt)};
  };
  const auto g1 = ResidueMat2(ctx, inp.g1(0, 0), inp.g1(0, 1), inp.g1(1, 0), inp.g1(1, 1));
  const auto g2 = ResidueMat2(ctx, inp.g2(0, 0), inp.g2(0, 1), inp.g2(1, 0), inp.g2(1, 1));
  for (std::int64_t x = 0; x < m; ++x) {
    const int a = x == 0 ? n : valuation(x, p);
    const std::int64_t xp = x == 0 ? 1 : x / checked_pow(p, a);
    auto f1 = factor(g1, mulmod(xp, inp.b1, m), a);
    if (!f1) continue;
    auto f2 = factor(g2, mod(-mulmod(xp, inp.b2, m), m), a);
    if (!f2) continue;
    acc.add(f1->second + f2->second, f1->first * f2->first);
  }
  return inverse_power(p, n) * acc.value();
}

}  // namespace detail

// Coefficient of omega^n u^n: p^{-8n} sum_{T mod p^n, P(b,T) = 0} psi(tr gT / p^n).
// A ramified chi replaces it by the chi-weighted mean over the unit shell.
inline LocalSeries lhs_series(const LocalInput& inp, int M, LhsMethod method = LhsMethod::closed_form,
                              std::optional<FiniteCharacter> chi = std::nullopt,
                              std::int64_t budget = default_enumeration_budget, unsigned workers = 0) {
  require(M >= 0 && M <= inp.ctx.n, "order M must not exceed the precision n");
  LocalSeries s(inp.ctx, M);
  const std::int64_t p = inp.ctx.p;
  if (chi && chi->is_ramified()) {
    for (int n = 0; n <= M; ++n) {
      const std::int64_t mm = checked_pow(p, std::max(n, 1));
      CycloRational avg(1);
      std::int64_t units = 0;
      for (std::int64_t u = 1; u < mm; ++u) {
        if (u % p == 0) continue;
        ++units;
        auto v = shell_value(p, inp.b1, inp.b2, to_int(inp.g1), to_int(inp.g2), 0, 0, n, u, workers);
        avg += v * to_rational(chi->on_unit(u));
      }
      s.add(n, n, mpq_class(1, units) * avg);
    }
    return s;
  }
  s.add(0, 0, CycloRational(1, mpq_class(1)));
  for (int n = 1; n <= M; ++n) {
    switch (method) {
      case LhsMethod::brute_force:
        s.add(n, n, detail::lhs_coefficient_pairs(inp, n, budget, workers));
        break;
      case LhsMethod::fiber: {
        const double logsize = 4.0 * n * std::log(static_cast<double>(p));
        if (logsize > std::log(static_cast<double>(budget))) throw budget_exceeded("lhs_series: fiber tables exceed the budget");
        s.add(n, n, shell_value(p, inp.b1, inp.b2, to_int(inp.g1), to_int(inp.g2), 0, 0, n, 1, workers));
        break;
      }
      case LhsMethod::closed_form:
        s.add(n, n, detail::lhs_coefficient_closed(inp, n));
        break;
    }
  }
  return s;
}

// Weight attached to the c = p^j shell: chi(c)|c|^{s+1} = omega^j q^-j u^j, or chi(c)|c|^s = omega^j u^j.
enum class CShellWeight { norm_s_plus_1, norm_s };

// sum_{j: p^-j gamma integral} w^j q^-j u^j (1 - w q^-5 u) sum_{k: p^k | P(b^-1, p^-j gamma)} w^k q^-4k u^k
inline LocalSeries rhs_series(const LocalInput& inp, int M, CShellWeight weight = CShellWeight::norm_s_plus_1) {
  require(M >= 0, "order must be nonnegative");
  require(inp.ctx.n >= 2 * M, "precision n must be at least 2M for the right-hand side");
  const auto& c = inp.ctx;
  const std::int64_t p = c.p;
  LocalSeries s(c, M);
  const std::int64_t b1i = egcd_inverse(inp.b1, c.pn), b2i = egcd_inverse(inp.b2, c.pn);
  const std::int64_t P = c.reduce(mulmod(b1i, inp.g1.det(), c.pn) - mulmod(b2i, inp.g2.det(), c.pn));
  const int vP = P == 0 ? c.n : valuation(P, p);
  const int vg = inp.min_valuation();
  const mpq_class q4 = inverse_power(p, 4), q5 = inverse_power(p, 5);
  for (int j = 0; j <= std::min(vg, M); ++j) {
    // valuation of P(b^-1, p^-j gamma) is vP - 2j; P = 0 to working precision counts as infinite
    const int kmax = std::min(M - j, vP - 2 * j);
    mpq_class w = weight == CShellWeight::norm_s_plus_1 ? inverse_power(p, j) : mpq_class(1);
    for (int k = 0; k <= kmax; ++k) {
      const int n = j + k;
      s.add(n, n, CycloRational(1, w));
      if (n + 1 <= M) s.add(n + 1, n + 1, CycloRational(1, mpq_class(-w * q5)));
      w *= q4;
    }
  }
  return s;
}

struct SeriesMismatch {
  int n, omega_degree;
  std::string lhs, rhs;
};

struct SeriesComparison {
  bool equal = true;
  LocalSeries lhs, rhs;
  std::vector<SeriesMismatch> mismatches;
};

inline SeriesComparison compare_local_series(const LocalInput& inp, int M, LhsMethod method = LhsMethod::closed_form,
                                             std::int64_t budget = default_enumeration_budget, unsigned workers = 0,
                                             CShellWeight weight = CShellWeight::norm_s_plus_1) {
  SeriesComparison r{true, lhs_series(inp, M, method, std::nullopt, budget, workers), rhs_series(inp, M, weight), {}};
  for (int n = 0; n <= M; ++n) {
    std::map<int, bool> keys;
    for (const auto& [w, v] : r.lhs.row(n)) keys[w] = true;
    for (const auto& [w, v] : r.rhs.row(n)) keys[w] = true;
    for (const auto& [w, unused] : keys) {
      const auto a = r.lhs.coeff(n, w), b = r.rhs.coeff(n, w);
      if (!(a == b)) {
        r.equal = false;
        r.mismatches.push_back({n, w, a.str(), b.str()});
      }
    }
  }
  return r;
}

struct NABoundRow {
  std::string label;
  int tExp = 0, min_valuation = 0;
  double value = 0, bound = 0;
  bool pass = false;
};

struct NABoundReport {
  double C = 0;
  std::vector<NABoundRow> rows;
  bool pass = true;
};

// |inner T-integral at t = p^tExp| <= C q^{4 minval} q^{-4 tExp}; C is fixed by the first (input, tExp)
inline NABoundReport na_bound_check(const std::vector<std::pair<std::string, LocalInput>>& family,
                                    const std::vector<int>& tExps, double tolerance = 1e-9, unsigned workers = 0) {
  require(!family.empty() && !tExps.empty(), "empty family");
  NABoundReport rep;
  bool calibrated = false;
  for (const auto& [label, inp] : family) {
    const int mv = inp.min_valuation();
    for (int t : tExps) {
      require(t > 1, "the bound is stated for v(t) > 1");
      require(t <= inp.ctx.n, "precision does not cover tExp");
      const auto v = shell_value(inp.ctx.p, inp.b1, inp.b2, to_int(inp.g1), to_int(inp.g2), 0, 0, t, 1, workers);
      const double q = static_cast<double>(inp.ctx.q);
      const double scale = std::pow(q, 4.0 * mv) * std::pow(q, -4.0 * t);
      const double a = std::abs(v.embed());
      if (!calibrated) {
        rep.C = a / scale;
        calibrated = true;
      }
      NABoundRow row{label, t, mv, a, rep.C * scale, a <= rep.C * scale * (1 + tolerance)};
      rep.pass = rep.pass && row.pass;
      rep.rows.push_back(row);
    }
  }
  return rep;
}

struct VanishingRow {
  int e = 0, n = 0;
  std::string value;
  bool zero = false;
};

struct SupportVanishingReport {
  int support_k = 0;
  int radius = -1;  // least e0 such that every e >= e0 tested is identically zero
  bool vanishing_beyond = false;
  bool ramified_zero = true;
  std::vector<VanishingRow> rows;
  bool pass = false;
};

// Family gamma_e = p^{-e} g for e = 0..eMax against f = 1_{p^k gl2(Z_p)^2}; shells n = 0..M.
inline SupportVanishingReport support_vanishing_check(std::int64_t p, std::int64_t b1, std::int64_t b2, const IntMat2& g1,
                                                      const IntMat2& g2, int k, int eMax, int M,
                                                      std::int64_t ramified_index = 1, unsigned workers = 0) {
  SupportVanishingReport rep;
  rep.support_k = k;
  std::vector<bool> allzero(eMax + 1, true);
  for (int e = 0; e <= eMax; ++e)
    for (int n = 0; n <= M; ++n) {
      const auto v = shell_value(p, b1, b2, g1, g2, e, k, n, 1, workers);
      rep.rows.push_back({e, n, v.str(), v.is_zero()});
      if (!v.is_zero()) allzero[e] = false;
    }
  rep.radius = eMax + 1;
  for (int e = eMax; e >= 0 && allzero[e]; --e) rep.radius = e;
  rep.vanishing_beyond = rep.radius <= k + 1;
  // conductor-p character with spherical support data
  PAdicContext ctx(p, std::max(M, 1));
  auto chi = FiniteCharacter::ramified(ctx, ramified_index);
  for (int n = 0; n <= M; ++n) {
    const std::int64_t mm = checked_pow(p, std::max(n, 1));
    CycloRational avg(1);
    for (std::int64_t u = 1; u < mm; ++u)
      if (u % p) avg += shell_value(p, b1, b2, g1, g2, 0, 0, n, u, workers) * to_rational(chi.on_unit(u));
    if (!avg.is_zero()) rep.ramified_zero = false;
  }
  rep.pass = rep.vanishing_beyond && rep.ramified_zero;
  return rep;
}

}  // namespace ikern
