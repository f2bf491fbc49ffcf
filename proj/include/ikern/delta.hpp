#pragma once

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gmpxx.h>

#include "padic.hpp"
#include "smooth.hpp"

namespace ikern {

enum class PlaceSet { archimedean, archimedean_and_2 };

// W on F_S: a bump on (1, 4) at infinity, times 1_{Z_2^x} when 2 is in S.
// The bump integrates to 1/vol(Z_2^x) = 2 in the second case, so W^(0) = 1 on F_S in both.
struct DeltaConfig {
  SmoothWeight W;
  double Q = 1;
  PlaceSet S = PlaceSet::archimedean;

  static constexpr double support_lo = 1.0, support_hi = 4.0;

  static double archimedean_mass(PlaceSet s) { return s == PlaceSet::archimedean ? 1.0 : 2.0; }

  static DeltaConfig standard(double Q, PlaceSet s = PlaceSet::archimedean) {
    require(Q > 0, "Q must be positive");
    return {SmoothWeight::normalized_bump(support_lo, support_hi, archimedean_mass(s)), Q, s};
  }
  bool has_2() const { return S == PlaceSet::archimedean_and_2; }
};

// W(x) - W(y/x) at the archimedean place
inline double h_eval(const DeltaConfig& cfg, double x, double y) {
  require(x != 0, "h(x, y) needs x != 0");
  return cfg.W(x) - cfg.W(y / x);
}

inline std::int64_t odd_part(std::int64_t a, int* v2 = nullptr) {
  require(a != 0, "odd part of zero");
  int v = 0;
  while (a % 2 == 0) {
    a /= 2;
    ++v;
  }
  if (v2) *v2 = v;
  return a;
}

// integers d in the window Q (1, 4), odd only when 2 is in S
inline std::pair<std::int64_t, std::int64_t> delta_window(const DeltaConfig& cfg) {
  return {static_cast<std::int64_t>(std::floor(cfg.Q * DeltaConfig::support_lo)),
          static_cast<std::int64_t>(std::ceil(cfg.Q * DeltaConfig::support_hi))};
}

// Q (sum_{d in O^S} W(d/Q))^{-1}
inline double c_q(const DeltaConfig& cfg) {
  const auto [lo, hi] = delta_window(cfg);
  std::vector<double> terms;
  for (std::int64_t d = std::max<std::int64_t>(lo, 1); d <= hi; ++d)
    if (!cfg.has_2() || d % 2 != 0) terms.push_back(cfg.W(static_cast<double>(d) / cfg.Q));
  const double s = pairwise_sum(terms);
  if (!(s > 0)) throw precondition_error("Q too small: no lattice point in the support window");
  return cfg.Q / s;
}

// c_Q in extended precision, for resolving c_Q - 1 below double epsilon
template <class Real>
Real c_q_precise(const Real& Q, PlaceSet s) {
  using std::ceil;
  using std::floor;
  const Real half_width = Real(3) / 2, center = Real(5) / 2;
  const Real amp = Real(DeltaConfig::archimedean_mass(s)) / (half_width * mollifier_mass<Real>());
  const auto lo = static_cast<std::int64_t>(floor(Q)), hi = static_cast<std::int64_t>(ceil(4 * Q));
  Real sum = 0;
  for (std::int64_t d = std::max<std::int64_t>(lo, 1); d <= hi; ++d) {
    if (s == PlaceSet::archimedean_and_2 && d % 2 == 0) continue;
    sum += amp * mollifier<Real>((Real(d) / Q - center) / half_width);
  }
  if (!(sum > 0)) throw precondition_error("Q too small: no lattice point in the support window");
  return Q / sum;
}

using precise_real = boost::multiprecision::cpp_bin_float_50;

// m in O^S: an integer, or an element of Z[1/2] when 2 is in S
inline void check_s_integer(const DeltaConfig& cfg, mpq_class m) {
  m.canonicalize();
  if (!cfg.has_2()) {
    require(m.get_den() == 1, "m must be an integer when S = {inf}");
    return;
  }
  mpz_class den = m.get_den();
  while (den % 2 == 0) den /= 2;
  require(den == 1, "m must lie in Z[1/2]");
}

// every d in O^S - 0 with 1_{d O^S}(m) and a nonzero term; m != 0
inline std::vector<mpq_class> delta_divisors(const DeltaConfig& cfg, mpq_class m) {
  check_s_integer(cfg, m);
  m.canonicalize();
  require(m != 0, "divisor enumeration needs m != 0");
  const mpz_class num = abs(m.get_num());
  require(num.fits_slong_p(), "m out of range");
  int v2 = 0;
  const std::int64_t o = odd_part(num.get_si(), &v2);
  const int e2 = cfg.has_2() ? v2 - static_cast<int>(mpz_sizeinbase(m.get_den().get_mpz_t(), 2) - 1) : 0;
  std::vector<std::int64_t> odd_divs;
  const std::int64_t base = cfg.has_2() ? o : num.get_si();
  for (std::int64_t k = 1; k * k <= base; ++k)
    if (base % k == 0) {
      odd_divs.push_back(k);
      if (k * k != base) odd_divs.push_back(base / k);
    }
  std::vector<mpq_class> out;
  auto power2 = [](int e) {
    mpq_class r(1);
    if (e >= 0) mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), e);
    else mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), -e);
    return r;
  };
  // W(d/Q) needs |d|_2 = 1, W(m/(dQ)) needs |d|_2 = |m|_2; other dyadic scalings give h = 0
  std::vector<int> shifts{0};
  if (cfg.has_2() && e2 != 0) shifts.push_back(e2);
  for (auto k : odd_divs)
    for (int j : shifts)
      for (int sign : {1, -1}) out.push_back(mpq_class(sign * k) * power2(j));
  return out;
}

inline double delta_expansion(const DeltaConfig& cfg, const mpq_class& m_in) {
  mpq_class m = m_in;
  m.canonicalize();
  check_s_integer(cfg, m);
  const double c = c_q(cfg);
  std::vector<double> terms;
  if (m == 0) {
    const auto [lo, hi] = delta_window(cfg);
    for (std::int64_t d = std::max<std::int64_t>(lo, 1); d <= hi; ++d)
      if (!cfg.has_2() || d % 2 != 0) terms.push_back(cfg.W(static_cast<double>(d) / cfg.Q));
  } else {
    for (const auto& d : delta_divisors(cfg, m)) {
      const mpq_class quotient = m / d;
      const bool d_unit = !cfg.has_2() || valuation(d, 2) == 0;
      const bool quotient_unit = !cfg.has_2() || valuation(quotient, 2) == 0;
      const double first = d_unit ? cfg.W(d.get_d() / cfg.Q) : 0.0;
      const double second = quotient_unit ? cfg.W(quotient.get_d() / cfg.Q) : 0.0;
      terms.push_back(first - second);
    }
  }
  return c / cfg.Q * pairwise_sum(terms);
}

inline double delta_expansion(const DeltaConfig& cfg, std::int64_t m) {
  return delta_expansion(cfg, mpq_class(static_cast<long>(m)));
}

struct TelescopingWitness {
  std::vector<double> direct, swapped;
  bool equal = false;
};

// sorted multisets {W(d/Q) : d | m} and {W((m/d)/Q) : d | m}
inline TelescopingWitness telescoping_witness(const DeltaConfig& cfg, const mpq_class& m) {
  TelescopingWitness w;
  for (const auto& d : delta_divisors(cfg, m)) {
    const mpq_class quotient = m / d;
    const bool d_unit = !cfg.has_2() || valuation(d, 2) == 0;
    const bool quotient_unit = !cfg.has_2() || valuation(quotient, 2) == 0;
    w.direct.push_back(d_unit ? cfg.W(d.get_d() / cfg.Q) : 0.0);
    w.swapped.push_back(quotient_unit ? cfg.W(quotient.get_d() / cfg.Q) : 0.0);
  }
  std::sort(w.direct.begin(), w.direct.end());
  std::sort(w.swapped.begin(), w.swapped.end());
  w.equal = w.direct == w.swapped;
  return w;
}

struct DeltaReport {
  std::vector<double> Qs;
  std::int64_t mMax = 0;
  double max_offdiag = 0;
  double max_diag_error = 0;
  std::int64_t worst_m = 0;
  double worst_Q = 0;
  bool witness_ok = true;
  bool pass = false;
};

inline DeltaReport verify_delta(const std::vector<double>& Qs, std::int64_t mMax, PlaceSet s, double tol = 1e-12,
                                unsigned workers = 0) {
  DeltaReport r;
  r.Qs = Qs;
  r.mMax = mMax;
  for (double Q : Qs) {
    const auto cfg = DeltaConfig::standard(Q, s);
    r.max_diag_error = std::max(r.max_diag_error, std::abs(delta_expansion(cfg, std::int64_t{0}) - 1.0));
    struct Worst {
      double v = 0;
      std::int64_t m = 0;
      bool witness = true;
    };
    auto map = [&](std::int64_t lo, std::int64_t hi) {
      Worst w;
      for (std::int64_t i = lo; i < hi; ++i) {
        const std::int64_t m = i < mMax ? -(i + 1) : i - mMax + 1;
        const double v = std::abs(delta_expansion(cfg, m));
        if (v > w.v) w = {v, m, w.witness};
        if (!telescoping_witness(cfg, mpq_class(static_cast<long>(m))).equal) w.witness = false;
      }
      return w;
    };
    auto fold = [](Worst a, const Worst& b) {
      Worst out = b.v > a.v ? b : a;
      out.witness = a.witness && b.witness;
      return out;
    };
    const auto w = parallel_map_reduce<Worst>(2 * mMax, 256, Worst{}, map, fold, workers);
    if (w.v > r.max_offdiag) {
      r.max_offdiag = w.v;
      r.worst_m = w.m;
      r.worst_Q = Q;
    }
    r.witness_ok = r.witness_ok && w.witness;
  }
  r.pass = r.max_offdiag <= tol && r.max_diag_error <= tol && r.witness_ok;
  return r;
}

struct CqConvergenceRow {
  double Q = 0;
  precise_real deviation = 0;
  double ratio_to_previous = 0;
};

// |c_Q - 1| along Q, 2Q, 4Q, ... with successive ratios
inline std::vector<CqConvergenceRow> c_q_convergence(double Q0, int steps, PlaceSet s) {
  std::vector<CqConvergenceRow> rows;
  for (int k = 0; k < steps; ++k) {
    const double Q = Q0 * std::ldexp(1.0, k);
    CqConvergenceRow row;
    row.Q = Q;
    row.deviation = abs(c_q_precise<precise_real>(precise_real(Q), s) - 1);
    if (!rows.empty()) row.ratio_to_previous = static_cast<double>(row.deviation / rows.back().deviation);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ikern
