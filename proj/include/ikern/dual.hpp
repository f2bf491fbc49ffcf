#pragma once

#include <numbers>

#include "geometric.hpp"

namespace ikern {

// eight integers, T1 then T2, each row-major
using Vec8 = std::array<std::int64_t, 8>;

namespace detail {

// e(k / m)
inline std::complex<double> root_of_unity(std::int64_t k, std::int64_t m) {
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(mod(k, m)) / static_cast<double>(m));
}

// p^{-4n} sum_{T mod p^n} e((x det T + g.T) / p^n) by completing the square
inline std::complex<double> gl2_gaussian(std::int64_t p, int n, std::int64_t x, const std::int64_t* g) {
  const std::int64_t m = checked_pow(p, n);
  x = mod(x, m);
  if (x == 0) {
    for (int k = 0; k < 4; ++k)
      if (mod(g[k], m) != 0) return 0;
    return 1;
  }
  const int a = valuation(x, p);
  const std::int64_t pa = checked_pow(p, a);
  for (int k = 0; k < 4; ++k)
    if (mod(g[k], pa) != 0) return 0;
  const int t = n - a;
  const std::int64_t mt = checked_pow(p, t);
  std::int64_t h[4];
  for (int k = 0; k < 4; ++k) h[k] = mod(mod(g[k], m) / pa, mt);
  const std::int64_t det = mod(mulmod(h[0], h[3], mt) - mulmod(h[1], h[2], mt), mt);
  const std::int64_t k = mod(-mulmod(det, egcd_inverse(mod(x / pa, mt), mt), mt), mt);
  return std::pow(static_cast<double>(p), -2.0 * t) * root_of_unity(k, mt);
}

inline std::vector<std::pair<std::int64_t, int>> factor_odd(std::int64_t d) {
  std::vector<std::pair<std::int64_t, int>> f;
  for (std::int64_t p = 3; p * p <= d; p += 2)
    if (d % p == 0) {
      int e = 0;
      while (d % p == 0) {
        d /= p;
        ++e;
      }
      f.emplace_back(p, e);
    }
  if (d > 1) f.emplace_back(d, 1);
  return f;
}

}  // namespace detail

// p^{-8n} sum_{r mod p^n, b1 det r1 = b2 det r2} e(-zeta.r / p^n), p odd
inline std::complex<double> odd_prime_density(std::int64_t p, int n, const Vec8& zeta, std::int64_t b1 = 1,
                                              std::int64_t b2 = 4) {
  require(p % 2 == 1 && is_prime(p), "odd_prime_density needs an odd prime");
  const std::int64_t m = checked_pow(p, n);
  require(mod(b1, p) != 0 && mod(b2, p) != 0, "b must be a unit at p");
  std::int64_t g1[4], g2[4];
  for (int k = 0; k < 4; ++k) {
    g1[k] = mod(-zeta[k], m);
    g2[k] = mod(-zeta[4 + k], m);
  }
  std::vector<std::complex<double>> terms;
  for (std::int64_t x = 0; x < m; ++x) {
    const auto j1 = detail::gl2_gaussian(p, n, mulmod(x, mod(b1, m), m), g1);
    if (j1 == 0.0) continue;
    const auto j2 = detail::gl2_gaussian(p, n, mod(-mulmod(x, mod(b2, m), m), m), g2);
    if (j2 == 0.0) continue;
    terms.push_back(j1 * j2);
  }
  return pairwise_sum(terms) / static_cast<double>(m);
}

// d^{-8} sum_{r mod d, d | det r1 - 4 det r2} e(-zeta.r / d) for odd d > 0, factored over the primes of d
inline std::complex<double> odd_density(std::int64_t d, const Vec8& zeta) {
  require(d > 0 && d % 2 == 1, "odd_density needs an odd positive modulus");
  std::complex<double> v = 1;
  for (const auto& [p, n] : detail::factor_odd(d)) {
    const std::int64_t pn = checked_pow(p, n);
    const std::int64_t w = egcd_inverse(mod(d / pn, pn), pn);
    Vec8 z;
    for (int k = 0; k < 8; ++k) z[k] = mulmod(w, mod(zeta[k], pn), pn);
    v *= odd_prime_density(p, n, z);
    if (v == 0.0) break;
  }
  return v;
}

// 8^{-4} sum_{r mod 8} Phi(r) e(-zeta.r / 8) and the same for 1_{GL2(Z_2)}, zeta in (Z/8)^4; both real
class DyadicTransforms {
 public:
  static const DyadicTransforms& instance() {
    static const DyadicTransforms t;
    return t;
  }
  static int index(const std::int64_t* z) {
    int i = 0;
    for (int k = 0; k < 4; ++k) i = 8 * i + static_cast<int>(mod(z[k], 8));
    return i;
  }
  double phi_hat(const std::int64_t* z) const { return phi_[index(z)]; }
  double k_hat(const std::int64_t* z) const { return k_[index(z)]; }
  double max_abs_phi_hat() const { return max_phi_; }
  double max_abs_k_hat() const { return max_k_; }

 private:
  DyadicTransforms() : phi_(4096), k_(4096) {
    const HeckeA phi{2, 2};
    std::vector<std::int64_t> vp(4096), vk(4096);
    for (int i = 0; i < 4096; ++i) {
      const IntMat2 r{i >> 9, (i >> 6) & 7, (i >> 3) & 7, i & 7};
      vp[i] = phi(r);
      vk[i] = det2(r) % 2 != 0 ? 1 : 0;
    }
    for (int z = 0; z < 4096; ++z) {
      const std::int64_t zz[4] = {z >> 9, (z >> 6) & 7, (z >> 3) & 7, z & 7};
      std::int64_t cp[8] = {}, ck[8] = {};
      for (int i = 0; i < 4096; ++i) {
        if (vp[i] == 0 && vk[i] == 0) continue;
        const int ph = static_cast<int>((zz[0] * (i >> 9) + zz[1] * ((i >> 6) & 7) + zz[2] * ((i >> 3) & 7) + zz[3] * (i & 7)) & 7);
        cp[ph] += vp[i];
        ck[ph] += vk[i];
      }
      // cos(2 pi k / 8) = a_k + b_k / sqrt 2 with integer a_k, b_k
      static constexpr int ca[8] = {1, 0, 0, 0, -1, 0, 0, 0}, cb[8] = {0, 1, 0, -1, 0, -1, 0, 1};
      std::int64_t pa = 0, pb = 0, ka = 0, kb = 0;
      for (int k = 0; k < 8; ++k) {
        pa += cp[k] * ca[k];
        pb += cp[k] * cb[k];
        ka += ck[k] * ca[k];
        kb += ck[k] * cb[k];
      }
      const double sp = static_cast<double>(pa) + static_cast<double>(pb) * std::numbers::sqrt2 / 2;
      const double sk = static_cast<double>(ka) + static_cast<double>(kb) * std::numbers::sqrt2 / 2;
      phi_[z] = sp / 4096;
      k_[z] = sk / 4096;
      max_phi_ = std::max(max_phi_, std::abs(phi_[z]));
      max_k_ = std::max(max_k_, std::abs(k_[z]));
    }
  }
  std::vector<double> phi_, k_;
  double max_phi_ = 0, max_k_ = 0;
};

// M^{-8} sum_{r mod M, v2(det r1 - 4 det r2) = v} Phi(r1) 1_{GL2(Z_2)}(r2) e(-zeta.r / L), M = 2^mexp, L = 2^lexp
inline std::complex<double> dyadic_shell_transform(int mexp, int v, const Vec8& zeta, int lexp) {
  require(mexp >= 3 && v < mexp && lexp <= mexp && lexp >= 0, "dyadic shell: precision must cover the period and the shell");
  require(mexp <= 7, "dyadic shell: modulus beyond the enumeration limit");
  const std::int64_t M = std::int64_t{1} << mexp, L = std::int64_t{1} << lexp, n = M * M * M * M;
  const HeckeA phi{2, 2};
  // histograms over (det mod M, phase mod L)
  std::vector<std::int64_t> h1(M * L, 0), h2(M * L, 0);
  for (std::int64_t i = 0; i < n; ++i) {
    const IntMat2 r{i / (M * M * M), (i / (M * M)) % M, (i / M) % M, i % M};
    const std::int64_t D = mod(det2(r), M);
    const std::int64_t w1 = phi(r);
    if (w1 != 0) {
      const std::int64_t ph = mod(zeta[0] * r[0] + zeta[1] * r[1] + zeta[2] * r[2] + zeta[3] * r[3], L);
      h1[D * L + ph] += w1;
    }
    if (D % 2 != 0) {
      const std::int64_t ph = mod(zeta[4] * r[0] + zeta[5] * r[1] + zeta[6] * r[2] + zeta[7] * r[3], L);
      h2[D * L + ph] += 1;
    }
  }
  std::vector<std::complex<double>> F1(M, 0.0), F2(M, 0.0);
  for (std::int64_t D = 0; D < M; ++D)
    for (std::int64_t k = 0; k < L; ++k) {
      if (h1[D * L + k]) F1[D] += static_cast<double>(h1[D * L + k]) * detail::root_of_unity(-k, L);
      if (h2[D * L + k]) F2[D] += static_cast<double>(h2[D * L + k]) * detail::root_of_unity(-k, L);
    }
  std::vector<std::complex<double>> terms;
  for (std::int64_t D1 = 0; D1 < M; ++D1) {
    if (F1[D1] == 0.0) continue;
    for (std::int64_t D2 = 1; D2 < M; D2 += 2) {
      const std::int64_t P = mod(D1 - 4 * D2, M);
      if (P == 0 || valuation(P, 2) != v) continue;
      terms.push_back(F1[D1] * F2[D2]);
    }
  }
  return pairwise_sum(terms) / std::pow(static_cast<double>(M), 8.0);
}

// tail of the dual lattice sum outside the box |eta|_inf <= R in `dim` dimensions, for terms decaying like |eta|^{-alpha}
// from a boundary magnitude; infinite when the decay is not summable
inline double dual_tail_estimate(double boundary, int R, double alpha, int dim, double safety = 3) {
  if (boundary == 0) return 0;
  if (alpha <= dim || R <= 0) return std::numeric_limits<double>::infinity();
  double s = 0;
  for (int m = R + 1;; ++m) {
    const double shell = std::pow(2.0 * m + 1, dim) - std::pow(2.0 * m - 1, dim);
    const double term = shell * std::pow(static_cast<double>(R) / m, alpha);
    s += term;
    if (term < 1e-12 * s || m > 1000000) break;
  }
  return safety * boundary * s;
}

// b = (1, 4) on gl2(R)^2 becomes b = (1, 1) after T2 -> T2 / 2: block-2 bumps are dilated by 2
inline MatrixBump dilate_second_block(const MatrixBump& f) {
  auto e = f.entries();
  for (int k = 4; k < 8; ++k) e[k] = SmoothWeight::bump(2 * e[k].center(), 2 * e[k].radius(), e[k].amplitude());
  return MatrixBump(e);
}

// int W(P((1, 4), T) / t) f(T) e(tr(gamma T) / t) dT
inline ArchResult arch_ratio_b14(const MatrixBump& f, const SmoothWeight& W, Mat8 gamma, double t,
                                 const QuadratureSpec& spec) {
  const MatrixBump g = dilate_second_block(f);
  for (int k = 4; k < 8; ++k) gamma[k] /= 2;
  auto r = arch_osc_integral(g, ArchKernel::weight_of_ratio, W, {1.0, 1.0}, gamma, t, spec);
  r.value /= 16;
  r.error /= 16;
  return r;
}

struct PoissonTruncation {
  int gamma_radius = 2;         // |eta|_inf for the W(d/Q) part
  int ratio_gamma_radius = 0;   // |eta|_inf for the W(P/(dQ)) part
  int max_dyadic = 5;           // largest v2(d) treated in the W(P/(dQ)) part
  double decay_exponent = 6;    // large-|gamma| exponent for the ratio-part tail
  double tolerance = 0.05;      // relative error budget for pass
  std::int64_t budget = 20'000'000;
  QuadratureSpec arch{QuadratureSpec::Method::fourier_factored, 1 << 22, 20240601, 1e-8, 12, 0};
};

struct PoissonResult {
  double value = 0;
  double error_budget = 0;
  double quadrature_error = 0;
  double tail_weight_of_t = 0;
  double tail_ratio = 0;
  double omitted_bound = 0;
  double part_weight_of_t = 0, part_ratio = 0;
  std::int64_t d_weight_of_t = 0, d_ratio = 0, d_omitted = 0;
  std::int64_t dual_terms = 0;
  double c_q_minus_1 = 0;
  bool empty_support = false;
  bool flagged = false;
};

namespace detail {

inline bool v_meets_support(const SigmaParams& sp, const GlobalTestFunction& f) {
  const auto d = f.arch.det_range(0);
  return sp.V1.hi() > d.first * sp.y_scale && sp.V1.lo() < d.second * sp.y_scale;
}

template <class Visit>
void for_each_eta(const std::array<std::vector<std::int64_t>, 8>& coords, Visit visit) {
  Vec8 e;
  std::array<std::size_t, 8> idx{};
  for (auto& c : coords)
    if (c.empty()) return;
  while (true) {
    for (int k = 0; k < 8; ++k) e[k] = coords[k][idx[k]];
    visit(e);
    int k = 7;
    while (k >= 0 && ++idx[k] == coords[k].size()) idx[k--] = 0;
    if (k < 0) return;
  }
}

}  // namespace detail

// Sigma(X) after Poisson summation in gamma, d-term by d-term:
// kappa c_Q / Q [sum_{d odd} W(d/Q) S_1(d) - sum_{d = +-k 2^j} S_2(d)], kappa = 1 / (X |X|_S) the constant value of
// V(b det gamma / X) / (|b1 det gamma1|_S X) on the support, each S_i(d) a dual lattice sum over eta in Z^8
inline PoissonResult poisson_side_sigma(const SigmaParams& sp, const GlobalTestFunction& gtf,
                                        const PoissonTruncation& tr = {}) {
  PoissonResult r;
  const double cq = c_q(sp.delta);
  r.c_q_minus_1 = cq - 1;
  if (!detail::v_meets_support(sp, gtf)) {
    r.empty_support = true;
    return r;
  }
  require(check_sigma_params(sp, gtf).pass, "the V family must be trivial on the support of f");
  const double X = sp.X, Q = sp.Q, sX = std::sqrt(X);
  const double kappa = 1 / (X * SCtx::s_norm(mpq_class(X)));
  const double X4 = X * X * X * X;
  const auto& W = sp.delta.W;
  const auto& dy = DyadicTransforms::instance();
  const auto [dlo, dhi] = delta_window(sp.delta);
  // W(d/Q) part: 2-adic factor Phi^(u eta1) 1_K^(u eta2) vanishes unless eta2 = 0 mod 4
  std::vector<double> part1, err1;
  for (std::int64_t d = std::max<std::int64_t>(dlo, 1); d <= dhi; ++d) {
    if (d % 2 == 0) continue;
    const double wd = W(static_cast<double>(d) / Q);
    if (wd == 0) continue;
    ++r.d_weight_of_t;
    const std::int64_t u = egcd_inverse(mod(d, 8), 8), v = egcd_inverse(mod(8, d), d);
    std::array<std::vector<std::int64_t>, 8> coords;
    std::array<double, 8> in{}, tail{};
    for (int k = 0; k < 8; ++k) {
      const std::int64_t step = k < 4 ? 1 : 4;
      const double a = sX * static_cast<double>(step) / (8.0 * static_cast<double>(d));
      std::int64_t last = 0;
      for (std::int64_t e = -tr.gamma_radius; e <= tr.gamma_radius; ++e)
        if (e % step == 0) {
          coords[k].push_back(e);
          in[k] += std::abs(bump_fourier(gtf.arch.entry(k / 4, k % 4), sX * static_cast<double>(e) / (8.0 * d)));
          last = std::max(last, std::abs(e) / step);
        }
      const auto& g = gtf.arch.entry(k / 4, k % 4);
      tail[k] = bump_fourier_tail(g, a * static_cast<double>(last)) / a + 2 * bump_fourier_envelope(g, a * (last + 1));
    }
    std::vector<std::complex<double>> terms;
    detail::for_each_eta(coords, [&](const Vec8& eta) {
      ++r.dual_terms;
      if (r.dual_terms > tr.budget) throw budget_exceeded("poisson_side_sigma: dual term budget exceeded");
      std::int64_t z[8];
      for (int k = 0; k < 8; ++k) z[k] = mulmod(u, mod(eta[k], 8), 8);
      const double c2 = dy.phi_hat(z) * dy.k_hat(z + 4);
      if (c2 == 0) return;
      std::complex<double> arch = X4;
      for (int k = 0; k < 8; ++k)
        arch *= bump_fourier(gtf.arch.entry(k / 4, k % 4), sX * static_cast<double>(eta[k]) / (8.0 * d));
      Vec8 zo;
      for (int k = 0; k < 8; ++k) zo[k] = mulmod(v, mod(eta[k], d), d);
      const auto e = odd_density(d, zo);
      terms.push_back(arch * c2 * e);
    });
    part1.push_back(wd * pairwise_sum(terms).real());
    double pin = 1, pall = 1;
    for (int k = 0; k < 8; ++k) {
      pin *= in[k];
      pall *= in[k] + tail[k];
    }
    const double emax = std::abs(odd_density(d, Vec8{}));
    err1.push_back(std::abs(wd) * X4 * dy.max_abs_phi_hat() * dy.max_abs_k_hat() * emax * (pall - pin));
  }
  r.part_weight_of_t = pairwise_sum(part1);
  r.tail_weight_of_t = pairwise_sum(err1);
  // W(P/(dQ)) part: d = s k 2^j with j = v2(P) >= 3 and |d| below sup|P| / Q
  const double supP = gtf.arch.sup_abs_P({1.0, 4.0}) * X;
  std::vector<double> part2, err2, tail2;
  const std::int64_t dmax = static_cast<std::int64_t>(std::floor(supP / Q));
  for (int j = 3; (std::int64_t{1} << j) <= dmax; ++j)
    for (std::int64_t k = 1; (k << j) <= dmax; k += 2)
      for (int s : {1, -1}) {
        const std::int64_t d = s * (k << j);
        if (j > tr.max_dyadic) {
          ++r.d_omitted;
          // |S_2(d)| <= X^4 |f|_1 sup|W| max|Phi| over the density 2^{-j} / k of the condition
          r.omitted_bound += X4 * gtf.arch.block_l1(0) * gtf.arch.block_l1(1) * std::abs(W.amplitude()) * 6.0 *
                             std::ldexp(1.0, -j) / static_cast<double>(k);
          continue;
        }
        ++r.d_ratio;
        const int mexp = j + 1;
        const std::int64_t M = std::int64_t{1} << mexp;
        const std::int64_t u = egcd_inverse(mod(k, M), M), v = k == 1 ? 0 : egcd_inverse(mod(M, k), k);
        const double t = static_cast<double>(d) / sX;
        std::array<std::vector<std::int64_t>, 8> coords;
        for (int c = 0; c < 8; ++c)
          for (std::int64_t e = -tr.ratio_gamma_radius; e <= tr.ratio_gamma_radius; ++e) coords[c].push_back(e);
        std::vector<std::complex<double>> terms;
        double qerr = 0, boundary = 0;
        detail::for_each_eta(coords, [&](const Vec8& eta) {
          ++r.dual_terms;
          if (r.dual_terms > tr.budget) throw budget_exceeded("poisson_side_sigma: dual term budget exceeded");
          Vec8 z, zo;
          for (int c = 0; c < 8; ++c) {
            z[c] = mulmod(u, mod(eta[c], M), M);
            zo[c] = k == 1 ? 0 : mulmod(v, mod(eta[c], k), k);
          }
          const auto c2 = dyadic_shell_transform(mexp, j, z, mexp);
          if (c2 == 0.0) return;
          const auto e = k == 1 ? std::complex<double>(1) : odd_density(k, zo);
          if (e == 0.0) return;
          Mat8 gamma;
          for (int b = 0; b < 2; ++b) {
            const int o = 4 * b;
            gamma[o] = 0.5 * s * eta[o];
            gamma[o + 1] = 0.5 * s * eta[o + 2];
            gamma[o + 2] = 0.5 * s * eta[o + 1];
            gamma[o + 3] = 0.5 * s * eta[o + 3];
          }
          const auto a = arch_ratio_b14(gtf.arch, W, gamma, t, tr.arch);
          terms.push_back(X4 * a.value * c2 * e);
          qerr += X4 * a.error * std::abs(c2 * e);
          boundary = std::max(boundary, X4 * std::abs(a.value * c2 * e));
        });
        part2.push_back(pairwise_sum(terms).real());
        err2.push_back(qerr);
        // every computed term vanished: the size of the omitted ones is unknown
        if (boundary == 0) boundary = std::numeric_limits<double>::infinity();
        tail2.push_back(dual_tail_estimate(boundary, tr.ratio_gamma_radius, tr.decay_exponent, 8));
      }
  r.part_ratio = pairwise_sum(part2);
  r.tail_ratio = 0;
  for (double x : tail2) r.tail_ratio += x;
  const double scale = kappa * cq / Q;
  r.value = scale * (r.part_weight_of_t - r.part_ratio);
  r.quadrature_error = scale * pairwise_sum(err2);
  r.tail_weight_of_t *= scale;
  r.tail_ratio *= scale;
  r.omitted_bound *= scale;
  r.error_budget = r.quadrature_error + r.tail_weight_of_t + r.tail_ratio + r.omitted_bound;
  r.flagged = !(r.error_budget <= tr.tolerance * std::abs(r.value));
  return r;
}

// 2-adic integer vector 2^e gamma^T mod 2^m for gamma in gl2(Z_(2))^2 / 2^e
inline Vec8 dyadic_residues(const std::array<mpq_class, 8>& gamma, int e, int m) {
  const std::int64_t M = std::int64_t{1} << m;
  static constexpr int dual[4] = {0, 2, 1, 3};
  Vec8 z;
  for (int b = 0; b < 2; ++b)
    for (int k = 0; k < 4; ++k) {
      const mpq_class x = gamma[4 * b + dual[k]] * power_of_two(e);
      mpz_class num = x.get_num(), den = x.get_den();
      require(den % 2 != 0, "entry is not 2-integral at this scale");
      const mpz_class Mz(static_cast<unsigned long>(M));
      mpz_class inv;
      mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), Mz.get_mpz_t());
      mpz_class rr = (num * inv) % Mz;
      if (rr < 0) rr += Mz;
      z[4 * b + k] = rr.get_si();
    }
  return z;
}

inline int min_dyadic_valuation(const std::array<mpq_class, 8>& gamma) {
  int v = 1 << 20;
  for (const auto& x : gamma)
    if (x != 0) v = std::min(v, valuation(x, 2));
  return v;
}

struct IntegralSpec {
  int max_shell = 5;              // largest v(t_2) in the ratio term
  int t_nodes = 6;                // Gauss-Legendre nodes per sign of t_inf in the ratio term
  QuadratureSpec arch{QuadratureSpec::Method::fourier_factored, 1 << 22, 20240601, 1e-8, 12, 0};
};

struct IResult {
  double value = 0;
  double error = 0;
  double weight_part = 0, ratio_part = 0;
  double dyadic_weight = 0, dyadic_ratio = 0;
  double shell_tail = 0;
  int arch_calls = 0;
  bool exact_zero = false;
  bool flagged = false;
};

// I(b, gamma) for S = {inf, 2}, F = Q, with the V family trivial on supp f:
// [int W(t) A_inf dt/t^4] [1/2 Phi^(gamma1) 1_K^(gamma2)] - [int B_inf dt/|t|^4] [sum_v 2^{3v-1} B_2(gamma, 2^v)]
inline IResult I_integral(const mpq_class& b1, const mpq_class& b2, const std::array<mpq_class, 8>& gamma,
                          const GlobalTestFunction& gtf, const SigmaParams& sp, const IntegralSpec& spec = {}) {
  IResult r;
  require(std::any_of(gamma.begin(), gamma.end(), [](const mpq_class& x) { return x != 0; }), "gamma must be nonzero");
  // 1_F(b), then V3 at 2 and at infinity: only b = (1, 4) meets supp f
  if (!SCtx::indicator_F(b1, b2) || b2 != 4) {
    r.exact_zero = true;
    return r;
  }
  const auto& W = sp.delta.W;
  const auto& dy = DyadicTransforms::instance();
  const int e = -std::min(0, min_dyadic_valuation(gamma));
  // weight part: Phi^ lives on (1/8) gl2(Z_2), 1_K^ on (1/2) gl2(Z_2)
  if (e <= 3) {
    const Vec8 z = dyadic_residues(gamma, 3, 3);
    r.dyadic_weight = 0.5 * dy.phi_hat(z.data()) * dy.k_hat(z.data() + 4);
  }
  if (r.dyadic_weight != 0) {
    Mat8 g;
    for (int k = 0; k < 8; ++k) g[k] = gamma[k].get_d();
    auto f = [&](double t) { return arch_weight_of_t(gtf.arch, W, g, t).value / std::pow(t, 4); };
    QuadratureSpec qs;
    qs.tolerance = 1e-12;
    double gmax = 0;
    for (double x : g) gmax = std::max(gmax, std::abs(x));
    const auto q = integrate_complex(f, W.lo(), W.hi(), qs, oscillation_pieces(W.hi() - W.lo(), gmax * 4));
    r.weight_part = q.value.real() * r.dyadic_weight;
    r.error += q.error * std::abs(r.dyadic_weight);
  }
  // ratio part: t_2 = 2^v u, v = v(P) >= 3 on the support. Translating T1 by 2^{v+1} gl2(Z_2) and T2 by
  // 2^{v-1} gl2(Z_2) keeps v(P), so every shell vanishes unless gamma1 in (1/2) gl2(Z_2) and gamma2 in 2 gl2(Z_2)
  bool ratio_possible = true;
  for (int k = 0; k < 8; ++k)
    if (gamma[k] != 0 && valuation(gamma[k], 2) < (k < 4 ? -1 : 1)) ratio_possible = false;
  std::vector<double> shells;
  for (int v = 3; ratio_possible && v <= spec.max_shell; ++v) {
    const int lexp = v + e;
    const int mexp = std::max({v + 1, lexp, 3});
    if (mexp > 7) {
      r.flagged = true;
      break;
    }
    const Vec8 z = dyadic_residues(gamma, e, lexp);
    const auto b = dyadic_shell_transform(mexp, v, z, lexp);
    shells.push_back(std::ldexp(b.real(), 3 * v - 1));
  }
  r.dyadic_ratio = pairwise_sum(shells);
  r.shell_tail = shells.empty() ? 0 : std::abs(shells.back());
  if (r.dyadic_ratio != 0) {
    Mat8 g;
    for (int k = 0; k < 8; ++k) g[k] = gamma[k].get_d();
    const double tmax = gtf.arch.sup_abs_P({1.0, 4.0}) / W.lo();
    // t = +-tmax s^2 clears the small-|t| behaviour of dt / |t|^4
    const auto nodes = [&] {
      std::vector<std::pair<double, double>> out;
      const int n = spec.t_nodes;
      for (int i = 0; i < n; ++i) {
        const double x = std::cos(std::numbers::pi * (i + 0.5) / n);
        out.emplace_back(0.5 * (1 + x), 0.5 * std::numbers::pi / n * std::sin(std::numbers::pi * (i + 0.5) / n));
      }
      return out;
    }();
    std::vector<double> parts;
    double err = 0;
    for (int s : {1, -1})
      for (const auto& [x, w] : nodes) {
        const double t = s * tmax * x * x;
        const auto a = arch_ratio_b14(gtf.arch, W, g, t, spec.arch);
        ++r.arch_calls;
        const double jac = 2 * tmax * x / std::pow(std::abs(t), 4);
        parts.push_back(w * jac * a.value.real());
        err += w * jac * a.error;
        if (a.flagged) r.flagged = true;
      }
    r.ratio_part = pairwise_sum(parts) * r.dyadic_ratio;
    r.error += err * std::abs(r.dyadic_ratio) + std::abs(pairwise_sum(parts)) * r.shell_tail;
  }
  r.value = r.weight_part - r.ratio_part;
  r.exact_zero = r.dyadic_weight == 0 && r.dyadic_ratio == 0;
  return r;
}

struct MainTruncation {
  double gamma_radius = 0.5;    // |c gamma|_inf
  std::int64_t c_max = 3;       // odd c <= c_max
  std::int64_t max_ratio_terms = 4;
  double decay_exponent = 6;
  double tolerance = 0.10;
  std::int64_t budget = 5'000'000;
  IntegralSpec integral;
};

struct MainRhsResult {
  double value = 0;
  double normalization = 0;
  double zeta_S_2 = 0, V1_mellin = 0;
  double error_budget = 0;
  double quadrature_error = 0, tail = 0, omitted = 0;
  std::int64_t gamma_pairs = 0, terms = 0, ratio_terms = 0, ratio_omitted = 0;
  bool flagged = false;
};

// zeta^S(2) / (d_F^4 V1~(1)) sum_{gamma != 0, 4 det gamma1 = det gamma2} sum_{c odd} c^2 I((1, 4), c gamma),
// gamma integral at odd primes, truncated to |c gamma|_inf <= gamma_radius and c <= c_max
inline MainRhsResult main_theorem_rhs(const SigmaParams& sp, const GlobalTestFunction& gtf,
                                      const MainTruncation& tr = {}) {
  MainRhsResult r;
  r.zeta_S_2 = std::numbers::pi * std::numbers::pi / 6 * (1 - 0.25);
  r.V1_mellin = mellin_transform(sp.V1, 1.0).value.real();
  r.normalization = r.zeta_S_2 / (std::pow(SCtx::d_F, 4) * r.V1_mellin);
  if (tr.gamma_radius <= 0 || tr.c_max < 1) {
    r.tail = r.error_budget = std::numeric_limits<double>::infinity();
    r.flagged = true;
    return r;
  }
  // I vanishes unless gamma1 in (1/8) gl2(Z_2) and gamma2 in (1/2) gl2(Z_2): gamma = (A / 8, B / 2), det A = 4 det B
  const std::int64_t ra = static_cast<std::int64_t>(std::floor(8 * tr.gamma_radius));
  const std::int64_t rb = static_cast<std::int64_t>(std::floor(2 * tr.gamma_radius));
  std::map<std::int64_t, std::vector<IntMat2>> by_det;
  for (std::int64_t a = -rb; a <= rb; ++a)
    for (std::int64_t b = -rb; b <= rb; ++b)
      for (std::int64_t c = -rb; c <= rb; ++c)
        for (std::int64_t d = -rb; d <= rb; ++d) by_det[4 * (a * d - b * c)].push_back({a, b, c, d});
  std::vector<double> values;
  double qerr = 0;
  std::int64_t ratio_used = 0;
  for (std::int64_t c = 1; c <= tr.c_max; c += 2) {
    const std::int64_t la = ra / c, lb = rb / c;
    for (std::int64_t a0 = -la; a0 <= la; ++a0)
      for (std::int64_t a1 = -la; a1 <= la; ++a1)
        for (std::int64_t a2 = -la; a2 <= la; ++a2)
          for (std::int64_t a3 = -la; a3 <= la; ++a3) {
            const auto it = by_det.find(a0 * a3 - a1 * a2);
            if (it == by_det.end()) continue;
            for (const auto& B : it->second) {
              if (std::max({std::abs(B[0]), std::abs(B[1]), std::abs(B[2]), std::abs(B[3])}) > lb) continue;
              const bool zero = a0 == 0 && a1 == 0 && a2 == 0 && a3 == 0 && B == IntMat2{0, 0, 0, 0};
              if (zero) continue;
              if (c == 1) ++r.gamma_pairs;
              if (++r.terms > tr.budget) throw budget_exceeded("main_theorem_rhs: term budget exceeded");
              std::array<mpq_class, 8> g;
              const std::int64_t A[4] = {a0, a1, a2, a3};
              for (int k = 0; k < 4; ++k) {
                g[k] = mpq_class(static_cast<long>(c * A[k]), 8);
                g[4 + k] = mpq_class(static_cast<long>(c * B[k]), 2);
                g[k].canonicalize();
                g[4 + k].canonicalize();
              }
              IntegralSpec is = tr.integral;
              // the ratio term costs one t-quadrature of 8-dimensional integrals; cap how many are evaluated
              const auto probe = [&] {
                IntegralSpec q = is;
                q.t_nodes = 0;
                return I_integral(1, 4, g, gtf, sp, q);
              }();
              IResult res = probe;
              if (probe.dyadic_ratio != 0) {
                if (ratio_used < tr.max_ratio_terms) {
                  ++ratio_used;
                  res = I_integral(1, 4, g, gtf, sp, is);
                  ++r.ratio_terms;
                } else {
                  ++r.ratio_omitted;
                  r.flagged = true;
                }
              }
              if (res.flagged) r.flagged = true;
              values.push_back(static_cast<double>(c * c) * res.value);
              qerr += static_cast<double>(c * c) * res.error;
            }
          }
  }
  r.value = r.normalization * pairwise_sum(values);
  r.quadrature_error = r.normalization * qerr;
  // the dual gamma tail is bounded through the large-|gamma| decay exponent in 8 dimensions
  double boundary = 0;
  for (double v : values) boundary = std::max(boundary, std::abs(v));
  if (boundary == 0) boundary = std::numeric_limits<double>::infinity();
  r.tail = r.normalization * dual_tail_estimate(boundary, static_cast<int>(std::max<std::int64_t>(ra, 1)),
                                                tr.decay_exponent, 8);
  r.omitted = r.ratio_omitted > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  r.error_budget = r.quadrature_error + r.tail + r.omitted;
  r.flagged = r.flagged || !(r.error_budget <= tr.tolerance * std::abs(r.value));
  return r;
}

}  // namespace ikern
