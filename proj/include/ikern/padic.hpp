#pragma once

#include <array>
#include <optional>
#include <variant>

#include "cyclotomic.hpp"

namespace ikern {

struct PAdicContext {
  std::int64_t p = 3;
  int n = 1;
  std::int64_t q = 3;
  std::int64_t pn = 3;

  PAdicContext() = default;
  PAdicContext(std::int64_t prime, int precision) : p(prime), n(precision), q(prime) {
    require(is_prime(p), "p must be prime");
    require(p != 2, "the dyadic place lies in S; p must be odd");
    require(n >= 1, "precision exponent must be at least 1");
    pn = checked_pow(p, n);
    // products of two residues are formed in 128 bits; keep the modulus itself bounded
    require(pn <= (std::int64_t{1} << 40), "p^n exceeds the supported modulus range");
  }

  std::int64_t reduce(std::int64_t a) const { return mod(a, pn); }
  std::int64_t pow(int e) const { return checked_pow(p, e); }
  bool is_unit(std::int64_t a) const { return mod(a, p) != 0; }
  friend bool operator==(const PAdicContext& a, const PAdicContext& b) { return a.p == b.p && a.n == b.n; }
};

inline int valuation(const mpz_class& a, std::int64_t p) {
  if (a == 0) return 1 << 20;
  mpz_class t = a;
  int v = 0;
  while (mpz_divisible_ui_p(t.get_mpz_t(), static_cast<unsigned long>(p))) {
    mpz_divexact_ui(t.get_mpz_t(), t.get_mpz_t(), static_cast<unsigned long>(p));
    ++v;
  }
  return v;
}

inline int valuation(const mpq_class& a, std::int64_t p) {
  if (a == 0) return 1 << 20;
  return valuation(a.get_num(), p) - valuation(a.get_den(), p);
}

// {a}_p: the element of Z[1/p] ∩ [0,1) with a - {a}_p in Z_p
inline mpq_class padic_fractional_part(mpq_class a, const PAdicContext& ctx) {
  a.canonicalize();
  const int v = valuation(a, ctx.p);
  if (a == 0 || v >= 0) return mpq_class(0);
  require(-v <= ctx.n, "p-adic precision exceeded");
  const mpz_class pk = [&] {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(ctx.p), static_cast<unsigned long>(-v));
    return r;
  }();
  // a = N / (p^k u), u prime to p; {a} = (N u^{-1} mod p^k) / p^k
  const mpz_class u = a.get_den() / pk;
  mpz_class uinv;
  mpz_invert(uinv.get_mpz_t(), u.get_mpz_t(), pk.get_mpz_t());
  mpz_class r = (a.get_num() * uinv) % pk;
  if (r < 0) r += pk;
  mpq_class out(r, pk);
  out.canonicalize();
  return out;
}

// numerator k of {a}_p written over p^n
inline std::int64_t fractional_numerator(const mpq_class& a, const PAdicContext& ctx) {
  const mpq_class f = padic_fractional_part(a, ctx);
  const mpz_class k = f.get_num() * (mpz_class(static_cast<long>(ctx.pn)) / f.get_den());
  return k.get_si();
}

// psi_p(a) = zeta_{p^n}^{-k}, {a}_p = k / p^n
inline CyclotomicNumber additive_character(const mpq_class& a, const PAdicContext& ctx) {
  return CyclotomicNumber::monomial(static_cast<int>(ctx.pn), -fractional_numerator(a, ctx));
}

// psi_p(k / p^n) for an integer k
inline CyclotomicNumber additive_character_residue(std::int64_t k, const PAdicContext& ctx) {
  return CyclotomicNumber::monomial(static_cast<int>(ctx.pn), -k);
}

class ResidueMat2 {
 public:
  ResidueMat2() = default;
  ResidueMat2(const PAdicContext& ctx, std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d)
      : ctx_(ctx), e_{ctx.reduce(a), ctx.reduce(b), ctx.reduce(c), ctx.reduce(d)} {}
  static ResidueMat2 identity(const PAdicContext& ctx) { return {ctx, 1, 0, 0, 1}; }
  static ResidueMat2 zero(const PAdicContext& ctx) { return {ctx, 0, 0, 0, 0}; }
  static ResidueMat2 scalar(const PAdicContext& ctx, std::int64_t s) { return {ctx, s, 0, 0, s}; }

  const PAdicContext& ctx() const { return ctx_; }
  std::int64_t operator()(int i, int j) const { return e_[2 * i + j]; }
  const std::array<std::int64_t, 4>& entries() const { return e_; }

  std::int64_t det() const {
    return ctx_.reduce(mulmod(e_[0], e_[3], ctx_.pn) - mulmod(e_[1], e_[2], ctx_.pn));
  }
  std::int64_t trace() const { return ctx_.reduce(e_[0] + e_[3]); }
  bool is_zero() const { return e_ == std::array<std::int64_t, 4>{0, 0, 0, 0}; }
  // least valuation among the entries (n when all vanish mod p^n)
  int min_valuation() const {
    int v = ctx_.n;
    for (auto x : e_)
      if (x) v = std::min(v, valuation(x, ctx_.p));
    return v;
  }

  friend ResidueMat2 operator+(const ResidueMat2& a, const ResidueMat2& b) {
    check(a, b);
    return {a.ctx_, a.e_[0] + b.e_[0], a.e_[1] + b.e_[1], a.e_[2] + b.e_[2], a.e_[3] + b.e_[3]};
  }
  friend ResidueMat2 operator-(const ResidueMat2& a, const ResidueMat2& b) {
    check(a, b);
    return {a.ctx_, a.e_[0] - b.e_[0], a.e_[1] - b.e_[1], a.e_[2] - b.e_[2], a.e_[3] - b.e_[3]};
  }
  friend ResidueMat2 operator*(const ResidueMat2& a, const ResidueMat2& b) {
    check(a, b);
    const auto m = a.ctx_.pn;
    auto dot = [&](std::int64_t x, std::int64_t y, std::int64_t z, std::int64_t w) {
      return mulmod(x, y, m) + mulmod(z, w, m);
    };
    return {a.ctx_, dot(a.e_[0], b.e_[0], a.e_[1], b.e_[2]), dot(a.e_[0], b.e_[1], a.e_[1], b.e_[3]),
            dot(a.e_[2], b.e_[0], a.e_[3], b.e_[2]), dot(a.e_[2], b.e_[1], a.e_[3], b.e_[3])};
  }
  friend ResidueMat2 operator*(std::int64_t s, const ResidueMat2& a) {
    const auto m = a.ctx_.pn;
    return {a.ctx_, mulmod(s, a.e_[0], m), mulmod(s, a.e_[1], m), mulmod(s, a.e_[2], m), mulmod(s, a.e_[3], m)};
  }
  friend bool operator==(const ResidueMat2& a, const ResidueMat2& b) { return a.ctx_ == b.ctx_ && a.e_ == b.e_; }

 private:
  static void check(const ResidueMat2& a, const ResidueMat2& b) {
    require(a.ctx_ == b.ctx_, "residue matrices over different rings");
  }
  PAdicContext ctx_{};
  std::array<std::int64_t, 4> e_{0, 0, 0, 0};
};

// mat_det_trace
inline std::pair<std::int64_t, std::int64_t> mat_det_trace(const ResidueMat2& m) { return {m.det(), m.trace()}; }

// tr(g T) with the usual matrix product
inline std::int64_t trace_pairing(const ResidueMat2& g, const ResidueMat2& t) { return (g * t).trace(); }

class FiniteCharacter {
 public:
  struct UnramifiedFormal {};
  struct UnramifiedNumeric {
    CyclotomicNumber omega;
  };
  struct Ramified {
    // chi(g^j) = zeta_{p-1}^{a j} for the least primitive root g
    std::int64_t index = 1;
  };

  static FiniteCharacter unramified_formal(const PAdicContext& ctx) { return {ctx, UnramifiedFormal{}}; }
  static FiniteCharacter unramified(const PAdicContext& ctx, CyclotomicNumber omega) {
    return {ctx, UnramifiedNumeric{std::move(omega)}};
  }
  static FiniteCharacter ramified(const PAdicContext& ctx, std::int64_t index) {
    require(mod(index, ctx.p - 1) != 0, "ramified character index must be nontrivial mod p-1");
    return {ctx, Ramified{mod(index, ctx.p - 1)}};
  }

  const PAdicContext& ctx() const { return ctx_; }
  bool is_ramified() const { return std::holds_alternative<Ramified>(kind_); }
  bool is_formal() const { return std::holds_alternative<UnramifiedFormal>(kind_); }
  int conductor_exponent() const { return is_ramified() ? 1 : 0; }

  // chi on units of Z_p, through the residue u mod p^n
  CyclotomicNumber on_unit(std::int64_t u) const {
    require(ctx_.is_unit(u), "chi evaluated on a nonunit");
    if (auto* r = std::get_if<Ramified>(&kind_)) {
      const int ord = static_cast<int>(ctx_.p - 1);
      return CyclotomicNumber::monomial(ord, r->index * dlog_[mod(u, ctx_.p)]);
    }
    return CyclotomicNumber(1, mpz_class(1));
  }

  // chi(p), when it is a number
  std::optional<CyclotomicNumber> at_uniformizer() const {
    if (auto* u = std::get_if<UnramifiedNumeric>(&kind_)) return u->omega;
    if (is_ramified()) return CyclotomicNumber(1, mpz_class(1));
    return std::nullopt;
  }

 private:
  FiniteCharacter(const PAdicContext& ctx, std::variant<UnramifiedFormal, UnramifiedNumeric, Ramified> k)
      : ctx_(ctx), kind_(std::move(k)) {
    if (is_ramified()) {
      dlog_.assign(ctx_.p, 0);
      const auto g = primitive_root(ctx_.p);
      std::int64_t x = 1;
      for (std::int64_t j = 0; j < ctx_.p - 1; ++j) {
        dlog_[x] = j;
        x = mulmod(x, g, ctx_.p);
      }
    }
  }
  PAdicContext ctx_;
  std::variant<UnramifiedFormal, UnramifiedNumeric, Ramified> kind_;
  std::vector<std::int64_t> dlog_;
};

}  // namespace ikern
