#include <gtest/gtest.h>

#include <random>

#include "ikern/padic.hpp"

using namespace ikern;

namespace {

std::complex<double> root(int n, std::int64_t k) {
  const double th = 2.0 * std::numbers::pi * static_cast<double>(mod(k, n)) / n;
  return {std::cos(th), std::sin(th)};
}

CyclotomicNumber random_cyclo(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> c(-5, 5), e(0, n - 1);
  CyclotomicNumber z(n);
  for (int i = 0; i < 4; ++i) z.add_power(e(rng), mpz_class(c(rng)));
  return z;
}

}  // namespace

TEST(Cyclotomic, PolynomialDegrees) {
  for (int n = 1; n <= 200; ++n) {
    auto phi = detail::cyclotomic_polynomial(n);
    EXPECT_EQ(static_cast<std::int64_t>(phi.size()) - 1, euler_phi(n)) << n;
    EXPECT_EQ(phi.back(), 1);
  }
  EXPECT_EQ(detail::cyclotomic_polynomial(6), (std::vector<std::int64_t>{1, -1, 1}));
  EXPECT_EQ(detail::cyclotomic_polynomial(9), (std::vector<std::int64_t>{1, 0, 0, 1, 0, 0, 1}));
}

TEST(Cyclotomic, EmbeddingOfProducts) {
  std::mt19937_64 rng(7);
  for (int n = 1; n <= 200; ++n) {
    std::uniform_int_distribution<std::int64_t> e(-1000, 1000);
    for (int r = 0; r < 3; ++r) {
      const auto a = e(rng), b = e(rng);
      auto z = CyclotomicNumber::monomial(n, a) * CyclotomicNumber::monomial(n, b);
      EXPECT_LT(std::abs(z.embed() - root(n, a + b)), 1e-12) << n << " " << a << " " << b;
    }
  }
}

TEST(Cyclotomic, RingAxiomsOnRandomTriples) {
  std::mt19937_64 rng(11);
  for (int n : {3, 9, 12, 27, 35, 81, 120}) {
    for (int r = 0; r < 20; ++r) {
      auto a = random_cyclo(rng, n), b = random_cyclo(rng, n), c = random_cyclo(rng, n);
      EXPECT_EQ((a + b) + c, a + (b + c));
      EXPECT_EQ(a + b, b + a);
      EXPECT_EQ((a * b) * c, a * (b * c));
      EXPECT_EQ(a * b, b * a);
      EXPECT_EQ(a * (b + c), a * b + a * c);
      EXPECT_TRUE((a - a).is_zero());
    }
  }
}

TEST(Cyclotomic, MixedOrdersLiftToCommonField) {
  auto z3 = CyclotomicNumber::monomial(3, 1);
  auto z9 = CyclotomicNumber::monomial(9, 3);
  EXPECT_EQ(z3, z9);
  auto z4 = CyclotomicNumber::monomial(4, 1);
  auto prod = z3 * z4;
  EXPECT_EQ(prod.order(), 12);
  EXPECT_LT(std::abs(prod.embed() - root(12, 7)), 1e-12);
  EXPECT_EQ(CyclotomicNumber::monomial(2, 1), CyclotomicNumber(1, mpz_class(-1)));
}

TEST(Cyclotomic, ConjugateAndGalois) {
  std::mt19937_64 rng(5);
  auto a = random_cyclo(rng, 27);
  EXPECT_LT(std::abs(a.conj().embed() - std::conj(a.embed())), 1e-12);
  EXPECT_EQ(a.galois(-1), a.conj());
  EXPECT_EQ(a.galois(2).galois(14), a);
}

TEST(Cyclotomic, ExponentCountsMatchMonomialSum) {
  std::vector<std::int64_t> counts(25, 0);
  CyclotomicNumber direct(25);
  for (int k = 0; k < 25; ++k) {
    counts[k] = (k * 7) % 11 - 3;
    direct += mpz_class(counts[k]) * CyclotomicNumber::monomial(25, k);
  }
  EXPECT_EQ(CyclotomicNumber::from_exponent_counts(25, counts), direct);
  std::vector<std::int64_t> flat(25, 4);
  EXPECT_TRUE(CyclotomicNumber::from_exponent_counts(25, flat).is_zero());
}

TEST(PAdic, ContextValidation) {
  EXPECT_THROW(PAdicContext(2, 3), precondition_error);
  EXPECT_THROW(PAdicContext(9, 1), precondition_error);
  EXPECT_THROW(PAdicContext(3, 0), precondition_error);
  EXPECT_THROW(PAdicContext(3, 40), precondition_error);
  PAdicContext c(5, 3);
  EXPECT_EQ(c.pn, 125);
  EXPECT_EQ(c.q, 5);
}

TEST(PAdic, FractionalPartExamples) {
  EXPECT_EQ(padic_fractional_part(mpq_class(0), PAdicContext(5, 2)), 0);
  EXPECT_EQ(padic_fractional_part(mpq_class(-1, 25), PAdicContext(5, 2)), mpq_class(24, 25));
  EXPECT_EQ(padic_fractional_part(mpq_class(7, 9) + 2, PAdicContext(3, 2)), mpq_class(7, 9));
  EXPECT_EQ(padic_fractional_part(mpq_class(1, 6), PAdicContext(3, 1)), mpq_class(2, 3));
  EXPECT_EQ(padic_fractional_part(mpq_class(5, 7), PAdicContext(3, 1)), 0);
  EXPECT_THROW(padic_fractional_part(mpq_class(1, 27), PAdicContext(3, 2)), precondition_error);
}

TEST(PAdic, FractionalPartCharacterizationAndPeriodicity) {
  std::mt19937_64 rng(3);
  PAdicContext ctx(3, 4);
  std::uniform_int_distribution<long> num(-100000, 100000), e(0, 4), u(1, 50);
  for (int r = 0; r < 500; ++r) {
    long unit = u(rng);
    if (unit % 3 == 0) ++unit;
    mpq_class a(num(rng), checked_pow(3, static_cast<int>(e(rng))) * unit);
    a.canonicalize();
    const auto f = padic_fractional_part(a, ctx);
    EXPECT_GE(f, 0);
    EXPECT_LT(f, 1);
    EXPECT_GE(valuation(mpq_class(a - f), 3), 0);
    EXPECT_EQ(mpz_class(ctx.pn) % f.get_den(), 0);
    for (long m : {-7L, 1L, 13L, 1000L}) EXPECT_EQ(padic_fractional_part(a + m, ctx), f);
  }
}

TEST(PAdic, AdditiveCharacter) {
  PAdicContext c31(3, 1);
  EXPECT_EQ(additive_character(mpq_class(0), c31), CyclotomicNumber(1, mpz_class(1)));
  EXPECT_EQ(additive_character(mpq_class(1, 3), c31), CyclotomicNumber::monomial(3, -1));
  CyclotomicNumber s(3);
  for (int a = 0; a < 3; ++a) s += additive_character(mpq_class(a, 3), c31);
  EXPECT_TRUE(s.is_zero());

  for (auto [p, n] : {std::pair{3, 2}, {5, 2}, {7, 1}, {3, 4}}) {
    PAdicContext ctx(p, n);
    CyclotomicNumber t(static_cast<int>(ctx.pn));
    for (std::int64_t a = 0; a < ctx.pn; ++a) t += additive_character(mpq_class(a, ctx.pn), ctx);
    EXPECT_TRUE(t.is_zero());
  }
  PAdicContext ctx(5, 2);
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<long> num(-500, 500);
  for (int r = 0; r < 100; ++r) {
    mpq_class a(num(rng), 25), b(num(rng), 5);
    a.canonicalize();
    b.canonicalize();
    EXPECT_EQ(additive_character(a + b, ctx), additive_character(a, ctx) * additive_character(b, ctx));
  }
}

TEST(ResidueMat2, DetTraceExamples) {
  PAdicContext ctx(3, 2);
  const std::pair<std::int64_t, std::int64_t> id_dt{1, 2};
  EXPECT_EQ(mat_det_trace(ResidueMat2::identity(ctx)), id_dt);
  auto [d, t] = mat_det_trace(ResidueMat2(ctx, 0, 1, 1, 0));
  EXPECT_EQ(d, ctx.reduce(-1));
  EXPECT_EQ(t, 0);
}

TEST(ResidueMat2, ExhaustiveMultiplicativityMod3) {
  PAdicContext ctx(3, 1);
  std::vector<ResidueMat2> all;
  for (int i = 0; i < 81; ++i) all.emplace_back(ctx, i % 3, (i / 3) % 3, (i / 9) % 3, i / 27);
  for (const auto& a : all)
    for (const auto& b : all) {
      ASSERT_EQ((a * b).det(), mulmod(a.det(), b.det(), 3));
      ASSERT_EQ((a + b).trace(), mod(a.trace() + b.trace(), 3));
    }
}

TEST(ResidueMat2, RandomIdentitiesMod625) {
  PAdicContext ctx(5, 4);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::int64_t> e(0, ctx.pn - 1);
  for (int r = 0; r < 1000; ++r) {
    ResidueMat2 a(ctx, e(rng), e(rng), e(rng), e(rng)), b(ctx, e(rng), e(rng), e(rng), e(rng));
    EXPECT_EQ((a * b).det(), mulmod(a.det(), b.det(), ctx.pn));
    EXPECT_EQ(trace_pairing(a, b), trace_pairing(b, a));
  }
}

TEST(FiniteCharacter, MultiplicativeOnUnits) {
  for (std::int64_t p : {3, 5, 7, 11}) {
    PAdicContext ctx(p, 1);
    for (std::int64_t a = 1; a < p - 1; ++a) {
      auto chi = FiniteCharacter::ramified(ctx, a);
      for (std::int64_t x = 1; x < p; ++x)
        for (std::int64_t y = 1; y < p; ++y) ASSERT_EQ(chi.on_unit(x * y), chi.on_unit(x) * chi.on_unit(y));
      CyclotomicNumber s(static_cast<int>(p - 1));
      for (std::int64_t x = 1; x < p; ++x) s += chi.on_unit(x);
      EXPECT_TRUE(s.is_zero());
    }
  }
  PAdicContext ctx(5, 1);
  auto unr = FiniteCharacter::unramified(ctx, CyclotomicNumber::monomial(8, 3));
  EXPECT_EQ(unr.on_unit(3), CyclotomicNumber(1, mpz_class(1)));
  EXPECT_EQ(*unr.at_uniformizer(), CyclotomicNumber::monomial(8, 3));
  EXPECT_FALSE(FiniteCharacter::unramified_formal(ctx).at_uniformizer().has_value());
  EXPECT_THROW(FiniteCharacter::ramified(ctx, 4), precondition_error);
}
