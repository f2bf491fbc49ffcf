#include <gtest/gtest.h>

#include <random>

#include "ikern/local_zeta.hpp"

using namespace ikern;

namespace {

PAdicContext ctx_for(std::int64_t p, int M) { return PAdicContext(p, std::max(2 * M, 1)); }

LocalInput make(std::int64_t p, int M, std::int64_t b1, std::int64_t b2, IntMat2 g1, IntMat2 g2) {
  auto c = ctx_for(p, M);
  return LocalInput(c, b1, b2, ResidueMat2(c, g1[0], g1[1], g1[2], g1[3]), ResidueMat2(c, g2[0], g2[1], g2[2], g2[3]));
}

const IntMat2 I2{1, 0, 0, 1};

// float evaluation of the n-th shell: direct loop over pairs mod p^n
std::complex<double> float_shell(const LocalInput& inp, int n) {
  if (n == 0) return 1.0;
  const std::int64_t p = inp.ctx.p, m = checked_pow(p, n), cnt = m * m * m * m;
  std::vector<std::int64_t> d1(cnt), d2(cnt);
  std::vector<std::complex<double>> e1(cnt), e2(cnt);
  for (std::int64_t i = 0; i < cnt; ++i) {
    const std::int64_t a = i % m, b = (i / m) % m, c = (i / (m * m)) % m, d = i / (m * m * m);
    d1[i] = mod(inp.b1 * (a * d - b * c), m);
    d2[i] = mod(inp.b2 * (a * d - b * c), m);
    const auto& g = inp.g1;
    const auto& h = inp.g2;
    const double ph1 = static_cast<double>(mod(g(0, 0) * a + g(0, 1) * c + g(1, 0) * b + g(1, 1) * d, m)) / m;
    const double ph2 = static_cast<double>(mod(h(0, 0) * a + h(0, 1) * c + h(1, 0) * b + h(1, 1) * d, m)) / m;
    e1[i] = std::polar(1.0, -2 * std::numbers::pi * ph1);
    e2[i] = std::polar(1.0, -2 * std::numbers::pi * ph2);
  }
  std::vector<std::complex<double>> by_det(m, 0.0);
  for (std::int64_t j = 0; j < cnt; ++j) by_det[d2[j]] += e2[j];
  std::complex<double> s = 0;
  for (std::int64_t i = 0; i < cnt; ++i) s += e1[i] * by_det[d1[i]];
  return s / std::pow(static_cast<double>(m), 8);
}

}  // namespace

TEST(LocalInput, Validation) {
  auto c = ctx_for(3, 2);
  EXPECT_THROW(LocalInput(c, 3, 1, ResidueMat2::identity(c), ResidueMat2::identity(c)), precondition_error);
  EXPECT_THROW(LocalInput(c, 1, 1, ResidueMat2::zero(c), ResidueMat2::zero(c)), precondition_error);
}

TEST(RhsSeries, IdentityPairExpansion) {
  auto inp = make(3, 2, 1, 1, I2, I2);
  auto r = rhs_series(inp, 2);
  EXPECT_EQ(r.coeff(0, 0), CycloRational(1, mpq_class(1)));
  EXPECT_EQ(r.coeff(1, 1), CycloRational(1, mpq_class(1, 81) - mpq_class(1, 243)));
  EXPECT_EQ(r.coeff(2, 2), CycloRational(1, mpq_class(1, 6561) - mpq_class(1, 19683)));
  EXPECT_TRUE(r.coeff(1, 0).is_zero());
}

TEST(RhsSeries, UnitObstructionTruncates) {
  auto inp = make(3, 3, 1, 1, I2, {1, 0, 0, -1});
  auto r = rhs_series(inp, 3);
  EXPECT_EQ(r.coeff(0, 0), CycloRational(1, mpq_class(1)));
  EXPECT_EQ(r.coeff(1, 1), CycloRational(1, mpq_class(-1, 243)));
  EXPECT_TRUE(r.coeff(2, 2).is_zero());
  EXPECT_TRUE(r.coeff(3, 3).is_zero());
}

TEST(RhsSeries, ScaledGammaGainsShell) {
  auto one = rhs_series(make(3, 3, 1, 1, {1, 1, 0, 1}, {1, 0, 0, 2}), 3);
  auto scaled = rhs_series(make(3, 3, 1, 1, {3, 3, 0, 3}, {3, 0, 0, 6}), 3);
  // P(b^-1, gamma) = 1 - 2 is a unit; scaling by 3 adds the j = 1 shell with weight 1/3
  EXPECT_TRUE(one.coeff(2, 2).is_zero());
  EXPECT_EQ(scaled.coeff(1, 1), CycloRational(1, mpq_class(1, 81) - mpq_class(1, 243) + mpq_class(1, 3)));
  EXPECT_EQ(scaled.coeff(2, 2), CycloRational(1, mpq_class(1, 6561) - mpq_class(1, 19683) - mpq_class(1, 729)));
  auto plain = rhs_series(make(3, 3, 1, 1, {3, 3, 0, 3}, {3, 0, 0, 6}), 3, CShellWeight::norm_s);
  EXPECT_EQ(plain.coeff(1, 1), CycloRational(1, mpq_class(1, 81) - mpq_class(1, 243) + 1));
}

TEST(CompareLocalSeries, ShellWeightDecidesScaledCase) {
  auto inp = make(3, 2, 1, 2, {3, 0, 0, 3}, {3, 0, 0, 3});
  auto with = compare_local_series(inp, 2, LhsMethod::brute_force);
  auto without = compare_local_series(inp, 2, LhsMethod::brute_force, default_enumeration_budget, 0, CShellWeight::norm_s);
  EXPECT_TRUE(with.equal);
  EXPECT_FALSE(without.equal);
  EXPECT_EQ(with.lhs.coeff(1, 1), CycloRational(1, mpq_class(83, 243)));
  EXPECT_EQ(with.lhs.coeff(2, 2), CycloRational(1, mpq_class(-25, 19683)));
}

TEST(LhsSeries, UnitShellIsOne) {
  auto inp = make(5, 1, 1, 2, {1, 2, 3, 4}, {0, 1, 1, 0});
  for (auto m : {LhsMethod::brute_force, LhsMethod::fiber, LhsMethod::closed_form})
    EXPECT_EQ(lhs_series(inp, 1, m).coeff(0, 0), CycloRational(1, mpq_class(1)));
}

TEST(LhsSeries, FirstShellAgainstNaivePairSum) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::int64_t> e(0, 8);
  for (int r = 0; r < 4; ++r) {
    auto inp = make(3, 1, 1 + 3 * (r % 2), 2, {e(rng), e(rng), e(rng), e(rng)}, {e(rng), e(rng), e(rng), 1});
    // psi sums term by term over (Z/3)^8
    CyclotomicNumber s(3);
    PAdicContext c3(3, 1);
    for (int i = 0; i < 81; ++i)
      for (int j = 0; j < 81; ++j) {
        ResidueMat2 t1(c3, i % 3, (i / 3) % 3, (i / 9) % 3, i / 27), t2(c3, j % 3, (j / 3) % 3, (j / 9) % 3, j / 27);
        if (mod(inp.b1 * t1.det() - inp.b2 * t2.det(), 3) != 0) continue;
        ResidueMat2 g1(c3, inp.g1(0, 0), inp.g1(0, 1), inp.g1(1, 0), inp.g1(1, 1));
        ResidueMat2 g2(c3, inp.g2(0, 0), inp.g2(0, 1), inp.g2(1, 0), inp.g2(1, 1));
        s += additive_character(mpq_class(trace_pairing(g1, t1) + trace_pairing(g2, t2), 3), c3);
      }
    const auto expected = mpq_class(1, 6561) * to_rational(s);
    for (auto m : {LhsMethod::brute_force, LhsMethod::fiber, LhsMethod::closed_form})
      EXPECT_EQ(lhs_series(inp, 1, m).coeff(1, 1), expected);
  }
}

TEST(LhsSeries, MethodsAgreeModNine) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<std::int64_t> e(-20, 20);
  for (int r = 0; r < 3; ++r) {
    auto inp = make(3, 2, 1, 2, {e(rng), e(rng), e(rng), e(rng)}, {e(rng), e(rng), e(rng), e(rng)});
    auto a = lhs_series(inp, 2, LhsMethod::brute_force);
    EXPECT_EQ(a, lhs_series(inp, 2, LhsMethod::fiber));
    EXPECT_EQ(a, lhs_series(inp, 2, LhsMethod::closed_form));
  }
}

TEST(CompareLocalSeries, OraclePathIdentityPair) {
  auto r = compare_local_series(make(3, 2, 1, 1, I2, I2), 2, LhsMethod::brute_force);
  EXPECT_TRUE(r.equal);
  EXPECT_EQ(r.lhs.coeff(1, 1), CycloRational(1, mpq_class(2, 243)));
  EXPECT_EQ(r.lhs.coeff(2, 2), CycloRational(1, mpq_class(2, 19683)));
}

TEST(CompareLocalSeries, ShellSumCase) {
  EXPECT_TRUE(compare_local_series(make(3, 2, 1, 1, I2, {3, 0, 0, 3}), 2, LhsMethod::fiber).equal);
  EXPECT_TRUE(compare_local_series(make(3, 2, 1, 1, I2, {1, 0, 0, -1}), 2, LhsMethod::fiber).equal);
}

TEST(CompareLocalSeries, RandomGammaAtFive) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> e(-30, 30);
  for (int r = 0; r < 6; ++r) {
    auto inp = make(5, 1, 1, 2, {e(rng), e(rng), e(rng), e(rng)}, {e(rng), e(rng), e(rng), e(rng)});
    auto rep = compare_local_series(inp, 1, LhsMethod::brute_force);
    EXPECT_TRUE(rep.equal) << (rep.mismatches.empty() ? "" : rep.mismatches[0].lhs + " vs " + rep.mismatches[0].rhs);
  }
}

TEST(CompareLocalSeries, ClosedFormPathOrderSix) {
  std::mt19937_64 rng(17);
  for (std::int64_t p : {3, 5}) {
    std::uniform_int_distribution<std::int64_t> e(-50, 50);
    std::vector<std::pair<IntMat2, IntMat2>> cases = {
        {I2, I2}, {I2, {p, 0, 0, p}}, {{p, 0, 0, p}, {p, 0, 0, p}}, {{p * p, 0, p, 0}, {0, p * p, p * p, 0}}};
    for (int r = 0; r < 4; ++r) cases.push_back({{e(rng), e(rng), e(rng), e(rng)}, {e(rng), e(rng), e(rng), e(rng)}});
    for (const auto& [g1, g2] : cases) {
      auto rep = compare_local_series(make(p, 6, 1, 2, g1, g2), 6, LhsMethod::closed_form);
      EXPECT_TRUE(rep.equal) << p << (rep.mismatches.empty() ? "" : " n=" + std::to_string(rep.mismatches[0].n));
    }
  }
}

TEST(CompareLocalSeries, ZeroObstructionGivesGeometricSeries) {
  // P(b^-1, gamma) = 0: the inner sum is the full geometric series
  auto inp = make(5, 6, 2, 2, {1, 1, 0, 1}, {1, 0, 0, 1});
  auto rep = compare_local_series(inp, 6);
  EXPECT_TRUE(rep.equal);
  const mpq_class q4(1, 625), q5(1, 3125);
  mpq_class w = q4;
  for (int n = 1; n <= 6; ++n, w *= q4) EXPECT_EQ(rep.rhs.coeff(n, n), CycloRational(1, mpq_class(w - w / q4 * q5)));
}

TEST(LhsSeries, RamifiedCharacterVanishes) {
  for (std::int64_t p : {3, 5}) {
    auto inp = make(p, 2, 1, 2, I2, {1, 1, 0, 2});
    PAdicContext ctx(p, 2);
    for (std::int64_t a = 1; a < p - 1; ++a) {
      auto s = lhs_series(inp, 2, LhsMethod::fiber, FiniteCharacter::ramified(ctx, a));
      for (int n = 0; n <= 2; ++n) EXPECT_TRUE(s.row(n).empty()) << p << " " << a << " " << n;
    }
  }
}

TEST(LocalSeries, SpecializationMatchesFloatEvaluation) {
  for (auto [g1, g2] : {std::pair{I2, I2}, {I2, IntMat2{1, 2, 0, 1}}, {IntMat2{2, 1, 1, 1}, IntMat2{0, 1, 1, 3}}}) {
    auto inp = make(3, 2, 1, 1, g1, g2);
    auto l = lhs_series(inp, 2, LhsMethod::fiber);
    auto r = rhs_series(inp, 2);
    for (double sigma : {0.0, 0.5, 2.0}) {
      const double u = std::pow(3.0, -sigma);
      std::complex<double> direct = 0;
      for (int n = 0; n <= 2; ++n) direct += float_shell(inp, n) * std::pow(u, n);
      EXPECT_LT(std::abs(l.evaluate(1.0, u) - direct), 1e-10);
      EXPECT_LT(std::abs(r.evaluate(1.0, u) - direct), 1e-10);
    }
  }
}

TEST(NABound, TScalingAndValuationGrowth) {
  std::vector<std::pair<std::string, LocalInput>> fam = {{"(I,I)", make(3, 2, 1, 1, I2, I2)},
                                                         {"(3I,3I)", make(3, 2, 1, 1, {3, 0, 0, 3}, {3, 0, 0, 3})}};
  auto rep = na_bound_check(fam, {2, 3});
  EXPECT_TRUE(rep.pass);
  ASSERT_EQ(rep.rows.size(), 4u);
  EXPECT_LE(rep.rows[1].value / rep.rows[0].value, std::pow(3.0, -4) * (1 + 1e-9));
  EXPECT_EQ(rep.rows[2].min_valuation, 1);
  EXPECT_NEAR(rep.rows[2].bound / rep.rows[0].bound, 81.0, 1e-9);
}

TEST(SupportVanishing, RadiusFollowsSupportData) {
  for (int k : {0, 1}) {
    auto rep = support_vanishing_check(3, 1, 1, I2, {1, 1, 0, 2}, k, k + 2, 1);
    EXPECT_TRUE(rep.pass);
    EXPECT_EQ(rep.radius, k + 1);
  }
}
