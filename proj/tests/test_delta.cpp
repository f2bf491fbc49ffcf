#include <gtest/gtest.h>

#include <ikern/delta.hpp>

using namespace ikern;

namespace {

double bump_oracle(double x, double mass) {
  if (!(x > 1 && x < 4)) return 0;
  const double u = (2 * x - 5) / 3;
  return mass / (1.5 * 0.443993816168079437823) * std::exp(-1 / (1 - u * u));
}

// literal divisor sum: every integer d with d | m, both signs
double delta_oracle_z(double Q, std::int64_t m) {
  double denom = 0;
  for (std::int64_t d = 1; d <= 4 * Q + 1; ++d) denom += bump_oracle(d / Q, 1);
  const double c = Q / denom;
  double s = 0;
  if (m == 0) return c / Q * denom;
  for (std::int64_t d = -std::abs(m); d <= std::abs(m); ++d)
    if (d != 0 && m % d == 0) s += bump_oracle(d / Q, 1) - bump_oracle(static_cast<double>(m / d) / Q, 1);
  return c / Q * s;
}

// d = +-2^j k over a wide dyadic range
double delta_oracle_z2(double Q, std::int64_t num, int e) {
  double denom = 0;
  for (std::int64_t d = 1; d <= 4 * Q + 1; d += 2) denom += bump_oracle(d / Q, 2);
  const double c = Q / denom;
  std::int64_t o = std::abs(num);
  while (o % 2 == 0) o /= 2;
  const double m = std::ldexp(static_cast<double>(num), e);
  double s = 0;
  for (std::int64_t k = 1; k <= o; k += 2) {
    if (o % k) continue;
    for (int j = -12; j <= 12; ++j)
      for (int sign : {1, -1}) {
        const double d = sign * std::ldexp(static_cast<double>(k), j);
        const double quot = m / d;
        const bool d_unit = j == 0;
        const double qo = std::abs(quot) / std::ldexp(1.0, static_cast<int>(std::floor(std::log2(std::abs(quot)))));
        (void)qo;
        int vq = 0;
        double t = std::abs(quot);
        while (t != std::floor(t)) t *= 2, --vq;
        while (std::fmod(t, 2.0) == 0) t /= 2, ++vq;
        s += (d_unit ? bump_oracle(d / Q, 2) : 0) - (vq == 0 ? bump_oracle(quot / Q, 2) : 0);
      }
  }
  return c / Q * s;
}

}  // namespace

TEST(DeltaConfig, BumpIntegratesToPlaceMass) {
  for (auto s : {PlaceSet::archimedean, PlaceSet::archimedean_and_2}) {
    const auto cfg = DeltaConfig::standard(50, s);
    QuadratureSpec spec;
    spec.tolerance = 1e-14;
    const auto r = integrate_real([&](double x) { return cfg.W(x); }, 1, 4, spec);
    EXPECT_NEAR(r.value, DeltaConfig::archimedean_mass(s), 1e-12);
    EXPECT_EQ(cfg.W.lo(), 1.0);
    EXPECT_EQ(cfg.W.hi(), 4.0);
  }
}

TEST(DeltaConfig, BumpMatchesOracleAndDerivatives) {
  const auto cfg = DeltaConfig::standard(10);
  for (double x = 0.5; x < 4.5; x += 0.03) {
    EXPECT_NEAR(cfg.W(x), bump_oracle(x, 1), 1e-14);
    if (x > 1.01 && x < 3.99) {
      const double h = 1e-5;
      EXPECT_NEAR(cfg.W.derivative(x), (cfg.W(x + h) - cfg.W(x - h)) / (2 * h), 1e-7);
      EXPECT_NEAR(cfg.W.second_derivative(x), (cfg.W.derivative(x + h) - cfg.W.derivative(x - h)) / (2 * h), 1e-6);
    }
  }
}

TEST(HEval, Examples) {
  const auto cfg = DeltaConfig::standard(10);
  EXPECT_EQ(h_eval(cfg, 2, 100), cfg.W(2));
  EXPECT_EQ(h_eval(cfg, 5, 100), 0.0);
  EXPECT_EQ(h_eval(cfg, 2.5, 6.25), 0.0);
  EXPECT_THROW(h_eval(cfg, 0, 1), precondition_error);
}

TEST(CQ, TooSmallQRejected) {
  EXPECT_THROW(c_q(DeltaConfig::standard(0.2)), precondition_error);
  EXPECT_THROW(delta_expansion(DeltaConfig::standard(0.2), std::int64_t{0}), precondition_error);
}

TEST(CQ, CloseToOneAndConverging) {
  for (auto s : {PlaceSet::archimedean, PlaceSet::archimedean_and_2}) {
    EXPECT_NEAR(c_q(DeltaConfig::standard(100, s)), 1.0, 1e-10);
    for (double Q : {40.0, 80.0, 160.0}) {
      const auto a = abs(c_q_precise<precise_real>(precise_real(Q), s) - 1);
      const auto b = abs(c_q_precise<precise_real>(precise_real(2 * Q), s) - 1);
      EXPECT_GT(a, 0);
      EXPECT_LE(b / a, precise_real(1) / 8) << Q;
    }
  }
}

TEST(CQ, PreciseAgreesWithDouble) {
  for (double Q : {3.0, 7.5, 20.0}) {
    const double lo = c_q(DeltaConfig::standard(Q));
    EXPECT_NEAR(lo, static_cast<double>(c_q_precise<precise_real>(precise_real(Q), PlaceSet::archimedean)), 1e-14);
  }
}

TEST(CQ, ConvergenceSequenceBeatsCubicRate) {
  const auto rows = c_q_convergence(20, 5, PlaceSet::archimedean);
  for (std::size_t k = 2; k < rows.size(); ++k) EXPECT_LE(rows[k].ratio_to_previous, 1.0 / 8) << rows[k].Q;
}

TEST(CQ, OddCountWhenTwoInS) {
  const auto cfg = DeltaConfig::standard(10, PlaceSet::archimedean_and_2);
  double s = 0;
  for (int d = 11; d < 40; d += 2) s += cfg.W(d / 10.0);
  EXPECT_NEAR(c_q(cfg), 10 / s, 1e-14);
}

TEST(DeltaExpansion, Examples) {
  EXPECT_NEAR(delta_expansion(DeltaConfig::standard(100), std::int64_t{0}), 1.0, 1e-12);
  EXPECT_NEAR(delta_expansion(DeltaConfig::standard(50), std::int64_t{12}), 0.0, 1e-12);
  EXPECT_NEAR(delta_expansion(DeltaConfig::standard(1.2, PlaceSet::archimedean_and_2), mpq_class(3, 2)), 0.0, 1e-12);
}

TEST(DeltaExpansion, RejectsNonSIntegers) {
  EXPECT_THROW(delta_expansion(DeltaConfig::standard(10), mpq_class(3, 2)), precondition_error);
  EXPECT_THROW(delta_expansion(DeltaConfig::standard(10, PlaceSet::archimedean_and_2), mpq_class(1, 3)),
               precondition_error);
}

TEST(DeltaExpansion, TermsAgreeWithLiteralDivisorSum) {
  for (double Q : {3.0, 12.5}) {
    const auto cfg = DeltaConfig::standard(Q);
    for (std::int64_t m : {0, 1, 12, -30, 64, 360, -777}) {
      EXPECT_NEAR(delta_expansion(cfg, m), delta_oracle_z(Q, m), 1e-13) << Q << " " << m;
    }
  }
  for (double Q : {1.5, 6.0}) {
    const auto cfg = DeltaConfig::standard(Q, PlaceSet::archimedean_and_2);
    for (auto [num, e] : std::vector<std::pair<std::int64_t, int>>{{3, -1}, {45, -3}, {9, 2}, {-15, 0}, {21, 5}}) {
      mpq_class m(num);
      if (e >= 0) m *= mpq_class(1L << e);
      else m /= mpq_class(1L << -e);
      EXPECT_NEAR(delta_expansion(cfg, m), delta_oracle_z2(Q, num, e), 1e-13) << num << " 2^" << e;
    }
  }
}

TEST(DeltaExpansion, NonzeroTermsExistBeforeCancellation) {
  const auto cfg = DeltaConfig::standard(3);
  const auto w = telescoping_witness(cfg, mpq_class(12));
  double mass = 0;
  for (double v : w.direct) mass += v;
  EXPECT_GT(mass, 0.1);
  EXPECT_TRUE(w.equal);
}

TEST(DeltaExpansion, ExactnessOverRange) {
  for (auto s : {PlaceSet::archimedean, PlaceSet::archimedean_and_2}) {
    const auto r = verify_delta({30, 60, 120}, 5000, s);
    EXPECT_TRUE(r.pass) << r.max_offdiag << " at m=" << r.worst_m;
    EXPECT_LE(r.max_diag_error, 1e-12);
    EXPECT_TRUE(r.witness_ok);
  }
}

TEST(DeltaExpansion, DyadicExactness) {
  const auto cfg = DeltaConfig::standard(7, PlaceSet::archimedean_and_2);
  for (int e = -6; e <= 6; ++e)
    for (std::int64_t num = -60; num <= 60; ++num) {
      if (num == 0) continue;
      mpq_class m(num);
      if (e >= 0) m *= mpq_class(1L << e);
      else m /= mpq_class(1L << -e);
      EXPECT_NEAR(delta_expansion(cfg, m), 0.0, 1e-12);
      EXPECT_TRUE(telescoping_witness(cfg, m).equal);
    }
}

TEST(Poisson1d, DualSumAgreesWithinMeasuredTail) {
  const auto w = DeltaConfig::standard(1).W;
  const auto a = poisson_1d_check(w, 10, 3);
  EXPECT_TRUE(a.pass);
  EXPECT_LE(a.difference, 1e-8);
  const auto b = poisson_1d_check(w, 40, 1);
  EXPECT_TRUE(b.pass);
  EXPECT_LE(b.difference, 1e-10);
  for (double Q : {0.7, 1.3, 2.0}) {
    const auto r = poisson_1d_check(w, Q, 60);
    EXPECT_TRUE(r.pass) << Q << " diff " << r.difference << " tol " << r.tolerance;
    EXPECT_LE(r.difference, 1e-9);
  }
}

TEST(Poisson1d, EmptyLattice) {
  const auto w = SmoothWeight::normalized_bump(0.05, 0.95);
  const auto r = poisson_1d_check(w, 1, 200);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(std::abs(r.rhs), 1e-8);
}
