#include <gtest/gtest.h>

#include <ikern/arch.hpp>
#include <ikern/delta.hpp>
#include <random>

using namespace ikern;

namespace {

const SmoothWeight& standard_W() {
  static const SmoothWeight w = DeltaConfig::standard(1).W;
  return w;
}

QuadratureSpec qmc(std::int64_t budget) {
  QuadratureSpec s;
  s.method = QuadratureSpec::Method::low_discrepancy;
  s.budget = budget;
  return s;
}

}  // namespace

TEST(SmoothWeight, ZeroOutsideSupport) {
  const auto w = SmoothWeight::bump(0.5, 0.25, 3.0);
  EXPECT_EQ(w(0.25), 0.0);
  EXPECT_EQ(w(0.75), 0.0);
  EXPECT_EQ(w(-4.0), 0.0);
  EXPECT_EQ(w.derivative(0.8), 0.0);
  EXPECT_GT(w(0.26), 0.0);
  EXPECT_NEAR(w(0.5), 3.0 * std::exp(-1.0), 1e-15);
}

TEST(SmoothWeight, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(7);
  const std::vector<SmoothWeight> ws{SmoothWeight::bump(2.5, 1.5, 0.7), SmoothWeight::plateau(0.5, 0.8, 1.6, 2.0),
                                     SmoothWeight::plateau(0.5, 0.8, 1.6, 2.0).times_x()};
  for (const auto& w : ws) {
    std::uniform_real_distribution<double> u(w.lo() + 1e-3, w.hi() - 1e-3);
    for (int i = 0; i < 100; ++i) {
      const double x = u(rng), h = 1e-6;
      const double fd1 = (w(x + h) - w(x - h)) / (2 * h);
      const double fd2 = (w.derivative(x + h) - w.derivative(x - h)) / (2 * h);
      EXPECT_NEAR(w.derivative(x), fd1, 1e-6 * (1 + std::abs(fd1))) << x;
      EXPECT_NEAR(w.second_derivative(x), fd2, 1e-5 * (1 + std::abs(fd2))) << x;
    }
  }
}

TEST(SmoothWeight, PlateauIsOneInside) {
  const auto p = SmoothWeight::plateau(0.5, 0.8, 1.6, 2.0);
  for (double x = 0.8; x <= 1.6; x += 0.05) EXPECT_EQ(p(x), 1.0);
  EXPECT_EQ(p(0.5), 0.0);
  EXPECT_EQ(p(2.0), 0.0);
  EXPECT_GT(p(0.6), 0.0);
  EXPECT_LT(p(0.6), 1.0);
  EXPECT_EQ(p.times_x()(1.2), 1.2);
  EXPECT_THROW(SmoothWeight::plateau(1, 0.5, 2, 3), precondition_error);
}

TEST(Fourier1d, Examples) {
  const auto& w = standard_W();
  const auto z = fourier_1d(w, 0);
  EXPECT_NEAR(z.value.real(), 1.0, 1e-12);
  EXPECT_NEAR(z.value.imag(), 0.0, 1e-12);
  for (double xi : {0.3, 2.7, 11.0, 57.5}) {
    const auto a = fourier_1d(w, xi).value, b = fourier_1d(w, -xi).value;
    EXPECT_NEAR(std::abs(b - std::conj(a)), 0.0, 1e-13);
  }
}

TEST(Fourier1d, ErrorEstimateAndDecayEnvelope) {
  const auto& w = standard_W();
  double c = 0;
  for (double xi = 0; xi <= 200; xi += 0.5) {
    const auto r = fourier_1d(w, xi);
    EXPECT_LE(r.error, 1e-10) << xi;
    EXPECT_FALSE(r.flagged);
    c = std::max(c, std::abs(r.value) * std::pow(1 + xi, 4));
  }
  EXPECT_TRUE(std::isfinite(c));
  EXPECT_GT(c, 0.0);
  // the recorded constant is attained at moderate frequency, then the decay is faster than any power
  EXPECT_LT(std::abs(fourier_1d(w, 200).value) * std::pow(201, 4), 1e-3 * c);
}

TEST(Fourier1d, TabulatedTransformAgrees) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> cen(-2, 2), rad(0.1, 1.5), amp(0.2, 3), xi(-150, 150);
  for (int i = 0; i < 40; ++i) {
    const auto w = SmoothWeight::bump(cen(rng), rad(rng), amp(rng));
    const double x = xi(rng);
    const auto a = bump_fourier(w, x), b = fourier_1d(w, x).value;
    EXPECT_NEAR(std::abs(a - b), 0.0, 1e-12 * w.amplitude()) << x;
    EXPECT_LE(std::abs(a), bump_fourier_envelope(w, x) + 1e-15);
  }
}

TEST(Fourier1d, TighterToleranceStaysWithinEstimate) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> cen(-2, 2), rad(0.1, 1.5), xi(-80, 80);
  for (int i = 0; i < 20; ++i) {
    const auto w = SmoothWeight::bump(cen(rng), rad(rng));
    const double x = xi(rng);
    QuadratureSpec loose, tight;
    loose.tolerance = 1e-8;
    tight.tolerance = 5e-9;
    const auto a = fourier_1d(w, x, loose), b = fourier_1d(w, x, tight);
    EXPECT_LE(std::abs(a.value - b.value), a.error + 1e-15) << i;
  }
}

TEST(Mellin, Examples) {
  const auto v = SmoothWeight::normalized_bump(0.5, 2.0, 1.0);
  const auto m1 = mellin_transform(v, 1.0);
  EXPECT_NEAR(m1.value.real(), integrate_real([&](double x) { return v(x); }, 0.5, 2.0).value, 1e-10);
  EXPECT_NEAR(m1.value.imag(), 0.0, 1e-14);
  const auto m2 = mellin_transform(v, 2.0);
  EXPECT_LE(m2.value.real() / m1.value.real(), v.hi());
  EXPECT_LE(std::abs(mellin_transform(v, {1.0, 2.0}).value), m1.value.real());
  EXPECT_THROW(mellin_transform(SmoothWeight::bump(0, 1), 1.0), precondition_error);
}

TEST(MatrixBump, DeterminantRange) {
  const CriticalExample ex;
  EXPECT_NEAR(ex.f.min_abs_det(0), 0.7 * 0.7 - 0.09, 1e-12);
  EXPECT_NEAR(ex.f.min_abs_det(1), 0.7 * 0.7 - 0.09, 1e-12);
  EXPECT_NEAR(ex.f.sup_abs_P(ex.b), 1.78 - 0.4, 1e-12);
  EXPECT_THROW(MatrixBump::around({0, 0, 0, 0, 1, 0, 0, 1}, 0.3), precondition_error);
}

TEST(ArchOsc, ArgumentChecks) {
  const CriticalExample ex;
  EXPECT_THROW(arch_osc_integral(ex.f, ArchKernel::weight_of_ratio, standard_W(), ex.b, ex.gamma, 0.0),
               precondition_error);
  EXPECT_THROW(arch_osc_integral(ex.f, ArchKernel::weight_of_ratio, standard_W(), {3.0, 1.0}, ex.gamma, 0.5),
               precondition_error);
}

TEST(ArchOsc, ZeroGammaFactorizes) {
  const CriticalExample ex;
  const Mat8 zero{};
  const double t = 2.0;
  const auto tensor = arch_osc_integral(ex.f, ArchKernel::weight_of_t, standard_W(), ex.b, zero, t);
  double prod = standard_W()(t);
  for (const auto& g : ex.f.entries()) prod *= integrate_real([&](double x) { return g(x); }, g.lo(), g.hi()).value;
  EXPECT_NEAR(tensor.value.real(), prod, 1e-8 * std::abs(prod));
  const auto q = arch_osc_integral(ex.f, ArchKernel::weight_of_t, standard_W(), ex.b, zero, t, qmc(1 << 18));
  EXPECT_LE(std::abs(q.value - tensor.value), 5 * q.error);
  EXPECT_LT(q.error, 1e-3 * std::abs(prod));
  EXPECT_TRUE(arch_osc_integral(ex.f, ArchKernel::weight_of_t, standard_W(), ex.b, zero, 0.5).exact_zero);
}

TEST(ArchOsc, ExactZeroBeyondSupportRadius) {
  const CriticalExample ex;
  const double t = 1.01 * ex.f.sup_abs_P(ex.b) / standard_W().lo();
  for (auto spec : {QuadratureSpec{}, qmc(1 << 12)}) {
    const auto r = arch_osc_integral(ex.f, ArchKernel::weight_of_ratio, standard_W(), ex.b, ex.gamma, t, spec);
    EXPECT_TRUE(r.exact_zero);
    EXPECT_EQ(r.value, std::complex<double>(0));
  }
}

TEST(ArchOsc, FourierRouteAgreesWithLatticeRule) {
  const CriticalExample ex;
  for (const Mat8& g : {ex.gamma, Mat8{0.3, 0.1, -0.2, 0.4, 0.2, 0, 0.1, 0.3}})
    for (double t : {0.5, 0.25}) {
      const auto a = arch_osc_integral(ex.f, ArchKernel::weight_of_ratio, standard_W(), ex.b, g, t);
      const auto q = arch_osc_integral(ex.f, ArchKernel::weight_of_ratio, standard_W(), ex.b, g, t, qmc(1 << 21));
      EXPECT_FALSE(a.flagged);
      EXPECT_LE(std::abs(a.value - q.value), 5 * q.error + a.error) << t;
    }
}

TEST(ArchOsc, ConjugateEquivariance) {
  const CriticalExample ex;
  Mat8 neg = ex.gamma;
  for (auto& x : neg) x = -x;
  const auto a = arch_osc_integral(ex.f, ArchKernel::weight_of_ratio, standard_W(), ex.b, ex.gamma, 0.25);
  const auto b = arch_osc_integral(ex.f, ArchKernel::weight_of_ratio, standard_W(), ex.b, neg, 0.25);
  EXPECT_LE(std::abs(b.value - std::conj(a.value)), 1e-10 * std::abs(a.value) + a.error + b.error);
  const auto qa = arch_osc_integral(ex.f, ArchKernel::weight_of_ratio, standard_W(), ex.b, ex.gamma, 0.5, qmc(1 << 14));
  const auto qb = arch_osc_integral(ex.f, ArchKernel::weight_of_ratio, standard_W(), ex.b, neg, 0.5, qmc(1 << 14));
  EXPECT_LE(std::abs(qb.value - std::conj(qa.value)), 1e-10 * std::abs(qa.value));
}

TEST(ArchOsc, LinearInTestFunction) {
  const CriticalExample ex;
  const auto other = MatrixBump::around({1.1, 0.05, 0, 0.9, -1, 0.1, 0, -1.05}, 0.2);
  const auto& W = standard_W();
  auto piece = [&](const MatrixBump& g) {
    return [&, g](const Mat8& T) { return W(P_of(ex.b, T) / 0.5) * g(T) * unit_phase(trace_pairing(ex.gamma, T), 2.0); };
  };
  const auto spec = qmc(1 << 14);
  const auto a = qmc_box_integral(ex.f, piece(ex.f), spec);
  const auto b = qmc_box_integral(ex.f, piece(other), spec);
  const auto pa = piece(ex.f), pb = piece(other);
  const auto s = qmc_box_integral(ex.f, [&](const Mat8& T) { return pa(T) + pb(T); }, spec);
  EXPECT_LE(std::abs(s.value - a.value - b.value), 1e-12 * (std::abs(a.value) + std::abs(b.value)));
}

TEST(ArchOsc, LatticeRuleFlagsFastOscillation) {
  const CriticalExample ex;
  const auto r = arch_osc_integral(ex.f, ArchKernel::weight_of_ratio, standard_W(), ex.b,
                                   {40, 0, 0, 40, 40, 0, 0, 40}, 0.5, qmc(1 << 12));
  EXPECT_TRUE(r.flagged);
}

TEST(ArchOsc, LatticeRuleBudgetSelfConsistency) {
  const CriticalExample ex;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int i = 0; i < 4; ++i) {
    Mat8 g;
    for (auto& x : g) x = u(rng);
    const auto a = arch_osc_integral(ex.f, ArchKernel::weight_of_ratio, standard_W(), ex.b, g, 0.5, qmc(1 << 16));
    const auto b = arch_osc_integral(ex.f, ArchKernel::weight_of_ratio, standard_W(), ex.b, g, 0.5, qmc(1 << 17));
    EXPECT_LE(std::abs(a.value - b.value), 4 * a.error) << i;
  }
}

TEST(DecayReport, CriticalExample) {
  const CriticalExample ex;
  const auto rep = decay_report(ex.f, standard_W(), ex.b, ex.gamma);
  EXPECT_TRUE(rep.small_t_pass) << rep.small_t_exponent;
  EXPECT_GE(rep.small_t_exponent, 3.5);
  EXPECT_TRUE(rep.large_t_pass);
  EXPECT_TRUE(std::isinf(rep.large_t_exponent));
  EXPECT_TRUE(rep.large_gamma_pass) << rep.large_gamma_exponent;
  EXPECT_GE(rep.large_gamma_exponent, 6);
  EXPECT_TRUE(rep.pass);
  for (const auto& r : rep.large_t) EXPECT_TRUE(r.exact_zero);
}
