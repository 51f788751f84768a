#include <gtest/gtest.h>

#include <cmath>

#include "jcqed/dressed.hpp"

using namespace jcqed;

namespace {

ModelParams fig2(double drive = 0.05, double phase = 0.5 * kPi) {
  return ModelParams::from_ratios(100.0, 1.0, drive, phase, 30);
}

// Composite trapezoid on [a, b].
template <class F>
double integrate(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = 0.5 * (f(a) + f(b));
  for (int k = 1; k < n; ++k) s += f(a + k * h);
  return s * h;
}

}  // namespace

TEST(Squeezing, DegreeFromDrive) {
  const auto sq = squeezing_parameters(fig2());
  EXPECT_NEAR(sq.r, -0.25 * std::log(0.99), 1e-15);
  EXPECT_NEAR(sq.r, 0.0025126, 1e-7);
  EXPECT_NEAR(sq.r_approx, 0.0025, 1e-15);
  EXPECT_NEAR(std::exp(-2.0 * sq.r), std::sqrt(1.0 - 4.0 * 0.05 * 0.05), 1e-15);
}

TEST(Squeezing, CriticalDriveIsDomainError) {
  EXPECT_THROW(squeezing_parameters(fig2(0.5)), DomainError);
  EXPECT_THROW(squeezing_parameters(fig2(0.6)), DomainError);
  EXPECT_NO_THROW(squeezing_parameters(fig2(0.4999)));
}

TEST(DressedStates, QuasienergiesAreAntisymmetric) {
  const auto p = fig2(0.2);
  const double r = squeezing_parameters(p).r;
  for (int n = 1; n <= 5; ++n) {
    const auto u = dressed_state(n, Branch::U, p);
    const auto l = dressed_state(n, Branch::L, p);
    EXPECT_DOUBLE_EQ(u.quasienergy, -l.quasienergy);
    EXPECT_NEAR(u.quasienergy, std::exp(-3.0 * r) * std::sqrt(double(n)), 1e-14);
  }
  EXPECT_EQ(dressed_state(0, Branch::G, p).quasienergy, 0.0);
  EXPECT_THROW(dressed_state(1, Branch::G, p), DomainError);
  EXPECT_THROW(dressed_state(0, Branch::U, p), DomainError);
}

TEST(DressedStates, AtomicSpinorsAreNormalized) {
  const auto s = dressed_state(2, Branch::U, fig2(0.3, 0.4));
  EXPECT_NEAR(std::norm(s.o12_lower) + std::norm(s.o12_upper), 1.0, 1e-14);
  EXPECT_NEAR(std::norm(s.o21_lower) + std::norm(s.o21_upper), 1.0, 1e-14);
  // At zero drive they reduce to the bare atomic states.
  const auto bare = dressed_state(1, Branch::L, fig2(0.0));
  EXPECT_NEAR(std::abs(bare.o12_lower), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(bare.o21_upper), 1.0, 1e-15);
}

TEST(DressedStates, WeakDriveExpansionVector) {
  const auto g = dressed_state(0, Branch::G, fig2());
  const Vector v = expansion_vector(g.weak_drive_expansion, 4);
  EXPECT_EQ(v.size(), 10);
  EXPECT_NEAR(v.norm(), 1.0, 2e-3);
  EXPECT_THROW(expansion_vector(g.weak_drive_expansion, 1), DomainError);
}

TEST(WeakDrive, SpectrumSumRuleAndScaling) {
  const auto p = fig2();
  const double x4 = std::pow(0.05, 4);
  const double total = integrate([&](double w) { return spectrum_weak_drive(p, w).incoherent; }, -3000.0, 3000.0, 600000);
  EXPECT_NEAR(total / (2.0 * x4), 1.0, 1e-3);
  EXPECT_NEAR(spectrum_weak_drive(p, 0.0).coherent_weight, 0.0025, 1e-15);
  const auto q = fig2(0.1);
  for (double w : {-120.0, -100.0, 0.0, 100.0}) {
    EXPECT_NEAR(spectrum_weak_drive(q, w).incoherent / spectrum_weak_drive(p, w).incoherent, 16.0, 1e-10);
  }
  EXPECT_NEAR(spectrum_weak_drive(q, 0.0).coherent_weight / spectrum_weak_drive(p, 0.0).coherent_weight, 4.0, 1e-12);
}

TEST(WeakDrive, SquaredLorentzianWidth) {
  EXPECT_NEAR(squared_lorentzian_fwhm(1.0), 1.2872, 1e-4);
  // Half maximum of G^3 / (G^2 + d^2)^2 is reached at d = G sqrt(sqrt 2 - 1).
  const double d = 0.5 * squared_lorentzian_fwhm(1.0);
  EXPECT_NEAR(1.0 / std::pow(1.0 + d * d, 2), 0.5, 1e-12);
}

TEST(WeakDrive, G1AndG2Forms) {
  const auto p = fig2();
  EXPECT_NEAR(g1_weak_drive(p, 0.0).real(), 0.0025 + 2.0 * std::pow(0.05, 4), 1e-15);
  EXPECT_NEAR(g1_weak_drive(p, 50.0).real(), 0.0025, 1e-15);
  EXPECT_NEAR(g2_weak_drive(p, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(g2_weak_drive(p, 60.0), 1.0, 1e-12);
  // Independent of the drive strength.
  EXPECT_EQ(g2_weak_drive(p, 0.37), g2_weak_drive(fig2(0.2), 0.37));
  EXPECT_THROW(g2_weak_drive(p, -1.0), DomainError);
}

TEST(PureState, ZeroDelayAndNormalizations) {
  const auto p = fig2();
  EXPECT_NEAR(g2_pure_state(p, 0.0).value, 0.0, 1e-15);
  const auto q = pure_state_g2_params(p);
  EXPECT_NEAR(q.C1, 5000.0, 1e-9);
  EXPECT_NEAR(q.gamma_prime, 2.0 * (1.0 + 1e4), 1e-9);
  // The literal normalization blows up the sine coefficient at strong coupling.
  double worst = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double t = k * 1e-3;
    worst = std::max(worst, std::abs(g2_pure_state(p, t, PureStateForm::literal).value -
                                     g2_pure_state(p, t).value));
  }
  EXPECT_GT(worst, 100.0);
  // Overdamped branch stays finite and starts at zero.
  const auto od = ModelParams::from_ratios(0.1, 5.0, 0.05, 0.0, 3);
  EXPECT_TRUE(g2_pure_state(od, 1.0).overdamped);
  EXPECT_NEAR(g2_pure_state(od, 0.0).value, 0.0, 1e-15);
}

TEST(Forward, ZeroDelayEstimate) {
  EXPECT_NEAR(g2_forward_zero_delay(fig2()), 4e4, 1e-6);
  EXPECT_NEAR(g2_forward_zero_delay(fig2(0.1)), 2500.0, 1e-9);
}

TEST(EffectiveRatesTest, WeakDrivePhotonNumber) {
  const auto r = effective_rates(fig2());
  EXPECT_NEAR(r.photon_number, 2.0 * std::pow(0.05, 4), 1e-18);
  EXPECT_TRUE(r.weak_regime);
  EXPECT_FALSE(effective_rates(fig2(0.3)).weak_regime);
  EXPECT_NEAR(squeezing_variance(fig2(), 0.5 * kPi + 0.5 * kPi), -0.5 * 0.0025, 1e-15);
}

TEST(ResonanceFluorescence, ReferenceIsNormalizedWithKnownMean) {
  for (double Y : {0.07, 0.3, 1.0}) {
    const double gamma = 2.0;
    const auto ref = resonance_fluorescence_from_y(Y, gamma);
    const double horizon = 60.0 * (1.0 + 1.0 / (Y * Y)) / gamma;
    const int n = 400000;
    const double mass = integrate([&](double t) { return wtd_resonance_fluorescence(ref, gamma, t).value; }, 0.0, horizon, n);
    const double moment = integrate([&](double t) { return t * wtd_resonance_fluorescence(ref, gamma, t).value; }, 0.0, horizon, n);
    EXPECT_NEAR(mass, 1.0, 1e-6) << "Y = " << Y;
    EXPECT_NEAR(moment / ref.tau_av, 1.0, 1e-5) << "Y = " << Y;
    EXPECT_NEAR(ref.tau_av, 2.0 * (1.0 + Y * Y) / (gamma * Y * Y), 1e-12);
  }
  const auto ref = resonance_fluorescence_from_y(0.07, 2.0);
  EXPECT_GE(wtd_resonance_fluorescence(ref, 2.0, 3.0).value, 0.0);
  EXPECT_EQ(wtd_resonance_fluorescence(ref, 2.0, 3.0).sign_applied, -1);
  EXPECT_TRUE(wtd_resonance_fluorescence(resonance_fluorescence_from_y(1.0, 2.0), 2.0, 1.0).continued);
}

TEST(Neoclassical, CurveShapeAndSymmetry) {
  const auto p = ModelParams::from_ratios(50.0 / 3.0, 1.0, 0.6, 0.5 * kPi, 10);
  const auto c = neoclassical_curve(p, 101);
  ASSERT_FALSE(c.empty);
  EXPECT_NEAR(c.upper.front().first, 0.0, 1e-12);
  EXPECT_NEAR(c.upper.front().second, 0.0, 1e-12);
  const double e = p.drive_abs();
  const double q = 1.0 - std::pow(p.g / (2.0 * e), 2);
  EXPECT_NEAR(c.upper.back().first, e * q, 1e-10);
  EXPECT_NEAR(c.upper.back().second, 0.5 * p.g * std::sqrt(q), 1e-10);
  for (std::size_t k = 0; k < c.upper.size(); ++k) {
    EXPECT_NEAR(c.upper[k].first, c.lower[k].first, 1e-12);
    EXPECT_NEAR(c.upper[k].second, -c.lower[k].second, 1e-12);
  }
  const auto below = neoclassical_curve(fig2(0.3));
  EXPECT_TRUE(below.empty);
  ASSERT_EQ(below.polygon().size(), 2u);
  EXPECT_EQ(below.polygon()[0], std::make_pair(0.0, 0.0));
}

TEST(Neoclassical, MaxwellBlochAmplitude) {
  const auto p = ModelParams::from_ratios(10.0 / 0.45, 1.0, 0.45, 0.5 * kPi, 10);
  EXPECT_NEAR(maxwell_bloch_amplitude(p), 10.0, 1e-12);
}
