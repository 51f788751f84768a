#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <vector>

#include "jcqed/correlations.hpp"
#include "support.hpp"

using namespace jcqed;

namespace {

ModelParams small_point(double phase = 0.5 * kPi) { return ModelParams::from_ratios(8.0, 0.5, 0.1, phase, 8); }

}  // namespace

TEST(Correlations, FirstOrderMatchesDenseRegression) {
  const ModelParams p = small_point();
  const SteadyContext ctx = prepare_steady(p);
  const auto taus = delay_grid(2.0, 0.05);
  const CorrelationTrace tr = first_order_correlation(ctx, taus, Channel::side);
  const Matrix G = Matrix(ctx.L.matrix);
  const Index d = p.hilbert_dim();
  const Matrix seed = ctx.rho().matrix() * Matrix(ctx.ops().sp);
  const Vector s = Eigen::Map<const Vector>(seed.data(), d * d);
  for (std::size_t k : {std::size_t{0}, std::size_t{7}, taus.size() - 1}) {
    const Vector x = (G * taus[k]).exp() * s;
    const Matrix X = Eigen::Map<const Matrix>(x.data(), d, d);
    const cplx want = (Matrix(ctx.ops().sm) * X).trace();
    EXPECT_LT(std::abs(tr.values[k] - want), 1e-9) << "tau = " << taus[k];
  }
  EXPECT_NEAR(tr.values[0].real(), tr.normalization, 1e-12);
}

TEST(Correlations, SideIntensityCorrelationIsAntibunched) {
  const SteadyContext ctx = prepare_steady(small_point());
  const auto taus = delay_grid(40.0, 0.05);
  const CorrelationTrace tr = intensity_correlation(ctx, Channel::side, taus);
  EXPECT_NEAR(tr.values.front().real(), 0.0, 1e-12);
  EXPECT_NEAR(tr.values.back().real(), 1.0, 1e-6);
  EXPECT_LT(tr.max_imag_residue, 1e-8);
}

TEST(Correlations, PhaseInvariance) {
  const SteadyContext a = prepare_steady(small_point(0.5 * kPi));
  const SteadyContext b = prepare_steady(small_point(kPi / 3.0));
  const auto taus = delay_grid(3.0, 0.05);
  const auto ga = intensity_correlation(a, Channel::side, taus);
  const auto gb = intensity_correlation(b, Channel::side, taus);
  const auto fa = first_order_correlation(a, taus, Channel::forward);
  const auto fb = first_order_correlation(b, taus, Channel::forward);
  for (std::size_t k = 0; k < taus.size(); ++k) {
    EXPECT_NEAR(ga.values[k].real(), gb.values[k].real(), 1e-7);
    EXPECT_LT(std::abs(fa.values[k] - fb.values[k]), 1e-9);
  }
}

TEST(WaitingTimes, MomentsMatchResolvent) {
  const ModelParams p = small_point();
  const SteadyContext ctx = prepare_steady(p);
  const auto taus = delay_grid(default_wtd_horizon(p), default_delay_spacing(p) / 2.0);
  const CorrelationTrace w = waiting_time_distribution(ctx, taus, Channel::side);

  // Oracle: int w = gamma tr[sp sm (-L0)^{-1} seed] / <sp sm>, and the first moment with (-L0)^{-2}.
  const auto o = oracle::dense_ops(p.n_max);
  const Index d = p.hilbert_dim();
  Matrix L0(d * d, d * d);
  for (Index c = 0; c < d * d; ++c) {
    Matrix e = Matrix::Zero(d, d);
    e(c % d, c / d) = 1.0;
    Matrix col = oracle::lindblad_rhs(o, p.g, p.kappa, p.gamma, p.drive, e);
    col -= p.gamma * o.sm * e * o.sm.adjoint();
    L0.col(c) = Eigen::Map<const Vector>(col.data(), d * d);
  }
  const Matrix rho = ctx.rho().matrix();
  const Matrix seed = o.sm * rho * o.sm.adjoint();
  const Vector s = Eigen::Map<const Vector>(seed.data(), d * d);
  Eigen::PartialPivLU<Matrix> lu(-L0);
  const Vector r1 = lu.solve(s);
  const Vector r2 = lu.solve(r1);
  const Matrix num = o.sm.adjoint() * o.sm;
  const double norm = (rho * num).trace().real();
  auto tr_num = [&](const Vector& v) { return (num * Eigen::Map<const Matrix>(v.data(), d, d)).trace().real(); };
  const double integral = p.gamma * tr_num(r1) / norm;
  const double mean = p.gamma * tr_num(r2) / norm / integral;
  EXPECT_NEAR(integral, 1.0, 1e-8);
  EXPECT_NEAR(w.integral, integral, 1e-4);
  EXPECT_NEAR(w.mean / mean, 1.0, 1e-3);
  EXPECT_NEAR(w.values.front().real(), 0.0, 1e-12);
}

TEST(WaitingTimes, SideChannelNeedsAtomicDecay) {
  const auto p = ModelParams::from_ratios(2.0, 0.0, 0.1, 0.0, 3);
  const auto taus = delay_grid(1.0, 0.1);
  EXPECT_THROW(waiting_time_distribution(p, taus, Channel::side), DomainError);
}

TEST(Transforms, HalfFourierOfExponential) {
  std::vector<double> taus;
  std::vector<cplx> f;
  for (int k = 0; k <= 4000; ++k) {
    taus.push_back(k * 0.005);
    f.push_back(std::exp(-taus.back()));
  }
  const std::vector<double> omegas{-3.0, 0.0, 2.0};
  const auto ft = half_fourier_transform(taus, f, omegas);
  const double T = taus.back();
  for (std::size_t j = 0; j < omegas.size(); ++j) {
    const cplx z{-1.0, omegas[j]};
    const cplx want = (std::exp(z * T) - 1.0) / z;
    EXPECT_LT(std::abs(ft[j] - want), 1e-5);
  }
}

TEST(Transforms, ExponentialTailRecoversRateAndMass) {
  std::vector<double> taus, w;
  for (int k = 0; k <= 1000; ++k) {
    taus.push_back(0.01 * k);
    w.push_back(0.5 * std::exp(-0.5 * taus.back()));
  }
  const TailEstimate t = exponential_tail(taus, w);
  EXPECT_TRUE(t.converged);
  EXPECT_NEAR(t.rate, 0.5, 1e-10);
  EXPECT_NEAR(t.mass, std::exp(-5.0), 1e-10);
}

TEST(Transforms, DoubletFitRecoversParameters) {
  std::vector<double> w, y;
  for (int k = -400; k <= 400; ++k) {
    w.push_back(0.25 * k);
    y.push_back(squared_lorentzian_doublet(w.back(), 3e-6, 1.3, 40.0));
  }
  const DoubletFit fit = fit_squared_lorentzian_doublet(w, y);
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.gamma, 1.3, 1e-6);
  EXPECT_NEAR(fit.center, 40.0, 1e-6);
  EXPECT_NEAR(fit.amplitude / 3e-6, 1.0, 1e-6);
}

TEST(Spectrum, WeightSumRule) {
  const ModelParams p = small_point();
  const SteadyContext ctx = prepare_steady(p);
  const auto taus = delay_grid(30.0 / (p.kappa + 0.5 * p.gamma), default_delay_spacing(p) / 2.0);
  const CorrelationTrace tr = first_order_correlation(ctx, taus, Channel::side);
  std::vector<double> omegas;
  for (int k = -1600; k <= 1600; ++k) omegas.push_back(0.01 * k);
  const SpectrumResult sp = optical_spectrum(tr, omegas);
  EXPECT_NEAR(sp.total / sp.reference_total, 1.0, 1e-2);
  EXPECT_NEAR(sp.coherent_weight, tr.coherent_plateau, 0.0);
}

TEST(Spectrum, RefusesUndecayedCorrelation) {
  const ModelParams p = small_point();
  const SteadyContext ctx = prepare_steady(p);
  const auto taus = delay_grid(1.0, 0.05);
  const CorrelationTrace tr = first_order_correlation(ctx, taus, Channel::side);
  try {
    optical_spectrum(tr);
    FAIL() << "expected a numerical error";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("extend the horizon"), std::string::npos);
  }
}

TEST(Grids, DelayGridProperties) {
  const auto g = delay_grid(1.0, 0.3);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_DOUBLE_EQ(g.back(), 1.0);
  EXPECT_THROW(delay_grid(-1.0, 0.1), DomainError);
  const auto p = ModelParams::from_ratios(100.0, 1.0, 0.05, 0.0, 3);
  EXPECT_NEAR(default_delay_spacing(p), 2.0 * kPi / 2000.0, 1e-15);
  EXPECT_NEAR(default_delay_horizon(p), 10.0, 1e-15);
  const auto w = default_omega_grid(p);
  EXPECT_NEAR(w[1] - w[0], 0.25, 1e-12);
  EXPECT_NEAR(w.back(), 150.0, 0.25);
  const std::vector<double> bad{0.1, 0.2};
  const SteadyContext ctx = prepare_steady(ModelParams::from_ratios(2.0, 1.0, 0.1, 0.0, 3));
  EXPECT_THROW(first_order_correlation(ctx, bad, Channel::side), DomainError);
}

TEST(Adaptive, GrowsTruncationUntilCheckPasses) {
  const auto p = ModelParams::from_ratios(2.0, 1.0, 1.0, 0.0, 4);
  const AdaptiveSteady a = prepare_steady_adaptive(p, 4, 6, 40);
  EXPECT_TRUE(a.converged);
  EXPECT_GT(a.history.size(), 1u);
  EXPECT_LT(a.history.back().second, 1e-6);
  EXPECT_EQ(a.ctx.params().n_max, a.history.back().first);
}
