#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "jcqed/integrator.hpp"

using namespace jcqed;
using Vec2 = Eigen::Vector2d;

namespace {

// Harmonic oscillator y'' = -y, exact solution (cos t, -sin t).
auto oscillator = [](double, const Vec2& y, Vec2& dy) {
  dy(0) = y(1);
  dy(1) = -y(0);
};

}  // namespace

TEST(Dop853Test, HitsEveryOutputTimeWithinTolerance) {
  IntegratorOptions opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-12;
  auto solver = make_dop853<Vec2>(oscillator, opt);
  std::vector<double> times;
  for (int k = 0; k <= 20; ++k) times.push_back(0.5 * k);
  std::vector<double> seen;
  solver.integrate(0.0, Vec2(1.0, 0.0), times, [&](std::size_t k, double t, const Vec2& y) {
    EXPECT_EQ(t, times[k]);
    EXPECT_NEAR(y(0), std::cos(t), 1e-8);
    EXPECT_NEAR(y(1), -std::sin(t), 1e-8);
    seen.push_back(t);
  });
  EXPECT_EQ(seen.size(), times.size());
  EXPECT_GT(solver.statistics().accepted, 0u);
}

TEST(Dop853Test, EighthOrderConvergence) {
  // Exponential decay y' = -y; halving the fixed step should cut the error by about 2^8.
  auto decay = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = -y; };
  auto err = [&](std::size_t n) {
    auto s = make_dop853<Eigen::VectorXd>(decay, IntegratorOptions{});
    Eigen::VectorXd y0(1);
    y0(0) = 1.0;
    const auto y = s.integrate_fixed(0.0, y0, 4.0, n);
    return std::abs(y(0) - std::exp(-4.0));
  };
  const double e1 = err(4);
  const double e2 = err(8);
  const double order = std::log2(e1 / e2);
  EXPECT_GT(order, 7.0);
  EXPECT_LT(order, 9.5);
}

TEST(Dop853Test, RejectsBadTimeGrids) {
  auto solver = make_dop853<Vec2>(oscillator, IntegratorOptions{});
  const std::vector<double> decreasing{0.0, 1.0, 0.5};
  EXPECT_THROW(solver.integrate(0.0, Vec2(1.0, 0.0), decreasing, [](std::size_t, double, const Vec2&) {}), DomainError);
  const std::vector<double> early{-1.0, 1.0};
  EXPECT_THROW(solver.integrate(0.0, Vec2(1.0, 0.0), early, [](std::size_t, double, const Vec2&) {}), DomainError);
  IntegratorOptions bad;
  bad.rtol = 0.0;
  EXPECT_THROW(make_dop853<Vec2>(oscillator, bad), DomainError);
}

TEST(Dop853Test, StepBudgetExhaustionIsNumericalError) {
  IntegratorOptions opt;
  opt.max_steps = 3;
  opt.max_step = 1e-3;
  auto solver = make_dop853<Vec2>(oscillator, opt);
  const std::vector<double> times{0.0, 1.0};
  EXPECT_THROW(solver.integrate(0.0, Vec2(1.0, 0.0), times, [](std::size_t, double, const Vec2&) {}), NumericalError);
}

TEST(Dop853Test, StiffDecayStaysBounded) {
  // A stiff but stable problem must not blow up; the controller shrinks the step.
  auto stiff = [](double, const Vec2& y, Vec2& dy) {
    dy(0) = -1000.0 * y(0);
    dy(1) = -y(1);
  };
  auto solver = make_dop853<Vec2>(stiff, IntegratorOptions{});
  const std::vector<double> times{0.0, 5.0};
  Vec2 last;
  solver.integrate(0.0, Vec2(1.0, 1.0), times, [&](std::size_t, double, const Vec2& y) { last = y; });
  EXPECT_LT(std::abs(last(0)), 1e-8);
  EXPECT_NEAR(last(1), std::exp(-5.0), 1e-8);
}
