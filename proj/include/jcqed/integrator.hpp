#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <utility>

#include "jcqed/detail/dop853_tableau.hpp"
#include "jcqed/errors.hpp"

namespace jcqed {

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 0.0;  // 0 selects automatically
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 100'000'000;
};

struct StepStatistics {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
  double smallest_step = std::numeric_limits<double>::infinity();
  double largest_step = 0.0;
};

/// Adaptive explicit Runge-Kutta 8(5,3) integrator with a PI step-size controller.
///
/// Output times are hit exactly by shortening the step that would cross them, so no
/// interpolation error enters the samples. `Rhs` is `void(double t, const Vec& y, Vec& dydt)`.
template <class Vec, class Rhs>
class Dop853 {
 public:
  Dop853(Rhs rhs, IntegratorOptions options) : rhs_(std::move(rhs)), opt_(options) {
    if (!(opt_.rtol > 0.0) || !(opt_.atol > 0.0)) detail::fail_domain("integrator tolerances must be positive");
  }

  const StepStatistics& statistics() const { return stats_; }

  /// Integrate from (t0, y) and call `observer(k, times[k], y)` at every requested time.
  template <class Observer>
  Vec integrate(double t0, Vec y, std::span<const double> times, Observer&& observer) {
    for (std::size_t k = 1; k < times.size(); ++k) {
      if (!(times[k] > times[k - 1])) detail::fail_domain("output times must be strictly increasing");
    }
    if (!times.empty() && times.front() < t0) detail::fail_domain("output times precede the initial time");

    std::size_t k = 0;
    while (k < times.size() && times[k] == t0) observer(k++, t0, std::as_const(y));
    if (k == times.size()) return y;

    allocate(y);
    double t = t0;
    eval(t, y, stages_[0]);
    double h = opt_.initial_step > 0.0 ? opt_.initial_step : initial_step(t, y, stages_[0]);
    h = std::min(h, opt_.max_step);
    double err_prev = 1e-4;
    std::size_t steps = 0;

    while (k < times.size()) {
      const double target = times[k];
      const double remaining = target - t;
      const bool landing = h >= remaining;
      const double h_try = landing ? remaining : h;

      const double err = attempt(t, y, h_try);
      if (++steps > opt_.max_steps) underflow(t, h_try, "maximum number of steps exceeded");

      if (err <= 1.0) {
        const double fac = std::clamp(std::pow(err_prev, kBeta) / std::pow(std::max(err, 1e-300), kAlpha) * kSafety,
                                      kMinFactor, kMaxFactor);
        err_prev = std::max(err, 1e-4);
        t = landing ? target : t + h_try;
        y.swap(y_new_);
        stages_[0].swap(f_new_);
        ++stats_.accepted;
        stats_.smallest_step = std::min(stats_.smallest_step, h_try);
        stats_.largest_step = std::max(stats_.largest_step, h_try);
        const double proposed = std::min(h_try * fac, opt_.max_step);
        h = landing ? std::max(h, proposed) : proposed;
        h = std::min(h, opt_.max_step);
        if (landing) observer(k++, t, std::as_const(y));
      } else {
        ++stats_.rejected;
        const double fac = std::max(kMinFactor, kSafety / std::pow(err, kAlpha));
        h = h_try * fac;
      }
      if (h < kMinRelativeStep * std::max(1.0, std::abs(t))) underflow(t, h, "step size underflow");
    }
    return y;
  }

  /// Fixed-step integration without error control, used for convergence-order checks.
  Vec integrate_fixed(double t0, Vec y, double t_end, std::size_t n_steps) {
    allocate(y);
    const double h = (t_end - t0) / static_cast<double>(n_steps);
    double t = t0;
    eval(t, y, stages_[0]);
    for (std::size_t i = 0; i < n_steps; ++i) {
      attempt(t, y, h);
      y.swap(y_new_);
      stages_[0].swap(f_new_);
      t = t0 + static_cast<double>(i + 1) * h;
      ++stats_.accepted;
    }
    return y;
  }

 private:
  static constexpr double kSafety = 0.9;
  static constexpr double kBeta = 0.04;
  static constexpr double kAlpha = 1.0 / 8.0 - kBeta * 0.2;
  static constexpr double kMinFactor = 0.2;
  static constexpr double kMaxFactor = 6.0;
  static constexpr double kMinRelativeStep = 1e-13;

  void eval(double t, const Vec& y, Vec& out) {
    rhs_(t, y, out);
    ++stats_.rhs_evaluations;
  }

  void allocate(const Vec& y) {
    for (auto& s : stages_) s.resize(y.size());
    y_stage_.resize(y.size());
    y_new_.resize(y.size());
    f_new_.resize(y.size());
  }

  /// One trial step of size h from (t, y) with stages_[0] = f(t, y). Fills y_new_, f_new_
  /// and returns the scaled error norm.
  double attempt(double t, const Vec& y, double h) {
    namespace tab = detail::dop853;
    for (int s = 1; s < tab::kStages; ++s) {
      y_stage_ = y;
      for (int j = 0; j < s; ++j) {
        const double a = tab::a[s][j];
        if (a != 0.0) y_stage_ += (h * a) * stages_[j];
      }
      eval(t + tab::c[s] * h, y_stage_, stages_[s]);
    }
    y_new_ = y;
    for (int j = 0; j < tab::kStages; ++j) {
      if (tab::b[j] != 0.0) y_new_ += (h * tab::b[j]) * stages_[j];
    }
    eval(t + h, y_new_, f_new_);

    const auto n = static_cast<double>(y.size());
    double e5 = 0.0;
    double e3 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double scale = opt_.atol + opt_.rtol * std::max(std::abs(y[i]), std::abs(y_new_[i]));
      typename Vec::Scalar s5{};
      typename Vec::Scalar s3{};
      for (int j = 0; j < tab::kStages; ++j) {
        s5 += tab::e5[j] * stages_[j][i];
        s3 += tab::e3[j] * stages_[j][i];
      }
      e5 += std::norm(s5) / (scale * scale);
      e3 += std::norm(s3) / (scale * scale);
    }
    if (e5 == 0.0 && e3 == 0.0) return 0.0;
    return std::abs(h) * e5 / std::sqrt((e5 + 0.01 * e3) * n);
  }

  double initial_step(double t, const Vec& y, const Vec& f0) {
    auto rms = [&](const Vec& v) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double scale = opt_.atol + opt_.rtol * std::abs(y[i]);
        s += std::norm(v[i]) / (scale * scale);
      }
      return std::sqrt(s / static_cast<double>(v.size()));
    };
    const double d0 = rms(y);
    const double d1 = rms(f0);
    const double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    y_stage_ = y + h0 * f0;
    eval(t + h0, y_stage_, f_new_);
    f_new_ -= f0;
    const double d2 = rms(f_new_) / h0;
    const double h1 = (d1 <= 1e-15 && d2 <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                   : std::pow(0.01 / std::max(d1, d2), 1.0 / 8.0);
    return std::min(100.0 * h0, h1);
  }

  [[noreturn]] void underflow(double t, double h, const char* what) const {
    std::ostringstream os;
    os << "integrator " << what << ": step " << h << " at t = " << t << " (smallest accepted step "
       << stats_.smallest_step << ", " << stats_.accepted << " accepted, " << stats_.rejected << " rejected)";
    detail::fail_numerical(os.str());
  }

  Rhs rhs_;
  IntegratorOptions opt_;
  StepStatistics stats_;
  std::array<Vec, detail::dop853::kStages> stages_;
  Vec y_stage_;
  Vec y_new_;
  Vec f_new_;
};

template <class Vec, class Rhs>
Dop853<Vec, Rhs> make_dop853(Rhs rhs, IntegratorOptions options) {
  return Dop853<Vec, Rhs>(std::move(rhs), options);
}

}  // namespace jcqed
