#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jcqed/dynamics.hpp"
#include "jcqed/errors.hpp"
#include "jcqed/liouvillian.hpp"
#include "jcqed/operators.hpp"

namespace jcqed {

/// Full generator plus its steady state, shared by every correlation of one parameter point.
struct SteadyContext {
  Superoperator L;
  SteadyStateResult steady;

  const ModelParams& params() const { return L.params; }
  const OperatorSet& ops() const { return L.ops; }
  const DensityMatrix& rho() const { return steady.rho; }
};

inline SteadyContext prepare_steady(const ModelParams& params, const SteadyStateOptions& options = {}) {
  SteadyContext ctx;
  ctx.L = build_liouvillian(params);
  ctx.steady = solve_steady_state(ctx.L, options);
  return ctx;
}

/// Truncation history of an adaptive solve: (n_max, top-two Fock population) per attempt.
struct AdaptiveSteady {
  SteadyContext ctx;
  std::vector<std::pair<int, double>> history;
  bool converged = false;
};

/// Raise n_max from `n_start` in steps of `n_step` until the truncation check passes or
/// `n_limit` is reached; the last attempt is returned either way.
inline AdaptiveSteady prepare_steady_adaptive(ModelParams params, int n_start, int n_step, int n_limit,
                                              const SteadyStateOptions& options = {}) {
  if (n_start < 1 || n_step < 1 || n_limit < n_start) detail::fail_domain("adaptive truncation: invalid n range");
  AdaptiveSteady out;
  for (int n = n_start;; n = std::min(n + n_step, n_limit)) {
    params.n_max = n;
    out.ctx = prepare_steady(params, options);
    out.history.emplace_back(n, out.ctx.steady.top_fock_population);
    out.converged = !out.ctx.steady.truncation_suspect;
    if (out.converged || n == n_limit) break;
  }
  return out;
}

struct CorrelationTrace {
  std::string quantity;
  Channel channel = Channel::side;
  std::vector<double> taus;
  std::vector<cplx> values;
  /// <sp sm>_ss (side) or <a^dag a>_ss (forward).
  double normalization = 0.0;
  /// |<sm>_ss|^2 or |<a>_ss|^2, the tau -> infinity limit of g1.
  double coherent_plateau = 0.0;
  std::string frame_note;
  bool extension = false;
  double max_imag_residue = 0.0;
  ModelParams params;
  StepStatistics stats;
  std::vector<std::string> warnings;

  // Waiting-time extras.
  double integral = std::numeric_limits<double>::quiet_NaN();
  double mean = std::numeric_limits<double>::quiet_NaN();
  double tail_mass = std::numeric_limits<double>::quiet_NaN();
  double tail_rate = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> real() const {
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [](cplx v) { return v.real(); });
    return out;
  }
};

/// Delay spacing resolving vacuum Rabi oscillations: one twentieth of 2 pi / g.
inline double default_delay_spacing(const ModelParams& p) { return 2.0 * kPi / (20.0 * p.g); }

/// Default delay horizon, 20 / (kappa + gamma/2).
inline double default_delay_horizon(const ModelParams& p) { return 20.0 / (p.kappa + 0.5 * p.gamma); }

/// Uniform grid on [0, horizon] with spacing no larger than `max_spacing`.
inline std::vector<double> delay_grid(double horizon, double max_spacing) {
  if (!(horizon > 0.0) || !(max_spacing > 0.0) || !std::isfinite(horizon)) {
    detail::fail_domain("delay grid needs positive horizon and spacing");
  }
  const auto n = static_cast<std::size_t>(std::ceil(horizon / max_spacing - 1e-9));
  std::vector<double> taus(n + 1);
  for (std::size_t k = 0; k <= n; ++k) taus[k] = horizon * static_cast<double>(k) / static_cast<double>(n);
  return taus;
}

inline std::vector<double> delay_grid(const ModelParams& p) {
  return delay_grid(default_delay_horizon(p), default_delay_spacing(p));
}

namespace detail {

inline void check_delay_grid(std::span<const double> taus) {
  if (taus.empty() || taus.front() != 0.0) fail_domain("delay grid must start at tau = 0");
  for (std::size_t k = 1; k < taus.size(); ++k) {
    if (!(taus[k] > taus[k - 1])) fail_domain("delay grid must be strictly increasing");
  }
}

inline const SparseMatrix& channel_operator(const OperatorSet& ops, Channel c) { return c == Channel::side ? ops.sm : ops.a; }
inline const SparseMatrix& channel_adjoint(const OperatorSet& ops, Channel c) { return c == Channel::side ? ops.sp : ops.a_dag; }
inline const SparseMatrix& channel_number(const OperatorSet& ops, Channel c) { return c == Channel::side ? ops.sp_sm : ops.n_phot; }

/// Propagate `seed` under L and record tr(op X(tau)). The seed is rescaled to unit max entry
/// so that the absolute tolerance acts relative to its size.
inline std::vector<cplx> regress(const Superoperator& L, const Matrix& seed, const SparseMatrix& op,
                                 std::span<const double> taus, const IntegratorOptions& opt, StepStatistics& stats) {
  const double scale = seed.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return std::vector<cplx>(taus.size(), cplx{0.0, 0.0});
  std::vector<cplx> out(taus.size());
  stats = propagate(L, seed / scale, taus, opt, [&](std::size_t k, double, const Eigen::Map<const Matrix>& x) {
    out[k] = scale * expectation(op, x);
  });
  return out;
}

}  // namespace detail

/// Rotating-frame envelope <sp(0) sm(tau)>_ss (side) or <a^dag(0) a(tau)>_ss (forward).
inline CorrelationTrace first_order_correlation(const SteadyContext& ctx, std::span<const double> taus, Channel channel,
                                                const IntegratorOptions& opt = {}) {
  detail::check_delay_grid(taus);
  const OperatorSet& ops = ctx.ops();
  const SparseMatrix& c = detail::channel_operator(ops, channel);
  const SparseMatrix& cd = detail::channel_adjoint(ops, channel);
  const Matrix& rho = ctx.rho().matrix();

  CorrelationTrace tr;
  tr.quantity = "g1";
  tr.channel = channel;
  tr.params = ctx.params();
  tr.taus.assign(taus.begin(), taus.end());
  tr.normalization = expectation(detail::channel_number(ops, channel), rho).real();
  tr.coherent_plateau = std::norm(expectation(c, rho));
  tr.frame_note = "rotating-frame envelope; full-frame value is exp(-i omega0 tau) times this";
  const Matrix seed = rho * Matrix(cd);
  tr.values = detail::regress(ctx.L, seed, c, taus, opt, tr.stats);
  return tr;
}

inline CorrelationTrace first_order_correlation(const ModelParams& params, std::span<const double> taus,
                                                Channel channel, const IntegratorOptions& opt = {}) {
  return first_order_correlation(prepare_steady(params), taus, channel, opt);
}

/// Normalized intensity correlation tr[c^dag c e^{L tau} rho_cond] / <c^dag c>_ss.
inline CorrelationTrace intensity_correlation(const SteadyContext& ctx, Channel channel, std::span<const double> taus,
                                              const IntegratorOptions& opt = {}) {
  detail::check_delay_grid(taus);
  const OperatorSet& ops = ctx.ops();
  const SparseMatrix& c = detail::channel_operator(ops, channel);
  const SparseMatrix& cd = detail::channel_adjoint(ops, channel);
  const SparseMatrix& num = detail::channel_number(ops, channel);
  const Matrix& rho = ctx.rho().matrix();

  CorrelationTrace tr;
  tr.quantity = "g2";
  tr.channel = channel;
  tr.params = ctx.params();
  tr.taus.assign(taus.begin(), taus.end());
  tr.normalization = expectation(num, rho).real();
  tr.coherent_plateau = std::norm(expectation(c, rho));
  tr.frame_note = "phase-insensitive; identical in every frame";
  if (!(tr.normalization > 1e-300)) {
    detail::fail_numerical(std::string("intensity correlation: vanishing ") + to_string(channel) + " population");
  }
  Matrix cond = Matrix(c) * rho * Matrix(cd);
  const double ctr = cond.trace().real();
  if (!(ctr > 0.0)) detail::fail_numerical("intensity correlation: conditional state has zero trace");
  cond /= ctr;
  tr.values = detail::regress(ctx.L, cond, num, taus, opt, tr.stats);
  for (auto& v : tr.values) {
    v /= tr.normalization;
    const double residue = std::abs(v.imag());
    tr.max_imag_residue = std::max(tr.max_imag_residue, residue / std::max(1.0, std::abs(v)));
    if (v.real() < -1e-8) tr.warnings.push_back("g2 sample below -1e-8");
  }
  if (tr.max_imag_residue > 1e-8) tr.warnings.push_back("g2 imaginary residue " + std::to_string(tr.max_imag_residue));
  return tr;
}

inline CorrelationTrace intensity_correlation(const ModelParams& params, Channel channel, std::span<const double> taus,
                                              const IntegratorOptions& opt = {}) {
  return intensity_correlation(prepare_steady(params), channel, taus, opt);
}

/// Default horizon for waiting times: long enough for the Rabi transients and the fast
/// decay to die out so that the tail is a single exponential.
inline double default_wtd_horizon(const ModelParams& p) {
  return std::max(default_delay_horizon(p), p.gamma > 0.0 ? 40.0 / p.gamma : 0.0);
}

struct TailEstimate {
  double rate = std::numeric_limits<double>::quiet_NaN();
  double mass = std::numeric_limits<double>::quiet_NaN();
  double first_moment = std::numeric_limits<double>::quiet_NaN();
  /// Relative difference between the rates fitted on the last and the previous tenth.
  double rate_spread = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
};

namespace detail {

/// Least-squares decay rate of log w over samples [begin, end); NaN if w is not positive there.
inline double log_linear_rate(std::span<const double> taus, std::span<const double> w, std::size_t begin,
                              std::size_t end) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = begin; k < end; ++k) {
    if (!(w[k] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double y = std::log(w[k]);
    sx += taus[k];
    sy += y;
    sxx += taus[k] * taus[k];
    sxy += taus[k] * y;
  }
  const auto m = static_cast<double>(end - begin);
  return -(m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace detail

/// Exponential fit to the last 10% of the samples, integrated analytically beyond the grid.
inline TailEstimate exponential_tail(std::span<const double> taus, std::span<const double> w) {
  TailEstimate out;
  const std::size_t n = taus.size();
  if (n < 8) return out;
  const std::size_t len = std::max<std::size_t>(3, n / 10);
  const double lambda = detail::log_linear_rate(taus, w, n - len, n);
  if (!(lambda > 0.0)) return out;
  const double previous = detail::log_linear_rate(taus, w, n - 2 * len, n - len);
  const double T = taus[n - 1];
  out.rate = lambda;
  out.mass = w[n - 1] / lambda;
  out.first_moment = w[n - 1] * (T / lambda + 1.0 / (lambda * lambda));
  out.rate_spread = std::abs(previous - lambda) / lambda;
  out.converged = out.rate_spread < 1e-2;
  return out;
}

/// Waiting-time distribution between successive emissions into `channel`.
inline CorrelationTrace waiting_time_distribution(const SteadyContext& ctx, std::span<const double> taus,
                                                  Channel channel = Channel::side, const IntegratorOptions& opt = {}) {
  detail::check_delay_grid(taus);
  const Superoperator cond = build_wtd_generator(ctx.L, channel);
  const OperatorSet& ops = ctx.ops();
  const SparseMatrix& c = detail::channel_operator(ops, channel);
  const SparseMatrix& cd = detail::channel_adjoint(ops, channel);
  const SparseMatrix& num = detail::channel_number(ops, channel);
  const Matrix& rho = ctx.rho().matrix();
  const double rate = channel == Channel::side ? ctx.params().gamma : 2.0 * ctx.params().kappa;

  CorrelationTrace tr;
  tr.quantity = "wtd";
  tr.channel = channel;
  tr.extension = cond.extension;
  tr.params = ctx.params();
  tr.taus.assign(taus.begin(), taus.end());
  tr.normalization = expectation(num, rho).real();
  tr.frame_note = "phase-insensitive; unit detection efficiency";
  if (!(tr.normalization > 1e-300)) detail::fail_numerical("waiting times: vanishing channel population");
  const Matrix seed = Matrix(c) * rho * Matrix(cd);
  tr.values = detail::regress(cond, seed, num, taus, opt, tr.stats);
  for (auto& v : tr.values) {
    v *= rate / tr.normalization;
    tr.max_imag_residue = std::max(tr.max_imag_residue, std::abs(v.imag()));
  }

  const std::vector<double> w = tr.real();
  double integral = 0.0;
  double moment = 0.0;
  for (std::size_t k = 1; k < taus.size(); ++k) {
    const double h = taus[k] - taus[k - 1];
    integral += 0.5 * h * (w[k] + w[k - 1]);
    moment += 0.5 * h * (taus[k] * w[k] + taus[k - 1] * w[k - 1]);
  }
  const TailEstimate tail = exponential_tail(taus, w);
  if (std::isfinite(tail.rate)) {
    tr.tail_rate = tail.rate;
    tr.tail_mass = tail.mass;
    tr.integral = integral + tail.mass;
    tr.mean = (moment + tail.first_moment) / tr.integral;
    if (!tail.converged) {
      tr.warnings.push_back("waiting-time tail not yet exponential (rate spread " + std::to_string(tail.rate_spread) +
                            "); estimated tail mass " + std::to_string(tail.mass));
    }
  } else {
    tr.integral = integral;
    tr.mean = moment / integral;
    tr.warnings.push_back("waiting-time tail not converged; mass beyond grid unknown, mean excludes it");
  }
  for (double v : w) {
    if (v < -1e-10) {
      tr.warnings.push_back("waiting-time sample below -1e-10");
      break;
    }
  }
  return tr;
}

inline CorrelationTrace waiting_time_distribution(const ModelParams& params, std::span<const double> taus,
                                                  Channel channel = Channel::side, const IntegratorOptions& opt = {}) {
  if (channel == Channel::side && !(params.gamma > 0.0)) detail::fail_domain("waiting times require gamma > 0");
  return waiting_time_distribution(prepare_steady(params), taus, channel, opt);
}

/// Trapezoidal half-Fourier transform  int_0^T f(tau) e^{i omega tau} d tau  on the sampled grid.
inline std::vector<cplx> half_fourier_transform(std::span<const double> taus, std::span<const cplx> f,
                                                std::span<const double> omegas) {
  std::vector<cplx> out(omegas.size());
  const std::size_t n = taus.size();
  for (std::size_t j = 0; j < omegas.size(); ++j) {
    cplx acc{0.0, 0.0};
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double h = taus[k + 1] - taus[k];
      acc += 0.5 * h * (f[k] * std::polar(1.0, omegas[j] * taus[k]) + f[k + 1] * std::polar(1.0, omegas[j] * taus[k + 1]));
    }
    out[j] = acc;
  }
  return out;
}

/// Indices of strict interior local maxima of a sampled curve.
inline std::vector<std::size_t> local_maxima(std::span<const double> y) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 1; k + 1 < y.size(); ++k) {
    if (y[k] > y[k - 1] && y[k] >= y[k + 1]) idx.push_back(k);
  }
  return idx;
}

/// Symmetric squared-Lorentzian doublet A * Gamma^3 [1/(Gamma^2+(w-c)^2)^2 + 1/(Gamma^2+(w+c)^2)^2].
struct DoubletFit {
  double amplitude = 0.0;
  double gamma = 0.0;
  double center = 0.0;
  double rms_residual = 0.0;
  bool converged = false;
};

inline double squared_lorentzian_doublet(double w, double amplitude, double gamma, double center) {
  const double g2 = gamma * gamma;
  const double l1 = g2 + (w - center) * (w - center);
  const double l2 = g2 + (w + center) * (w + center);
  return amplitude * gamma * g2 * (1.0 / (l1 * l1) + 1.0 / (l2 * l2));
}

namespace detail {

struct DoubletFunctor : Eigen::DenseFunctor<double> {
  std::span<const double> w;
  std::span<const double> s;
  double weight;
  DoubletFunctor(std::span<const double> w_, std::span<const double> s_, double weight_)
      : Eigen::DenseFunctor<double>(3, static_cast<int>(w_.size())), w(w_), s(s_), weight(weight_) {}
  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
    for (std::size_t k = 0; k < w.size(); ++k) {
      f(static_cast<Index>(k)) = (squared_lorentzian_doublet(w[k], p(0), p(1), p(2)) - s[k]) / weight;
    }
    return 0;
  }
};

}  // namespace detail

inline DoubletFit fit_squared_lorentzian_doublet(std::span<const double> omegas, std::span<const double> density) {
  DoubletFit fit;
  if (omegas.size() < 6) return fit;
  std::size_t imax = 0;
  for (std::size_t k = 0; k < density.size(); ++k) {
    if (density[k] > density[imax]) imax = k;
  }
  const double peak = density[imax];
  if (!(peak > 0.0)) return fit;
  std::size_t lo = imax;
  std::size_t hi = imax;
  while (lo > 0 && density[lo] > 0.5 * peak) --lo;
  while (hi + 1 < density.size() && density[hi] > 0.5 * peak) ++hi;
  const double fwhm = std::max(omegas[hi] - omegas[lo], omegas[1] - omegas[0]);
  const double gamma0 = fwhm / (2.0 * std::sqrt(std::sqrt(2.0) - 1.0));
  Eigen::VectorXd p(3);
  p << peak * gamma0, gamma0, std::abs(omegas[imax]);

  detail::DoubletFunctor functor(omegas, density, peak);
  Eigen::NumericalDiff<detail::DoubletFunctor> numdiff(functor);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<detail::DoubletFunctor>> lm(numdiff);
  const auto status = lm.minimize(p);
  Eigen::VectorXd f(static_cast<Index>(omegas.size()));
  functor(p, f);
  fit.amplitude = p(0);
  fit.gamma = std::abs(p(1));
  fit.center = std::abs(p(2));
  fit.rms_residual = peak * std::sqrt(f.squaredNorm() / static_cast<double>(f.size()));
  fit.converged = status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
                  status != Eigen::LevenbergMarquardtSpace::UserAsked;
  return fit;
}

struct SpectrumResult {
  std::vector<double> omegas;
  std::vector<double> incoherent_density;
  double coherent_weight = 0.0;
  /// coherent_weight + integral of the incoherent density over the grid.
  double total = 0.0;
  /// g1 at tau = 0, which `total` must reproduce.
  double reference_total = 0.0;
  std::vector<double> peak_positions;
  DoubletFit fit;
  std::vector<std::string> warnings;
};

/// Frequency grid centred on the reference frequency: spacing Gamma/4 over +-1.5 g.
inline std::vector<double> default_omega_grid(const ModelParams& p) {
  const double step = 0.25 * p.doublet_halfwidth();
  const double range = 1.5 * p.g;
  const auto n = static_cast<long>(std::ceil(range / step));
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(2 * n + 1));
  for (long k = -n; k <= n; ++k) w.push_back(static_cast<double>(k) * step);
  return w;
}

/// Spectrum of a first-order correlation: coherent delta weight plus incoherent density.
inline SpectrumResult optical_spectrum(const CorrelationTrace& trace, std::span<const double> omegas) {
  if (trace.quantity != "g1") detail::fail_domain("optical spectrum needs a first-order correlation trace");
  if (trace.values.size() < 2) detail::fail_domain("optical spectrum needs at least two samples");
  if (omegas.size() < 2) detail::fail_domain("optical spectrum needs a frequency grid");
  const double plateau = trace.coherent_plateau;
  std::vector<cplx> f(trace.values.size());
  double peak = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    f[k] = trace.values[k] - plateau;
    peak = std::max(peak, std::abs(f[k]));
  }
  const double last = std::abs(f.back());
  if (last >= 1e-4 * peak) {
    const double rate = 0.5 * (trace.params.kappa + 0.5 * trace.params.gamma);
    const double extra = std::log(last / (1e-4 * peak)) / rate;
    detail::fail_numerical("optical spectrum: correlation has not decayed at tau = " + std::to_string(trace.taus.back()) +
                           " (residual " + std::to_string(last / peak) + " of peak); extend the horizon by about " +
                           std::to_string(std::max(extra, 1.0 / rate)) + " to at least " +
                           std::to_string(trace.taus.back() + std::max(extra, 1.0 / rate)));
  }

  SpectrumResult res;
  res.omegas.assign(omegas.begin(), omegas.end());
  res.coherent_weight = plateau;
  res.reference_total = trace.values.front().real();
  const std::vector<cplx> ft = half_fourier_transform(trace.taus, f, omegas);
  res.incoherent_density.resize(ft.size());
  for (std::size_t j = 0; j < ft.size(); ++j) res.incoherent_density[j] = ft[j].real() / kPi;
  double integral = 0.0;
  for (std::size_t j = 1; j < omegas.size(); ++j) {
    integral += 0.5 * (omegas[j] - omegas[j - 1]) * (res.incoherent_density[j] + res.incoherent_density[j - 1]);
  }
  res.total = plateau + integral;
  const double dmax = *std::max_element(res.incoherent_density.begin(), res.incoherent_density.end());
  for (double v : res.incoherent_density) {
    if (v < -1e-8 * std::max(1.0, dmax)) {
      res.warnings.push_back("incoherent density below -1e-8");
      break;
    }
  }
  for (std::size_t k : local_maxima(res.incoherent_density)) {
    if (res.incoherent_density[k] >= 0.5 * dmax) res.peak_positions.push_back(omegas[k]);
  }
  res.fit = fit_squared_lorentzian_doublet(res.omegas, res.incoherent_density);
  if (std::abs(res.total - res.reference_total) > 0.01 * std::abs(res.reference_total)) {
    res.warnings.push_back("spectral weight differs from g1(0) by more than 1%");
  }
  return res;
}

inline SpectrumResult optical_spectrum(const CorrelationTrace& trace) {
  return optical_spectrum(trace, default_omega_grid(trace.params));
}

}  // namespace jcqed
