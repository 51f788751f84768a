#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "jcqed/errors.hpp"
#include "jcqed/model.hpp"
#include "jcqed/operators.hpp"

namespace jcqed {

inline constexpr double kWeakDriveThreshold = 0.25;

/// True when |E|/g is at or below the weak-drive threshold; analytic forms are still
/// evaluable outside it but carry this flag.
inline bool weak_drive_regime(const ModelParams& p, double threshold = kWeakDriveThreshold) {
  return p.drive_ratio() <= threshold;
}

struct SqueezingParams {
  double r = 0.0;
  cplx eta{0.0, 0.0};
  double r_approx = 0.0;
};

/// Largest degree of squeezing returned before the drive is treated as critical.
inline constexpr double kMaxSqueezing = 30.0;

inline SqueezingParams squeezing_parameters(const ModelParams& p) {
  const double x = p.drive_ratio();
  if (!(x < 0.5)) detail::fail_domain("critical point reached: |E|/g >= 1/2 has no finite squeezing");
  const double s = 1.0 - 4.0 * x * x;
  SqueezingParams out;
  out.r = -0.25 * std::log(s);
  if (!(out.r <= kMaxSqueezing)) detail::fail_domain("critical point reached: squeezing exceeds the overflow guard");
  out.eta = -out.r * std::polar(1.0, 2.0 * p.drive_phase());
  out.r_approx = x * x;
  return out;
}

enum class Branch { U, L, G };

inline const char* to_string(Branch b) {
  switch (b) {
    case Branch::U: return "U";
    case Branch::L: return "L";
    default: return "G";
  }
}

/// One bare-basis amplitude of a weak-drive expansion.
struct BasisAmplitude {
  Atom atom;
  int n;
  cplx amplitude;
};

struct DressedStateInfo {
  int n = 0;
  Branch branch = Branch::G;
  /// Quasienergy in units of hbar g.
  double quasienergy = 0.0;
  cplx displacement{0.0, 0.0};
  /// |O12>: coefficients of |1>_A and |2>_A.
  cplx o12_lower{0.0, 0.0};
  cplx o12_upper{0.0, 0.0};
  /// |O21>: coefficients of |2>_A and |1>_A.
  cplx o21_upper{0.0, 0.0};
  cplx o21_lower{0.0, 0.0};
  /// Leading weak-drive expansion; empty above the first doublet.
  std::vector<BasisAmplitude> weak_drive_expansion;
};

inline DressedStateInfo dressed_state(int n, Branch branch, const ModelParams& p) {
  if (branch == Branch::G && n != 0) detail::fail_domain("the ground branch has n = 0 only");
  if (branch != Branch::G && n < 1) detail::fail_domain("doublet index n must be at least 1");
  const SqueezingParams sq = squeezing_parameters(p);
  const double phi = p.drive_phase();
  const double e2r = std::exp(-2.0 * sq.r);
  const cplx i{0.0, 1.0};

  DressedStateInfo info;
  info.n = n;
  info.branch = branch;
  const double sign = branch == Branch::U ? 1.0 : (branch == Branch::L ? -1.0 : 0.0);
  info.quasienergy = sign * std::exp(-3.0 * sq.r) * std::sqrt(static_cast<double>(n));
  info.displacement = -std::polar(1.0, phi) * info.quasienergy * std::exp(4.0 * sq.r) *
                      std::sqrt(1.0 - std::exp(-4.0 * sq.r));
  const double plus = std::sqrt(1.0 + e2r) / std::sqrt(2.0);
  const double minus = std::sqrt(1.0 - e2r) / std::sqrt(2.0);
  info.o12_lower = plus;
  info.o12_upper = i * std::polar(1.0, phi) * minus;
  info.o21_upper = plus;
  info.o21_lower = -i * std::polar(1.0, -phi) * minus;

  const cplx e = p.drive / p.g;
  const double s2 = 1.0 / std::sqrt(2.0);
  if (branch == Branch::G) {
    info.weak_drive_expansion = {{Atom::lower, 0, 1.0}, {Atom::upper, 0, i * e}, {Atom::lower, 2, s2 * e * e}};
  } else if (n == 1) {
    info.weak_drive_expansion = {{Atom::upper, 0, s2}, {Atom::lower, 1, sign * i * s2}, {Atom::lower, 0, i * s2 * std::conj(e)}};
  }
  return info;
}

/// Bare-basis state vector of a weak-drive expansion, for truncation n_max.
inline Vector expansion_vector(const std::vector<BasisAmplitude>& amps, int n_max) {
  const Basis basis{n_max};
  Vector v = Vector::Zero(basis.dim());
  for (const auto& a : amps) {
    if (a.n > n_max) detail::fail_domain("expansion exceeds the truncation");
    v(basis.index(a.atom, a.n)) += a.amplitude;
  }
  return v;
}

/// Effective three-level rates between the dressed ground state and the first doublet.
/// Naming gamma_X_Y is the rate X -> Y.
struct EffectiveRates {
  double gamma_GG = 0.0;
  double gamma_G_1U = 0.0;
  double gamma_G_1L = 0.0;
  double gamma_1U_G = 0.0;
  double gamma_1L_G = 0.0;
  /// Diagonal-coupling coefficient, equal for all four coherences.
  cplx K1{0.0, 0.0};
  cplx K2_G_1U{0.0, 0.0};
  cplx K2_G_1L{0.0, 0.0};
  cplx K2_1U_G{0.0, 0.0};
  cplx K2_1L_G{0.0, 0.0};
  /// Reduced steady state before normalization.
  double p_G = 1.0;
  double p_1U = 0.0;
  double p_1L = 0.0;
  /// <a^dag a>_ss: equal ground-state and doublet parts.
  double photon_number = 0.0;
  bool weak_regime = true;
};

inline EffectiveRates effective_rates(const ModelParams& p, double threshold = kWeakDriveThreshold) {
  const double x = p.drive_ratio();
  const double x2 = x * x;
  const double x4 = x2 * x2;
  const double k = p.kappa + 0.5 * p.gamma;
  const cplx e = p.drive / p.g;
  EffectiveRates r;
  r.gamma_GG = p.gamma * x2;
  r.gamma_G_1U = r.gamma_G_1L = k * x4;
  r.gamma_1U_G = r.gamma_1L_G = k;
  r.K1 = -0.5 * p.gamma * x2;
  r.K2_G_1U = r.K2_G_1L = k * std::conj(e) * std::conj(e);
  r.K2_1U_G = r.K2_1L_G = k * e * e;
  r.p_G = 1.0;
  r.p_1U = r.p_1L = x4;
  r.photon_number = 2.0 * x4;
  r.weak_regime = x <= threshold;
  return r;
}

/// Normal-ordered variance of the atomic quadrature at local-oscillator phase theta.
inline double squeezing_variance(const ModelParams& p, double theta) {
  const double x = p.drive_ratio();
  return 0.5 * x * x * std::cos(2.0 * (theta - p.drive_phase()));
}

/// Rotating-frame envelope of <sp(0) sm(tau)>_ss to leading order in |E|/g.
inline cplx g1_weak_drive(const ModelParams& p, double tau) {
  if (tau < 0.0) detail::fail_domain("delay must be non-negative");
  const double x2 = p.drive_ratio() * p.drive_ratio();
  const double G = p.doublet_halfwidth();
  return x2 + 2.0 * x2 * x2 * std::exp(-G * tau) * (1.0 + G * tau) * std::cos(p.g * tau);
}

struct WeakSpectrum {
  double incoherent = 0.0;
  double coherent_weight = 0.0;
};

/// Squared-Lorentzian vacuum Rabi doublet plus the coherent delta weight; omega is the
/// offset from the reference frequency.
inline WeakSpectrum spectrum_weak_drive(const ModelParams& p, double omega) {
  const double x2 = p.drive_ratio() * p.drive_ratio();
  const double G = p.doublet_halfwidth();
  const double G3 = G * G * G;
  auto sq = [&](double d) {
    const double den = G * G + d * d;
    return G3 / (den * den);
  };
  return {x2 * x2 * (2.0 / kPi) * (sq(omega + p.g) + sq(omega - p.g)), x2};
}

/// Full width at half maximum of one squared-Lorentzian line, 2 Gamma sqrt(sqrt 2 - 1).
inline double squared_lorentzian_fwhm(double gamma_half) { return 2.0 * gamma_half * std::sqrt(std::sqrt(2.0) - 1.0); }

inline double g2_weak_drive(const ModelParams& p, double tau) {
  if (tau < 0.0) detail::fail_domain("delay must be non-negative");
  const double G = p.doublet_halfwidth();
  return 1.0 + std::exp(-2.0 * G * tau) - 2.0 * std::exp(-G * tau) * std::cos(p.g * tau);
}

struct PureStateG2Params {
  /// sqrt(g^2 - (kappa - gamma/2)^2 / 4); the modulus when the radicand is negative.
  double g_prime = 0.0;
  double gamma_prime = 0.0;
  double C1 = 0.0;
  bool overdamped = false;
};

inline PureStateG2Params pure_state_g2_params(const ModelParams& p) {
  PureStateG2Params out;
  const double d = p.kappa - 0.5 * p.gamma;
  const double rad = p.g * p.g - 0.25 * d * d;
  out.overdamped = rad < 0.0;
  out.g_prime = std::sqrt(std::abs(rad));
  out.C1 = p.gamma > 0.0 ? p.g * p.g / (p.kappa * p.gamma) : std::numeric_limits<double>::infinity();
  out.gamma_prime = p.gamma > 0.0 ? p.gamma * (1.0 + 2.0 * out.C1) : 2.0 * p.g * p.g / p.kappa;
  return out;
}

/// Which normalization to use for the sine coefficient of the pure-state g2.
enum class PureStateForm {
  /// (kappa - gamma'/2) / (kappa + gamma'/2): reproduces the two-quanta amplitude solution.
  corrected,
  /// (kappa - gamma'/2) / (kappa + gamma/2): literal reading, diverges in the strong-coupling limit.
  literal,
};

struct PureStateG2 {
  double value = 0.0;
  bool overdamped = false;
};

inline PureStateG2 g2_pure_state(const ModelParams& p, double tau, PureStateForm form = PureStateForm::corrected) {
  if (tau < 0.0) detail::fail_domain("delay must be non-negative");
  const PureStateG2Params q = pure_state_g2_params(p);
  const double G = p.doublet_halfwidth();
  const double den = form == PureStateForm::corrected ? p.kappa + 0.5 * q.gamma_prime : p.kappa + 0.5 * p.gamma;
  const double coef = (p.kappa - 0.5 * q.gamma_prime) / den * G;
  double c = 0.0;
  double s_over = 0.0;  // sin(g' tau) / g'
  if (q.g_prime == 0.0) {
    c = 1.0;
    s_over = tau;
  } else if (q.overdamped) {
    c = std::cosh(q.g_prime * tau);
    s_over = std::sinh(q.g_prime * tau) / q.g_prime;
  } else {
    c = std::cos(q.g_prime * tau);
    s_over = std::sin(q.g_prime * tau) / q.g_prime;
  }
  const double bracket = 1.0 - std::exp(-G * tau) * (c + coef * s_over);
  return {bracket * bracket, q.overdamped};
}

/// Zero-delay forward g2 estimated from the dressed ground state, (g/|E|)^4 / 4.
inline double g2_forward_zero_delay(const ModelParams& p) {
  const double x = p.drive_ratio();
  if (!(x > 0.0)) detail::fail_domain("forward g2 estimate needs a nonzero drive");
  return 0.25 / (x * x * x * x);
}

/// Free-atom resonance-fluorescence reference driven by an effective amplitude.
struct ResonanceFluorescenceRef {
  double Y = 0.0;
  cplx effective_drive{0.0, 0.0};
  double tau_av = std::numeric_limits<double>::infinity();
};

inline ResonanceFluorescenceRef resonance_fluorescence_from_y(double Y, double gamma) {
  if (!(Y >= 0.0) || !(gamma > 0.0)) detail::fail_domain("resonance fluorescence needs Y >= 0 and gamma > 0");
  ResonanceFluorescenceRef ref;
  ref.Y = Y;
  ref.effective_drive = Y * gamma / (2.0 * std::sqrt(2.0));
  ref.tau_av = Y > 0.0 ? 2.0 * (1.0 + Y * Y) / (gamma * Y * Y) : std::numeric_limits<double>::infinity();
  return ref;
}

/// Reference with effective drive g <a>_ss taken from a computed steady state.
inline ResonanceFluorescenceRef resonance_fluorescence_reference(const ModelParams& p, cplx cavity_amplitude) {
  if (!(p.gamma > 0.0)) detail::fail_domain("resonance fluorescence reference needs gamma > 0");
  ResonanceFluorescenceRef ref = resonance_fluorescence_from_y(2.0 * std::sqrt(2.0) * p.g * std::abs(cavity_amplitude) / p.gamma, p.gamma);
  ref.effective_drive = p.g * cavity_amplitude;
  return ref;
}

struct ReferenceWaitingTime {
  double value = 0.0;
  /// True for Y^2 >= 1/2, where the hyperbolic cosine continues to a cosine.
  bool continued = false;
  /// Overall sign applied to the literal expression to obtain a non-negative density.
  int sign_applied = -1;
};

/// Non-negative waiting-time density of free-atom resonance fluorescence. The literal
/// bracket [1 - cosh] is negative for tau > 0; the returned density is its negative.
inline ReferenceWaitingTime wtd_resonance_fluorescence(const ResonanceFluorescenceRef& ref, double gamma, double tau) {
  if (!(ref.Y > 0.0)) detail::fail_domain("reference waiting times need Y > 0");
  if (!(gamma > 0.0)) detail::fail_domain("reference waiting times need gamma > 0");
  if (tau < 0.0) detail::fail_domain("delay must be non-negative");
  const double y2 = ref.Y * ref.Y;
  const double d = 1.0 - 2.0 * y2;
  const double h = 0.5 * gamma * tau;
  const double pre = gamma * std::exp(-h) * y2;
  ReferenceWaitingTime out;
  if (d > 0.0) {
    // exp(-h) cosh(h s) folded together so long delays do not overflow
    const double s = std::sqrt(d);
    const double ch = 0.5 * (std::exp(-h * (1.0 - s)) + std::exp(-h * (1.0 + s)));
    out.value = gamma * y2 * (ch - std::exp(-h)) / d;
  } else if (d < 0.0) {
    out.continued = true;
    out.value = pre * (1.0 - std::cos(h * std::sqrt(-d))) / (-d);
  } else {
    out.continued = true;
    out.value = pre * 0.5 * h * h;
  }
  return out;
}

/// Neoclassical steady-state locus, closed by the segment joining its two branch ends.
struct NeoclassicalCurve {
  std::vector<std::pair<double, double>> upper;
  std::vector<std::pair<double, double>> lower;
  bool empty = true;

  /// Closed polygon: upper branch outwards, lower branch back.
  std::vector<std::pair<double, double>> polygon() const {
    std::vector<std::pair<double, double>> poly(upper.begin(), upper.end());
    poly.insert(poly.end(), lower.rbegin(), lower.rend());
    return poly;
  }
};

/// Curve for drive phase pi/2 rotated to the actual drive phase.
inline NeoclassicalCurve neoclassical_curve(const ModelParams& p, int n_points = 200) {
  if (n_points < 2) detail::fail_domain("neoclassical curve needs at least two points");
  NeoclassicalCurve curve;
  const double e_max = p.drive_abs();
  const double e_min = 0.5 * p.g;
  const cplx rot = std::polar(1.0, p.drive_phase() - 0.5 * kPi);
  auto push = [&](std::vector<std::pair<double, double>>& v, double x, double y) {
    const cplx z = rot * cplx{x, y};
    v.emplace_back(z.real(), z.imag());
  };
  if (!(e_max > e_min)) {
    push(curve.upper, 0.0, 0.0);
    push(curve.lower, 0.0, 0.0);
    return curve;
  }
  curve.empty = false;
  for (int k = 0; k < n_points; ++k) {
    const double e = e_min + (e_max - e_min) * static_cast<double>(k) / static_cast<double>(n_points - 1);
    const double q = 1.0 - (p.g / (2.0 * e)) * (p.g / (2.0 * e));
    const double x = (e / p.kappa) * q;
    const double y = (p.g / (2.0 * p.kappa)) * std::sqrt(std::max(q, 0.0));
    push(curve.upper, x, y);
    push(curve.lower, x, -y);
  }
  return curve;
}

/// Mean-field cavity amplitude |alpha_ss| = |E|/kappa.
inline double maxwell_bloch_amplitude(const ModelParams& p) { return p.drive_abs() / p.kappa; }

}  // namespace jcqed
