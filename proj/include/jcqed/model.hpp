#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "jcqed/errors.hpp"

namespace jcqed {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Physical parameters of the driven, damped Jaynes-Cummings oscillator.
///
/// All rates are in units of the cavity field decay rate, so `kappa` is 1 unless a caller
/// deliberately rescales. The drive amplitude is complex; its phase sets the orientation of
/// every phase-space quantity. `omega0` labels the frame frequency and never enters numerics.
struct ModelParams {
  double g = 1.0;
  double kappa = 1.0;
  double gamma = 0.0;
  cplx drive{0.0, 0.0};
  int n_max = 1;
  double omega0 = 0.0;

  /// Build from the dimensionless ratios used throughout: g/kappa, gamma/(2 kappa), |drive|/g.
  static ModelParams from_ratios(double g_over_kappa, double gamma_over_2kappa, double drive_over_g,
                                 double drive_phase, int n_max) {
    ModelParams p;
    p.kappa = 1.0;
    p.g = g_over_kappa;
    p.gamma = 2.0 * gamma_over_2kappa;
    p.drive = std::polar(drive_over_g * g_over_kappa, drive_phase);
    p.n_max = n_max;
    p.validate();
    return p;
  }

  void validate() const {
    if (!std::isfinite(g) || !std::isfinite(kappa) || !std::isfinite(gamma) ||
        !std::isfinite(drive.real()) || !std::isfinite(drive.imag()) || !std::isfinite(omega0)) {
      detail::fail_domain("model parameters must be finite");
    }
    if (!(g > 0.0)) detail::fail_domain("coupling g must be positive");
    if (!(kappa > 0.0)) detail::fail_domain("cavity decay rate kappa must be positive");
    if (gamma < 0.0) detail::fail_domain("atomic decay rate gamma must be non-negative");
    if (n_max < 1) detail::fail_domain("Fock truncation n_max must be at least 1, got " + std::to_string(n_max));
  }

  double drive_abs() const { return std::abs(drive); }
  double drive_phase() const { return std::arg(drive); }
  double drive_ratio() const { return std::abs(drive) / g; }
  double loss_ratio() const { return gamma / (2.0 * kappa); }
  /// Saturation photon number of absorptive bistability, gamma^2 / (8 g^2).
  double system_size() const { return gamma * gamma / (8.0 * g * g); }
  /// Half-width of the vacuum Rabi doublet lines, (kappa + gamma/2) / 2.
  double doublet_halfwidth() const { return 0.5 * (kappa + 0.5 * gamma); }
  int hilbert_dim() const { return 2 * (n_max + 1); }
};

}  // namespace jcqed
