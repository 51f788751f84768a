#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jcqed/dressed.hpp"
#include "jcqed/dynamics.hpp"
#include "jcqed/errors.hpp"
#include "jcqed/liouvillian.hpp"
#include "jcqed/operators.hpp"

namespace jcqed {

/// Partial trace over the atom: sum of the two (N+1)-dimensional diagonal blocks.
inline Matrix reduce_to_cavity(const Matrix& rho) {
  if (rho.rows() != rho.cols() || rho.rows() % 2 != 0 || rho.rows() < 4) {
    detail::fail_domain("reduce_to_cavity: expected a square matrix of dimension 2(N+1)");
  }
  const Index m = rho.rows() / 2;
  return rho.topLeftCorner(m, m) + rho.bottomRightCorner(m, m);
}

inline Matrix reduce_to_cavity(const DensityMatrix& rho) { return reduce_to_cavity(rho.matrix()); }

struct QGridSpec {
  double x_min = -1.0;
  double x_max = 1.0;
  int nx = 201;
  double y_min = -1.0;
  double y_max = 1.0;
  int ny = 201;

  static QGridSpec square(double half_width, int n) { return {-half_width, half_width, n, -half_width, half_width, n}; }

  void validate() const {
    if (nx < 3 || ny < 3) detail::fail_domain("phase-space grid needs at least 3 points per axis");
    if (!(x_max > x_min) || !(y_max > y_min) || !std::isfinite(x_min) || !std::isfinite(x_max) ||
        !std::isfinite(y_min) || !std::isfinite(y_max)) {
      detail::fail_domain("phase-space grid bounds are invalid");
    }
  }
  double dx() const { return (x_max - x_min) / (nx - 1); }
  double dy() const { return (y_max - y_min) / (ny - 1); }
  double x(int i) const { return x_min + i * dx(); }
  double y(int j) const { return y_min + j * dy(); }
  double max_abs2() const {
    const double ax = std::max(std::abs(x_min), std::abs(x_max));
    const double ay = std::max(std::abs(y_min), std::abs(y_max));
    return ax * ax + ay * ay;
  }
};

/// Default grid: 201 x 201 over +-1.2 |E|/kappa, widened if the field extends further.
inline QGridSpec default_qgrid(const ModelParams& p) {
  return QGridSpec::square(std::max(1.2 * p.drive_abs() / p.kappa, 3.0), 201);
}

struct QPeak {
  double x = 0.0;
  double y = 0.0;
  double height = 0.0;
  int i = 0;
  int j = 0;
};

struct QGrid {
  QGridSpec spec;
  std::vector<double> x;
  std::vector<double> y;
  /// values(j, i) = Q(x[i] + i y[j]).
  Eigen::MatrixXd values;
  std::vector<QPeak> peaks;
  double integral = 0.0;
  double max_value = 0.0;
  double min_value = 0.0;
  double time = 0.0;

  double dx() const { return spec.dx(); }
  double dy() const { return spec.dy(); }
};

/// 8-neighbour local maxima above `rel_threshold` of the global maximum, refined by a
/// separable quadratic fit through the neighbours; sorted by height.
inline std::vector<QPeak> find_peaks(const QGrid& q, double rel_threshold = 0.1) {
  std::vector<QPeak> peaks;
  const auto& v = q.values;
  const int ny = static_cast<int>(v.rows());
  const int nx = static_cast<int>(v.cols());
  const double cut = rel_threshold * q.max_value;
  for (int j = 1; j + 1 < ny; ++j) {
    for (int i = 1; i + 1 < nx; ++i) {
      const double c = v(j, i);
      if (!(c >= cut) || c <= 0.0) continue;
      bool is_max = true;
      for (int dj = -1; dj <= 1 && is_max; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          const double n = v(j + dj, i + di);
          // Ties are broken towards the lower index so plateaus yield one peak.
          if (n > c || (n == c && (dj < 0 || (dj == 0 && di < 0)))) {
            is_max = false;
            break;
          }
        }
      }
      if (!is_max) continue;
      auto vertex = [](double m, double c0, double p) {
        const double den = m - 2.0 * c0 + p;
        return den < 0.0 ? 0.5 * (m - p) / den : 0.0;
      };
      const double ox = std::clamp(vertex(v(j, i - 1), c, v(j, i + 1)), -0.5, 0.5);
      const double oy = std::clamp(vertex(v(j - 1, i), c, v(j + 1, i)), -0.5, 0.5);
      QPeak pk;
      pk.i = i;
      pk.j = j;
      pk.x = q.x[static_cast<std::size_t>(i)] + ox * q.dx();
      pk.y = q.y[static_cast<std::size_t>(j)] + oy * q.dy();
      pk.height = c;
      peaks.push_back(pk);
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const QPeak& a, const QPeak& b) { return a.height > b.height; });
  return peaks;
}

/// Husimi Q of a cavity density matrix via the coherent-state overlap recurrence.
inline QGrid husimi_q(const Matrix& rho_c, const QGridSpec& spec, double peak_threshold = 0.1) {
  spec.validate();
  if (rho_c.rows() != rho_c.cols() || rho_c.rows() < 2) detail::fail_domain("husimi_q: expected a square cavity matrix");
  const Index d = rho_c.rows();
  const int n_max = static_cast<int>(d) - 1;

  double nbar = 0.0;
  double n2 = 0.0;
  for (Index n = 0; n < d; ++n) {
    const double pn = rho_c(n, n).real();
    nbar += static_cast<double>(n) * pn;
    n2 += static_cast<double>(n * n) * pn;
  }
  const double needed = nbar + 5.0 * std::sqrt(std::max(0.0, n2 - nbar * nbar));
  if (spec.max_abs2() < needed) {
    const double half = std::sqrt(needed / 2.0);
    detail::fail_domain("phase-space grid too small: max |alpha|^2 = " + std::to_string(spec.max_abs2()) +
                        " but the field needs " + std::to_string(needed) + "; use bounds of at least +-" +
                        std::to_string(half));
  }

  QGrid q;
  q.spec = spec;
  q.x.resize(static_cast<std::size_t>(spec.nx));
  q.y.resize(static_cast<std::size_t>(spec.ny));
  for (int i = 0; i < spec.nx; ++i) q.x[static_cast<std::size_t>(i)] = spec.x(i);
  for (int j = 0; j < spec.ny; ++j) q.y[static_cast<std::size_t>(j)] = spec.y(j);
  q.values.resize(spec.ny, spec.nx);

  std::vector<double> inv_sqrt(static_cast<std::size_t>(n_max + 1));
  for (int n = 0; n <= n_max; ++n) inv_sqrt[static_cast<std::size_t>(n)] = 1.0 / std::sqrt(static_cast<double>(n + 1));

#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < spec.ny; ++j) {
    Matrix C(d, spec.nx);
    for (int i = 0; i < spec.nx; ++i) {
      const cplx alpha{q.x[static_cast<std::size_t>(i)], q.y[static_cast<std::size_t>(j)]};
      cplx c = std::exp(-0.5 * std::norm(alpha));
      C(0, i) = c;
      for (int n = 0; n < n_max; ++n) {
        c *= alpha * inv_sqrt[static_cast<std::size_t>(n)];
        C(n + 1, i) = c;
      }
    }
    const Matrix RC = rho_c * C;
    for (int i = 0; i < spec.nx; ++i) {
      q.values(j, i) = C.col(i).dot(RC.col(i)).real() / kPi;
    }
  }

  q.max_value = q.values.maxCoeff();
  q.min_value = q.values.minCoeff();
  q.integral = q.values.sum() * spec.dx() * spec.dy();
  q.peaks = find_peaks(q, peak_threshold);
  return q;
}

inline QGrid husimi_q(const DensityMatrix& rho, const QGridSpec& spec, double peak_threshold = 0.1) {
  return husimi_q(reduce_to_cavity(rho), spec, peak_threshold);
}

/// max |Q(x, y) - Q(x, -y)| / max Q; the grid must be symmetric in y.
inline double mirror_asymmetry(const QGrid& q) {
  if (std::abs(q.spec.y_min + q.spec.y_max) > 1e-12 * std::max(1.0, q.spec.y_max)) {
    detail::fail_domain("mirror asymmetry needs a y grid symmetric about zero");
  }
  const Eigen::MatrixXd flipped = q.values.colwise().reverse();
  return (q.values - flipped).cwiseAbs().maxCoeff() / q.max_value;
}

/// True when every peak has a partner at the mirrored position (x, -y) within `tol`.
inline bool peaks_mirror_closed(const std::vector<QPeak>& peaks, double tol) {
  for (const auto& p : peaks) {
    bool found = false;
    for (const auto& o : peaks) {
      if (std::hypot(o.x - p.x, o.y + p.y) <= tol) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

namespace detail {

inline double segment_distance(double px, double py, std::pair<double, double> a, std::pair<double, double> b) {
  const double vx = b.first - a.first;
  const double vy = b.second - a.second;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((px - a.first) * vx + (py - a.second) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (a.first + t * vx), py - (a.second + t * vy));
}

}  // namespace detail

/// Inside the closed polygon, or within `tol` of its boundary.
inline bool inside_or_near(const std::vector<std::pair<double, double>>& poly, double x, double y, double tol) {
  if (poly.empty()) return false;
  bool inside = false;
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0, l = poly.size() - 1; k < poly.size(); l = k++) {
    const auto& a = poly[k];
    const auto& b = poly[l];
    if ((a.second > y) != (b.second > y) &&
        x < (b.first - a.first) * (y - a.second) / (b.second - a.second) + a.first) {
      inside = !inside;
    }
    dmin = std::min(dmin, detail::segment_distance(x, y, a, b));
  }
  return inside || dmin <= tol;
}

/// Equidistant snapshot times with inclusive endpoints spanning g T in [0, gt_max].
inline std::vector<double> snapshot_times(const ModelParams& p, double gt_max, int count) {
  if (count < 2) detail::fail_domain("need at least two snapshots");
  if (!(gt_max > 0.0)) detail::fail_domain("snapshot span must be positive");
  std::vector<double> t(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) t[static_cast<std::size_t>(k)] = gt_max / p.g * k / (count - 1);
  return t;
}

struct TransientResult {
  std::vector<double> times;
  std::vector<QGrid> frames;
  NeoclassicalCurve curve;
  StepStatistics stats;
  double max_trace_drift = 0.0;
  std::vector<std::string> warnings;
};

/// Evolve from the ground product state and record the cavity Q at each time.
inline TransientResult transient_snapshots(const ModelParams& params, std::span<const double> times,
                                           const QGridSpec& spec, double rtol = 1e-8, double atol = 1e-10) {
  const Superoperator L = build_liouvillian(params);
  const DensityMatrix rho0 = DensityMatrix::basis_state(L.ops.basis, Atom::lower, 0);
  Trajectory traj = evolve(L, rho0, times, rtol, atol);
  TransientResult out;
  out.times = traj.times;
  out.stats = traj.stats;
  out.max_trace_drift = traj.max_trace_drift;
  out.warnings = traj.warnings;
  out.curve = neoclassical_curve(params);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    QGrid q = husimi_q(traj.states[k], spec);
    q.time = traj.times[k];
    out.frames.push_back(std::move(q));
  }
  return out;
}

}  // namespace jcqed
