#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/UmfPackSupport>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "jcqed/errors.hpp"
#include "jcqed/integrator.hpp"
#include "jcqed/liouvillian.hpp"
#include "jcqed/operators.hpp"

namespace jcqed {

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  double rtol = 0.0;
  double atol = 0.0;
  StepStatistics stats;
  /// max_k |tr rho(t_k) - 1| for full generators, 0 otherwise.
  double max_trace_drift = 0.0;
  double max_hermiticity_defect = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {

inline void check_tolerances(double rtol, double atol) {
  if (!(rtol > 0.0 && rtol <= 1e-2) || !(atol > 0.0 && atol <= 1e-2)) {
    fail_domain("integrator tolerances must lie in (0, 1e-2]");
  }
}

}  // namespace detail

/// Observer signature used by `propagate`: (sample index, time, current matrix).
using MatrixObserver = std::function<void(std::size_t, double, const Eigen::Map<const Matrix>&)>;

/// Integrate d X/dt = L X for an arbitrary (possibly non-Hermitian) seed matrix and stream
/// the samples to `observer`. This is the quantum-regression workhorse.
inline StepStatistics propagate(const Superoperator& L, const Matrix& seed, std::span<const double> times,
                                const IntegratorOptions& options, const MatrixObserver& observer) {
  const Index d = L.hilbert_dim();
  if (seed.rows() != d || seed.cols() != d) detail::fail_domain("propagate: seed dimension mismatch");
  const SparseMatrix& m = L.matrix;
  auto rhs = [&m](double, const Vector& y, Vector& dy) { dy.noalias() = m * y; };
  Dop853<Vector, decltype(rhs)> solver(rhs, options);
  const double t0 = times.empty() ? 0.0 : std::min(0.0, times.front());
  solver.integrate(t0, vec(seed), times, [&](std::size_t k, double t, const Vector& y) {
    observer(k, t, Eigen::Map<const Matrix>(y.data(), d, d));
  });
  return solver.statistics();
}

/// Time-evolve a density matrix, storing the state at every requested time.
inline Trajectory evolve(const Superoperator& L, const DensityMatrix& rho0, std::span<const double> times,
                         double rtol = 1e-8, double atol = 1e-10) {
  detail::check_tolerances(rtol, atol);
  if (rho0.dim() != L.hilbert_dim()) detail::fail_domain("evolve: initial state dimension mismatch");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) detail::fail_domain("evolve: times must be strictly increasing");
  }
  if (!times.empty() && times.front() < 0.0) detail::fail_domain("evolve: times must be non-negative");

  Trajectory traj;
  traj.rtol = rtol;
  traj.atol = atol;
  DensityMatrix start = rho0;
  if (rho0.normalized()) {
    const double correction = start.make_physical();
    if (correction > 1e-10) {
      traj.warnings.push_back("initial state symmetrized and renormalized (correction " + std::to_string(correction) +
                              ")");
    }
  }
  const bool full = L.kind == GeneratorKind::full && start.normalized();
  traj.times.assign(times.begin(), times.end());
  traj.states.reserve(times.size());
  IntegratorOptions opt;
  opt.rtol = rtol;
  opt.atol = atol;
  traj.stats = propagate(L, start.matrix(), times, opt, [&](std::size_t, double, const Eigen::Map<const Matrix>& x) {
    DensityMatrix s(Matrix(x), full);
    if (full) traj.max_trace_drift = std::max(traj.max_trace_drift, std::abs(s.trace() - 1.0));
    traj.max_hermiticity_defect = std::max(traj.max_hermiticity_defect, s.hermiticity_defect());
    traj.states.push_back(std::move(s));
  });
  if (full && traj.max_trace_drift > 10.0 * rtol) {
    traj.warnings.push_back("trace drift " + std::to_string(traj.max_trace_drift) + " exceeds 10*rtol");
  }
  return traj;
}

inline Trajectory evolve(const Superoperator& L, const DensityMatrix& rho0, const std::vector<double>& times,
                         double rtol = 1e-8, double atol = 1e-10) {
  return evolve(L, rho0, std::span<const double>(times), rtol, atol);
}

struct SteadyStateOptions {
  /// Shift used for the inverse, relative to the generator norm.
  double relative_shift = 1e-9;
  int krylov_dim = 8;
  int max_refinements = 4;
  double residual_tol = 1e-10;
  /// Two independent starts must agree to this trace distance; otherwise the nullspace is degenerate.
  double degeneracy_tol = 1e-6;
  double truncation_threshold = 1e-6;
  bool allow_fallback = true;
};

struct SteadyStateResult {
  DensityMatrix rho;
  std::string method;
  double scaled_residual = 0.0;
  double generator_norm = 0.0;
  /// |Re| of the nonzero eigenvalue nearest zero in modulus. Modes with a large imaginary part
  /// can decay more slowly than this and are not seen by the shift-invert search.
  double spectral_gap = std::numeric_limits<double>::quiet_NaN();
  double top_fock_population = 0.0;
  bool truncation_suspect = false;
  double min_eigenvalue = 0.0;
  std::vector<std::string> warnings;
};

/// Population of the two highest Fock levels, summed over both atomic states.
inline double top_fock_population(const Basis& basis, const Matrix& rho) {
  double p = 0.0;
  for (Atom atom : {Atom::upper, Atom::lower}) {
    for (int n = std::max(0, basis.n_max - 1); n <= basis.n_max; ++n) {
      const Index i = basis.index(atom, n);
      p += rho(i, i).real();
    }
  }
  return p;
}

namespace detail {

inline Vector random_hermitian_start(Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) m(i, j) = cplx{normal(rng), normal(rng)};
  }
  Matrix h = m * m.adjoint();
  h /= h.trace().real();
  return vec(h);
}

inline double scaled_residual(const SparseMatrix& L, double norm, const Vector& x) {
  const double xn = x.norm();
  if (xn == 0.0) return std::numeric_limits<double>::infinity();
  return (L * x).norm() / (norm * xn);
}

struct NullspaceEstimate {
  Vector x;
  double gap = std::numeric_limits<double>::quiet_NaN();
};

/// Arnoldi on (L - s)^{-1} followed by inverse-iteration polishing.
template <class Solver>
NullspaceEstimate shift_invert_arnoldi(const Solver& lu, const SparseMatrix& L, double shift, double norm,
                                       Vector start, const SteadyStateOptions& opt) {
  const Index n = start.size();
  const int k = std::max(2, std::min<int>(opt.krylov_dim, static_cast<int>(n) - 1));
  Matrix V = Matrix::Zero(n, k + 1);
  Matrix H = Matrix::Zero(k + 1, k);
  V.col(0) = start / start.norm();
  int m = k;
  for (int j = 0; j < k; ++j) {
    Vector w = lu.solve(V.col(j));
    if (lu.info() != Eigen::Success) fail_numerical("steady state: shifted solve failed");
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) {
        const cplx hij = V.col(i).dot(w);
        H(i, j) += hij;
        w -= hij * V.col(i);
      }
    }
    const double beta = w.norm();
    H(j + 1, j) = beta;
    if (beta < 1e-14 * std::abs(H(0, 0))) {
      m = j + 1;
      break;
    }
    V.col(j + 1) = w / beta;
  }
  Eigen::ComplexEigenSolver<Matrix> es(H.topLeftCorner(m, m));
  const Vector theta = es.eigenvalues();
  std::vector<int> order(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(theta(a)) > std::abs(theta(b)); });

  NullspaceEstimate out;
  out.x = V.leftCols(m) * es.eigenvectors().col(order[0]);
  if (m > 1) {
    const cplx lambda2 = shift + 1.0 / theta(order[1]);
    out.gap = std::abs(lambda2.real());
  }
  for (int it = 0; it < opt.max_refinements && scaled_residual(L, norm, out.x) >= opt.residual_tol; ++it) {
    Vector y = lu.solve(out.x);
    out.x = y / y.norm();
  }
  return out;
}

inline Matrix normalize_fixed_point(const Vector& x, Index d) {
  Matrix rho = unvec(x, d);
  const cplx tr = rho.trace();
  if (std::abs(tr) < 1e-8 * rho.norm()) fail_numerical("steady state: nullspace vector is traceless");
  rho /= tr;
  rho = (0.5 * (rho + rho.adjoint())).eval();
  rho /= rho.trace().real();
  return rho;
}

/// Replace row 0 of L with the trace functional and solve L' x = e_0.
inline Vector bordered_solve(const SparseMatrix& L, Index d) {
  const Index n = L.rows();
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(static_cast<std::size_t>(L.nonZeros() + d));
  for (Index k = 0; k < L.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(L, k); it; ++it) {
      if (it.row() != 0) t.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Index i = 0; i < d; ++i) t.emplace_back(0, i * (d + 1), 1.0);
  SparseMatrix B(n, n);
  B.setFromTriplets(t.begin(), t.end());
  B.makeCompressed();
  Eigen::UmfPackLU<SparseMatrix> lu;
  lu.compute(B);
  if (lu.info() != Eigen::Success) fail_numerical("steady state: bordered system is singular (degenerate nullspace)");
  Vector rhs = Vector::Zero(n);
  rhs(0) = 1.0;
  Vector x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) {
    fail_numerical("steady state: bordered solve failed (degenerate nullspace)");
  }
  return x;
}

}  // namespace detail

/// Unique fixed point of a full generator with diagnostics.
inline SteadyStateResult solve_steady_state(const Superoperator& L, const SteadyStateOptions& opt = {}) {
  if (L.kind != GeneratorKind::full) detail::fail_domain("steady state requires a full (trace-preserving) generator");
  const Index d = L.hilbert_dim();
  const Index n = L.dim();
  SteadyStateResult res;
  res.generator_norm = generator_norm(L.matrix);
  const double norm = res.generator_norm;
  const double shift = opt.relative_shift * norm;

  SparseMatrix shifted = L.matrix;
  for (Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= shift;
  shifted.makeCompressed();
  Eigen::UmfPackLU<SparseMatrix> lu;
  lu.compute(shifted);

  bool have = false;
  Matrix rho;
  if (lu.info() == Eigen::Success) {
    auto e1 = detail::shift_invert_arnoldi(lu, L.matrix, shift, norm, detail::random_hermitian_start(d, 0x5eed01), opt);
    auto e2 = detail::shift_invert_arnoldi(lu, L.matrix, shift, norm, detail::random_hermitian_start(d, 0x5eed02), opt);
    const Matrix r1 = detail::normalize_fixed_point(e1.x, d);
    const Matrix r2 = detail::normalize_fixed_point(e2.x, d);
    const double spread = trace_distance(r1, r2);
    if (spread > opt.degeneracy_tol) {
      detail::fail_numerical("steady state: degenerate nullspace (independent starts differ by trace distance " +
                             std::to_string(spread) + ")");
    }
    if (std::isfinite(e1.gap) && e1.gap < 10.0 * shift) {
      detail::fail_numerical("steady state: degenerate nullspace (second eigenvalue " + std::to_string(e1.gap) +
                             " indistinguishable from zero)");
    }
    rho = r1;
    res.spectral_gap = e1.gap;
    res.method = "shift-invert-arnoldi";
    have = detail::scaled_residual(L.matrix, norm, vec(rho)) < opt.residual_tol;
    if (!have) res.warnings.push_back("shift-invert residual above tolerance; using bordered solve");
  } else {
    res.warnings.push_back("shifted factorization failed; using bordered solve");
  }
  if (!have) {
    if (!opt.allow_fallback) detail::fail_numerical("steady state: shift-invert did not converge");
    rho = detail::normalize_fixed_point(detail::bordered_solve(L.matrix, d), d);
    res.method = "bordered-solve";
  }

  res.scaled_residual = detail::scaled_residual(L.matrix, norm, vec(rho));
  if (!(res.scaled_residual < opt.residual_tol)) {
    detail::fail_numerical("steady state: scaled residual " + std::to_string(res.scaled_residual) +
                           " above tolerance");
  }
  res.rho = DensityMatrix(std::move(rho));
  res.min_eigenvalue = res.rho.min_eigenvalue();
  if (res.min_eigenvalue < -1e-8) {
    res.warnings.push_back("steady state has negative eigenvalue " + std::to_string(res.min_eigenvalue));
  }
  res.top_fock_population = top_fock_population(L.ops.basis, res.rho.matrix());
  res.truncation_suspect = res.top_fock_population >= opt.truncation_threshold;
  if (res.truncation_suspect) {
    res.warnings.push_back("truncation suspect: top two Fock levels hold population " +
                           std::to_string(res.top_fock_population) + "; rerun with larger n_max");
  }
  return res;
}

inline DensityMatrix steady_state(const Superoperator& L) { return solve_steady_state(L).rho; }

}  // namespace jcqed
