#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <random>

#include <cmath>
#include <vector>

#include "jcqed/dynamics.hpp"
#include "support.hpp"

using namespace jcqed;

namespace {

// Cavity effectively decoupled from the atom: a driven damped oscillator with
// <a>(t) = -i E / kappa (1 - exp(-kappa t)) from the vacuum.
ModelParams free_cavity(int n) {
  ModelParams p;
  p.g = 1e-9;
  p.kappa = 1.0;
  p.gamma = 1.0;
  p.drive = cplx{0.6, 0.8};
  p.n_max = n;
  return p;
}

}  // namespace

TEST(Evolve, DrivenCavityFollowsCoherentAmplitude) {
  const ModelParams p = free_cavity(25);
  const Superoperator L = build_liouvillian(p);
  const auto rho0 = DensityMatrix::basis_state(L.ops.basis, Atom::lower, 0);
  std::vector<double> times{0.0, 0.5, 1.0, 2.0, 4.0};
  const Trajectory tr = evolve(L, rho0, times);
  ASSERT_EQ(tr.states.size(), times.size());
  const cplx i{0.0, 1.0};
  for (std::size_t k = 0; k < times.size(); ++k) {
    const cplx want = -i * p.drive / p.kappa * (1.0 - std::exp(-p.kappa * times[k]));
    EXPECT_LT(std::abs(expectation(L.ops.a, tr.states[k]) - want), 1e-7) << "t = " << times[k];
    EXPECT_NEAR(expectation(L.ops.n_phot, tr.states[k]).real(), std::norm(want), 1e-7);
  }
  EXPECT_LT(tr.max_trace_drift, 1e-8);
  EXPECT_LT(tr.max_hermiticity_defect, 1e-8);
}

TEST(Evolve, MatchesDenseMatrixExponential) {
  const auto p = ModelParams::from_ratios(3.0, 0.8, 0.4, 0.7, 3);
  const Superoperator L = build_liouvillian(p);
  std::mt19937_64 rng(21);
  const Matrix rho0 = oracle::random_density(int(p.hilbert_dim()), rng);
  const std::vector<double> times{0.7};
  const Trajectory tr = evolve(L, DensityMatrix(rho0), times, 1e-11, 1e-13);
  // Oracle: exponential of the dense generator assembled column by column from the direct RHS.
  const auto o = oracle::dense_ops(3);
  const Index d = p.hilbert_dim();
  Matrix G(d * d, d * d);
  for (Index c = 0; c < d * d; ++c) {
    Matrix e = Matrix::Zero(d, d);
    e(c % d, c / d) = 1.0;
    const Matrix col = oracle::lindblad_rhs(o, p.g, p.kappa, p.gamma, p.drive, e);
    G.col(c) = Eigen::Map<const Vector>(col.data(), d * d);
  }
  const Eigen::MatrixXcd prop = (G * 0.7).exp();
  const Vector want = prop * Eigen::Map<const Vector>(rho0.data(), d * d);
  const Vector got = Eigen::Map<const Vector>(tr.states[0].matrix().data(), d * d);
  EXPECT_LT((got - want).norm(), 1e-9);
}

TEST(Evolve, RejectsBadInput) {
  const auto p = ModelParams::from_ratios(1.0, 1.0, 0.1, 0.0, 2);
  const Superoperator L = build_liouvillian(p);
  const auto rho0 = DensityMatrix::basis_state(L.ops.basis, Atom::lower, 0);
  EXPECT_THROW(evolve(L, rho0, std::vector<double>{1.0, 0.5}), DomainError);
  EXPECT_THROW(evolve(L, rho0, std::vector<double>{-1.0}), DomainError);
  EXPECT_THROW(evolve(L, rho0, std::vector<double>{1.0}, 0.1, 1e-10), DomainError);
  EXPECT_THROW(evolve(L, DensityMatrix(Matrix::Identity(3, 3) / 3.0), std::vector<double>{1.0}), DomainError);
}

TEST(Evolve, WarnsWhenInitialStateIsRepaired) {
  const auto p = ModelParams::from_ratios(1.0, 1.0, 0.1, 0.0, 2);
  const Superoperator L = build_liouvillian(p);
  Matrix m = Matrix::Zero(6, 6);
  m(5, 5) = 2.0;
  const Trajectory tr = evolve(L, DensityMatrix(m), std::vector<double>{0.1});
  ASSERT_FALSE(tr.warnings.empty());
  EXPECT_NEAR(tr.states[0].trace().real(), 1.0, 1e-9);
}

TEST(SteadyState, DrivenCavityIsCoherentState) {
  const ModelParams p = free_cavity(25);
  const Superoperator L = build_liouvillian(p);
  const SteadyStateResult r = solve_steady_state(L);
  const cplx want = cplx{0.0, -1.0} * p.drive / p.kappa;
  EXPECT_LT(std::abs(expectation(L.ops.a, r.rho) - want), 1e-8);
  EXPECT_LT(r.scaled_residual, 1e-10);
  EXPECT_FALSE(r.truncation_suspect);
  EXPECT_NEAR(r.rho.trace().real(), 1.0, 1e-12);
  EXPECT_GT(r.min_eigenvalue, -1e-8);
}

TEST(SteadyState, AgreesWithLongEvolution) {
  const auto p = ModelParams::from_ratios(4.0, 0.5, 0.3, 1.2, 8);
  const Superoperator L = build_liouvillian(p);
  const SteadyStateResult r = solve_steady_state(L);
  const auto rho0 = DensityMatrix::basis_state(L.ops.basis, Atom::lower, 0);
  const Trajectory tr = evolve(L, rho0, std::vector<double>{40.0});
  EXPECT_LT(trace_distance(tr.states[0].matrix(), r.rho.matrix()), 1e-7);
  // Bordered solve reaches the same fixed point.
  const Matrix b = detail::normalize_fixed_point(detail::bordered_solve(L.matrix, L.hilbert_dim()), L.hilbert_dim());
  EXPECT_LT(trace_distance(b, r.rho.matrix()), 1e-9);
}

TEST(SteadyState, FlagsTruncation) {
  const auto p = ModelParams::from_ratios(2.0, 1.0, 1.5, 0.0, 4);
  const SteadyStateResult r = solve_steady_state(build_liouvillian(p));
  EXPECT_TRUE(r.truncation_suspect);
  EXPECT_GT(r.top_fock_population, 1e-6);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(SteadyState, DetectsDegenerateNullspace) {
  // A purely Hamiltonian generator conserves every eigenprojector of H.
  const auto p = ModelParams::from_ratios(2.0, 0.0, 0.3, 0.0, 3);
  Superoperator L = build_liouvillian(p);
  const SparseMatrix h = rotating_frame_hamiltonian(p, L.ops);
  const SparseMatrix& id = L.ops.identity;
  L.matrix = cplx{0.0, -1.0} * (detail::kron(id, h) - detail::kron(SparseMatrix(h.transpose()), id));
  L.matrix.makeCompressed();
  EXPECT_THROW(solve_steady_state(L), NumericalError);
}

TEST(SteadyState, RejectsConditionedGenerator) {
  const auto p = ModelParams::from_ratios(2.0, 1.0, 0.3, 0.0, 3);
  EXPECT_THROW(solve_steady_state(build_wtd_generator(p, Channel::side)), DomainError);
}

TEST(Propagate, StreamsEverySample) {
  const auto p = ModelParams::from_ratios(2.0, 1.0, 0.3, 0.0, 3);
  const Superoperator L = build_liouvillian(p);
  const Matrix seed = DensityMatrix::basis_state(L.ops.basis, Atom::upper, 1).matrix();
  std::vector<double> times{0.0, 0.25, 0.5};
  std::vector<double> traces;
  propagate(L, seed, times, IntegratorOptions{}, [&](std::size_t, double, const Eigen::Map<const Matrix>& x) {
    traces.push_back(x.trace().real());
  });
  ASSERT_EQ(traces.size(), 3u);
  for (double t : traces) EXPECT_NEAR(t, 1.0, 1e-9);
}
