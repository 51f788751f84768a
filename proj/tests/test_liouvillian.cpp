#include <gtest/gtest.h>

#include <random>

#include "jcqed/liouvillian.hpp"
#include "support.hpp"

using namespace jcqed;

TEST(Liouvillian, MatchesDirectMasterEquation) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 1 + trial % 5;
    const auto p = ModelParams::from_ratios(0.5 + 5.0 * u(rng), 2.0 * u(rng), u(rng), 6.0 * u(rng), n);
    const Superoperator L = build_liouvillian(p);
    const auto o = oracle::dense_ops(n);
    const Matrix rho = oracle::random_density(int(p.hilbert_dim()), rng);
    const Matrix want = oracle::lindblad_rhs(o, p.g, p.kappa, p.gamma, p.drive, rho);
    EXPECT_LT((apply(L, rho) - want).norm(), 1e-12 * std::max(1.0, want.norm())) << "trial " << trial;
  }
}

TEST(Liouvillian, PreservesTraceAndHermiticity) {
  const auto p = ModelParams::from_ratios(3.0, 0.7, 0.4, 1.1, 6);
  const Superoperator L = build_liouvillian(p);
  std::mt19937_64 rng(3);
  const Matrix rho = oracle::random_density(int(p.hilbert_dim()), rng);
  const Matrix d = apply(L, rho);
  EXPECT_LT(std::abs(d.trace()), 1e-12);
  EXPECT_LT((d - d.adjoint()).norm(), 1e-12);
}

TEST(Liouvillian, UndrivenGroundStateIsStationary) {
  const auto p = ModelParams::from_ratios(4.0, 1.0, 0.0, 0.0, 5);
  const Superoperator L = build_liouvillian(p);
  const auto ground = DensityMatrix::basis_state(L.ops.basis, Atom::lower, 0);
  EXPECT_LT(apply(L, ground).norm(), 1e-15);
}

TEST(Liouvillian, VectorizationIsColumnStacking) {
  Matrix m(2, 2);
  m << 1.0, 2.0, 3.0, 4.0;
  const Vector v = vec(m);
  EXPECT_EQ(v(1), cplx(3.0));
  EXPECT_EQ(v(2), cplx(2.0));
  EXPECT_EQ(unvec(v, 2), m);
}

TEST(Liouvillian, ConditionedGeneratorRemovesEmissions) {
  const auto p = ModelParams::from_ratios(2.0, 1.0, 0.2, 0.0, 4);
  const Superoperator L = build_liouvillian(p);
  const auto o = oracle::dense_ops(4);
  std::mt19937_64 rng(5);
  const Matrix rho = oracle::random_density(int(p.hilbert_dim()), rng);
  const Superoperator side = build_wtd_generator(L, Channel::side);
  const Matrix jump = p.gamma * o.sm * rho * o.sm.adjoint();
  EXPECT_LT((apply(side, rho) - (apply(L, rho) - jump)).norm(), 1e-12);
  // Trace lost per unit time equals the emission rate.
  EXPECT_NEAR(-apply(side, rho).trace().real(), jump.trace().real(), 1e-12);
  EXPECT_EQ(side.kind, GeneratorKind::conditioned);
  EXPECT_FALSE(side.extension);

  const Superoperator fwd = build_wtd_generator(L, Channel::forward);
  const Matrix jf = 2.0 * p.kappa * o.a * rho * o.a.adjoint();
  EXPECT_LT((apply(fwd, rho) - (apply(L, rho) - jf)).norm(), 1e-12);
  EXPECT_TRUE(fwd.extension);
}

TEST(Liouvillian, RejectsInvalidRequests) {
  const auto p0 = ModelParams::from_ratios(2.0, 0.0, 0.2, 0.0, 4);
  EXPECT_THROW(build_wtd_generator(p0, Channel::side), DomainError);
  GeneratorOptions tiny;
  tiny.memory_budget_bytes = 1024;
  EXPECT_THROW(build_liouvillian(ModelParams::from_ratios(2.0, 1.0, 0.2, 0.0, 10), tiny), DomainError);
  const Superoperator L = build_liouvillian(ModelParams::from_ratios(2.0, 1.0, 0.2, 0.0, 2));
  EXPECT_THROW(jcqed::apply(L, Matrix(Matrix::Zero(3, 3))), DomainError);
  const Superoperator c = build_wtd_generator(L, Channel::forward);
  EXPECT_THROW(build_wtd_generator(c, Channel::side), DomainError);
}

TEST(Liouvillian, GeneratorNormIsMaxRowSum) {
  SparseMatrix m(2, 2);
  m.insert(0, 0) = cplx{3.0, 4.0};
  m.insert(0, 1) = 1.0;
  m.insert(1, 1) = -2.0;
  EXPECT_DOUBLE_EQ(generator_norm(m), 6.0);
}
