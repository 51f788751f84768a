#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "jcqed/errors.hpp"
#include "jcqed/model.hpp"

namespace jcqed {

using SparseMatrix = Eigen::SparseMatrix<cplx>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Atomic level. The upper level |2>_A occupies the first block of the product basis.
enum class Atom { upper = 0, lower = 1 };

/// Product basis atom (x) field, atom index slow: index = block * (N + 1) + n.
struct Basis {
  int n_max = 1;

  Index dim() const { return 2 * (n_max + 1); }

  Index index(Atom atom, int n) const {
    return static_cast<Index>(static_cast<int>(atom) * (n_max + 1) + n);
  }

  std::pair<Atom, int> state(Index i) const {
    const auto block = static_cast<int>(i / (n_max + 1));
    return {block == 0 ? Atom::upper : Atom::lower, static_cast<int>(i % (n_max + 1))};
  }
};

/// All operators of the truncated model as sparse matrices of dimension 2(N+1).
struct OperatorSet {
  Basis basis;
  SparseMatrix a;
  SparseMatrix a_dag;
  SparseMatrix sm;
  SparseMatrix sp;
  SparseMatrix n_phot;
  SparseMatrix sp_sm;
  SparseMatrix identity;

  Index dim() const { return basis.dim(); }
};

inline OperatorSet build_operator_set(const ModelParams& params) {
  params.validate();
  OperatorSet ops;
  ops.basis = Basis{params.n_max};
  const Basis& b = ops.basis;
  const Index d = b.dim();

  std::vector<Eigen::Triplet<cplx>> a_t;
  std::vector<Eigen::Triplet<cplx>> sm_t;
  for (Atom atom : {Atom::upper, Atom::lower}) {
    for (int n = 1; n <= params.n_max; ++n) {
      a_t.emplace_back(b.index(atom, n - 1), b.index(atom, n), std::sqrt(static_cast<double>(n)));
    }
  }
  for (int n = 0; n <= params.n_max; ++n) {
    sm_t.emplace_back(b.index(Atom::lower, n), b.index(Atom::upper, n), 1.0);
  }

  ops.a.resize(d, d);
  ops.a.setFromTriplets(a_t.begin(), a_t.end());
  ops.sm.resize(d, d);
  ops.sm.setFromTriplets(sm_t.begin(), sm_t.end());
  ops.a_dag = SparseMatrix(ops.a.adjoint());
  ops.sp = SparseMatrix(ops.sm.adjoint());
  ops.n_phot = SparseMatrix(ops.a_dag * ops.a);
  ops.sp_sm = SparseMatrix(ops.sp * ops.sm);
  ops.identity.resize(d, d);
  ops.identity.setIdentity();
  for (SparseMatrix* m : {&ops.a, &ops.a_dag, &ops.sm, &ops.sp, &ops.n_phot, &ops.sp_sm}) {
    m->makeCompressed();
  }
  return ops;
}

/// Density matrix on the product space. `normalized` is false for conditional or
/// otherwise unnormalized matrices, which skip the unit-trace invariants.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(Matrix data, bool normalized = true)
      : data_(std::move(data)), normalized_(normalized) {
    if (data_.rows() != data_.cols()) detail::fail_domain("density matrix must be square");
  }

  static DensityMatrix basis_state(const Basis& basis, Atom atom, int n) {
    Matrix m = Matrix::Zero(basis.dim(), basis.dim());
    const Index i = basis.index(atom, n);
    m(i, i) = 1.0;
    return DensityMatrix(std::move(m));
  }

  static DensityMatrix pure(const Vector& psi) {
    const double norm2 = psi.squaredNorm();
    if (!(norm2 > 0.0)) detail::fail_domain("pure state vector must be nonzero");
    return DensityMatrix(psi * psi.adjoint() / norm2);
  }

  const Matrix& matrix() const { return data_; }
  Matrix& matrix() { return data_; }
  Index dim() const { return data_.rows(); }
  bool normalized() const { return normalized_; }

  cplx trace() const { return data_.trace(); }

  /// Relative Frobenius distance between the matrix and its adjoint.
  double hermiticity_defect() const {
    const double n = data_.norm();
    if (n == 0.0) return 0.0;
    return (data_ - data_.adjoint()).norm() / n;
  }

  double min_eigenvalue() const {
    const Matrix h = 0.5 * (data_ + data_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  /// Symmetrize and rescale to unit trace; returns the Frobenius size of the correction.
  double make_physical() {
    const Matrix before = data_;
    data_ = (0.5 * (data_ + data_.adjoint())).eval();
    const cplx tr = data_.trace();
    if (std::abs(tr) == 0.0) detail::fail_numerical("cannot normalize a traceless matrix");
    data_ /= tr.real();
    normalized_ = true;
    return (data_ - before).norm();
  }

 private:
  Matrix data_;
  bool normalized_ = true;
};

/// Trace distance 0.5 * ||rho - sigma||_1 between Hermitian matrices.
inline double trace_distance(const Matrix& rho, const Matrix& sigma) {
  const Matrix diff = 0.5 * ((rho - sigma) + (rho - sigma).adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// tr(rho * op) for a sparse operator.
inline cplx expectation(const SparseMatrix& op, const Eigen::Ref<const Matrix>& rho) {
  if (op.rows() != rho.rows() || op.cols() != rho.cols()) {
    detail::fail_domain("expectation: dimension mismatch (" + std::to_string(op.rows()) + " vs " +
                        std::to_string(rho.rows()) + ")");
  }
  cplx sum{0.0, 0.0};
  for (Index k = 0; k < op.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(op, k); it; ++it) {
      sum += rho(it.col(), it.row()) * it.value();
    }
  }
  return sum;
}

inline cplx expectation(const SparseMatrix& op, const DensityMatrix& rho) {
  return expectation(op, rho.matrix());
}

inline cplx expectation(const Matrix& op, const DensityMatrix& rho) {
  if (op.rows() != rho.dim() || op.cols() != rho.dim()) detail::fail_domain("expectation: dimension mismatch");
  return (rho.matrix() * op).trace();
}

struct RealExpectation {
  double value = 0.0;
  double imag_residue = 0.0;
};

/// Expectation of an operator declared Hermitian: the real part, with the imaginary
/// residue reported. A residue above 1e-10 (relative to the trace scale) is an error.
inline RealExpectation expectation_hermitian(const SparseMatrix& op, const DensityMatrix& rho) {
  const cplx v = expectation(op, rho);
  const double scale = std::max(1.0, std::abs(rho.trace()));
  if (std::abs(v.imag()) >= 1e-10 * scale) {
    detail::fail_numerical("expectation of a Hermitian operator has imaginary part " + std::to_string(v.imag()));
  }
  return {v.real(), v.imag()};
}

}  // namespace jcqed
