#pragma once

#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>

#include <cstddef>
#include <optional>
#include <string>

#include "jcqed/errors.hpp"
#include "jcqed/model.hpp"
#include "jcqed/operators.hpp"

namespace jcqed {

enum class GeneratorKind { full, conditioned };

/// Emission channel: side scattering by the atom (sigma_-) or forward emission through the cavity (a).
enum class Channel { side, forward };

inline const char* to_string(Channel c) { return c == Channel::side ? "side" : "forward"; }

/// Sparse generator acting on column-stacked density matrices, vec(A rho B) = (B^T (x) A) vec(rho).
struct Superoperator {
  SparseMatrix matrix;
  GeneratorKind kind = GeneratorKind::full;
  std::optional<Channel> conditioned_on;
  /// True for the forward-channel conditioned generator, which extends the side-channel definition.
  bool extension = false;
  ModelParams params;
  OperatorSet ops;

  Index dim() const { return matrix.rows(); }
  Index hilbert_dim() const { return ops.dim(); }
};

struct GeneratorOptions {
  /// Upper bound on the estimated memory held by the sparse generator.
  std::size_t memory_budget_bytes = std::size_t{3} << 30;
};

inline Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

inline Matrix unvec(const Vector& v, Index d) {
  if (v.size() != d * d) detail::fail_domain("unvec: vector length is not d^2");
  return Eigen::Map<const Matrix>(v.data(), d, d);
}

namespace detail {

inline SparseMatrix kron(const SparseMatrix& x, const SparseMatrix& y) {
  SparseMatrix out = Eigen::kroneckerProduct(x, y);
  return out;
}

/// A rho B as a superoperator: B^T (x) A.
inline SparseMatrix sandwich(const SparseMatrix& left, const SparseMatrix& right) {
  return kron(SparseMatrix(right.transpose()), left);
}

inline std::size_t estimated_generator_bytes(Index hilbert_dim) {
  // Roughly 16 nonzeros per column for this model; value plus inner index per nonzero.
  const auto cols = static_cast<std::size_t>(hilbert_dim) * static_cast<std::size_t>(hilbert_dim);
  return cols * 16 * (sizeof(cplx) + sizeof(int)) + cols * sizeof(int);
}

inline SparseMatrix dissipator(const SparseMatrix& jump, double rate, const SparseMatrix& id) {
  const SparseMatrix jdj = SparseMatrix(jump.adjoint()) * jump;
  SparseMatrix out = rate * sandwich(jump, SparseMatrix(jump.adjoint())) -
                     (0.5 * rate) * kron(id, jdj) - (0.5 * rate) * kron(SparseMatrix(jdj.transpose()), id);
  return out;
}

}  // namespace detail

/// Rotating-frame Hamiltonian H/hbar = i g (a^dag sigma_- - a sigma_+) + (E a^dag + E^* a).
inline SparseMatrix rotating_frame_hamiltonian(const ModelParams& p, const OperatorSet& ops) {
  const cplx ig{0.0, p.g};
  SparseMatrix h = ig * SparseMatrix(ops.a_dag * ops.sm) - ig * SparseMatrix(ops.a * ops.sp) +
                   p.drive * ops.a_dag + std::conj(p.drive) * ops.a;
  h.makeCompressed();
  return h;
}

/// Full Lindblad generator: -i[H, .] + kappa (2 a . a^dag - {a^dag a, .}) + gamma/2 (2 sm . sp - {sp sm, .}).
inline Superoperator build_liouvillian(const ModelParams& params, const GeneratorOptions& options = {}) {
  params.validate();
  const Index d = params.hilbert_dim();
  if (detail::estimated_generator_bytes(d) > options.memory_budget_bytes) {
    detail::fail_domain("superoperator for n_max=" + std::to_string(params.n_max) +
                        " exceeds the configured memory budget");
  }
  Superoperator L;
  L.params = params;
  L.ops = build_operator_set(params);
  const OperatorSet& ops = L.ops;
  const SparseMatrix h = rotating_frame_hamiltonian(params, ops);
  const SparseMatrix& id = ops.identity;
  const cplx minus_i{0.0, -1.0};

  SparseMatrix gen = minus_i * (detail::kron(id, h) - detail::kron(SparseMatrix(h.transpose()), id));
  // kappa (2 a rho a^dag - ...) is the standard dissipator with rate 2 kappa.
  gen += detail::dissipator(ops.a, 2.0 * params.kappa, id);
  if (params.gamma > 0.0) gen += detail::dissipator(ops.sm, params.gamma, id);
  gen.prune(cplx{0.0, 0.0});
  gen.makeCompressed();
  L.matrix = std::move(gen);
  L.kind = GeneratorKind::full;
  return L;
}

/// Emission superoperator J rho = rate * c rho c^dag of the given channel.
inline SparseMatrix emission_superoperator(const Superoperator& full, Channel channel) {
  const OperatorSet& ops = full.ops;
  if (channel == Channel::side) return full.params.gamma * detail::sandwich(ops.sm, ops.sp);
  return (2.0 * full.params.kappa) * detail::sandwich(ops.a, ops.a_dag);
}

/// Generator conditioned on no emission into `channel`: L - J_channel.
inline Superoperator build_wtd_generator(const Superoperator& full, Channel channel) {
  if (full.kind != GeneratorKind::full) detail::fail_domain("conditioned generator must derive from a full generator");
  if (channel == Channel::side && !(full.params.gamma > 0.0)) {
    detail::fail_domain("side-channel conditioning requires gamma > 0");
  }
  Superoperator out = full;
  out.matrix = full.matrix - emission_superoperator(full, channel);
  out.matrix.prune(cplx{0.0, 0.0});
  out.matrix.makeCompressed();
  out.kind = GeneratorKind::conditioned;
  out.conditioned_on = channel;
  out.extension = channel == Channel::forward;
  return out;
}

inline Superoperator build_wtd_generator(const ModelParams& params, Channel channel,
                                         const GeneratorOptions& options = {}) {
  if (channel == Channel::side && !(params.gamma > 0.0)) {
    detail::fail_domain("side-channel conditioning requires gamma > 0");
  }
  return build_wtd_generator(build_liouvillian(params, options), channel);
}

/// d rho / dt for the given generator, unvectorized.
inline Matrix apply(const Superoperator& L, const Matrix& rho) {
  const Index d = L.hilbert_dim();
  if (rho.rows() != d || rho.cols() != d) detail::fail_domain("apply: dimension mismatch");
  const Vector out = L.matrix * vec(rho);
  return unvec(out, d);
}

inline Matrix apply(const Superoperator& L, const DensityMatrix& rho) { return apply(L, rho.matrix()); }

/// Maximum absolute row sum of the generator, the scale used for relative residuals.
inline double generator_norm(const SparseMatrix& m) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(m.rows());
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) rows(it.row()) += std::abs(it.value());
  }
  return rows.maxCoeff();
}

}  // namespace jcqed
