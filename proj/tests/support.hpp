#pragma once

// Independent dense constructions used as oracles. Nothing here calls the library's
// operator or generator builders.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

struct Ops {
  Mat a, sm, id;
};

// Product basis: atom slow (upper first), field fast.
inline Ops dense_ops(int n_max) {
  const int f = n_max + 1;
  Mat af = Mat::Zero(f, f);
  for (int n = 1; n <= n_max; ++n) af(n - 1, n) = std::sqrt(double(n));
  Mat s = Mat::Zero(2, 2);
  s(1, 0) = 1.0;  // |lower><upper|
  Ops o;
  o.a = Mat::Zero(2 * f, 2 * f);
  o.sm = Mat::Zero(2 * f, 2 * f);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      if (i == j) o.a.block(i * f, j * f, f, f) = af;
      o.sm.block(i * f, j * f, f, f) = s(i, j) * Mat::Identity(f, f);
    }
  o.id = Mat::Identity(2 * f, 2 * f);
  return o;
}

// Right-hand side of the master equation evaluated directly on matrices.
inline Mat lindblad_rhs(const Ops& o, double g, double kappa, double gamma, cplx drive, const Mat& rho) {
  const cplx i{0.0, 1.0};
  const Mat ad = o.a.adjoint();
  const Mat sp = o.sm.adjoint();
  const Mat h = i * g * (ad * o.sm - o.a * sp) + drive * ad + std::conj(drive) * o.a;
  Mat out = -i * (h * rho - rho * h);
  out += kappa * (2.0 * o.a * rho * ad - ad * o.a * rho - rho * ad * o.a);
  out += 0.5 * gamma * (2.0 * o.sm * rho * sp - sp * o.sm * rho - rho * sp * o.sm);
  return out;
}

inline Mat random_density(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat m(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) m(r, c) = cplx{n(rng), n(rng)};
  Mat rho = m * m.adjoint();
  return rho / rho.trace();
}

inline double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace oracle
