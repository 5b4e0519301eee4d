#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "trapcheck/errors.hpp"
#include "trapcheck/random.hpp"

namespace trapcheck {

/// Fiber inner product: a Hermitian matrix, flagged positive definite when
/// its smallest eigenvalue is strictly positive.
struct HermitianForm {
  Eigen::MatrixXcd b;
  bool positive = false;
};

inline HermitianForm hermitian_form(const Eigen::MatrixXcd& b, bool require_positive = false) {
  if (b.rows() != b.cols()) throw InputError("hermitian_form: matrix must be square");
  const double scale = std::max(1.0, b.norm());
  if ((b - b.adjoint()).norm() > 1e-12 * scale)
    throw InputError("hermitian_form: matrix is not Hermitian");
  HermitianForm f{0.5 * (b + b.adjoint()), false};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(f.b, Eigen::EigenvaluesOnly);
  f.positive = es.eigenvalues().minCoeff() > 0.0;
  if (require_positive && !f.positive)
    throw InputError("hermitian_form: matrix is not positive definite");
  return f;
}

/// Adjoint of P with respect to the form b: b^{-1} P^dagger b.
inline Eigen::MatrixXcd adjoint_wrt(const Eigen::MatrixXcd& P, const HermitianForm& b) {
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(b.b);
  if (!lu.isInvertible()) throw DomainError("adjoint_wrt: form is singular");
  return lu.solve(P.adjoint() * b.b);
}

/// Imaginary part with respect to b: (1/2i)(P - P^{*b}); b-self-adjoint.
inline Eigen::MatrixXcd im_wrt(const Eigen::MatrixXcd& P, const HermitianForm& b) {
  return (P - adjoint_wrt(P, b)) / std::complex<double>(0.0, 2.0);
}

namespace detail {

inline double spectral_norm_psi(const Eigen::MatrixXcd& m) {
  // largest singular value via the Gram matrix; much cheaper than a full SVD
  // for the tensor-power sizes and accurate well beyond the tolerances used
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.adjoint() * m, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

}  // namespace detail

/// Operator norm of R in the geometry of the positive form b, computed as
/// ||c R c^{-1}||_2 with c the positive square root of b.
inline double b_norm(const Eigen::MatrixXcd& R, const HermitianForm& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b.b);
  if (es.eigenvalues().minCoeff() <= 0.0) throw DomainError("b_norm: form is not positive definite");
  const Eigen::MatrixXcd c = es.operatorSqrt();
  const Eigen::MatrixXcd cinv = es.operatorInverseSqrt();
  return detail::spectral_norm_psi(c * R * cinv);
}

/// Factorization b = q^dagger b0 q through the interpolation
/// b_t = (1-t) b0 + t b, integrating dq/dt = q b_t^{-1} (b - b0) / 2 from the
/// identity with fixed-step RK4. Positivity of b_t along the path follows
/// from positivity of the endpoints and is asserted.
inline Eigen::MatrixXcd ode_factorize_partial(const HermitianForm& b, const HermitianForm& b0,
                                              int steps, double t_end) {
  if (steps < 1) throw InputError("ode_factorize: need at least one step");
  if (!(t_end >= 0.0 && t_end <= 1.0)) throw InputError("ode_factorize: t_end must lie in [0,1]");
  if (!b.positive || !b0.positive)
    throw InputError("ode_factorize: both forms must be positive definite");
  if (b.b.rows() != b0.b.rows()) throw InputError("ode_factorize: dimension mismatch");

  const Eigen::MatrixXcd diff = b.b - b0.b;
  const auto rhs = [&](double t, const Eigen::MatrixXcd& q) {
    const Eigen::MatrixXcd bt = (1.0 - t) * b0.b + t * b.b;
    Eigen::LLT<Eigen::MatrixXcd> llt(bt);
    if (llt.info() != Eigen::Success)
      throw DomainError("ode_factorize: interpolated form lost positivity");
    return Eigen::MatrixXcd(0.5 * q * llt.solve(diff));
  };

  Eigen::MatrixXcd q = Eigen::MatrixXcd::Identity(b.b.rows(), b.b.cols());
  const double h = 1.0 / steps;
  const auto nsteps = static_cast<long>(std::llround(t_end * steps));
  for (long i = 0; i < nsteps; ++i) {
    const double t = i * h;
    const Eigen::MatrixXcd k1 = rhs(t, q);
    const Eigen::MatrixXcd k2 = rhs(t + 0.5 * h, q + 0.5 * h * k1);
    const Eigen::MatrixXcd k3 = rhs(t + 0.5 * h, q + 0.5 * h * k2);
    const Eigen::MatrixXcd k4 = rhs(t + h, q + h * k3);
    q += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return q;
}

inline Eigen::MatrixXcd ode_factorize(const HermitianForm& b, const HermitianForm& b0, int steps) {
  return ode_factorize_partial(b, b0, steps, 1.0);
}

struct JordanExample {
  Eigen::MatrixXcd generator;  // the Jordan block in the rescaled frame: eps above the diagonal
  Eigen::MatrixXcd im;         // imaginary part in that frame
  double norm;                 // spectral norm of im, always below eps
};

/// The toy model: a single nilpotent Jordan block A e_j = e_{j-1}, pushed
/// through the frame rescaling e'_j = eps^j e_j. In the rescaled frame the
/// generator has eps above the diagonal and the imaginary part is
/// tridiagonal with entries +-eps/2i and eigenvalues eps cos(j pi/(N+1)).
inline JordanExample jordan_example(int N, double eps) {
  if (N < 2) throw InputError("jordan_example: need N >= 2");
  if (!(eps > 0.0)) throw InputError("jordan_example: eps must be positive");
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(N, N);
  for (int j = 1; j < N; ++j) A(j - 1, j) = eps;
  const Eigen::MatrixXcd im = (A - A.adjoint()) / std::complex<double>(0.0, 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(im, Eigen::EigenvaluesOnly);
  return {A, im, es.eigenvalues().cwiseAbs().maxCoeff()};
}

struct DerivationBound {
  Eigen::MatrixXcd R_k;  // sum over slots of id x .. x R x .. x id
  double norm_b;         // operator norm of R_k in the k-fold tensor geometry
};

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace detail {

// derivation extension: D_1 = M, D_{j+1} = D_j x id + id^{x j} x M
inline Eigen::MatrixXcd derivation_sum(const Eigen::MatrixXcd& M, int k) {
  const auto N = M.rows();
  Eigen::MatrixXcd D = M;
  Eigen::Index dim = N;
  for (int j = 1; j < k; ++j) {
    const Eigen::MatrixXcd idN = Eigen::MatrixXcd::Identity(N, N);
    const Eigen::MatrixXcd idD = Eigen::MatrixXcd::Identity(dim, dim);
    D = kron(D, idN) + kron(idD, M);
    dim *= N;
  }
  return D;
}

}  // namespace detail

/// Tensor-power derivation bound: R_k = sum_i id^{(i-1)} x R x id^{(k-i)}
/// with its operator norm measured in b_k = b^{x k}. The square root of b_k
/// is the k-fold Kronecker power of the square root of b, so the similarity
/// transform of R_k is the derivation extension of c R c^{-1} and the norm
/// is bounded by k ||R||_b.
inline DerivationBound tensor_power(const HermitianForm& b, const Eigen::MatrixXcd& R, int k) {
  if (k < 1) throw InputError("tensor_power: need k >= 1");
  if (!b.positive) throw InputError("tensor_power: form must be positive definite");
  const auto N = b.b.rows();
  if (R.rows() != N || R.cols() != N) throw InputError("tensor_power: dimension mismatch");
  double dim = 1.0;
  for (int j = 0; j < k; ++j) {
    dim *= static_cast<double>(N);
    if (dim > 4096.0) throw InputError("tensor_power: N^k exceeds the 4096 size guard");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b.b);
  const Eigen::MatrixXcd c = es.operatorSqrt();
  const Eigen::MatrixXcd cinv = es.operatorInverseSqrt();

  DerivationBound out;
  out.R_k = detail::derivation_sum(R, k);
  out.norm_b = detail::spectral_norm_psi(detail::derivation_sum(c * R * cinv, k));
  return out;
}

/// Principal symbol of the imaginary part along a sampled flow line:
/// Im^{b}(S0) plus the transport correction (1/2) b^{-1} H_p(b), with H_p(b)
/// realized by central differences of the sampled form. Returns one matrix
/// per interior sample.
inline std::vector<Eigen::MatrixXcd> im_symbol_along_flow(
    const std::vector<HermitianForm>& b_path, const std::vector<Eigen::MatrixXcd>& s0_path,
    double dt) {
  if (b_path.size() < 3) throw InputError("im_symbol_along_flow: need at least three samples");
  if (b_path.size() != s0_path.size())
    throw InputError("im_symbol_along_flow: path lengths differ");
  if (!(dt > 0.0)) throw InputError("im_symbol_along_flow: dt must be positive");
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(b_path.size() - 2);
  for (std::size_t i = 1; i + 1 < b_path.size(); ++i) {
    const Eigen::MatrixXcd db = (b_path[i + 1].b - b_path[i - 1].b) / (2.0 * dt);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(b_path[i].b);
    if (!lu.isInvertible()) throw DomainError("im_symbol_along_flow: singular form on the path");
    out.push_back(im_wrt(s0_path[i], b_path[i]) + 0.5 * lu.solve(db));
  }
  return out;
}

/// Random positive form c^dagger c + delta id with delta = 1e-3; seeds are
/// the caller's responsibility so runs stay reproducible.
inline HermitianForm random_positive_form(int N, Rng& rng) {
  const Eigen::MatrixXcd c = rng.complex_matrix(N, N);
  return hermitian_form(c.adjoint() * c + 1e-3 * Eigen::MatrixXcd::Identity(N, N), true);
}

/// Condition-capped variant for the factorization experiments; the delta
/// floor alone leaves occasional near-singular draws that a fixed-step
/// integrator cannot cross accurately.
inline HermitianForm random_positive_form_capped(int N, Rng& rng, double max_cond = 20.0) {
  for (;;) {
    const auto f = random_positive_form(N, rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(f.b, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().maxCoeff() <= max_cond * es.eigenvalues().minCoeff()) return f;
  }
}

}  // namespace trapcheck
