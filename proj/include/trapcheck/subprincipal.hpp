#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <quadmath.h>

#include "trapcheck/errors.hpp"
#include "trapcheck/hamiltonian_flow.hpp"
#include "trapcheck/sds_metric.hpp"

namespace trapcheck {

/// Complex 1-form fiber element in the splitting u = u_TT + u_TN alpha^{-1} dr
/// + u_N alpha dt; the TT part lives in the sphere cotangent space, realized
/// as an omega-orthogonal vector of C^{n-1}.
struct FiberVector {
  Eigen::VectorXcd v_tt;
  std::complex<double> v_tn;
  std::complex<double> v_n;
};

/// Point of the spacetime trapped set: r = r_p, xi = 0, sigma^2 = Psi^2 |eta|^2.
/// Unlike the fixed-z spatial trapped set, |eta| is free here; sigma carries
/// the sign choice.
struct GammaPointData {
  PhasePoint x;
  double sigma;
  double Psi;
  double r;
  double alpha;
};

inline GammaPointData gamma_point(const SdsParams& p, const Eigen::VectorXd& omega,
                                  const Eigen::VectorXd& eta, int sigma_sign = 1) {
  if (omega.size() != p.n - 1 || eta.size() != p.n - 1)
    throw InputError("gamma_point: omega/eta must live in R^{n-1}");
  if (sigma_sign != 1 && sigma_sign != -1) throw InputError("gamma_point: sigma_sign must be +-1");
  const double on = omega.norm();
  if (on < 1e-12) throw InputError("gamma_point: omega must be nonzero");
  const Eigen::VectorXd w = omega / on;
  Eigen::VectorXd e = eta - eta.dot(w) * w;
  if (e.norm() <= 1e-12 * eta.norm()) throw InputError("gamma_point: eta is parallel to omega");
  const auto ps = photon_sphere(p);
  const double alpha = ps.Psi_p * ps.r_p;
  const double sigma = sigma_sign * ps.Psi_p * e.norm();
  GammaPointData g{{ps.r_p, w, 0.0, e, static_cast<double>(sigma_sign)}, sigma, ps.Psi_p, ps.r_p, alpha};
  if (std::abs(g.sigma * g.sigma - g.Psi * g.Psi * e.squaredNorm()) > 1e-12 * g.sigma * g.sigma)
    throw InputError("gamma_point: trapped-set relation violated");
  return g;
}

/// Orthonormal fiber frame at a Gamma point: columns (eta_hat, e_2, ..,
/// e_{n-2}) spanning omega^perp, followed by the TN and N slots. The
/// eta-adapted first column makes the rank-one blocks of s explicit.
struct FiberFrame {
  Eigen::MatrixXd tt;  // (n-1) x (n-2), orthonormal columns, col 0 = eta_hat
};

inline FiberFrame fiber_frame(const GammaPointData& g) {
  const auto m = g.x.omega.size();
  Eigen::MatrixXd tt(m, m - 1);
  tt.col(0) = g.x.eta.normalized();
  int filled = 1;
  for (int i = 0; i < m && filled < m - 1; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(m, i);
    v -= v.dot(g.x.omega) * g.x.omega;
    for (int j = 0; j < filled; ++j) v -= v.dot(tt.col(j)) * tt.col(j);
    if (v.norm() > 1e-6) tt.col(filled++) = v.normalized();
  }
  if (filled != m - 1) throw DomainError("fiber_frame: failed to complete the TT frame");
  return {tt};
}

/// Complex n x n matrix in the ordered basis (TT frame; TN; N).
struct OperatorMatrix {
  Eigen::MatrixXcd m;
  FiberFrame frame;
};

inline Eigen::VectorXcd to_frame(const FiberVector& v, const FiberFrame& frame) {
  const auto k = frame.tt.cols();
  Eigen::VectorXcd out(k + 2);
  for (int j = 0; j < k; ++j) out[j] = frame.tt.col(j).cast<std::complex<double>>().dot(v.v_tt);
  out[k] = v.v_tn;
  out[k + 1] = v.v_n;
  return out;
}

inline FiberVector from_frame(const Eigen::VectorXcd& c, const FiberFrame& frame) {
  const auto k = frame.tt.cols();
  FiberVector v;
  v.v_tt = Eigen::VectorXcd::Zero(frame.tt.rows());
  for (int j = 0; j < k; ++j) v.v_tt += c[j] * frame.tt.col(j).cast<std::complex<double>>();
  v.v_tn = c[k];
  v.v_n = c[k + 1];
  return v;
}

/// The zeroth-order block matrix s of the subprincipal operator at Gamma:
///   s = [ 0           Psi r^2 eta   0       ]
///       [ -Psi i_eta  0             r sigma ]
///       [ 0           r sigma       0       ]
/// in the (TT, TN, N) splitting; nilpotent of degree 3 exactly on the
/// trapped set, where r^2 sigma^2 = (Psi r^2 eta) . (Psi eta).
inline OperatorMatrix s_matrix(const GammaPointData& g) {
  auto frame = fiber_frame(g);
  const auto N = frame.tt.cols() + 2;
  const double en = g.x.eta.norm();
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(N, N);
  const auto iTN = N - 2, iN = N - 1;
  s(0, iTN) = g.Psi * g.r * g.r * en;
  s(iTN, 0) = -g.Psi * en;
  s(iTN, iN) = g.r * g.sigma;
  s(iN, iTN) = g.r * g.sigma;
  return {s, frame};
}

/// Zeroth-order part of the displayed subprincipal matrix, -2 r^{-2} s.
inline OperatorMatrix subprincipal_zeroth(const GammaPointData& g) {
  auto out = s_matrix(g);
  out.m *= -2.0 / (g.r * g.r);
  return out;
}

/// Fiber form of the 1-form metric, (-r^{-2} Omega) (+) (-1) (+) 1; diagonal
/// in the orthonormal frame.
inline Eigen::MatrixXcd g_fiber_form(const GammaPointData& g, Eigen::Index N) {
  Eigen::VectorXcd d = Eigen::VectorXcd::Constant(N, -1.0 / (g.r * g.r));
  d[N - 2] = -1.0;
  d[N - 1] = 1.0;
  return d.asDiagonal();
}

/// Symmetry of the subprincipal operator with respect to the indefinite
/// fiber form G. The displayed matrix is i S_sub, so the zeroth part of
/// S_sub itself is -i times subprincipal_zeroth; the claim is that G times
/// that matrix is Hermitian. Returns the relative Hermitian defect.
/// The defect is independent of the trapped-set relation: it reflects the
/// wave operator being symmetric for G everywhere, so it stays zero under
/// sigma perturbations; off-Gamma behavior is visible in the spectrum of s
/// instead (see s_spectrum_radius).
inline double check_g_symmetry(const GammaPointData& g) {
  const auto Z = subprincipal_zeroth(g);
  const Eigen::MatrixXcd GZ =
      g_fiber_form(g, Z.m.rows()) * (std::complex<double>(0.0, -1.0) * Z.m);
  const double denom = GZ.norm();
  return (GZ - GZ.adjoint()).norm() / denom;
}

/// Largest eigenvalue modulus of the s block for given (r, Psi, |eta|, sigma).
/// The TT directions orthogonal to eta are exact kernel; on the remaining
/// (eta_hat, TN, N) block the characteristic polynomial factors as
/// lambda (lambda^2 - r^2 (sigma^2 - Psi^2 |eta|^2)), a defective triple root
/// at zero on the trapped set. Double-precision QR scatters such roots at
/// the cube root of the rounding error, so the cubic is resolved in quad
/// precision, with inputs promoted exactly.
inline double s_spectrum_radius(double r, double Psi, double eta_norm, double sigma) {
  const __float128 rq = r, pq = Psi, eq = eta_norm, sq = sigma;
  const __float128 c = rq * sq;
  const __float128 a = pq * rq * rq * eq;
  const __float128 b = pq * eq;
  const __float128 disc = c * c - a * b;  // r^2 (sigma^2 - Psi^2 |eta|^2)
  const __float128 root = sqrtq(fabsq(disc));
  return static_cast<double>(root);
}

/// Spectrum bound of s at an on-cone Gamma point: sigma re-derived as
/// Psi |eta| at working precision, which is what membership in Gamma means.
inline double s_spectrum_radius(const GammaPointData& g) {
  const __float128 pq = g.Psi;
  const __float128 eq_sq = static_cast<__float128>(g.x.eta.squaredNorm());
  const __float128 eq = sqrtq(eq_sq);
  const __float128 sq = (g.sigma >= 0 ? pq * eq : -pq * eq);
  const __float128 rq = g.r;
  const __float128 c = rq * sq;
  const __float128 a = pq * rq * rq * eq;
  const __float128 b = pq * eq;
  const __float128 disc = c * c - a * b;
  return static_cast<double>(sqrtq(fabsq(disc)));
}

struct ConjugatorPair {
  OperatorMatrix q;
  OperatorMatrix q_inv;
};

/// The change-of-basis matrix q and its closed-form inverse:
///   q = [ id                      0              0                        ]
///       [ 0                eps^{-1} Psi r^2      0                        ]
///       [ -eps^{-2}|eta|^{-1} Psi^2 r^2 i_eta  0  eps^{-2}|eta|^{-1} Psi r^3 sigma ]
/// Conjugation by q maps s to the strictly upper triangular matrix with
/// entries eps eta and eps |eta|.
inline ConjugatorPair conjugator_q(const GammaPointData& g, double eps) {
  if (!(eps > 0.0)) throw InputError("conjugator_q: eps must be positive");
  const double en = g.x.eta.norm();
  if (en <= 0.0) throw InputError("conjugator_q: q is singular at eta = 0");
  auto frame = fiber_frame(g);
  const auto N = frame.tt.cols() + 2;
  const auto iTN = N - 2, iN = N - 1;
  const double r2 = g.r * g.r;

  Eigen::MatrixXcd q = Eigen::MatrixXcd::Identity(N, N);
  q(iTN, iTN) = g.Psi * r2 / eps;
  q(iN, 0) = -g.Psi * g.Psi * r2 / (eps * eps);  // -eps^{-2} |eta|^{-1} Psi^2 r^2 i_eta
  q(iN, iN) = g.Psi * r2 * g.r * g.sigma / (eps * eps * en);

  Eigen::MatrixXcd qi = Eigen::MatrixXcd::Identity(N, N);
  qi(iTN, iTN) = eps / (g.Psi * r2);
  qi(iN, 0) = g.Psi * en / (g.r * g.sigma);
  qi(iN, iN) = eps * eps * en / (g.Psi * r2 * g.r * g.sigma);

  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff() * qi.cwiseAbs().maxCoeff());
  if ((q * qi - Eigen::MatrixXcd::Identity(N, N)).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DomainError("conjugator_q: inverse verification failed");
  return {{q, frame}, {qi, frame}};
}

/// B0-imaginary part of the conjugated zeroth-order operator, scaled by
/// 1/|sigma|. The conjugated matrix is recomputed from s directly as
/// -2 r^{-2} (q s q^{-1}); B0 = Omega (+) 1 (+) 1 is the identity in the
/// orthonormal frame, so the adjoint is the plain conjugate transpose. The
/// first-order transport terms commute with q and drop out of the imaginary
/// part.
inline double conjugated_im_norm(const GammaPointData& g, double eps) {
  const auto [q, qi] = conjugator_q(g, eps);
  const Eigen::MatrixXcd Zq = (-2.0 / (g.r * g.r)) * (q.m * s_matrix(g).m * qi.m);
  const Eigen::MatrixXcd im = (Zq - Zq.adjoint()) / std::complex<double>(0.0, 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(im);
  return es.eigenvalues().cwiseAbs().maxCoeff() / std::abs(g.sigma);
}

/// Slope of conjugated_im_norm in eps; the norm is exactly linear in eps.
inline double conjugated_im_slope(const GammaPointData& g) { return conjugated_im_norm(g, 1.0); }

struct GrowthLog {
  std::vector<double> times;
  std::vector<double> log_norms;
  double loglog_slope;  // slope of log||U|| against log(1+t) over the tail
  double exp_rate;      // slope of log||U|| against t over the tail
  bool polynomial;      // growth consistent with the nilpotent degree bound
};

namespace detail {

inline double spectral_norm(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

}  // namespace detail

/// Parallel-transport growth along the trapped geodesic. In a parallel frame
/// eta is constant, so the transport equation is the constant-coefficient
/// system dU/dt = 2 r^{-2} s U (the zeroth part of the displayed matrix is
/// -2 r^{-2} s, and parallel sections satisfy dU/dt = -Z U). An optional
/// constant perturbation L0 is added to the generator. Nilpotency caps the
/// unperturbed growth at degree 2 polynomials; perturbations with
/// non-vanishing symmetrized spectrum give exponential growth.
inline GrowthLog transport_growth(const GammaPointData& g, double T,
                                  const Eigen::MatrixXcd* L0 = nullptr, double dt = 1e-3) {
  if (!(T >= 0.0) || !(dt > 0.0)) throw InputError("transport_growth: need T >= 0, dt > 0");
  const auto s = s_matrix(g);
  const auto N = s.m.rows();
  Eigen::MatrixXcd A = (2.0 / (g.r * g.r)) * s.m;
  if (L0) {
    if (L0->rows() != N || L0->cols() != N)
      throw InputError("transport_growth: perturbation has wrong dimensions");
    A += *L0;
  }

  Eigen::MatrixXcd U = Eigen::MatrixXcd::Identity(N, N);
  const auto nsteps = static_cast<long>(std::floor(T / dt + 1e-12));
  const long stride = std::max(1L, nsteps / 2000);

  GrowthLog out;
  out.times.push_back(0.0);
  out.log_norms.push_back(std::log(detail::spectral_norm(U)));
  double acc = 0.0;
  for (long i = 1; i <= nsteps; ++i) {
    const Eigen::MatrixXcd k1 = A * U;
    const Eigen::MatrixXcd k2 = A * (U + 0.5 * dt * k1);
    const Eigen::MatrixXcd k3 = A * (U + 0.5 * dt * k2);
    const Eigen::MatrixXcd k4 = A * (U + dt * k3);
    U += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (i % stride == 0 || i == nsteps) {
      const double nv = detail::spectral_norm(U);
      out.times.push_back(i * dt);
      out.log_norms.push_back(acc + std::log(nv));
      if (nv > 1e100) {  // renormalize before anything overflows
        acc += std::log(nv);
        U /= nv;
      }
    }
  }

  std::vector<double> tl, tt, ln;
  for (std::size_t i = 0; i < out.times.size(); ++i) {
    if (out.times[i] >= 0.2 * T && out.times[i] > 0.0) {
      tl.push_back(std::log1p(out.times[i]));
      tt.push_back(out.times[i]);
      ln.push_back(out.log_norms[i]);
    }
  }
  if (tl.size() < 4) {
    out.loglog_slope = 0.0;
    out.exp_rate = 0.0;
    out.polynomial = true;
    return out;
  }
  out.loglog_slope = detail::regression_slope(tl, ln);
  out.exp_rate = detail::regression_slope(tt, ln);
  out.polynomial = out.loglog_slope <= 2.2;
  return out;
}

}  // namespace trapcheck
