#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "trapcheck/errors.hpp"
#include "trapcheck/sds_metric.hpp"

namespace trapcheck {

/// Point of the spatial phase space T*X: 1-forms written xi dr + eta domega,
/// with the sphere realized as unit vectors omega in R^{n-1} and eta a
/// covector in the same embedding, orthogonal to omega. z = +-1 is the sign
/// of the rescaled frequency.
struct PhasePoint {
  double r;
  Eigen::VectorXd omega;
  double xi;
  Eigen::VectorXd eta;
  double z;
};

inline void check_phase_point(const SdsParams& p, const PhasePoint& x) {
  if (x.omega.size() != p.n - 1 || x.eta.size() != p.n - 1)
    throw InputError("phase point: omega/eta must live in R^{n-1}");
  if (std::abs(x.omega.norm() - 1.0) > 1e-12)
    throw InputError("phase point: omega must be a unit vector");
  if (std::abs(x.eta.dot(x.omega)) > 1e-12 * std::max(1.0, x.eta.norm()))
    throw InputError("phase point: eta must be orthogonal to omega");
  if (x.z != 1.0 && x.z != -1.0) throw InputError("phase point: z must be +-1");
  if (!std::isfinite(x.r) || x.r <= 0.0) throw InputError("phase point: r must be positive");
}

/// Semiclassical principal symbol p = Delta_r xi^2 - (r^4/Delta_r) z^2 + |eta|^2.
inline double symbol_p(const SdsParams& p, const PhasePoint& x) {
  const auto mv = metric_values(p, x.r);
  if (mv.delta_r == 0.0) throw DomainError("symbol_p: r lies on a horizon");
  const double r2 = x.r * x.r;
  return mv.delta_r * x.xi * x.xi - (r2 * r2 / mv.delta_r) * (x.z * x.z) + x.eta.squaredNorm();
}

struct PhaseVelocity {
  double dr;
  double dxi;
  Eigen::VectorXd domega;
  Eigen::VectorXd deta;
};

/// Hamilton vector field of p. Radial part per the closed forms; the angular
/// part is the round-sphere geodesic field of |eta|^2 in the embedding:
/// domega = 2 eta, deta = -2 |eta|^2 omega.
inline PhaseVelocity hamilton_field(const SdsParams& p, const PhasePoint& x) {
  const auto mv = metric_values(p, x.r);
  if (mv.delta_r == 0.0) throw DomainError("hamilton_field: r lies on a horizon");
  const double r3 = x.r * x.r * x.r;
  const double ddelta = 4.0 * r3 * mv.tilde_mu + x.r * r3 * mv.tilde_mu_prime;  // Delta_r'
  const double dinv = -mv.tilde_mu_prime / (mv.tilde_mu * mv.tilde_mu);         // (r^4/Delta_r)'
  PhaseVelocity v;
  v.dr = 2.0 * mv.delta_r * x.xi;
  v.dxi = -(ddelta * x.xi * x.xi - dinv * x.z * x.z);
  v.domega = 2.0 * x.eta;
  v.deta = -2.0 * x.eta.squaredNorm() * x.omega;
  return v;
}

/// Jacobian of the radial subsystem (dr, dxi) with respect to (r, xi); on a
/// trapped trajectory this is exactly the linearization matrix at the
/// trapped set.
inline Eigen::Matrix2d normal_jacobian(const SdsParams& p, double r, double xi, double z) {
  const auto mv = metric_values(p, r);
  const double r2 = r * r, r3 = r2 * r;
  const double tm = mv.tilde_mu, tmp = mv.tilde_mu_prime;
  const double tmpp = detail::tilde_mu_second(p, r);
  const double ddelta = 4.0 * r3 * tm + r2 * r2 * tmp;
  const double d2delta = 12.0 * r2 * tm + 8.0 * r3 * tmp + r2 * r2 * tmpp;
  const double d2inv = (2.0 * tmp * tmp - tm * tmpp) / (tm * tm * tm);  // (r^4/Delta_r)''
  Eigen::Matrix2d J;
  J(0, 0) = 2.0 * ddelta * xi;
  J(0, 1) = 2.0 * mv.delta_r;
  J(1, 0) = -(d2delta * xi * xi - d2inv * z * z);
  J(1, 1) = -2.0 * ddelta * xi;
  return J;
}

/// Point of the fixed-z trapped set: r = r_p, xi = 0, |eta| = r_p^2 |z| / sqrt(Delta_r(r_p)).
inline PhasePoint trapped_point(const SdsParams& p, const Eigen::VectorXd& omega,
                                const Eigen::VectorXd& eta_dir, double z) {
  if (z != 1.0 && z != -1.0) throw InputError("trapped_point: z must be +-1");
  if (omega.size() != p.n - 1 || eta_dir.size() != p.n - 1)
    throw InputError("trapped_point: omega/eta_dir must live in R^{n-1}");
  const double on = omega.norm();
  if (on < 1e-12) throw InputError("trapped_point: omega must be nonzero");
  const Eigen::VectorXd w = omega / on;
  Eigen::VectorXd e = eta_dir - eta_dir.dot(w) * w;
  if (e.norm() <= 1e-12 * eta_dir.norm())
    throw InputError("trapped_point: eta_dir is parallel to omega");
  const auto ps = photon_sphere(p);
  const double delta_p = metric_values(p, ps.r_p).delta_r;
  const double eta_norm = ps.r_p * ps.r_p * std::abs(z) / std::sqrt(delta_p);
  return {ps.r_p, w, 0.0, e.normalized() * eta_norm, z};
}

struct Trajectory {
  std::vector<double> t;
  std::vector<PhasePoint> samples;
  double p_drift = 0.0;
  double eta_drift = 0.0;
  bool exited = false;
  double exit_time = std::numeric_limits<double>::quiet_NaN();
  std::vector<Eigen::Matrix2d> variational;  // filled when requested
};

namespace detail {

struct FlowState {
  double r, xi;
  Eigen::VectorXd omega, eta;
  Eigen::Matrix2d V;

  FlowState& axpy(double a, const FlowState& d) {
    r += a * d.r;
    xi += a * d.xi;
    omega += a * d.omega;
    eta += a * d.eta;
    V += a * d.V;
    return *this;
  }
};

inline FlowState flow_rhs(const SdsParams& p, const FlowState& s, double z, bool with_var) {
  PhasePoint x{s.r, s.omega, s.xi, s.eta, z};
  const auto v = hamilton_field(p, x);
  FlowState d{v.dr, v.dxi, v.domega, v.deta, Eigen::Matrix2d::Zero()};
  if (with_var) d.V = normal_jacobian(p, s.r, s.xi, z) * s.V;
  return d;
}

// One RK4 step, aborted (returning false, s untouched) if any stage leaves
// the radial band [r_lo, r_hi]; the flow is stiff at the horizons and a stage
// outside the band means the trajectory has escaped.
inline bool rk4_step(const SdsParams& p, FlowState& s, double z, double dt, bool with_var,
                     double r_lo, double r_hi) {
  const auto inside = [&](const FlowState& st) { return st.r > r_lo && st.r < r_hi; };
  const FlowState k1 = flow_rhs(p, s, z, with_var);
  FlowState s2 = s;
  s2.axpy(0.5 * dt, k1);
  if (!inside(s2)) return false;
  const FlowState k2 = flow_rhs(p, s2, z, with_var);
  FlowState s3 = s;
  s3.axpy(0.5 * dt, k2);
  if (!inside(s3)) return false;
  const FlowState k3 = flow_rhs(p, s3, z, with_var);
  FlowState s4 = s;
  s4.axpy(dt, k3);
  if (!inside(s4)) return false;
  const FlowState k4 = flow_rhs(p, s4, z, with_var);
  s.axpy(dt / 6.0, k1).axpy(dt / 3.0, k2).axpy(dt / 3.0, k3).axpy(dt / 6.0, k4);
  return true;
}

// Restore |omega| = 1 and eta . omega = 0 after a step. The projection alone
// would shrink |eta| by half the squared violation every step; restoring the
// pre-projection norm keeps the conserved |eta| at integrator accuracy.
inline void project_sphere(FlowState& s) {
  s.omega.normalize();
  const double en = s.eta.norm();
  s.eta -= s.eta.dot(s.omega) * s.omega;
  const double en2 = s.eta.norm();
  if (en2 > 0.0) s.eta *= en / en2;
}

}  // namespace detail

/// Fixed-step classical 4th-order integration of the Hamilton flow.
/// Trajectories leaving (r_- + margin, r_+ - margin) are truncated with the
/// exit flag set; that is physical, non-trapped points escape.
inline Trajectory integrate(const SdsParams& p, const PhasePoint& x0, double T, double dt,
                            bool with_variational = false) {
  check_phase_point(p, x0);
  if (!(dt > 0.0) || !(T >= 0.0)) throw InputError("integrate: need dt > 0 and T >= 0");
  const auto h = horizons(p);
  const double margin = 1e-3 * (h.r_plus - h.r_minus);
  const double r_lo = h.r_minus + margin, r_hi = h.r_plus - margin;
  if (x0.r <= r_lo || x0.r >= r_hi) throw DomainError("integrate: start point is outside the working band");

  const auto nsteps = static_cast<long>(std::floor(T / dt + 1e-12));
  detail::FlowState s{x0.r, x0.xi, x0.omega, x0.eta, Eigen::Matrix2d::Identity()};

  Trajectory out;
  out.t.reserve(nsteps + 1);
  out.samples.reserve(nsteps + 1);
  if (with_variational) out.variational.reserve(nsteps + 1);

  const double p0 = symbol_p(p, x0);
  const double eta0 = x0.eta.norm();

  const auto push = [&](double t) {
    out.t.push_back(t);
    out.samples.push_back({s.r, s.omega, s.xi, s.eta, x0.z});
    if (with_variational) out.variational.push_back(s.V);
    out.p_drift = std::max(out.p_drift, std::abs(symbol_p(p, out.samples.back()) - p0));
    out.eta_drift = std::max(out.eta_drift, std::abs(s.eta.norm() - eta0));
  };

  push(0.0);
  for (long i = 1; i <= nsteps; ++i) {
    if (!detail::rk4_step(p, s, x0.z, dt, with_variational, r_lo, r_hi)) {
      out.exited = true;
      out.exit_time = (i - 1) * dt;
      break;
    }
    detail::project_sphere(s);
    push(i * dt);
    if (s.r <= r_lo || s.r >= r_hi) {
      out.exited = true;
      out.exit_time = i * dt;
      break;
    }
  }
  return out;
}

struct EscapeGridSpec {
  int nr = 100;
  int nxi = 100;
  double xi_max = 0.0;  // 0 picks 1.2x the trapped-set momentum scale
  double z = 1.0;
  double gamma_exclusion = 1e-9;  // distance below which a point counts as on the trapped set
};

struct EscapeViolation {
  double r, xi;
  double hpF, hp2F;
};

/// H_p F for the escape function F = (r - r_p)^2.
inline double escape_HpF(const SdsParams& p, double r, double xi) {
  const double r_p = photon_sphere(p).r_p;
  return 4.0 * (r - r_p) * metric_values(p, r).delta_r * xi;
}

/// H_p^2 F by the analytic chain rule: with H_p r = 2 Delta xi,
/// H_p^2 r = 2 Delta (Delta' xi^2 + (r^4/Delta)' z^2) and
/// H_p^2 F = 2 (H_p r)^2 + 2 (r - r_p) H_p^2 r.
inline double escape_Hp2F(const SdsParams& p, double r, double xi, double z) {
  const double r_p = photon_sphere(p).r_p;
  const auto mv = metric_values(p, r);
  const double r3 = r * r * r;
  const double ddelta = 4.0 * r3 * mv.tilde_mu + r * r3 * mv.tilde_mu_prime;
  const double dinv = -mv.tilde_mu_prime / (mv.tilde_mu * mv.tilde_mu);
  const double hpr = 2.0 * mv.delta_r * xi;
  const double hp2r = 2.0 * mv.delta_r * (ddelta * xi * xi + dinv * z * z);
  return 2.0 * hpr * hpr + 2.0 * (r - r_p) * hp2r;
}

/// Scan the characteristic set {p = 0} over a grid in (r, xi) and verify the
/// escape-function dichotomy: wherever H_p F = 0 away from the trapped set,
/// H_p^2 F must be strictly positive. Grid rows at xi = 0 and the column at
/// r = r_p are always included since those are the only loci where H_p F
/// vanishes. Returns the list of violations; empty means the dichotomy holds.
inline std::vector<EscapeViolation> escape_scan(const SdsParams& p,
                                                const EscapeGridSpec& spec = {}) {
  if (spec.nr < 2 || spec.nxi < 2) throw InputError("escape_scan: grid too small");
  const auto h = horizons(p);
  const auto ps = photon_sphere(p);
  const double margin = 1e-3 * (h.r_plus - h.r_minus);
  const double r_lo = h.r_minus + margin, r_hi = h.r_plus - margin;
  const double delta_p = metric_values(p, ps.r_p).delta_r;
  const double xi_scale = ps.r_p * ps.r_p * std::abs(spec.z) / delta_p;
  const double xi_max = spec.xi_max > 0.0 ? spec.xi_max : 1.2 * xi_scale;

  std::vector<double> rs, xis;
  rs.reserve(spec.nr + 1);
  xis.reserve(spec.nxi + 1);
  for (int i = 0; i < spec.nr; ++i) rs.push_back(r_lo + (r_hi - r_lo) * i / (spec.nr - 1.0));
  rs.push_back(ps.r_p);
  for (int j = 0; j < spec.nxi; ++j) xis.push_back(-xi_max + 2.0 * xi_max * j / (spec.nxi - 1.0));
  xis.push_back(0.0);

  const double hpf_zero_tol = 1e-10 * std::max(1.0, 4.0 * delta_p * xi_scale);

  std::vector<EscapeViolation> violations;
  for (const double r : rs) {
    const auto mv = metric_values(p, r);
    const double r4 = mv.delta_r / mv.tilde_mu;  // r^4
    for (const double xi : xis) {
      // characteristic constraint: |eta|^2 = (r^4/Delta) z^2 - Delta xi^2 >= 0
      const double eta2 = (r4 / mv.delta_r) * spec.z * spec.z - mv.delta_r * xi * xi;
      if (eta2 < 0.0) continue;
      const double hpf = escape_HpF(p, r, xi);
      if (std::abs(hpf) > hpf_zero_tol) continue;
      if (std::hypot(r - ps.r_p, xi) <= spec.gamma_exclusion) continue;  // on the trapped set
      const double hp2f = escape_Hp2F(p, r, xi, spec.z);
      if (!(hp2f > 0.0)) violations.push_back({r, xi, hpf, hp2f});
    }
  }
  return violations;
}

struct LinearizationResult {
  Eigen::Matrix2d matrix;
  double eig_positive;           // from the matrix, numerically
  double eig_closed_form;        // 2 r_p ((n-1)/(1 - (n-1)/(n-3) r_p^2 lambda))^{1/2}
  double nu_min_closed_form;     // 2 r_p^{-1} ((n-1)/(1 - (n-1)/(n-3) r_p^2 lambda))^{1/2}
};

/// Linearization of the flow at the trapped set in the normal coordinates
/// (r - r_p, xi). Both the matrix eigenvalue and the closed form are
/// returned, together with the nu_min closed form, which carries r_p^{-1}
/// where the eigenvalue carries r_p; the numeric Lyapunov rate of the raw
/// H_p flow arbitrates between the two normalizations (see lyapunov_normal).
inline LinearizationResult linearization(const SdsParams& p, double z = 1.0) {
  const auto ps = photon_sphere(p);
  const double tm = metric_values(p, ps.r_p).tilde_mu;
  const double rp4 = detail::ipow(ps.r_p, 4);
  Eigen::Matrix2d M;
  M << 0.0, 2.0 * rp4 * tm, 2.0 * (p.n - 3) / (rp4 * tm * tm) * z * z, 0.0;

  const Eigen::EigenSolver<Eigen::Matrix2d> es(M);
  double eig = 0.0;
  for (int i = 0; i < 2; ++i) eig = std::max(eig, es.eigenvalues()[i].real());

  const double s =
      std::sqrt((p.n - 1) / (1.0 - static_cast<double>(p.n - 1) / (p.n - 3) * ps.r_p * ps.r_p * p.lambda_small));
  return {M, eig, 2.0 * ps.r_p * s, 2.0 / ps.r_p * s};
}

struct LyapunovResult {
  double rate;
  bool window_warning;
};

namespace detail {

inline double regression_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto n = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  return sxy / sxx;
}

}  // namespace detail

/// Top Lyapunov exponent of the co-integrated (r, xi) variational flow along
/// a trapped trajectory, by least-squares fit of log ||V(t)|| with the first
/// 20% discarded as transient. V is renormalized every step so the growth
/// never overflows.
inline LyapunovResult lyapunov_normal(const SdsParams& p, double T, double dt,
                                      const Eigen::VectorXd& omega, const Eigen::VectorXd& eta_dir,
                                      double z = 1.0) {
  const PhasePoint x0 = trapped_point(p, omega, eta_dir, z);
  const auto h = horizons(p);
  const auto nsteps = static_cast<long>(std::floor(T / dt + 1e-12));
  detail::FlowState s{x0.r, x0.xi, x0.omega, x0.eta, Eigen::Matrix2d::Identity()};
  std::vector<double> ts, logs;
  ts.reserve(nsteps);
  logs.reserve(nsteps);
  double acc = 0.0;
  for (long i = 1; i <= nsteps; ++i) {
    if (!detail::rk4_step(p, s, z, dt, true, h.r_minus, h.r_plus)) break;
    detail::project_sphere(s);
    const double nv = s.V.norm();
    acc += std::log(nv);
    s.V /= nv;
    ts.push_back(i * dt);
    logs.push_back(acc);
  }
  std::vector<double> tw, lw;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] >= 0.2 * T) {
      tw.push_back(ts[i]);
      lw.push_back(logs[i]);
    }
  }
  if (tw.size() < 8) return {0.0, true};
  const double rate = detail::regression_slope(tw, lw);
  const bool warn = tw.size() < 32 || rate * 0.8 * T < 3.0;  // fewer than ~3 e-folds
  return {rate, warn};
}

inline LyapunovResult lyapunov_normal(const SdsParams& p, double T, double dt = 1e-3) {
  const int m = p.n - 1;
  return lyapunov_normal(p, T, dt, Eigen::VectorXd::Unit(m, 0), Eigen::VectorXd::Unit(m, 1));
}

/// Expansion rate of the flow within the trapped set: the linearized sphere
/// system (domega, deta) restricted to directions tangent to the fixed-|eta|
/// trapped set, measured in the scaled coordinates (domega, deta/|eta|) in
/// which the unperturbed flow acts by rotations. Spherical symmetry makes
/// this rate vanish.
inline LyapunovResult lyapunov_tangential(const SdsParams& p, double T, double dt,
                                          const Eigen::VectorXd& omega,
                                          const Eigen::VectorXd& eta_dir, double z = 1.0) {
  const PhasePoint x0 = trapped_point(p, omega, eta_dir, z);
  const int m = p.n - 1;
  const double en = x0.eta.norm();
  const Eigen::VectorXd eta_hat = x0.eta / en;

  // orthonormal completion of {omega, eta_hat} inside R^{n-1}
  std::vector<Eigen::VectorXd> comp;
  for (int i = 0; i < m && static_cast<int>(comp.size()) < m - 2; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(m, i);
    e -= e.dot(x0.omega) * x0.omega;
    e -= e.dot(eta_hat) * eta_hat;
    for (const auto& c : comp) e -= e.dot(c) * c;
    if (e.norm() > 1e-6) comp.push_back(e.normalized());
  }

  // basis of T(Gamma ∩ {|eta| const}): the flow direction plus, for every
  // unit e orthogonal to both omega and eta, a base rotation and a momentum
  // rotation
  std::vector<Eigen::VectorXd> dw, de;
  dw.push_back(2.0 * x0.eta);
  de.push_back(-2.0 * en * en * x0.omega);
  for (const auto& e : comp) {
    dw.push_back(e);
    de.push_back(Eigen::VectorXd::Zero(m));
    dw.push_back(Eigen::VectorXd::Zero(m));
    de.push_back(en * e);
  }

  const int cols = static_cast<int>(dw.size());
  Eigen::MatrixXd W(2 * m, cols);
  for (int c = 0; c < cols; ++c) {
    W.block(0, c, m, 1) = dw[c];
    W.block(m, c, m, 1) = de[c];
  }

  // integrate the linearized sphere system along the trapped geodesic
  Eigen::VectorXd w = x0.omega, eta = x0.eta;
  const auto rhs = [&](const Eigen::VectorXd& ww, const Eigen::VectorXd& ee,
                       const Eigen::MatrixXd& M) {
    Eigen::MatrixXd d(2 * m, cols);
    for (int c = 0; c < cols; ++c) {
      const Eigen::VectorXd dwc = M.block(0, c, m, 1);
      const Eigen::VectorXd dec = M.block(m, c, m, 1);
      d.block(0, c, m, 1) = 2.0 * dec;
      d.block(m, c, m, 1) = -4.0 * ee.dot(dec) * ww - 2.0 * ee.squaredNorm() * dwc;
    }
    return d;
  };
  const auto sphere_rhs = [&](const Eigen::VectorXd& ww, const Eigen::VectorXd& ee) {
    return std::make_pair(Eigen::VectorXd(2.0 * ee), Eigen::VectorXd(-2.0 * ee.squaredNorm() * ww));
  };

  const auto nsteps = static_cast<long>(std::floor(T / dt + 1e-12));
  std::vector<double> ts, logs;
  for (long i = 1; i <= nsteps; ++i) {
    // RK4 on the joint system (omega, eta, W)
    const auto [k1w, k1e] = sphere_rhs(w, eta);
    const Eigen::MatrixXd K1 = rhs(w, eta, W);
    const auto [k2w, k2e] = sphere_rhs(w + 0.5 * dt * k1w, eta + 0.5 * dt * k1e);
    const Eigen::MatrixXd K2 = rhs(w + 0.5 * dt * k1w, eta + 0.5 * dt * k1e, W + 0.5 * dt * K1);
    const auto [k3w, k3e] = sphere_rhs(w + 0.5 * dt * k2w, eta + 0.5 * dt * k2e);
    const Eigen::MatrixXd K3 = rhs(w + 0.5 * dt * k2w, eta + 0.5 * dt * k2e, W + 0.5 * dt * K2);
    const auto [k4w, k4e] = sphere_rhs(w + dt * k3w, eta + dt * k3e);
    const Eigen::MatrixXd K4 = rhs(w + dt * k3w, eta + dt * k3e, W + dt * K3);
    w += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    eta += dt / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e);
    W += dt / 6.0 * (K1 + 2.0 * K2 + 2.0 * K3 + K4);
    w.normalize();
    const double base_norm = eta.norm();
    eta -= eta.dot(w) * w;
    eta *= base_norm / eta.norm();

    // re-project the columns onto the tangent distribution of the
    // fixed-|eta| trapped set; leakage into the |eta|-shear direction would
    // otherwise grow secularly
    for (int c = 0; c < cols; ++c) {
      Eigen::VectorXd du = W.block(0, c, m, 1);
      Eigen::VectorXd dv = W.block(m, c, m, 1);
      du -= du.dot(w) * w;
      dv -= (dv.dot(w) + du.dot(eta)) * w;
      dv -= dv.dot(eta) / eta.squaredNorm() * eta;
      W.block(0, c, m, 1) = du;
      W.block(m, c, m, 1) = dv;
    }

    Eigen::MatrixXd Wscaled = W;
    Wscaled.block(m, 0, m, cols) /= en;
    ts.push_back(i * dt);
    logs.push_back(std::log(Wscaled.jacobiSvd().singularValues()(0)));
  }
  std::vector<double> tw, lw;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] >= 0.2 * T) {
      tw.push_back(ts[i]);
      lw.push_back(logs[i]);
    }
  }
  if (tw.size() < 8) return {0.0, true};
  return {detail::regression_slope(tw, lw), false};
}

inline LyapunovResult lyapunov_tangential(const SdsParams& p, double T, double dt = 1e-3) {
  const int m = p.n - 1;
  return lyapunov_tangential(p, T, dt, Eigen::VectorXd::Unit(m, 0), Eigen::VectorXd::Unit(m, 1));
}

/// Parallel transport of a sphere-tangent vector v0 along the geodesic
/// generated by the |eta|^2 Hamilton flow from (omega0, eta). Closed form:
/// the eta-component co-rotates with the geodesic frame, the rest is frozen.
/// This realizes dv/dt = -(v . domega/dt) omega in the embedding.
inline Eigen::VectorXd sphere_transport(const Eigen::VectorXd& omega0, const Eigen::VectorXd& eta,
                                        double t, const Eigen::VectorXd& v0) {
  if (std::abs(omega0.norm() - 1.0) > 1e-9) throw InputError("sphere_transport: omega0 must be unit");
  if (std::abs(eta.dot(omega0)) > 1e-9 * std::max(1.0, eta.norm()))
    throw InputError("sphere_transport: eta must be orthogonal to omega0");
  if (std::abs(v0.dot(omega0)) > 1e-9 * std::max(1.0, v0.norm()))
    throw InputError("sphere_transport: v0 must be tangent at omega0");
  const double en = eta.norm();
  if (en == 0.0) return v0;
  const Eigen::VectorXd eta_hat = eta / en;
  const double theta = 2.0 * en * t;  // the |eta|^2 flow traverses the geodesic at speed 2|eta|
  const Eigen::VectorXd eta_hat_t = eta_hat * std::cos(theta) - omega0 * std::sin(theta);
  const double c = v0.dot(eta_hat);
  return v0 + c * (eta_hat_t - eta_hat);
}

}  // namespace trapcheck
