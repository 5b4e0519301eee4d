#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "trapcheck/errors.hpp"

namespace trapcheck {

/// Static spherically symmetric black hole with positive cosmological
/// constant, in n >= 4 spacetime dimensions. lambda_small is the rescaled
/// cosmological constant 2*Lambda/((n-2)(n-1)) that enters the metric
/// function mu = 1 - 2*mass/r^{n-3} - lambda_small*r^2.
struct SdsParams {
  int n;
  double mass;
  double Lambda;
  double lambda_small;
};

namespace detail {

inline double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace detail

inline SdsParams make_params(int n, double mass, double Lambda) {
  if (n < 4) throw InputError("make_params: spacetime dimension n must be >= 4");
  if (!std::isfinite(mass) || mass <= 0.0)
    throw InputError("make_params: mass must be positive and finite");
  if (!std::isfinite(Lambda) || Lambda <= 0.0)
    throw InputError("make_params: Lambda must be positive and finite");
  const double lam = 2.0 * Lambda / (static_cast<double>(n - 2) * (n - 1));
  return {n, mass, Lambda, lam};
}

struct ValidityReport {
  bool ok;
  double margin;  // rhs - lhs of the nondegeneracy inequality
};

/// Nondegeneracy: mass^2 * lambda^{n-3} < (n-3)^{n-3} / (n-1)^{n-1}.
/// Exactly when this holds, mu has two positive roots r_- < r_+.
inline ValidityReport validate_params(const SdsParams& p) {
  if (p.n < 4 || !std::isfinite(p.mass) || p.mass <= 0.0 || !std::isfinite(p.lambda_small) ||
      p.lambda_small <= 0.0)
    throw InputError("validate_params: non-finite or non-positive parameters");
  const double lhs = p.mass * p.mass * detail::ipow(p.lambda_small, p.n - 3);
  const double rhs =
      detail::ipow(static_cast<double>(p.n - 3), p.n - 3) / detail::ipow(static_cast<double>(p.n - 1), p.n - 1);
  return {lhs < rhs, rhs - lhs};
}

/// Largest lambda_small still compatible with two horizons, at the given n
/// and mass. Useful for sweeps toward the degenerate limit.
inline double critical_lambda_small(int n, double mass) {
  const double rhs =
      detail::ipow(static_cast<double>(n - 3), n - 3) / detail::ipow(static_cast<double>(n - 1), n - 1);
  return std::pow(rhs / (mass * mass), 1.0 / (n - 3));
}

inline double lambda_cosmo_from_small(int n, double lambda_small) {
  return 0.5 * lambda_small * (n - 2) * (n - 1);
}

struct MetricValues {
  double mu;
  double mu_prime;
  double tilde_mu;        // mu / r^2
  double tilde_mu_prime;  // -2 r^{-n} (r^{n-3} - (n-1) mass)
  double delta_r;         // r^2 mu
  std::optional<double> alpha;  // sqrt(mu), absent where mu <= 0
};

inline MetricValues metric_values(const SdsParams& p, double r) {
  if (!std::isfinite(r) || r <= 0.0) throw DomainError("metric_values: r must be positive");
  const int n = p.n;
  const double rn3 = detail::ipow(r, n - 3);
  const double mu = 1.0 - 2.0 * p.mass / rn3 - p.lambda_small * r * r;
  const double mu_prime = 2.0 * (n - 3) * p.mass / (rn3 * r) - 2.0 * p.lambda_small * r;
  const double tilde_mu = mu / (r * r);
  const double tilde_mu_prime = -2.0 * (rn3 - (n - 1) * p.mass) / (rn3 * r * r * r);
  const double delta_r = r * r * mu;
  std::optional<double> alpha;
  if (mu > 0.0) alpha = std::sqrt(mu);
  return {mu, mu_prime, tilde_mu, tilde_mu_prime, delta_r, alpha};
}

namespace detail {

// Second derivative of tilde_mu; needed by the flow linearization.
inline double tilde_mu_second(const SdsParams& p, double r) {
  const double r4 = ipow(r, 4);
  return 6.0 / r4 - 2.0 * p.n * (p.n - 1) * p.mass / (ipow(r, p.n - 3) * r4);
}

// The unique root of tilde_mu in [lo, hi]; requires opposite signs at the
// ends. Bisection with Newton acceleration, relative tolerance 1e-13.
inline double radial_root(const SdsParams& p, double lo, double hi) {
  double flo = metric_values(p, lo).tilde_mu;
  double fhi = metric_values(p, hi).tilde_mu;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw DomainError("radial_root: bracket does not change sign");
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 300; ++it) {
    const auto mv = metric_values(p, x);
    if (mv.tilde_mu == 0.0) return x;
    if ((mv.tilde_mu > 0.0) == (flo > 0.0)) {
      lo = x;
      flo = mv.tilde_mu;
    } else {
      hi = x;
      fhi = mv.tilde_mu;
    }
    double next = x - mv.tilde_mu / mv.tilde_mu_prime;
    if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-13 * x || hi - lo <= 1e-13 * lo) return next;
    x = next;
  }
  return x;
}

}  // namespace detail

struct PhotonSphere {
  double r_p;    // ((n-1) mass)^{1/(n-3)}
  double Psi_p;  // alpha(r_p) / r_p
};

inline PhotonSphere photon_sphere(const SdsParams& p) {
  if (!validate_params(p).ok)
    throw NoHorizonError("photon_sphere: nondegeneracy condition violated");
  const double r_p = std::pow((p.n - 1) * p.mass, 1.0 / (p.n - 3));
  const auto mv = metric_values(p, r_p);
  return {r_p, *mv.alpha / r_p};
}

struct HorizonPair {
  double r_minus;
  double r_plus;
};

/// Both positive roots of mu. tilde_mu is strictly monotone on each side of
/// r_p, so the brackets (eps, r_p) and (r_p, 2/sqrt(lambda)) are guaranteed
/// to isolate exactly one root each.
inline HorizonPair horizons(const SdsParams& p) {
  if (!validate_params(p).ok)
    throw NoHorizonError("horizons: M^2 lambda^{n-3} >= (n-3)^{n-3}/(n-1)^{n-1}");
  const double r_p = std::pow((p.n - 1) * p.mass, 1.0 / (p.n - 3));
  double lo = 0.5 * r_p;
  while (metric_values(p, lo).tilde_mu >= 0.0) lo *= 0.5;  // tilde_mu -> -inf as r -> 0
  const double r_big = 2.0 / std::sqrt(p.lambda_small);    // tilde_mu(r_big) < 0 always
  return {detail::radial_root(p, lo, r_p), detail::radial_root(p, r_p, r_big)};
}

struct BetaPair {
  double beta_minus;
  double beta_plus;
};

/// beta_{+-} = -+ 2 / mu'(r_{+-}); positive at both horizons since mu' > 0 at
/// r_- and mu' < 0 at r_+.
inline BetaPair beta_pm(const SdsParams& p) {
  const auto h = horizons(p);
  return {2.0 / metric_values(p, h.r_minus).mu_prime,
          -2.0 / metric_values(p, h.r_plus).mu_prime};
}

/// Gamma^k_{ij} values at one base point, flat-indexed. The convention string
/// records what the indices mean.
class ChristoffelTable {
 public:
  ChristoffelTable(int dim, std::string convention)
      : dim_(dim), convention_(std::move(convention)),
        c_(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}

  double& operator()(int k, int i, int j) {
    return c_[(static_cast<std::size_t>(k) * dim_ + i) * dim_ + j];
  }
  double operator()(int k, int i, int j) const {
    return c_[(static_cast<std::size_t>(k) * dim_ + i) * dim_ + j];
  }
  int dim() const { return dim_; }
  const std::string& convention() const { return convention_; }

 private:
  int dim_;
  std::string convention_;
  std::vector<double> c_;
};

namespace detail {

inline void check_unit(const Eigen::VectorXd& omega, int expected_dim, const char* where) {
  if (omega.size() != expected_dim) throw InputError(std::string(where) + ": omega has wrong dimension");
  if (std::abs(omega.norm() - 1.0) > 1e-9) throw InputError(std::string(where) + ": omega must be a unit vector");
}

}  // namespace detail

// Sphere points are unit vectors in R^{n-1}; sphere indices refer to the
// gnomonic chart u -> (omega + sum u_a E_a)/sqrt(1+|u|^2) centered at omega,
// which is a normal chart: the round metric is delta_ab at u = 0 with
// vanishing first derivatives, so the sphere's own symbols drop out at the
// base point.

/// Christoffel symbols of the spatial slice h = alpha^{-2} dr^2 + r^2 domega^2
/// at (r, omega). Index 0 is r, indices 1..n-2 are the sphere chart.
inline ChristoffelTable christoffel_spatial(const SdsParams& p, double r,
                                            const Eigen::VectorXd& omega) {
  const auto mv = metric_values(p, r);
  if (!mv.alpha) throw DomainError("christoffel_spatial: mu <= 0 at this radius");
  detail::check_unit(omega, p.n - 1, "christoffel_spatial");
  const double alpha = *mv.alpha;
  const double alpha_prime = 0.5 * mv.mu_prime / alpha;
  const int d = p.n - 1;
  ChristoffelTable G(d, "spatial slice; index 0 = r, 1..n-2 = gnomonic sphere chart at omega");
  G(0, 0, 0) = -alpha_prime / alpha;
  for (int a = 1; a < d; ++a) {
    G(0, a, a) = -r * mv.mu;  // -r alpha^2 (domega^2)_{ab}; the chart metric is delta at u = 0
    G(a, 0, a) = 1.0 / r;
    G(a, a, 0) = 1.0 / r;
  }
  return G;
}

/// Christoffel symbols of the spacetime alpha^2 dt^2 - h at (r, omega).
/// Index 0 is t, index 1 is r, indices 2..n-1 are the sphere chart.
inline ChristoffelTable christoffel_spacetime(const SdsParams& p, double r,
                                              const Eigen::VectorXd& omega) {
  const auto spatial = christoffel_spatial(p, r, omega);
  const auto mv = metric_values(p, r);
  const double alpha = *mv.alpha;
  const double alpha_prime = 0.5 * mv.mu_prime / alpha;
  const int d = p.n;
  ChristoffelTable G(d, "spacetime; index 0 = t, 1 = r, 2..n-1 = gnomonic sphere chart at omega");
  G(0, 0, 1) = alpha_prime / alpha;
  G(0, 1, 0) = alpha_prime / alpha;
  G(1, 0, 0) = mv.mu * alpha * alpha_prime;  // alpha h^{rr} alpha' = alpha^3 alpha'
  for (int k = 0; k < d - 1; ++k)
    for (int i = 0; i < d - 1; ++i)
      for (int j = 0; j < d - 1; ++j) G(k + 1, i + 1, j + 1) = spatial(k, i, j);
  return G;
}

/// Round metric of S^{n-2} in the gnomonic chart, evaluated at chart
/// coordinates u; equals the identity at u = 0.
inline Eigen::MatrixXd sphere_chart_metric(const Eigen::VectorXd& u) {
  const auto d = u.size();
  const double s = 1.0 + u.squaredNorm();
  return (s * Eigen::MatrixXd::Identity(d, d) - u * u.transpose()) / (s * s);
}

/// Spatial metric h in the chart (r, u); block diag(1/mu, r^2 * round(u)).
inline Eigen::MatrixXd spatial_metric_chart(const SdsParams& p, double r,
                                            const Eigen::VectorXd& u) {
  const auto mv = metric_values(p, r);
  if (!(mv.mu > 0.0)) throw DomainError("spatial_metric_chart: mu <= 0 at this radius");
  const int d = p.n - 1;
  if (u.size() != d - 1) throw InputError("spatial_metric_chart: chart vector has wrong dimension");
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  h(0, 0) = 1.0 / mv.mu;
  h.block(1, 1, d - 1, d - 1) = r * r * sphere_chart_metric(u);
  return h;
}

/// Spacetime metric mu dt^2 - h in the chart (t, r, u); t-independent.
inline Eigen::MatrixXd spacetime_metric_chart(const SdsParams& p, double r,
                                              const Eigen::VectorXd& u) {
  const int d = p.n;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
  g(0, 0) = metric_values(p, r).mu;
  g.block(1, 1, d - 1, d - 1) = -spatial_metric_chart(p, r, u);
  return g;
}

}  // namespace trapcheck
