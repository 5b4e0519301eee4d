#pragma once

// The acceptance suite: every release-gating property of the library, each
// with its tolerance pinned in code, shared between the standalone runner
// and the report CLI. Oracles here (plain bisection, closed forms recomputed
// from scratch) are kept independent of the library paths they check.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "trapcheck/hamiltonian_flow.hpp"
#include "trapcheck/psi_inner.hpp"
#include "trapcheck/random.hpp"
#include "trapcheck/sds_metric.hpp"
#include "trapcheck/subprincipal.hpp"

namespace trapcheck {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double runtime_seconds = 0.0;  // wall time; excluded from deterministic reports
  double runtime_bound = 0.0;
  bool runtime_ok = false;
  std::string detail;  // deterministic numbers only
};

struct AcceptanceOptions {
  bool quick = false;
  std::uint64_t seed = 20240801;
  int base_n = 4;
  double base_mass = 1.0;
  double base_Lambda = 0.03;
};

namespace acceptance_detail {

inline std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

inline SdsParams params_at_fraction(int n, double mass, double frac) {
  const double lam = frac * critical_lambda_small(n, mass);
  return make_params(n, mass, lambda_cosmo_from_small(n, lam));
}

inline GammaPointData random_gamma_point(const SdsParams& p, Rng& rng, double eta_lo = 0.5,
                                         double eta_hi = 2.0) {
  const int m = p.n - 1;
  for (;;) {
    const Eigen::VectorXd omega = rng.unit_vector(m);
    Eigen::VectorXd eta = rng.unit_vector(m);
    eta -= eta.dot(omega) * omega;
    if (eta.norm() < 1e-3) continue;
    eta = eta.normalized() * rng.uniform(eta_lo, eta_hi);
    return gamma_point(p, omega, eta, rng.coin() ? 1 : -1);
  }
}

// --- criterion bodies -------------------------------------------------------

inline CriterionResult c1_photon_sphere(const AcceptanceOptions& opt) {
  CriterionResult res{1, "photon_sphere_closed_form"};
  res.runtime_bound = 1.0;
  double worst_closed = 0.0, worst_oracle = 0.0, worst_stationarity = 0.0;
  const std::vector<int> ns = opt.quick ? std::vector<int>{4, 5} : std::vector<int>{4, 5, 6, 7};
  const std::vector<double> masses =
      opt.quick ? std::vector<double>{1.0} : std::vector<double>{0.5, 1.0, 2.0};
  for (int n : ns) {
    for (double mass : masses) {
      const auto p = params_at_fraction(n, mass, 0.4);
      const auto ps = photon_sphere(p);
      const double closed = std::pow((n - 1) * mass, 1.0 / (n - 3));
      worst_closed = std::max(worst_closed, std::abs(ps.r_p - closed) / closed);

      // independent oracle: bisect tilde_mu' on a bracket around the root
      const double oracle = [&] {
        double lo = 0.5 * closed, hi = 2.0 * closed;
        double flo = metric_values(p, lo).tilde_mu_prime;
        for (int i = 0; i < 200; ++i) {
          const double mid = 0.5 * (lo + hi);
          const double fm = metric_values(p, mid).tilde_mu_prime;
          if (fm == 0.0) return mid;
          if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        return 0.5 * (lo + hi);
      }();
      worst_oracle = std::max(worst_oracle, std::abs(ps.r_p - oracle) / closed);

      const double scale = std::max(1.0, std::abs(detail::tilde_mu_second(p, ps.r_p)) * ps.r_p);
      worst_stationarity =
          std::max(worst_stationarity, std::abs(metric_values(p, ps.r_p).tilde_mu_prime) / scale);
    }
  }
  res.passed = worst_closed <= 1e-12 && worst_oracle <= 1e-12 && worst_stationarity <= 1e-12;
  res.detail = fmt("closed_form_rel=%.3e oracle_rel=%.3e stationarity=%.3e", worst_closed,
                   worst_oracle, worst_stationarity);
  return res;
}

inline CriterionResult c2_horizons(const AcceptanceOptions& opt) {
  CriterionResult res{2, "horizon_roots_bisection"};
  res.runtime_bound = 1.0;
  double worst_residual = 0.0, worst_oracle = 0.0;
  int sets = 0;
  const std::vector<double> fracs =
      opt.quick ? std::vector<double>{0.3, 0.8} : std::vector<double>{0.2, 0.5, 0.8, 0.95, 0.99};
  for (int n : {4, 5, 6, 7}) {
    const double mass = 0.5 + 0.5 * (n - 4);
    for (double frac : fracs) {
      const auto p = params_at_fraction(n, mass, frac);
      const auto h = horizons(p);
      ++sets;
      for (double r : {h.r_minus, h.r_plus}) {
        const auto mv = metric_values(p, r);
        worst_residual = std::max(worst_residual,
                                  std::abs(mv.mu) / std::max(1.0, std::abs(mv.mu_prime)));
      }
      const double r_p = photon_sphere(p).r_p;
      double lo = 0.5 * r_p;
      while (metric_values(p, lo).tilde_mu >= 0.0) lo *= 0.5;
      const double om = [&] {  // plain bisection oracle, no Newton
        double a = lo, b = r_p;
        double fa = metric_values(p, a).tilde_mu;
        for (int i = 0; i < 200; ++i) {
          const double mid = 0.5 * (a + b);
          const double fm = metric_values(p, mid).tilde_mu;
          if ((fm > 0.0) == (fa > 0.0)) {
            a = mid;
            fa = fm;
          } else {
            b = mid;
          }
        }
        return 0.5 * (a + b);
      }();
      const double op = [&] {
        double a = r_p, b = 2.0 / std::sqrt(p.lambda_small);
        double fa = metric_values(p, a).tilde_mu;
        for (int i = 0; i < 200; ++i) {
          const double mid = 0.5 * (a + b);
          const double fm = metric_values(p, mid).tilde_mu;
          if ((fm > 0.0) == (fa > 0.0)) {
            a = mid;
            fa = fm;
          } else {
            b = mid;
          }
        }
        return 0.5 * (a + b);
      }();
      worst_oracle = std::max({worst_oracle, std::abs(h.r_minus - om) / om,
                               std::abs(h.r_plus - op) / op});
    }
  }

  // near-critical: the gap shrinks monotonically
  bool monotone = true;
  double prev = std::numeric_limits<double>::infinity();
  for (double frac : {0.9, 0.99, 0.999, 0.9999}) {
    const auto h = horizons(params_at_fraction(4, 1.0, frac));
    const double gap = h.r_plus - h.r_minus;
    monotone = monotone && gap > 0.0 && gap < prev;
    prev = gap;
  }

  res.passed = worst_residual <= 1e-12 && worst_oracle <= 1e-12 && monotone;
  res.detail = fmt("sets=%d mu_residual=%.3e oracle_rel=%.3e near_critical_monotone=%d", sets,
                   worst_residual, worst_oracle, monotone ? 1 : 0);
  return res;
}

inline CriterionResult c3_linearization(const AcceptanceOptions& opt) {
  CriterionResult res{3, "linearization_eigenvalues"};
  res.runtime_bound = 1.0;
  double worst = 0.0;
  const std::vector<double> masses =
      opt.quick ? std::vector<double>{1.0} : std::vector<double>{0.5, 1.0, 2.0};
  for (int n : {4, 5, 6, 7}) {
    for (double mass : masses) {
      for (double frac : {0.3, 0.7}) {
        const auto p = params_at_fraction(n, mass, frac);
        for (double z : {1.0, -1.0}) {
          const auto lin = linearization(p, z);
          worst = std::max(worst,
                           std::abs(lin.eig_positive - lin.eig_closed_form) / lin.eig_closed_form);
        }
      }
    }
  }

  // n = 4 cross-check against the r_p = 3M specialization
  double worst4 = 0.0;
  for (double mass : masses) {
    const auto p = params_at_fraction(4, mass, 0.5);
    const auto lin = linearization(p);
    const double rp = 3.0 * mass;
    const double special = 2.0 * rp * std::sqrt(3.0 / (1.0 - 3.0 * rp * rp * p.lambda_small));
    worst4 = std::max(worst4, std::abs(lin.eig_closed_form - special) / special);
  }

  res.passed = worst <= 1e-10 && worst4 <= 1e-12;
  res.detail = fmt("matrix_vs_closed_rel=%.3e n4_specialization_rel=%.3e", worst, worst4);
  return res;
}

inline CriterionResult c4_normal_hyperbolicity(const AcceptanceOptions& opt) {
  CriterionResult res{4, "normal_hyperbolicity_rates"};
  res.runtime_bound = 10.0;  // per parameter set
  const double T = opt.quick ? 20.0 : 50.0;
  const std::vector<int> ns = opt.quick ? std::vector<int>{opt.base_n} : std::vector<int>{4, 5, 6, 7};
  double worst_normal = 0.0, worst_tangential = 0.0, worst_set_time = 0.0;
  std::string triples;
  for (int n : ns) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = params_at_fraction(n, 1.0, 0.5);
    const auto lin = linearization(p);
    const auto lr = lyapunov_normal(p, T, 1e-3);
    const auto tg = lyapunov_tangential(p, T, 1e-3);
    worst_normal = std::max(worst_normal, std::abs(lr.rate - lin.eig_positive) / lin.eig_positive);
    worst_tangential = std::max(worst_tangential, std::abs(tg.rate));
    const double set_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    worst_set_time = std::max(worst_set_time, set_time);
    // the normalization question stays open: report eigenvalue, nu_min
    // closed form and the measured rate side by side
    triples += fmt(" n=%d[eig=%.6f nu_min=%.6f lyapunov=%.6f]", n, lin.eig_closed_form,
                   lin.nu_min_closed_form, lr.rate);
  }
  res.passed = worst_normal <= 1e-4 && worst_tangential <= 1e-6;
  res.runtime_seconds = worst_set_time;  // bound applies per parameter set
  res.detail = fmt("normal_rel=%.3e tangential=%.3e%s", worst_normal, worst_tangential,
                   triples.c_str());
  return res;
}

inline CriterionResult c5_escape(const AcceptanceOptions& opt) {
  CriterionResult res{5, "escape_function_dichotomy"};
  res.runtime_bound = 5.0;
  std::size_t violations = 0;
  int grids = 0;
  std::vector<SdsParams> sets;
  sets.push_back(make_params(opt.base_n, opt.base_mass, opt.base_Lambda));
  if (!opt.quick) {
    sets.push_back(params_at_fraction(5, 1.0, 0.5));
    sets.push_back(params_at_fraction(7, 2.0, 0.3));
  }
  for (const auto& p : sets) {
    EscapeGridSpec spec;
    if (opt.quick) {
      spec.nr = 60;
      spec.nxi = 60;
    }
    violations += escape_scan(p, spec).size();
    ++grids;
    EscapeGridSpec neg = spec;
    neg.z = -1.0;
    violations += escape_scan(p, neg).size();
  }
  res.passed = violations == 0;
  res.detail = fmt("grids=%d violations=%zu", grids, violations);
  return res;
}

inline CriterionResult c6_nilpotency(const AcceptanceOptions& opt) {
  CriterionResult res{6, "nilpotent_zeroth_order"};
  res.runtime_bound = 1.0;
  Rng rng(opt.seed + 6);
  const int count = opt.quick ? 20 : 100;
  double worst_cube = 0.0, worst_eig = 0.0;
  const auto pa = make_params(opt.base_n, opt.base_mass, opt.base_Lambda);
  const auto pb = params_at_fraction(6, 1.0, 0.5);
  for (int i = 0; i < count; ++i) {
    const auto& p = (i % 2 == 0) ? pa : pb;
    const auto g = random_gamma_point(p, rng, 0.5, 5.0);
    const auto s = s_matrix(g).m;
    const double ns = s.norm();
    worst_cube = std::max(worst_cube, (s * s * s).norm() / (ns * ns * ns));
    worst_eig = std::max(worst_eig, s_spectrum_radius(g));
  }
  res.passed = worst_cube <= 1e-12 && worst_eig <= 1e-10;
  res.detail = fmt("points=%d cube_rel=%.3e spectrum_radius=%.3e", count, worst_cube, worst_eig);
  return res;
}

inline CriterionResult c7_conjugation(const AcceptanceOptions& opt) {
  CriterionResult res{7, "conjugation_display"};
  res.runtime_bound = 1.0;
  Rng rng(opt.seed + 7);
  const auto p = make_params(opt.base_n, opt.base_mass, opt.base_Lambda);
  const int count = opt.quick ? 8 : 34;
  double worst = 0.0;
  for (const double eps : {1e-1, 1e-2, 1e-3}) {
    for (int i = 0; i < count; ++i) {
      const auto g = random_gamma_point(p, rng);
      const auto s = s_matrix(g);
      const auto [q, qi] = conjugator_q(g, eps);
      const Eigen::MatrixXcd conj = q.m * s.m * qi.m;
      const auto N = conj.rows();
      Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(N, N);
      const double en = g.x.eta.norm();
      expected(0, N - 2) = eps * en;
      expected(N - 2, N - 1) = eps * en;
      worst = std::max(worst,
                       (conj - expected).cwiseAbs().maxCoeff() / std::max(1.0, s.m.norm()));
    }
  }
  res.passed = worst <= 1e-12;
  res.detail = fmt("strict_upper_deviation=%.3e", worst);
  return res;
}

inline CriterionResult c8_symmetrizability(const AcceptanceOptions& opt) {
  CriterionResult res{8, "epsilon_symmetrizability"};
  res.runtime_bound = 2.0;
  Rng rng(opt.seed + 8);
  const auto p = make_params(opt.base_n, opt.base_mass, opt.base_Lambda);
  const auto g = random_gamma_point(p, rng);

  const double k1 = conjugated_im_norm(g, 1e-1) / 1e-1;
  const double k2 = conjugated_im_norm(g, 1e-2) / 1e-2;
  const double k3 = conjugated_im_norm(g, 1e-3) / 1e-3;
  const bool linear = std::abs(k2 / k1 - 1.0) <= 0.01 && std::abs(k3 / k1 - 1.0) <= 0.01;

  // the bound must be reachable under either nu_min normalization; both
  // epsilon_0 values are reported, not reconciled
  const auto lin = linearization(p);
  bool below = true;
  double eps0_eig = 0.0, eps0_disp = 0.0;
  {
    eps0_eig = 0.5 * (lin.eig_closed_form / 2.0) / k1;
    below = below && conjugated_im_norm(g, eps0_eig) < lin.eig_closed_form / 2.0;
    eps0_disp = 0.5 * (lin.nu_min_closed_form / 2.0) / k1;
    below = below && conjugated_im_norm(g, eps0_disp) < lin.nu_min_closed_form / 2.0;
  }
  res.passed = linear && below;
  res.detail = fmt("kappa=%.6e spread=%.3e eps0_eig_norm=%.6e eps0_numin_norm=%.6e", k1,
                   std::max(std::abs(k2 / k1 - 1.0), std::abs(k3 / k1 - 1.0)), eps0_eig,
                   eps0_disp);
  return res;
}

inline CriterionResult c9_factorization(const AcceptanceOptions& opt) {
  CriterionResult res{9, "factorization_ode"};
  res.runtime_bound = 5.0;
  Rng rng(opt.seed + 9);
  const int count = opt.quick ? 20 : 100;
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const auto b0 = random_positive_form_capped(5, rng);
    const auto b1 = random_positive_form_capped(5, rng);
    const Eigen::MatrixXcd q = ode_factorize(b1, b0, 1000);
    worst = std::max(worst, (q.adjoint() * b0.b * q - b1.b).norm());
  }

  // fourth-order step convergence on a fresh pair
  const auto ba = random_positive_form_capped(5, rng);
  const auto bb = random_positive_form_capped(5, rng);
  const auto residual = [&](int steps) {
    const Eigen::MatrixXcd q = ode_factorize(bb, ba, steps);
    return (q.adjoint() * ba.b * q - bb.b).norm();
  };
  const double r250 = residual(250), r500 = residual(500), r1000 = residual(1000);
  const double ratio1 = r250 / r500, ratio2 = r500 / r1000;
  const bool fourth = ratio1 >= 14.0 && ratio1 <= 18.0 && ratio2 >= 14.0 && ratio2 <= 18.0;

  res.passed = worst <= 1e-8 && fourth;
  res.detail = fmt("pairs=%d residual_max=%.3e richardson=[%.2f, %.2f]", count, worst, ratio1,
                   ratio2);
  return res;
}

inline CriterionResult c10_tensor_power(const AcceptanceOptions& opt) {
  CriterionResult res{10, "tensor_power_bound"};
  res.runtime_bound = 10.0;
  Rng rng(opt.seed + 10);
  const int count = opt.quick ? 80 : 500;
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < count; ++i) {
    const int N = rng.uniform_int(2, 4);
    const int k = rng.uniform_int(1, 4);
    const auto b = random_positive_form(N, rng);
    const Eigen::MatrixXcd R = rng.complex_matrix(N, N);
    const auto db = tensor_power(b, R, k);
    worst_excess = std::max(worst_excess, db.norm_b - k * b_norm(R, b));
  }

  // equality at the identity
  double worst_id = 0.0;
  const auto b = random_positive_form(3, rng);
  for (int k : {1, 2, 3, 4}) {
    const auto db = tensor_power(b, Eigen::MatrixXcd::Identity(3, 3), k);
    worst_id = std::max(worst_id, std::abs(db.norm_b - k));
  }

  res.passed = worst_excess <= 1e-10 && worst_id <= 1e-10;
  res.detail = fmt("instances=%d bound_excess=%.3e identity_dev=%.3e", count, worst_excess,
                   worst_id);
  return res;
}

inline CriterionResult c11_jordan(const AcceptanceOptions& opt) {
  CriterionResult res{11, "jordan_toy_model"};
  res.runtime_bound = 1.0;
  (void)opt;
  double worst_bound = 0.0, worst_eig = 0.0;
  for (int N = 2; N <= 20; ++N) {
    for (double eps : {1.0, 0.1, 0.01}) {
      const auto jx = jordan_example(N, eps);
      worst_bound = std::max(worst_bound, jx.norm - eps);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(jx.im, Eigen::EigenvaluesOnly);
      Eigen::VectorXd got = es.eigenvalues();
      std::sort(got.data(), got.data() + N);
      Eigen::VectorXd expect(N);
      for (int j = 1; j <= N; ++j) expect[j - 1] = eps * std::cos(j * M_PI / (N + 1));
      std::sort(expect.data(), expect.data() + N);
      worst_eig = std::max(worst_eig, (got - expect).cwiseAbs().maxCoeff());
    }
  }
  res.passed = worst_bound <= 0.0 && worst_eig <= 1e-10;
  res.detail = fmt("norm_excess=%.3e eigenvalue_dev=%.3e", worst_bound, worst_eig);
  return res;
}

inline CriterionResult c12_transport(const AcceptanceOptions& opt) {
  CriterionResult res{12, "transport_dichotomy"};
  res.runtime_bound = 5.0;
  Rng rng(opt.seed + 12);
  const auto p = make_params(opt.base_n, opt.base_mass, opt.base_Lambda);
  const auto g = random_gamma_point(p, rng);
  const double T = opt.quick ? 60.0 : 100.0;

  const auto unperturbed = transport_growth(g, T, nullptr, 1e-3);

  const auto N = s_matrix(g).m.rows();
  Eigen::MatrixXcd L0 = Eigen::MatrixXcd::Zero(N, N);
  L0(1, 1) = 0.1;  // acts on the s-kernel direction; symmetrized spectral radius 0.1
  const auto perturbed = transport_growth(g, T, &L0, 1e-3);

  res.passed = unperturbed.loglog_slope <= 2.1 && unperturbed.polynomial &&
               perturbed.exp_rate >= 0.05;
  res.detail = fmt("loglog_slope=%.4f perturbed_rate=%.4f", unperturbed.loglog_slope,
                   perturbed.exp_rate);
  return res;
}

}  // namespace acceptance_detail

inline std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {}) {
  namespace ad = acceptance_detail;
  using Runner = CriterionResult (*)(const AcceptanceOptions&);
  const Runner runners[] = {ad::c1_photon_sphere,  ad::c2_horizons,      ad::c3_linearization,
                            ad::c4_normal_hyperbolicity, ad::c5_escape,  ad::c6_nilpotency,
                            ad::c7_conjugation,    ad::c8_symmetrizability, ad::c9_factorization,
                            ad::c10_tensor_power,  ad::c11_jordan,       ad::c12_transport};
  std::vector<CriterionResult> out;
  out.reserve(12);
  for (const auto& run : runners) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r = run(opt);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.runtime_seconds == 0.0) r.runtime_seconds = elapsed;
    r.runtime_ok = r.runtime_seconds < r.runtime_bound;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace trapcheck
