#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "trapcheck/random.hpp"
#include "trapcheck/sds_metric.hpp"

using namespace trapcheck;

namespace {
SdsParams reference_params() { return make_params(4, 1.0, 0.03); }  // lambda_small = 0.01
}  // namespace

TEST_CASE("parameter validation matches the nondegeneracy inequality", "[sds]") {
  // n = 4, lambda = 1: M^2 lambda = 1 against 1/27
  SdsParams bad{4, 1.0, 3.0, 1.0};
  auto rep = validate_params(bad);
  CHECK_FALSE(rep.ok);
  CHECK(rep.margin == Catch::Approx(1.0 / 27.0 - 1.0).margin(1e-15));

  auto good = validate_params(reference_params());
  CHECK(good.ok);
  CHECK(good.margin == Catch::Approx(1.0 / 27.0 - 0.01).margin(1e-15));

  // n = 5, lambda = 0.04: both sides recomputed independently
  SdsParams five{5, 1.0, 0.24, 0.04};
  const double lhs = 1.0 * 0.04 * 0.04;
  const double rhs = (2.0 * 2.0) / (4.0 * 4.0 * 4.0 * 4.0);
  CHECK(lhs == Catch::Approx(0.0016).margin(1e-18));
  CHECK(rhs == Catch::Approx(1.0 / 64.0).margin(1e-18));
  auto r5 = validate_params(five);
  CHECK(r5.ok == (lhs < rhs));
  CHECK(r5.margin == Catch::Approx(rhs - lhs).margin(1e-15));

  CHECK_THROWS_AS(make_params(4, -1.0, 0.1), InputError);
  CHECK_THROWS_AS(make_params(3, 1.0, 0.1), InputError);
  CHECK_THROWS_AS(make_params(4, 1.0, std::nan("")), InputError);
  SdsParams nonfinite{4, std::numeric_limits<double>::infinity(), 0.1, 0.1};
  CHECK_THROWS_AS(validate_params(nonfinite), InputError);
}

TEST_CASE("validity is monotone in lambda", "[sds]") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + static_cast<int>(rng.uniform() * 4);
    const double mass = rng.uniform(0.2, 3.0);
    bool seen_false = false;
    for (int i = 1; i <= 40; ++i) {
      SdsParams p{n, mass, 0.0, i * 0.004};
      const bool ok = validate_params(p).ok;
      if (!ok) seen_false = true;
      if (seen_false) CHECK_FALSE(ok);
    }
  }
}

TEST_CASE("metric scalars match their closed forms", "[sds]") {
  const auto p = reference_params();
  const auto mv = metric_values(p, 3.0);
  CHECK(mv.mu == Catch::Approx(1.0 - 2.0 / 3.0 - 0.09).margin(1e-15));
  CHECK(mv.tilde_mu == Catch::Approx(mv.mu / 9.0).margin(1e-16));
  CHECK(mv.delta_r == Catch::Approx(9.0 * mv.mu).margin(1e-15));
  REQUIRE(mv.alpha.has_value());
  CHECK((*mv.alpha) * (*mv.alpha) == Catch::Approx(mv.mu).margin(1e-16));

  // r_p = 3 for n = 4, M = 1: tilde_mu' vanishes there
  CHECK(std::abs(mv.tilde_mu_prime) < 1e-15);

  // tilde_mu -> -lambda at large r
  const auto far = metric_values(p, 1e6);
  CHECK(std::abs(far.tilde_mu + p.lambda_small) < 1e-11);
  CHECK_FALSE(far.alpha.has_value());

  CHECK_THROWS_AS(metric_values(p, 0.0), DomainError);
  CHECK_THROWS_AS(metric_values(p, -2.0), DomainError);
}

TEST_CASE("mu and tilde_mu derivatives agree with finite differences", "[sds]") {
  Rng rng(12);
  for (int i = 0; i < 30; ++i) {
    const int n = 4 + static_cast<int>(rng.uniform() * 4);
    const auto p = make_params(n, rng.uniform(0.3, 2.0), rng.uniform(0.001, 0.02));
    const double r = rng.uniform(0.8, 6.0);
    const double h = 1e-5 * std::max(1.0, r);
    const auto lo = metric_values(p, r - h);
    const auto hi = metric_values(p, r + h);
    const auto mid = metric_values(p, r);
    CHECK(mid.mu_prime == Catch::Approx((hi.mu - lo.mu) / (2 * h)).margin(1e-7));
    CHECK(mid.tilde_mu_prime == Catch::Approx((hi.tilde_mu - lo.tilde_mu) / (2 * h)).margin(1e-7));
  }
}

TEST_CASE("horizons agree with the bisection oracle", "[sds]") {
  const auto p = reference_params();
  const auto h = horizons(p);
  const auto ps = photon_sphere(p);
  REQUIRE(h.r_minus < ps.r_p);
  REQUIRE(ps.r_p < h.r_plus);

  const double oracle_minus = oracles::bisect_tilde_mu(p, 1e-4, ps.r_p);
  const double oracle_plus =
      oracles::bisect_tilde_mu(p, ps.r_p, 2.0 / std::sqrt(p.lambda_small));
  CHECK(std::abs(h.r_minus - oracle_minus) <= 1e-12 * oracle_minus);
  CHECK(std::abs(h.r_plus - oracle_plus) <= 1e-12 * oracle_plus);

  const auto mm = metric_values(p, h.r_minus);
  const auto mp = metric_values(p, h.r_plus);
  CHECK(std::abs(mm.mu) <= 1e-12 * std::max(1.0, std::abs(mm.mu_prime)));
  CHECK(std::abs(mp.mu) <= 1e-12 * std::max(1.0, std::abs(mp.mu_prime)));

  // mu > 0 strictly between the horizons
  for (int i = 1; i < 100; ++i) {
    const double r = h.r_minus + (h.r_plus - h.r_minus) * i / 100.0;
    CHECK(metric_values(p, r).mu > 0.0);
  }

  // tilde_mu' changes sign across r_p
  CHECK(metric_values(p, ps.r_p * (1 - 1e-3)).tilde_mu_prime > 0.0);
  CHECK(metric_values(p, ps.r_p * (1 + 1e-3)).tilde_mu_prime < 0.0);

  SdsParams degenerate{4, 1.0, 3.0, 1.0};
  CHECK_THROWS_AS(horizons(degenerate), NoHorizonError);
}

TEST_CASE("horizons coalesce monotonically toward the critical lambda", "[sds]") {
  const int n = 4;
  const double mass = 1.0;
  const double crit = critical_lambda_small(n, mass);
  double prev_gap = std::numeric_limits<double>::infinity();
  for (double f : {0.9, 0.99, 0.999, 0.9999}) {
    SdsParams p{n, mass, lambda_cosmo_from_small(n, f * crit), f * crit};
    const auto h = horizons(p);
    const double gap = h.r_plus - h.r_minus;
    CHECK(gap > 0.0);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
}

TEST_CASE("photon sphere closed form and alpha identity", "[sds]") {
  const auto p4 = reference_params();
  const auto ps4 = photon_sphere(p4);
  CHECK(ps4.r_p == Catch::Approx(3.0).epsilon(1e-14));

  const auto p5 = make_params(5, 1.0, 0.05);
  CHECK(photon_sphere(p5).r_p == Catch::Approx(2.0).epsilon(1e-14));

  // alpha'/alpha = 1/r at r = r_p (numerically, via mu'/(2 mu))
  const auto mv = metric_values(p4, ps4.r_p);
  const double ratio = 0.5 * mv.mu_prime / mv.mu;
  CHECK(ratio == Catch::Approx(1.0 / ps4.r_p).epsilon(1e-12));

  // Psi_p consistency
  CHECK(ps4.Psi_p == Catch::Approx(std::sqrt(mv.mu) / ps4.r_p).margin(1e-15));
}

TEST_CASE("beta at the horizons is positive and blows up near criticality", "[sds]") {
  const auto p = reference_params();
  const auto h = horizons(p);
  CHECK(metric_values(p, h.r_minus).mu_prime > 0.0);
  CHECK(metric_values(p, h.r_plus).mu_prime < 0.0);
  const auto b = beta_pm(p);
  CHECK(b.beta_minus > 0.0);
  CHECK(b.beta_plus > 0.0);

  const double crit = critical_lambda_small(4, 1.0);
  double prev_minus = 0.0, prev_plus = 0.0;
  for (double f : {0.9, 0.99, 0.999}) {
    SdsParams q{4, 1.0, lambda_cosmo_from_small(4, f * crit), f * crit};
    const auto bb = beta_pm(q);
    CHECK(bb.beta_minus > prev_minus);
    CHECK(bb.beta_plus > prev_plus);
    prev_minus = bb.beta_minus;
    prev_plus = bb.beta_plus;
  }
}

TEST_CASE("spacetime Christoffel symbols match the displayed families", "[sds]") {
  const auto p = reference_params();
  Rng rng(21);
  const Eigen::VectorXd omega = rng.unit_vector(3);
  const auto G = christoffel_spacetime(p, 3.0, omega);

  CHECK(G(0, 0, 0) == 0.0);
  for (int k = 1; k < 4; ++k)
    for (int i = 1; i < 4; ++i) CHECK(G(k, i, 0) == 0.0);
  for (int i = 1; i < 4; ++i)
    for (int j = 1; j < 4; ++j) CHECK(G(0, i, j) == 0.0);

  // at r = r_p = 3 the t-r symbol equals alpha'/alpha = 1/r_p
  CHECK(G(0, 1, 0) == Catch::Approx(1.0 / 3.0).epsilon(1e-12));

  // symmetry of the lower index pair, exactly as constructed
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(G(k, i, j) == G(k, j, i));

  const auto mv = metric_values(p, 20.0);
  CHECK(mv.mu <= 0.0);
  CHECK_THROWS_AS(christoffel_spacetime(p, 20.0, omega), DomainError);
}

TEST_CASE("spatial Christoffel symbols match the displayed families", "[sds]") {
  const auto p = make_params(5, 1.0, 0.05);
  Rng rng(22);
  const Eigen::VectorXd omega = rng.unit_vector(4);
  const double r = 2.2;
  const auto G = christoffel_spatial(p, r, omega);
  const auto mv = metric_values(p, r);
  const double alpha = *mv.alpha;
  const double alpha_prime = 0.5 * mv.mu_prime / alpha;

  CHECK(G(0, 0, 0) == Catch::Approx(-alpha_prime / alpha).margin(1e-15));
  for (int a = 1; a < 4; ++a) {
    CHECK(G(a, 0, a) == Catch::Approx(1.0 / r).margin(1e-15));
    // -r alpha^2 (domega^2)_{ab} with the chart metric equal to delta at the base point
    CHECK(G(0, a, a) == Catch::Approx(-r * mv.mu).margin(1e-14));
    for (int b = 1; b < 4; ++b)
      if (a != b) CHECK(G(0, a, b) == 0.0);
  }
  CHECK_THROWS_AS(christoffel_spatial(p, 50.0, omega), DomainError);
}

TEST_CASE("finite-difference metric compatibility at random points", "[sds]") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + static_cast<int>(rng.uniform() * 3);
    const auto p = make_params(n, rng.uniform(0.5, 1.5), rng.uniform(0.005, 0.03));
    const auto h = horizons(p);
    const double r = rng.uniform(h.r_minus + 0.15 * (h.r_plus - h.r_minus),
                                 h.r_plus - 0.15 * (h.r_plus - h.r_minus));
    const Eigen::VectorXd omega = rng.unit_vector(n - 1);
    const double step = 1e-5 * std::max(1.0, r);

    const auto Gst = christoffel_spacetime(p, r, omega);
    const double res_st = oracles::compatibility_residual(
        [&](double rr, const Eigen::VectorXd& u) { return spacetime_metric_chart(p, rr, u); },
        Gst, r, 0, step);
    CHECK(res_st <= 1e-6);

    const auto Gsp = christoffel_spatial(p, r, omega);
    const double res_sp = oracles::compatibility_residual(
        [&](double rr, const Eigen::VectorXd& u) { return spatial_metric_chart(p, rr, u); },
        Gsp, r, -1, step);
    CHECK(res_sp <= 1e-6);
  }
}
