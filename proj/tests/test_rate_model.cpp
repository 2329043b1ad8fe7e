#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "qkd/errors.hpp"
#include "qkd/flux_optimizer.hpp"
#include "qkd/rate_model.hpp"

using namespace qkd;

TEST_CASE("binary_entropy") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(binary_entropy(0.03) == doctest::Approx(0.19439185783157616087).epsilon(1e-13));
  for (double e = 0.001; e < 0.5; e += 0.01) {
    CHECK(binary_entropy(e) == doctest::Approx(binary_entropy(1.0 - e)).epsilon(1e-12));
    CHECK(binary_entropy(e) <= 1.0);
  }
}

TEST_CASE("pa_fraction") {
  CHECK(pa_fraction(0.3, 0.0, 0.0) == 1.0);
  CHECK(pa_fraction(2e-4, 1e-4, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(pa_fraction(1e-4, 1e-4, 0.01), SecurityViolation);
  CHECK_THROWS_AS(pa_fraction(1e-4, 2e-4, 0.01), SecurityViolation);
  CHECK_THROWS_AS(pa_fraction(1e-4, 0.5e-4, 0.3), DomainError);  // e' = 0.6
  CHECK_THROWS_AS(pa_fraction(0.0, 0.0, 0.01), DomainError);

  SUBCASE("at the 25 km optimum agrees with the closed form") {
    const ModelParams params;
    const SecureWindow w = optimize_mu(25.0, params);
    const LinkBudget b = link_budget(params.link(25.0, w.mu_opt));
    using oracle::Real;
    const Real t = oracle::transmission(25, Real("0.21"));
    const Real mu = w.mu_opt;
    const Real p = oracle::detection(mu, Real("0.045"), t, Real("8e-7"));
    const Real e = oracle::qber(mu, Real("0.045"), t, Real("8e-7"), Real("0.03"));
    const double expected = static_cast<double>(oracle::tau(p, oracle::multiphoton_approx(mu), e));
    const double got = pa_fraction(b.detect_prob, b.multiphoton_prob, b.qber);
    CHECK(std::abs(got - expected) / expected < 1e-12);
    CHECK(got > 0.0);
    CHECK(got < 1.0);
  }
}

TEST_CASE("pa_fraction decreases in e and in S") {
  const double p = 1e-3;
  for (double s = 0.0; s < 0.8e-3; s += 0.05e-3) {
    for (double e = 0.0; e < 0.09; e += 0.005) {
      const double tau = pa_fraction(p, s, e);
      CHECK(tau <= (p - s) / p + 1e-15);
      CHECK(pa_fraction(p, s, e + 0.005) < tau);
      CHECK(pa_fraction(p, s + 0.05e-3, e) < tau);
    }
  }
}

TEST_CASE("sifted gain and unit conversion") {
  CHECK(sifted_gain(0.0) == 0.0);
  CHECK(sifted_gain(1.0) == 0.5);
  CHECK(gain_to_bps(0.0, 2e6) == 0.0);
  CHECK(gain_to_bps(1e-4, 2e6) == doctest::Approx(200.0));
}

TEST_CASE("secure_gain noiseless expansion") {
  // d = 0, no modulation error: G = P/2 (P - S)/P = (mu eta t / 2)(1 - mu / (2 eta t))
  const DetectorParams det{0.045, 0.0, 0.0};
  for (double mu : {1e-4, 1e-3, 5e-3}) {
    const ChannelParams ch{10.0, 0.21};
    const double eta_t = 0.045 * transmission(ch);
    const GainBreakdown g = secure_gain({mu, 1.0}, ch, det);
    const double expected = 0.5 * mu * eta_t * (1.0 - mu / (2.0 * eta_t));
    CHECK(g.secure);
    CHECK(g.secure_gain == doctest::Approx(expected).epsilon(1e-13));
    CHECK(g.ec_cost == 0.0);
  }
}

TEST_CASE("secure_gain at the PNS boundary is flagged") {
  const DetectorParams det{0.045, 8e-7, 0.03};
  const ChannelParams ch{25.0, 0.21};
  const double eta_t = 0.045 * transmission(ch);
  const double mu = eta_t + std::sqrt(eta_t * eta_t + 2.0 * 8e-7);  // mu^2/2 = P
  const GainBreakdown g = secure_gain({mu, 1.0}, ch, det);
  CHECK_FALSE(g.secure);
  CHECK(g.secure_gain <= 0.0);
  const GainBreakdown above = secure_gain({2.0 * mu, 1.0}, ch, det);
  CHECK_FALSE(above.secure);
  CHECK(above.secure_gain < 0.0);
}

TEST_CASE("breakdown is internally consistent and bounded by the sifted gain") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double mu = std::pow(10.0, -4.0 + 3.5 * u(rng));
    const ChannelParams ch{80.0 * u(rng), 0.21};
    const DetectorParams det{0.01 + 0.2 * u(rng), 1e-7 + 1e-5 * u(rng), 0.05 * u(rng)};
    const RateParams rate{1.0 + 0.3 * u(rng), MultiphotonModel::approx};
    const GainBreakdown g = secure_gain({mu, 1.0}, ch, det, rate);
    CHECK(g.secure_gain == doctest::Approx(g.sifted_gain * (g.pa_fraction - g.ec_cost)));
    CHECK(g.secure_gain <= g.sifted_gain);
    if (g.secure) CHECK(g.secure_gain > 0.0);

    // Dropping both penalties can only help.
    const double p = detection_prob({mu, 1.0}, ch, det);
    const double e = qber({mu, 1.0}, ch, det);
    LinkBudget ideal{0.0, 0.0, p, 0.0, e};
    const GainBreakdown free = secure_gain(ideal, 1.0);
    CHECK(free.secure_gain > g.secure_gain);
  }
}

TEST_CASE("G(mu) has a single interior maximum for the reference parameters") {
  const ModelParams params;
  for (double l : {1.0, 10.0, 25.0, 40.0, 50.0}) {
    const auto mus = log_space(1e-5, 1.0, 20000);
    std::size_t argmax = 0;
    std::vector<double> g(mus.size());
    for (std::size_t k = 0; k < mus.size(); ++k) {
      g[k] = gain_at(params, l, mus[k]);
      if (g[k] > g[argmax]) argmax = k;
    }
    CHECK(g[argmax] > 0.0);
    CHECK(g.front() < 0.0);
    CHECK(g.back() < 0.0);
    // Below the window dark counts dominate and G dips before rising, so
    // shape is only checked where G is positive.
    int violations = 0;
    for (std::size_t k = 1; k <= argmax; ++k) violations += g[k - 1] > 0.0 && g[k] < g[k - 1];
    for (std::size_t k = argmax + 1; k < g.size(); ++k) violations += g[k] > 0.0 && g[k] > g[k - 1];
    CHECK(violations == 0);
  }
}

TEST_CASE("rate params validation") {
  CHECK_THROWS_AS(RateParams({0.99, MultiphotonModel::approx}).validate(), ConfigError);
  CHECK_NOTHROW(RateParams({kCascadeEfficiency, MultiphotonModel::exact_poisson}).validate());
}
