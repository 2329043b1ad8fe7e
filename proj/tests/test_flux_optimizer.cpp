#include <doctest.h>

#include <cmath>
#include <random>

#include "qkd/errors.hpp"
#include "qkd/flux_optimizer.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace qkd;

namespace {

// Exhaustive log-grid argmax; first maximum wins (smaller mu on ties).
double brute_force_argmax(const ModelParams& params, double length_km, std::size_t points) {
  const double lo = std::log(1e-5);
  const double hi = std::log(1.0);
  double best_mu = 0.0;
  double best_g = -INFINITY;
  for (std::size_t k = 0; k < points; ++k) {
    const double mu = std::exp(lo + (hi - lo) * static_cast<double>(k) / (points - 1));
    const double g = gain_at(params, length_km, mu);
    if (g > best_g) {
      best_g = g;
      best_mu = mu;
    }
  }
  return best_mu;
}

}  // namespace

TEST_CASE("optimal intensity at 1 km") {
  const ModelParams params;
  const SecureWindow w = optimize_mu(1.0, params);
  CHECK(w.mu_min < w.mu_opt);
  CHECK(w.mu_opt < w.mu_max);
  CHECK(w.g_max > 0.0);
  CHECK(w.grid_unimodal);
  // Within a factor of 2 of the reference 0.046; regression value 0.02683.
  CHECK(w.mu_opt > 0.023);
  CHECK(w.mu_opt < 0.092);
  CHECK(w.mu_opt == doctest::Approx(0.02683).epsilon(2e-3));

  const double brute = brute_force_argmax(params, 1.0, 1'000'000);
  CHECK(std::abs(w.mu_opt - brute) / brute < 1e-4);
}

TEST_CASE("optimal intensity at 50 km") {
  const SecureWindow w = optimize_mu(50.0, ModelParams{});
  CHECK(w.mu_opt > 0.0042 / 2);
  CHECK(w.mu_opt < 0.0042 * 2);
  CHECK(w.mu_opt == doctest::Approx(0.002435).epsilon(5e-3));
}

TEST_CASE("window edges are zero crossings") {
  const ModelParams params;
  for (double l : {1.0, 10.0, 25.0, 40.0, 48.0}) {
    const SecureWindow w = optimize_mu(l, params);
    const double scale = w.g_max;
    CHECK(std::abs(gain_at(params, l, w.mu_min)) < 1e-3 * scale);
    CHECK(std::abs(gain_at(params, l, w.mu_max)) < 1e-3 * scale);
    CHECK(gain_at(params, l, w.mu_min * 0.99) < 0.0);
    CHECK(gain_at(params, l, w.mu_max * 1.01) < 0.0);
    for (int k = 1; k < 50; ++k) {
      const double mu = w.mu_min * std::pow(w.mu_max / w.mu_min, k / 50.0);
      CHECK(gain_at(params, l, mu) > 0.0);
    }
  }
}

TEST_CASE("optimal intensity is non-increasing in length") {
  const ModelParams params;
  double prev = INFINITY;
  for (double l = 1.0; l <= 50.0; l += 1.0) {
    const double mu = optimize_mu(l, params).mu_opt;
    CHECK(mu <= prev * (1.0 + 1e-4));
    prev = mu;
  }
}

TEST_CASE("clock rate does not move the optimum") {
  ModelParams a;
  ModelParams b;
  b.clock_rate_hz = 1.0e9;
  for (double l : {5.0, 30.0}) {
    CHECK(optimize_mu(l, a).mu_opt == optimize_mu(l, b).mu_opt);
  }
}

TEST_CASE("golden section agrees with brute force on random parameter draws") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  while (checked < 20) {
    ModelParams p;
    p.detector = {0.02 + 0.2 * u(rng), 1e-7 + 5e-6 * u(rng), 0.04 * u(rng)};
    p.attenuation_db_per_km = 0.17 + 0.1 * u(rng);
    p.rate.correction_efficiency = 1.0 + 0.3 * u(rng);
    const double l = 40.0 * u(rng);
    const SecureWindow w = search_window(l, p);
    if (w.empty()) continue;
    const double brute = brute_force_argmax(p, l, 1'000'000);
    CHECK(std::abs(w.mu_opt - brute) / brute < 1e-4);
    ++checked;
  }
}

TEST_CASE("empty window") {
  CHECK_THROWS_AS(optimize_mu(200.0, ModelParams{}), EmptyWindow);
  const SecureWindow w = search_window(200.0, ModelParams{});
  CHECK(w.empty());
  CHECK(w.mu_min == w.mu_opt);
  CHECK(w.mu_max == w.mu_opt);
}

TEST_CASE("PNS intensity limit") {
  const ModelParams params;
  const double t = transmission({25.0, 0.21});
  const double eta_t = 0.045 * t;
  const double closed = eta_t + std::sqrt(eta_t * eta_t + 2.0 * 8e-7);
  CHECK(pns_mu_limit(25.0, params) == doctest::Approx(closed).epsilon(1e-12));
  CHECK(pns_mu_limit(25.0, params) > optimize_mu(25.0, params).mu_max);

  ModelParams exact = params;
  exact.rate.multiphoton_model = MultiphotonModel::exact_poisson;
  CHECK(pns_mu_limit(25.0, exact) > pns_mu_limit(25.0, params));
}

TEST_CASE("maximum secure length") {
  const ModelParams params;
  const double l = max_secure_length(params);
  // Regression value for this detection model.
  CHECK(l == doctest::Approx(50.4).epsilon(0.004));
  CHECK_FALSE(search_window(l, params).empty());
  CHECK(search_window(l + 0.1, params).empty());

  ModelParams noisy = params;
  noisy.detector.dark_prob *= 10.0;
  CHECK(max_secure_length(noisy) < l);

  ModelParams ideal = params;
  ideal.detector.dark_prob = 0.0;
  ideal.detector.modulation_error = 0.0;
  CHECK(max_secure_length(ideal) > 100.0);

  ModelParams hopeless = params;
  hopeless.detector.dark_prob = 0.5;
  CHECK(max_secure_length(hopeless) == 0.0);
}

TEST_CASE("rate curve") {
  const ModelParams params;
  SUBCASE("single zero length") {
    const std::vector<double> l{0.0};
    const auto rows = rate_curve(l, params);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].secure());
    const auto later = rate_curve(std::vector<double>{1.0}, params);
    CHECK(rows[0].secure_bps > later[0].secure_bps);
    CHECK(rows[0].sifted_bps > later[0].sifted_bps);
  }
  SUBCASE("sifted rate falls faster than the fibre loss") {
    const std::vector<double> l{4.4, 50.0};
    const auto rows = rate_curve(l, params);
    const double db_per_km = 10.0 * std::log10(rows[0].sifted_bps / rows[1].sifted_bps) / 45.6;
    CHECK(db_per_km > 0.3);
    CHECK(db_per_km < 0.5);
  }
  SUBCASE("rows match direct evaluation") {
    const auto lengths = lin_range(1.0, 56.0, 1.0);
    const auto rows = rate_curve(lengths, params);
    for (const auto& r : rows) {
      if (!r.secure()) {
        CHECK(r.secure_bps == 0.0);
        CHECK(r.length_km > 50.0);
        continue;
      }
      const GainBreakdown g = secure_gain(params.link(r.length_km, r.mu_opt), params.rate);
      CHECK(r.secure_bps == doctest::Approx(g.secure_gain * 2e6).epsilon(1e-12));
      CHECK(r.sifted_bps == doctest::Approx(g.sifted_gain * 2e6).epsilon(1e-12));
    }
  }
  SUBCASE("parallel and serial agree exactly") {
    const auto lengths = lin_range(0.0, 60.0, 2.5);
    const auto par = rate_curve(lengths, params);
    const auto ser = rate_curve_serial(lengths, params);
    REQUIRE(par.size() == ser.size());
    for (std::size_t i = 0; i < par.size(); ++i) {
      CHECK(par[i].mu_opt == ser[i].mu_opt);
      CHECK(par[i].secure_bps == ser[i].secure_bps);
      CHECK(par[i].window.mu_max == ser[i].window.mu_max);
    }
  }
  CHECK_THROWS_AS(rate_curve(std::vector<double>{}, params), DomainError);
  CHECK_THROWS_AS(rate_curve(std::vector<double>{-1.0}, params), DomainError);
}

TEST_CASE("contour grid") {
  const ModelParams params;
  SUBCASE("1x1 grid equals the point gain") {
    const GainGrid g = contour_grid(std::vector<double>{0.01}, std::vector<double>{20.0}, params);
    CHECK(g.at(0, 0) == secure_gain(params.link(20.0, 0.01), params.rate).secure_gain);
  }
  const auto mus = log_space(1e-4, 1.0, 81);
  const auto lengths = lin_range(0.0, 60.0, 0.5);
  const GainGrid grid = contour_grid(mus, lengths, params);

  SUBCASE("loop order and threading do not change any cell") {
    for (std::size_t j = 0; j < lengths.size(); ++j) {
      for (std::size_t i = 0; i < mus.size(); ++i) {
        CHECK(grid.at(i, j) == gain_at(params, lengths[j], mus[i]));
      }
    }
    const GainGrid serial = contour_grid_serial(mus, lengths, params);
    CHECK(serial.gain == grid.gain);
#ifdef _OPENMP
    const int saved = omp_get_max_threads();
    omp_set_num_threads(3);
    CHECK(contour_grid(mus, lengths, params).gain == grid.gain);
    omp_set_num_threads(saved);
#endif
  }
  SUBCASE("positive region ends near the maximum secure length") {
    double edge = 0.0;
    for (std::size_t j = 0; j < lengths.size(); ++j) {
      for (std::size_t i = 0; i < mus.size(); ++i) {
        if (grid.at(i, j) > 0.0) edge = lengths[j];
      }
    }
    CHECK(std::abs(edge - max_secure_length(params)) <= 1.0);
  }
  SUBCASE("positive region is one interval in mu per length, shrinking with length") {
    double prev_width = INFINITY;
    for (std::size_t j = 0; j < lengths.size(); ++j) {
      int runs = 0;
      int width = 0;
      for (std::size_t i = 0; i < mus.size(); ++i) {
        const bool pos = grid.at(i, j) > 0.0;
        width += pos;
        if (pos && (i == 0 || grid.at(i - 1, j) <= 0.0)) ++runs;
      }
      CHECK(runs <= 1);
      CHECK(width <= prev_width);
      prev_width = width;
    }
  }
  CHECK_THROWS_AS(contour_grid(std::vector<double>{0.1, 0.01}, lengths, params), DomainError);
  CHECK_THROWS_AS(contour_grid(mus, std::vector<double>{}, params), DomainError);
}
