#include "qkd/flux_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qkd/errors.hpp"

namespace qkd {

namespace {

// Gain assigned to unphysical points (P > 1) so searches move away from them.
constexpr double kUnphysicalGain = -1.0;
constexpr int kMaxBisections = 50;

struct Sample {
  double log_mu;
  double gain;
};

double gain_at_log(const ModelParams& params, double length_km, double log_mu) {
  return gain_at(params, length_km, std::exp(log_mu));
}

// Maximizes over [a, b] in log mu. Ties keep the lower half.
Sample golden_section_max(const ModelParams& params, double length_km, double a, double b,
                          double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = gain_at_log(params, length_km, c);
  double fd = gain_at_log(params, length_km, d);
  for (int it = 0; it < 200 && (b - a) > tol; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = gain_at_log(params, length_km, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = gain_at_log(params, length_km, d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, gain_at_log(params, length_km, x)};
}

// Root of G on [neg, pos] in log mu, where G(neg) <= 0 < G(pos).
double bisect_crossing(const ModelParams& params, double length_km, double neg, double pos,
                       double tol) {
  for (int it = 0; it < kMaxBisections && std::abs(pos - neg) > tol; ++it) {
    const double mid = 0.5 * (neg + pos);
    if (gain_at_log(params, length_km, mid) > 0.0) {
      pos = mid;
    } else {
      neg = mid;
    }
  }
  return std::exp(0.5 * (neg + pos));
}

bool strictly_increasing(std::span<const double> v) {
  if (v.empty()) return false;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) return false;
  }
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

CurveRow evaluate_row(double length_km, const ModelParams& params, const OptimizeConfig& cfg) {
  CurveRow row;
  row.length_km = length_km;
  row.window = search_window(length_km, params, cfg);
  row.mu_opt = row.window.mu_opt;
  const LinkParams link = params.link(length_km, row.mu_opt);
  const double p = detection_prob(link.source, link.channel, link.detector);
  row.sifted_bps = gain_to_bps(sifted_gain(p), params.clock_rate_hz);
  row.secure_bps = row.window.empty() ? 0.0 : gain_to_bps(row.window.g_max, params.clock_rate_hz);
  row.qber = p > 0.0 ? qber(link.source, link.channel, link.detector) : 0.5;
  return row;
}

void validate_grid(std::span<const double> mu_grid, std::span<const double> length_grid) {
  if (!strictly_increasing(mu_grid) || !strictly_increasing(length_grid)) {
    throw DomainError("contour grids must be non-empty and strictly increasing");
  }
  if (!(mu_grid.front() > 0.0) || !(length_grid.front() >= 0.0)) {
    throw DomainError("contour grids need mu > 0 and length >= 0");
  }
}

}  // namespace

void ModelParams::validate() const {
  detector.validate();
  ChannelParams{0.0, attenuation_db_per_km}.validate();
  SourceParams{0.0, clock_rate_hz}.validate();
  rate.validate();
}

void OptimizeConfig::validate() const {
  if (!(mu_lo > 0.0 && mu_lo < mu_hi && mu_hi <= 1.0)) {
    throw ConfigError("mu bounds must satisfy 0 < lo < hi <= 1");
  }
  if (!(rel_tol > 0.0)) throw ConfigError("rel_tol must be > 0");
  if (grid_points < 3) throw ConfigError("grid_points must be >= 3");
}

double gain_at(const ModelParams& params, double length_km, double mu) {
  try {
    return secure_gain(params.link(length_km, mu), params.rate).secure_gain;
  } catch (const DomainError&) {
    return kUnphysicalGain;
  }
}

SecureWindow search_window(double length_km, const ModelParams& params,
                           const OptimizeConfig& cfg) {
  cfg.validate();
  const double tol = std::log1p(cfg.rel_tol);
  const double lo = std::log(cfg.mu_lo);
  const double hi = std::log(cfg.mu_hi);
  const auto n = static_cast<std::size_t>(cfg.grid_points);

  std::vector<Sample> grid(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = k + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(k) / (n - 1);
    grid[k] = {x, gain_at_log(params, length_km, x)};
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k < n; ++k) {
    if (grid[k].gain > grid[best].gain) best = k;
  }
  int peaks = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const bool left = k == 0 || grid[k].gain > grid[k - 1].gain;
    const bool right = k + 1 == n || grid[k].gain >= grid[k + 1].gain;
    if (left && right && grid[k].gain > 0.0) ++peaks;
  }

  // Refine around the grid argmax; this is also the fallback when the grid
  // shows several local maxima.
  const double a = grid[best == 0 ? 0 : best - 1].log_mu;
  const double b = grid[best + 1 == n ? n - 1 : best + 1].log_mu;
  Sample opt = golden_section_max(params, length_km, a, b, tol);
  if (grid[best].gain >= opt.gain) opt = grid[best];

  SecureWindow w;
  w.grid_unimodal = peaks <= 1;
  w.mu_opt = std::exp(opt.log_mu);
  w.g_max = opt.gain;
  if (w.empty()) {
    w.mu_min = w.mu_max = w.mu_opt;
    return w;
  }

  // Points sorted by mu with the refined optimum spliced in.
  std::vector<Sample> pts(grid);
  const auto pos = std::lower_bound(pts.begin(), pts.end(), opt.log_mu,
                                    [](const Sample& s, double x) { return s.log_mu < x; });
  const auto inserted = pts.insert(pos, opt);
  const auto iopt = static_cast<std::size_t>(inserted - pts.begin());

  std::size_t j = iopt;
  while (j > 0 && pts[j - 1].gain > 0.0) --j;
  w.mu_min = j == 0 ? cfg.mu_lo
                    : bisect_crossing(params, length_km, pts[j - 1].log_mu, pts[j].log_mu, tol);
  j = iopt;
  while (j + 1 < pts.size() && pts[j + 1].gain > 0.0) ++j;
  w.mu_max = j + 1 == pts.size()
                 ? cfg.mu_hi
                 : bisect_crossing(params, length_km, pts[j + 1].log_mu, pts[j].log_mu, tol);
  return w;
}

SecureWindow optimize_mu(double length_km, const ModelParams& params, const OptimizeConfig& cfg) {
  SecureWindow w = search_window(length_km, params, cfg);
  if (w.empty()) {
    throw EmptyWindow("no intensity gives a positive secure rate at " +
                      std::to_string(length_km) + " km");
  }
  return w;
}

double pns_mu_limit(double length_km, const ModelParams& params, const OptimizeConfig& cfg) {
  const double signal_per_mu = params.detector.efficiency *
                               transmission({length_km, params.attenuation_db_per_km});
  const double d = params.detector.dark_prob;
  const auto excess = [&](double mu) {
    return mu * signal_per_mu + d - multiphoton_prob(mu, params.rate.multiphoton_model);
  };
  double lo = std::log(cfg.mu_lo);
  double hi = std::log(cfg.mu_hi);
  if (excess(std::exp(lo)) <= 0.0) return cfg.mu_lo;
  while (excess(std::exp(hi)) > 0.0) {
    hi += 1.0;
    if (hi > std::log(1e3)) return std::numeric_limits<double>::infinity();
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (excess(std::exp(mid)) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(0.5 * (lo + hi));
}

double max_secure_length(const ModelParams& params, const OptimizeConfig& cfg) {
  const auto secure = [&](double l) { return !search_window(l, params, cfg).empty(); };
  if (!secure(0.0)) return 0.0;
  double lo = 0.0;
  double hi = 50.0;
  while (secure(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1.0e4) return lo;
  }
  while (hi - lo > 0.1) {
    const double mid = 0.5 * (lo + hi);
    if (secure(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

std::vector<CurveRow> rate_curve(std::span<const double> lengths, const ModelParams& params,
                                 const OptimizeConfig& cfg) {
  if (lengths.empty()) throw DomainError("rate_curve needs at least one length");
  for (double l : lengths) {
    if (!(l >= 0.0)) throw DomainError("lengths must be >= 0");
  }
  std::vector<CurveRow> rows(lengths.size());
  const auto n = static_cast<std::ptrdiff_t>(lengths.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    rows[i] = evaluate_row(lengths[i], params, cfg);
  }
  return rows;
}

std::vector<CurveRow> rate_curve_serial(std::span<const double> lengths,
                                        const ModelParams& params, const OptimizeConfig& cfg) {
  if (lengths.empty()) throw DomainError("rate_curve needs at least one length");
  std::vector<CurveRow> rows;
  rows.reserve(lengths.size());
  for (double l : lengths) {
    if (!(l >= 0.0)) throw DomainError("lengths must be >= 0");
    rows.push_back(evaluate_row(l, params, cfg));
  }
  return rows;
}

GainGrid contour_grid(std::span<const double> mu_grid, std::span<const double> length_grid,
                      const ModelParams& params) {
  validate_grid(mu_grid, length_grid);
  GainGrid g{{mu_grid.begin(), mu_grid.end()},
             {length_grid.begin(), length_grid.end()},
             std::vector<double>(mu_grid.size() * length_grid.size())};
  const auto nm = static_cast<std::ptrdiff_t>(mu_grid.size());
  const auto nl = static_cast<std::ptrdiff_t>(length_grid.size());
#pragma omp parallel for collapse(2) schedule(static)
  for (std::ptrdiff_t i = 0; i < nm; ++i) {
    for (std::ptrdiff_t j = 0; j < nl; ++j) {
      g.gain[i * nl + j] = gain_at(params, length_grid[j], mu_grid[i]);
    }
  }
  return g;
}

GainGrid contour_grid_serial(std::span<const double> mu_grid,
                             std::span<const double> length_grid, const ModelParams& params) {
  validate_grid(mu_grid, length_grid);
  GainGrid g{{mu_grid.begin(), mu_grid.end()}, {length_grid.begin(), length_grid.end()}, {}};
  g.gain.reserve(mu_grid.size() * length_grid.size());
  for (double mu : mu_grid) {
    for (double l : length_grid) g.gain.push_back(gain_at(params, l, mu));
  }
  return g;
}

std::vector<double> log_space(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && hi >= lo) || n == 0) throw DomainError("log_space needs 0 < lo <= hi, n > 0");
  std::vector<double> v(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t k = 0; k < n; ++k) {
    v[k] = n == 1 ? lo : std::exp(a + (b - a) * static_cast<double>(k) / (n - 1));
  }
  if (n > 1) {
    v.front() = lo;
    v.back() = hi;
  }
  return v;
}

std::vector<double> lin_range(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw DomainError("range needs step > 0 and hi >= lo");
  std::vector<double> v;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step * (1.0 + 1e-12) + 1e-9));
  v.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) v.push_back(lo + step * static_cast<double>(k));
  return v;
}

}  // namespace qkd
