#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qkd/link_model.hpp"
#include "qkd/rate_model.hpp"

namespace qkd {

/// Everything except the intensity and the fibre length.
struct ModelParams {
  DetectorParams detector;
  double attenuation_db_per_km = 0.21;
  double clock_rate_hz = 2.0e6;
  RateParams rate;

  LinkParams link(double length_km, double mu) const {
    return {{mu, clock_rate_hz}, {length_km, attenuation_db_per_km}, detector};
  }
  void validate() const;
};

struct OptimizeConfig {
  double mu_lo = 1e-5;
  double mu_hi = 1.0;
  double rel_tol = 1e-4;
  int grid_points = 200;  ///< log-spaced bracketing grid

  void validate() const;
};

struct SecureWindow {
  double mu_min = 0.0;
  double mu_opt = 0.0;
  double mu_max = 0.0;
  double g_max = 0.0;
  /// False if the grid showed more than one positive local maximum.
  bool grid_unimodal = true;

  bool empty() const noexcept { return !(g_max > 0.0); }
};

/// Secure gain per clock cycle at (length, mu).
double gain_at(const ModelParams& params, double length_km, double mu);

/// Argmax of G over mu plus the G = 0 crossings around it. An empty window is
/// returned with empty() == true, mu_opt at the least negative point and
/// mu_min = mu_max = mu_opt.
SecureWindow search_window(double length_km, const ModelParams& params,
                           const OptimizeConfig& cfg = {});

/// As search_window but throws EmptyWindow when no mu gives G > 0.
SecureWindow optimize_mu(double length_km, const ModelParams& params,
                         const OptimizeConfig& cfg = {});

/// Intensity at which the multi-photon probability equals P: the hard PNS
/// bound, above which Eve can supply every one of Bob's clicks.
double pns_mu_limit(double length_km, const ModelParams& params,
                    const OptimizeConfig& cfg = {});

/// Longest fibre with a non-empty window, to 0.1 km. 0 if none.
double max_secure_length(const ModelParams& params, const OptimizeConfig& cfg = {});

struct CurveRow {
  double length_km = 0.0;
  SecureWindow window;
  double mu_opt = 0.0;
  double sifted_bps = 0.0;
  double secure_bps = 0.0;
  double qber = 0.0;

  bool secure() const noexcept { return !window.empty(); }
};

/// One row per length. Rows past the maximum secure length carry an empty
/// window and zero secure rate; sifted rate and QBER are then evaluated at the
/// least insecure intensity.
std::vector<CurveRow> rate_curve(std::span<const double> lengths, const ModelParams& params,
                                 const OptimizeConfig& cfg = {});
std::vector<CurveRow> rate_curve_serial(std::span<const double> lengths,
                                        const ModelParams& params,
                                        const OptimizeConfig& cfg = {});

/// Row-major G[i][j] over mu[i] x length[j].
struct GainGrid {
  std::vector<double> mu;
  std::vector<double> length_km;
  std::vector<double> gain;

  double at(std::size_t i_mu, std::size_t j_len) const {
    return gain[i_mu * length_km.size() + j_len];
  }
};

/// Throws DomainError unless both grids are non-empty and strictly increasing.
GainGrid contour_grid(std::span<const double> mu_grid, std::span<const double> length_grid,
                      const ModelParams& params);
GainGrid contour_grid_serial(std::span<const double> mu_grid,
                             std::span<const double> length_grid, const ModelParams& params);

/// n points log-spaced on [lo, hi] inclusive.
std::vector<double> log_space(double lo, double hi, std::size_t n);
/// lo, lo + step, ... up to hi inclusive.
std::vector<double> lin_range(double lo, double hi, double step);

}  // namespace qkd
