#pragma once

#include "qkd/link_model.hpp"

namespace qkd {

struct RateParams {
  /// Error-correction cost relative to the Shannon limit, f(e) >= 1.
  double correction_efficiency = 1.18;
  MultiphotonModel multiphoton_model = MultiphotonModel::approx;

  void validate() const;
};

/// Cascade's quoted efficiency for e < 5 %.
inline constexpr double kCascadeEfficiency = 1.16;
/// Efficiency used for the reference contour plot.
inline constexpr double kFigureEfficiency = 1.18;

struct GainBreakdown {
  double sifted_gain = 0.0;  ///< P / 2
  /// Fraction surviving privacy amplification. Clamped for insecure inputs:
  /// equals beta when P <= S and 0 when the error rate leaves Eve full knowledge.
  double pa_fraction = 0.0;
  double ec_cost = 0.0;      ///< f(e) * H2(e)
  double secure_gain = 0.0;  ///< sifted_gain * (pa_fraction - ec_cost)
  bool secure = false;       ///< secure_gain > 0 and the PNS criterion holds
};

/// -e log2 e - (1-e) log2 (1-e), with 0 log 0 := 0.
double binary_entropy(double e);

/// beta * (1 - log2(1 + 4e' - 4e'^2)), beta = (P - S) / P, e' = e / beta.
/// Throws SecurityViolation when P <= S and DomainError for e' >= 1/2 or bad inputs.
double pa_fraction(double detect_prob, double multiphoton_prob, double qber);

double sifted_gain(double detect_prob);

/// Secure key bits per clock cycle. Insecure parameter sets are returned with
/// secure = false and a non-positive gain rather than thrown.
GainBreakdown secure_gain(const SourceParams& source, const ChannelParams& channel,
                          const DetectorParams& detector, const RateParams& rate = {});

inline GainBreakdown secure_gain(const LinkParams& link, const RateParams& rate = {}) {
  return secure_gain(link.source, link.channel, link.detector, rate);
}

/// Same as above, from an already computed budget (P, S, e).
GainBreakdown secure_gain(const LinkBudget& budget, double correction_efficiency);

inline double gain_to_bps(double gain_per_cycle, double clock_rate_hz) {
  return gain_per_cycle * clock_rate_hz;
}

}  // namespace qkd
