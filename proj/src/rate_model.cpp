#include "qkd/rate_model.hpp"

#include <cmath>
#include <numbers>

#include "qkd/errors.hpp"

namespace qkd {

void RateParams::validate() const {
  if (!(correction_efficiency >= 1.0)) {
    throw ConfigError("correction efficiency must be >= 1 (Shannon limit)");
  }
}

double binary_entropy(double e) {
  if (e <= 0.0 || e >= 1.0) return 0.0;
  return -(e * std::log2(e) + (1.0 - e) * std::log1p(-e) / std::numbers::ln2);
}

double pa_fraction(double detect_prob, double multiphoton_prob, double qber) {
  if (!(detect_prob > 0.0) || multiphoton_prob < 0.0) {
    throw DomainError("pa_fraction needs P > 0 and S >= 0");
  }
  if (!(qber >= 0.0 && qber < 0.5)) throw DomainError("pa_fraction needs 0 <= e < 0.5");
  if (detect_prob <= multiphoton_prob) {
    throw SecurityViolation("multi-photon rate is not below Bob's detection rate");
  }
  const double beta = (detect_prob - multiphoton_prob) / detect_prob;
  const double e1 = qber / beta;
  if (e1 >= 0.5) throw DomainError("error rate on single-photon bits reaches 1/2");
  // 1 + 4e' - 4e'^2 = 1 + 4e'(1 - e')
  return beta * (1.0 - std::log1p(4.0 * e1 * (1.0 - e1)) / std::numbers::ln2);
}

double sifted_gain(double detect_prob) { return 0.5 * detect_prob; }

GainBreakdown secure_gain(const LinkBudget& budget, double correction_efficiency) {
  GainBreakdown g;
  const double p = budget.detect_prob;
  const double s = budget.multiphoton_prob;
  const double e = budget.qber;
  g.sifted_gain = sifted_gain(p);
  g.ec_cost = correction_efficiency * binary_entropy(e);
  if (!(p > 0.0)) return g;

  const double beta = (p - s) / p;
  bool pns_ok = beta > 0.0;
  if (!pns_ok) {
    g.pa_fraction = beta;
  } else if (e / beta >= 0.5) {
    g.pa_fraction = 0.0;
    pns_ok = false;
  } else {
    g.pa_fraction = pa_fraction(p, s, e);
  }
  g.secure_gain = g.sifted_gain * (g.pa_fraction - g.ec_cost);
  g.secure = pns_ok && g.secure_gain > 0.0;
  return g;
}

GainBreakdown secure_gain(const SourceParams& source, const ChannelParams& channel,
                          const DetectorParams& detector, const RateParams& rate) {
  LinkBudget b;
  b.detect_prob = detection_prob(source, channel, detector);
  if (!(b.detect_prob > 0.0)) {
    GainBreakdown g;
    g.ec_cost = rate.correction_efficiency;  // e is undefined; treat as 1/2
    return g;
  }
  b.multiphoton_prob = multiphoton_prob(source.mu, rate.multiphoton_model);
  b.qber = qber(source, channel, detector);
  return secure_gain(b, rate.correction_efficiency);
}

}  // namespace qkd
