#include "qkd/link_model.hpp"

#include <cmath>
#include <string>

#include "qkd/errors.hpp"

namespace qkd {

void SourceParams::validate() const {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be >= 0");
  if (!(clock_rate_hz > 0.0) || !std::isfinite(clock_rate_hz)) {
    throw ConfigError("clock rate must be > 0");
  }
}

void ChannelParams::validate() const {
  if (!(length_km >= 0.0) || !std::isfinite(length_km)) throw ConfigError("length must be >= 0");
  if (!(attenuation_db_per_km >= 0.0) || !std::isfinite(attenuation_db_per_km)) {
    throw ConfigError("attenuation must be >= 0");
  }
}

void DetectorParams::validate() const {
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw ConfigError("efficiency must be in (0, 1]");
  if (!(dark_prob >= 0.0 && dark_prob < 1.0)) throw ConfigError("dark_prob must be in [0, 1)");
  if (!(modulation_error >= 0.0 && modulation_error < 0.5)) {
    throw ConfigError("modulation_error must be in [0, 0.5)");
  }
}

double transmission(const ChannelParams& channel) {
  return std::pow(10.0, -channel.attenuation_db_per_km * channel.length_km / 10.0);
}

double detection_prob(const SourceParams& source, const ChannelParams& channel,
                      const DetectorParams& detector) {
  const double p = source.mu * detector.efficiency * transmission(channel) + detector.dark_prob;
  if (p > 1.0) {
    throw DomainError("detection probability " + std::to_string(p) + " exceeds 1");
  }
  return p;
}

double multiphoton_prob(double mu, MultiphotonModel model) {
  if (mu <= 0.0) return 0.0;
  switch (model) {
    case MultiphotonModel::approx:
      return 0.5 * mu * mu;
    case MultiphotonModel::exact_poisson: {
      // 1 - e^-mu (1 + mu) = -expm1(-mu) - mu e^-mu cancels for small mu, so
      // there sum e^-mu mu^k / k! over k >= 2 instead.
      if (mu >= 1.0) return -std::expm1(-mu) - mu * std::exp(-mu);
      double term = mu * mu / 2.0;
      double sum = 0.0;
      for (int k = 2; k < 40 && term > sum * 1e-17; ++k) {
        sum += term;
        term *= mu / (k + 1);
      }
      return std::exp(-mu) * sum;
    }
  }
  return 0.0;
}

double qber(const SourceParams& source, const ChannelParams& channel,
            const DetectorParams& detector) {
  const double signal = source.mu * detector.efficiency * transmission(channel);
  const double p = signal + detector.dark_prob;
  if (!(p > 0.0)) throw DomainError("qber undefined: detection probability is zero");
  if (p > 1.0) throw DomainError("detection probability exceeds 1");
  return (detector.modulation_error * signal + 0.5 * detector.dark_prob) / p;
}

LinkBudget link_budget(const LinkParams& link, MultiphotonModel model) {
  LinkBudget b;
  b.transmission = transmission(link.channel);
  b.signal_prob = link.source.mu * link.detector.efficiency * b.transmission;
  b.detect_prob = detection_prob(link.source, link.channel, link.detector);
  b.multiphoton_prob = multiphoton_prob(link.source.mu, model);
  b.qber = qber(link.source, link.channel, link.detector);
  return b;
}

LinkParams reference_link(double length_km, double mu) {
  return {{mu, 2.0e6}, {length_km, 0.21}, {0.045, 8.0e-7, 0.03}};
}

}  // namespace qkd
