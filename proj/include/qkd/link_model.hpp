#pragma once

// Weak-coherent-pulse link: fibre loss, detection probability per clock
// cycle, multi-photon emission and the resulting sifted-key error rate.

namespace qkd {

struct SourceParams {
  double mu = 0.0;              ///< mean photons per pulse
  double clock_rate_hz = 2.0e6;

  /// mu may be zero (dark-count-only runs); it may not be negative.
  void validate() const;
};

struct ChannelParams {
  double length_km = 0.0;
  double attenuation_db_per_km = 0.21;

  void validate() const;
};

struct DetectorParams {
  double efficiency = 0.045;  ///< overall, including Bob's optical losses
  double dark_prob = 8.0e-7;  ///< erroneous counts per gate, all detectors together
  double modulation_error = 0.03;

  void validate() const;
};

enum class MultiphotonModel { approx, exact_poisson };

struct LinkParams {
  SourceParams source;
  ChannelParams channel;
  DetectorParams detector;

  void validate() const {
    source.validate();
    channel.validate();
    detector.validate();
  }
};

struct LinkBudget {
  double transmission = 1.0;
  double signal_prob = 0.0;      ///< mu * eta * t
  double detect_prob = 0.0;      ///< signal_prob + dark_prob
  double multiphoton_prob = 0.0;
  double qber = 0.0;
};

/// Fibre transmission 10^(-alpha * l / 10).
double transmission(const ChannelParams& channel);

/// P = mu * eta * t + d. Throws DomainError when P > 1.
double detection_prob(const SourceParams& source, const ChannelParams& channel,
                      const DetectorParams& detector);

/// mu^2 / 2 (approx) or 1 - e^-mu (1 + mu) (exact_poisson).
double multiphoton_prob(double mu, MultiphotonModel model = MultiphotonModel::approx);

/// e = (modulation_error * mu * eta * t + d / 2) / P. Throws DomainError when P = 0.
double qber(const SourceParams& source, const ChannelParams& channel,
            const DetectorParams& detector);

LinkBudget link_budget(const LinkParams& link,
                       MultiphotonModel model = MultiphotonModel::approx);

/// Parameter set of the reference experiment: eta = 4.5 %, alpha = 0.21 dB/km,
/// d = 8e-7 per gate, 3 % modulation error, 2 MHz clock.
LinkParams reference_link(double length_km, double mu);

}  // namespace qkd
