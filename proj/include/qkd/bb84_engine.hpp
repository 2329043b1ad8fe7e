#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qkd/bitstring.hpp"
#include "qkd/link_model.hpp"

namespace qkd {

enum class Basis : std::uint8_t { rectilinear = 0, diagonal = 1 };

enum class EveStrategy { pns };

struct EveConfig {
  EveStrategy strategy = EveStrategy::pns;
  /// Per-photon delivery probability of Eve's substitute channel.
  double replacement_transmission = 1.0;
  /// When set, the substitute channel also replaces Bob's internal loss, i.e.
  /// a forwarded photon clicks with probability replacement_transmission.
  /// Otherwise it clicks with replacement_transmission * efficiency.
  bool bypass_receiver_loss = true;
};

/// How Eve keeps Bob's signal click rate at its no-Eve value 1 - exp(-mu t eta).
/// She keeps one photon of each forwarded multi-photon pulse and forwards
/// single-photon pulses untouched with probability `single`. Above the PNS
/// bound even the multi-photon pulses overshoot, and only a fraction `multi`
/// of them is forwarded.
struct PnsForwarding {
  double single = 0.0;
  double multi = 1.0;
};

PnsForwarding pns_forwarding(const LinkParams& link, const EveConfig& eve);

struct SimConfig {
  std::uint64_t n_pulses = 1'000'000;
  std::uint64_t seed = 1;
  LinkParams link;
  std::optional<EveConfig> eve;
  /// Share of the sifted key disclosed to estimate the QBER.
  double sample_fraction = 0.1;

  void validate() const;
};

struct AliceRecord {
  bool bit = false;
  Basis basis = Basis::rectilinear;
};

struct BobRecord {
  bool detected = false;
  bool bit = false;
  Basis basis = Basis::rectilinear;
};

struct SiftedKeys {
  BitString alice;
  BitString bob;
};

/// Keeps the detected positions where both bases agree, in order.
/// Throws StructuralError when the streams differ in length.
SiftedKeys sift(std::span<const AliceRecord> alice, std::span<const BobRecord> bob);

struct QberEstimate {
  double qber = 0.0;
  std::size_t sample_size = 0;
  std::size_t sample_errors = 0;
  /// Fewer than 100 bits were compared.
  bool low_confidence = false;
  BitString alice;  ///< key with the disclosed positions removed
  BitString bob;
};

inline constexpr std::size_t kMinConfidentSample = 100;

/// Discloses a uniformly chosen sample of round(sample_fraction * n) positions.
QberEstimate estimate_qber(const BitString& alice, const BitString& bob, double sample_fraction,
                           std::uint64_t seed);

struct SessionResult {
  BitString alice_sifted;  ///< sifted key after the QBER sample was removed
  BitString bob_sifted;
  std::uint64_t n_pulses = 0;
  std::uint64_t detected_count = 0;
  std::uint64_t signal_detected_count = 0;  ///< clicks with at least one photon arriving
  std::uint64_t sifted_count = 0;           ///< before the QBER sample was removed
  std::uint64_t sifted_signal_count = 0;
  std::uint64_t sifted_multiphoton_count = 0;  ///< signal-originated, source emitted >= 2 photons
  std::uint64_t full_errors = 0;              ///< mismatches in the full sifted key
  std::uint64_t sample_disclosed = 0;
  std::uint64_t sample_errors = 0;
  double qber_est = 0.0;
  bool qber_low_confidence = false;
  std::uint64_t eve_known_count = 0;
  /// eve_known_count / sifted_count.
  double eve_known_fraction = 0.0;
  bool eve_active = false;

  double full_qber() const noexcept {
    return sifted_count ? static_cast<double>(full_errors) / static_cast<double>(sifted_count)
                        : 0.0;
  }
  double eve_known_signal_fraction() const noexcept {
    return sifted_signal_count ? static_cast<double>(eve_known_count) /
                                     static_cast<double>(sifted_signal_count)
                               : 0.0;
  }
};

/// Pulses per independent RNG stream. Results never depend on how blocks are
/// distributed over threads.
inline constexpr std::uint64_t kPulsesPerBlock = 1U << 16;

/// Runs the session with or without the eavesdropper configured in cfg.eve.
/// Blocks are simulated in parallel.
SessionResult run_session(const SimConfig& cfg);
/// Single-threaded reference; bit-identical to run_session.
SessionResult run_session_serial(const SimConfig& cfg);

/// Requires cfg.eve. Throws ConfigError when Eve's channel is lossier than the
/// one she replaces, since Bob's click rate would drop.
SessionResult run_session_with_pns(const SimConfig& cfg);

}  // namespace qkd
