#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "qkd/bb84_engine.hpp"
#include "qkd/cascade.hpp"
#include "qkd/privacy_amplification.hpp"
#include "qkd/rate_model.hpp"

namespace qkd {

/// Full bit ledger from sifted key to final secret key.
struct KeyPipelineReport {
  std::uint64_t n_pulses = 0;
  std::uint64_t detected_count = 0;
  std::uint64_t sifted_count = 0;
  std::uint64_t sample_disclosed = 0;
  double qber_est = 0.0;
  bool qber_low_confidence = false;
  std::uint64_t reconciled_length = 0;
  /// Set when the remaining key was too short to reconcile.
  bool reconciled = false;
  double cascade_error_rate = 0.0;  ///< e_est handed to Cascade after flooring
  std::optional<ReconciliationReport> reconciliation;
  std::uint64_t leakage_bits = 0;       ///< parities plus verification hash
  double model_ec_bits = 0.0;           ///< n f(e) H2(e) predicted by the rate model
  double pa_fraction = 0.0;
  std::uint64_t security_margin_bits = 0;
  std::uint64_t final_length = 0;
  BitString final_key;        ///< Alice's; Bob's is identical after reconciliation
  std::uint64_t hash_seed = 0;
  std::uint64_t cascade_seed = 0;
  std::string note;
};

inline constexpr double kCascadeMinErrorRate = 1e-3;

/// Experimental link budget: measured P, sampled QBER, and S from Alice's mu.
LinkBudget measured_budget(const SessionResult& session, const SourceParams& source,
                           MultiphotonModel model = MultiphotonModel::approx);

/// QBER estimate (already performed by the session) -> Cascade ->
/// final_key_length -> Toeplitz hash. Throws ResidualErrors from Cascade and
/// DomainError for an empty session.
KeyPipelineReport run_pipeline(const SessionResult& session, const LinkBudget& link,
                               const RateParams& rate, const PaParams& pa,
                               std::uint64_t cascade_seed);

}  // namespace qkd
