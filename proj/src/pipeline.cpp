#include "qkd/pipeline.hpp"

#include <algorithm>

#include "qkd/errors.hpp"

namespace qkd {

LinkBudget measured_budget(const SessionResult& session, const SourceParams& source,
                           MultiphotonModel model) {
  LinkBudget b;
  const auto n = static_cast<double>(session.n_pulses);
  b.detect_prob = n > 0 ? static_cast<double>(session.detected_count) / n : 0.0;
  b.signal_prob = n > 0 ? static_cast<double>(session.signal_detected_count) / n : 0.0;
  b.multiphoton_prob = multiphoton_prob(source.mu, model);
  b.qber = session.qber_est;
  b.transmission = 0.0;  // not observable from counts alone
  return b;
}

KeyPipelineReport run_pipeline(const SessionResult& session, const LinkBudget& link,
                               const RateParams& rate, const PaParams& pa,
                               std::uint64_t cascade_seed) {
  if (session.sifted_count == 0 || session.alice_sifted.empty()) {
    throw DomainError("pipeline needs a non-empty sifted key");
  }
  KeyPipelineReport r;
  r.n_pulses = session.n_pulses;
  r.detected_count = session.detected_count;
  r.sifted_count = session.sifted_count;
  r.sample_disclosed = session.sample_disclosed;
  r.qber_est = session.qber_est;
  r.qber_low_confidence = session.qber_low_confidence;
  r.reconciled_length = session.alice_sifted.size();
  r.security_margin_bits = pa.security_margin_bits;
  r.hash_seed = pa.hash_seed;
  r.cascade_seed = cascade_seed;

  const auto n = r.reconciled_length;
  r.model_ec_bits =
      static_cast<double>(n) * rate.correction_efficiency * binary_entropy(r.qber_est);
  const GainBreakdown model = secure_gain(
      LinkBudget{link.transmission, link.signal_prob, link.detect_prob, link.multiphoton_prob,
                 r.qber_est},
      rate.correction_efficiency);
  r.pa_fraction = model.pa_fraction;

  const CascadeConfig cascade_cfg;
  if (r.qber_est >= 0.5) {
    r.note = "estimated QBER is 1/2 or more; no key can be distilled";
    return r;
  }
  if (n < cascade_cfg.min_key_length) {
    r.note = "key too short to reconcile";
    return r;
  }
  r.cascade_error_rate = std::max(r.qber_est, kCascadeMinErrorRate);
  r.reconciliation = cascade_reconcile(session.alice_sifted, session.bob_sifted,
                                       r.cascade_error_rate, cascade_seed, cascade_cfg);
  r.reconciled = true;
  r.leakage_bits = r.reconciliation->leakage_bits + r.reconciliation->verification_bits;

  r.final_length = final_key_length(n, r.qber_est, r.leakage_bits, link, pa);
  r.final_key = toeplitz_hash(session.alice_sifted, r.final_length, pa.hash_seed);
  if (toeplitz_hash(r.reconciliation->corrected_key, r.final_length, pa.hash_seed) !=
      r.final_key) {
    throw ResidualErrors("final keys differ after privacy amplification");
  }
  if (r.final_length == 0) r.note = "privacy amplification leaves no secret bits";
  return r;
}

}  // namespace qkd
