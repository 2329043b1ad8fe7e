#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "qkd/bitstring.hpp"

namespace qkd {

/// Bob asks for the parity of Alice's bits at positions [begin, end) of the
/// pass's permuted order.
struct ParityQuery {
  int pass = 0;
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
};

struct ParityExchange {
  ParityQuery query;
  bool parity = false;

  friend bool operator==(const ParityExchange& a, const ParityExchange& b) {
    return a.query.pass == b.query.pass && a.query.begin == b.query.begin &&
           a.query.end == b.query.end && a.parity == b.parity;
  }
};

struct CascadeConfig {
  int passes = 4;
  double first_block_factor = 0.73;  ///< k1 = ceil(factor / e_est)
  std::size_t min_key_length = 1000;
};

struct ReconciliationReport {
  BitString corrected_key;  ///< Bob's key after correction
  std::uint64_t leakage_bits = 0;       ///< disclosed parities, equals transcript.size()
  std::uint64_t verification_bits = 64; ///< integrity hash, disclosed separately
  int passes = 0;
  std::uint64_t corrections = 0;
  std::uint32_t first_block_size = 0;
  double measured_efficiency = 0.0;  ///< leakage_bits / (n H2(e_est))
  std::vector<ParityExchange> transcript;
};

/// Block-size schedule and permutations shared by both parties.
class CascadePlan {
 public:
  CascadePlan(std::size_t n, double e_est, std::uint64_t seed, const CascadeConfig& cfg = {});

  std::size_t key_length() const noexcept { return n_; }
  int passes() const noexcept { return static_cast<int>(block_size_.size()); }
  std::uint32_t block_size(int pass) const { return block_size_.at(pass); }
  /// order(pass)[k] is the key position at permuted slot k. Pass 0 is the identity.
  const std::vector<std::uint32_t>& order(int pass) const { return order_.at(pass); }
  /// slot(pass)[pos] is the inverse of order(pass).
  const std::vector<std::uint32_t>& slot(int pass) const { return slot_.at(pass); }

 private:
  std::size_t n_;
  std::vector<std::uint32_t> block_size_;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<std::vector<std::uint32_t>> slot_;
};

/// Alice's side: answers parity queries on her key.
class CascadeResponder {
 public:
  CascadeResponder(const BitString& key, const CascadePlan& plan) : key_(key), plan_(plan) {}
  bool answer(const ParityQuery& q) const;

 private:
  const BitString& key_;
  const CascadePlan& plan_;
};

using ParityChannel = std::function<bool(const ParityQuery&)>;

/// Bob's side, driven against any parity source: Alice herself or a recorded
/// transcript. Returns the corrected key and fills the transcript.
ReconciliationReport cascade_correct(const BitString& key_b, const CascadePlan& plan,
                                     const ParityChannel& channel);

/// Runs both actors. Verifies with a seeded 64-bit polynomial hash and throws
/// ResidualErrors on mismatch. Throws DomainError for n below the configured
/// minimum or e_est outside (0, 0.5).
ReconciliationReport cascade_reconcile(const BitString& key_a, const BitString& key_b,
                                       double e_est, std::uint64_t seed,
                                       const CascadeConfig& cfg = {});

/// Replays Bob's side against a transcript. Throws StructuralError if Bob's
/// queries diverge from the recorded ones.
BitString replay_transcript(const BitString& key_b, double e_est, std::uint64_t seed,
                            const std::vector<ParityExchange>& transcript,
                            const CascadeConfig& cfg = {});

/// Polynomial hash over GF(2^61 - 1) at a seeded evaluation point.
std::uint64_t verification_hash(const BitString& key, std::uint64_t seed);

/// One line per exchange: "pass begin end parity", pass counted from 1.
void write_transcript(std::ostream& os, const std::vector<ParityExchange>& transcript);
std::vector<ParityExchange> read_transcript(std::istream& is);

}  // namespace qkd
