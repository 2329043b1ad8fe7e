#include "qkd/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "qkd/errors.hpp"
#include "qkd/rate_model.hpp"
#include "qkd/rng.hpp"

namespace qkd {

namespace {

constexpr std::uint64_t kHashStream = 0xc0ffee;
constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

std::uint64_t mulmod61(std::uint64_t a, std::uint64_t b) {
  const uint128 p = static_cast<uint128>(a) * b;
  std::uint64_t r = static_cast<std::uint64_t>(p & kMersenne61) + static_cast<std::uint64_t>(p >> 61);
  if (r >= kMersenne61) r -= kMersenne61;
  return r;
}

std::uint64_t addmod61(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = a + b;
  if (r >= kMersenne61) r -= kMersenne61;
  return r;
}

void check_query(const CascadePlan& plan, const ParityQuery& q) {
  if (q.pass < 0 || q.pass >= plan.passes() || q.begin >= q.end || q.end > plan.key_length()) {
    throw StructuralError("parity query out of range");
  }
}

// Bob's working state during reconciliation.
class Reconciler {
 public:
  Reconciler(const BitString& key, const CascadePlan& plan, const ParityChannel& channel,
             ReconciliationReport& report)
      : key_(key), plan_(plan), channel_(channel), report_(report) {
    alice_block_parity_.resize(static_cast<std::size_t>(plan.passes()));
  }

  BitString run() {
    for (int pass = 0; pass < plan_.passes(); ++pass) {
      const std::uint32_t bs = plan_.block_size(pass);
      const std::size_t nblocks = (plan_.key_length() + bs - 1) / bs;
      auto& known = alice_block_parity_[static_cast<std::size_t>(pass)];
      known.resize(nblocks);
      for (std::size_t blk = 0; blk < nblocks; ++blk) {
        const auto [b, e] = block_range(pass, blk);
        known[blk] = ask({pass, b, e});
      }
      current_pass_ = pass;
      for (std::size_t blk = 0; blk < nblocks; ++blk) {
        if (mismatched(pass, blk)) {
          correct_block(pass, blk);
          drain();
        }
      }
    }
    return key_;
  }

 private:
  std::pair<std::uint32_t, std::uint32_t> block_range(int pass, std::size_t blk) const {
    const std::uint32_t bs = plan_.block_size(pass);
    const auto b = static_cast<std::uint32_t>(blk * bs);
    const auto e = static_cast<std::uint32_t>(
        std::min<std::size_t>(static_cast<std::size_t>(b) + bs, plan_.key_length()));
    return {b, e};
  }

  bool ask(const ParityQuery& q) {
    const bool parity = channel_(q);
    report_.transcript.push_back({q, parity});
    return parity;
  }

  bool bob_parity(int pass, std::uint32_t b, std::uint32_t e) const {
    if (pass == 0) return key_.parity(b, e);
    const auto& order = plan_.order(pass);
    bool p = false;
    for (std::uint32_t k = b; k < e; ++k) p ^= key_.get(order[k]);
    return p;
  }

  bool mismatched(int pass, std::size_t blk) const {
    const auto [b, e] = block_range(pass, blk);
    return bob_parity(pass, b, e) != alice_block_parity_[static_cast<std::size_t>(pass)][blk];
  }

  // Binary search inside an odd-parity block, then flip the located bit.
  void correct_block(int pass, std::size_t blk) {
    auto [b, e] = block_range(pass, blk);
    while (e - b > 1) {
      const std::uint32_t mid = b + (e - b) / 2;
      if (ask({pass, b, mid}) != bob_parity(pass, b, mid)) {
        e = mid;
      } else {
        b = mid;
      }
    }
    const std::uint32_t pos = plan_.order(pass)[b];
    key_.flip(pos);
    ++report_.corrections;
    // The flip toggles one block in every other processed pass.
    for (int q = 0; q <= current_pass_; ++q) {
      if (q == pass) continue;
      const std::size_t other = plan_.slot(q)[pos] / plan_.block_size(q);
      if (mismatched(q, other)) pending_.emplace_back(q, other);
    }
  }

  void drain() {
    while (!pending_.empty()) {
      // Smallest blocks first: they cost the fewest parities to search.
      auto it = std::min_element(pending_.begin(), pending_.end(),
                                 [](const auto& x, const auto& y) { return x.first < y.first; });
      const auto [q, blk] = *it;
      pending_.erase(it);
      if (mismatched(q, blk)) correct_block(q, blk);
    }
  }

  BitString key_;
  const CascadePlan& plan_;
  const ParityChannel& channel_;
  ReconciliationReport& report_;
  std::vector<std::vector<bool>> alice_block_parity_;
  std::deque<std::pair<int, std::size_t>> pending_;
  int current_pass_ = 0;
};

}  // namespace

CascadePlan::CascadePlan(std::size_t n, double e_est, std::uint64_t seed, const CascadeConfig& cfg)
    : n_(n) {
  if (n == 0) throw DomainError("cascade needs a non-empty key");
  if (n > 0xffffffffU) throw DomainError("cascade keys are limited to 2^32 - 1 bits");
  if (!(e_est > 0.0 && e_est < 0.5)) throw DomainError("cascade needs 0 < e_est < 0.5");
  if (cfg.passes < 1) throw ConfigError("cascade needs at least one pass");
  const double k1 = std::ceil(cfg.first_block_factor / e_est);
  std::size_t bs = static_cast<std::size_t>(std::clamp(k1, 1.0, static_cast<double>(n)));
  Engine eng = make_engine(seed, 0);
  for (int p = 0; p < cfg.passes; ++p) {
    block_size_.push_back(static_cast<std::uint32_t>(std::min(bs, n)));
    bs *= 2;
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0U);
    if (p > 0) {
      for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(order[i], order[static_cast<std::size_t>(uniform_below(eng, i + 1))]);
      }
    }
    std::vector<std::uint32_t> slot(n);
    for (std::uint32_t k = 0; k < n; ++k) slot[order[k]] = k;
    order_.push_back(std::move(order));
    slot_.push_back(std::move(slot));
  }
}

bool CascadeResponder::answer(const ParityQuery& q) const {
  check_query(plan_, q);
  if (q.pass == 0) return key_.parity(q.begin, q.end);
  const auto& order = plan_.order(q.pass);
  bool p = false;
  for (std::uint32_t k = q.begin; k < q.end; ++k) p ^= key_.get(order[k]);
  return p;
}

ReconciliationReport cascade_correct(const BitString& key_b, const CascadePlan& plan,
                                     const ParityChannel& channel) {
  if (key_b.size() != plan.key_length()) throw StructuralError("key length differs from plan");
  ReconciliationReport report;
  report.first_block_size = plan.block_size(0);
  report.passes = plan.passes();
  Reconciler bob(key_b, plan, channel, report);
  report.corrected_key = bob.run();
  report.leakage_bits = report.transcript.size();
  return report;
}

ReconciliationReport cascade_reconcile(const BitString& key_a, const BitString& key_b,
                                       double e_est, std::uint64_t seed,
                                       const CascadeConfig& cfg) {
  if (key_a.size() != key_b.size()) throw StructuralError("cascade: key length mismatch");
  if (key_a.size() < cfg.min_key_length) {
    throw DomainError("cascade needs at least " + std::to_string(cfg.min_key_length) + " bits");
  }
  const CascadePlan plan(key_a.size(), e_est, seed, cfg);
  const CascadeResponder alice(key_a, plan);
  ReconciliationReport report =
      cascade_correct(key_b, plan, [&](const ParityQuery& q) { return alice.answer(q); });
  report.measured_efficiency = static_cast<double>(report.leakage_bits) /
                               (static_cast<double>(key_a.size()) * binary_entropy(e_est));
  const std::uint64_t hash_seed = derive_seed(seed, kHashStream);
  if (verification_hash(key_a, hash_seed) != verification_hash(report.corrected_key, hash_seed)) {
    throw ResidualErrors("reconciled keys differ after " + std::to_string(cfg.passes) +
                         " passes; e_est may be too low");
  }
  return report;
}

BitString replay_transcript(const BitString& key_b, double e_est, std::uint64_t seed,
                            const std::vector<ParityExchange>& transcript,
                            const CascadeConfig& cfg) {
  const CascadePlan plan(key_b.size(), e_est, seed, cfg);
  std::size_t next = 0;
  const ParityChannel recorded = [&](const ParityQuery& q) {
    if (next >= transcript.size()) throw StructuralError("transcript exhausted");
    const ParityExchange& x = transcript[next++];
    if (x.query.pass != q.pass || x.query.begin != q.begin || x.query.end != q.end) {
      throw StructuralError("transcript query diverges at message " + std::to_string(next));
    }
    return x.parity;
  };
  ReconciliationReport r = cascade_correct(key_b, plan, recorded);
  if (next != transcript.size()) throw StructuralError("transcript has unused messages");
  return std::move(r.corrected_key);
}

std::uint64_t verification_hash(const BitString& key, std::uint64_t seed) {
  const std::uint64_t x = splitmix64(seed) % (kMersenne61 - 1) + 1;
  std::uint64_t h = key.size() % kMersenne61;
  for (std::uint64_t w : key.words()) {
    h = addmod61(mulmod61(h, x), w & 0xffffffffU);
    h = addmod61(mulmod61(h, x), w >> 32);
  }
  return h;
}

void write_transcript(std::ostream& os, const std::vector<ParityExchange>& transcript) {
  for (const auto& x : transcript) {
    os << (x.query.pass + 1) << ' ' << x.query.begin << ' ' << x.query.end << ' '
       << (x.parity ? 1 : 0) << '\n';
  }
}

std::vector<ParityExchange> read_transcript(std::istream& is) {
  std::vector<ParityExchange> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int pass = 0;
    std::uint32_t b = 0;
    std::uint32_t e = 0;
    int parity = 0;
    if (!(ls >> pass >> b >> e >> parity) || pass < 1 || (parity != 0 && parity != 1)) {
      throw StructuralError("malformed transcript line " + std::to_string(lineno));
    }
    out.push_back({{pass - 1, b, e}, parity == 1});
  }
  return out;
}

}  // namespace qkd
