#include "qkd/bb84_engine.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "qkd/errors.hpp"
#include "qkd/rng.hpp"

namespace qkd {

namespace {

// Stream index reserved for the QBER sample; blocks use 0, 1, 2, ...
constexpr std::uint64_t kSampleStream = ~std::uint64_t{0};
constexpr double kMaxMu = 100.0;

enum Origin : std::uint8_t {
  kSignal = 1U << 0,       // at least one photon reached the detector
  kMultiphoton = 1U << 1,  // source emitted two or more photons
  kEveHolds = 1U << 2,     // Eve kept a photon of this pulse
};

struct PulseModel {
  double mu;
  double p_zero;      // e^-mu
  double survive;     // per-photon click probability on the path to Bob
  double dark;
  double modulation_error;
  bool eve;
  PnsForwarding forward;
};

struct BlockResult {
  std::vector<AliceRecord> alice;
  std::vector<BobRecord> bob;
  std::vector<std::uint8_t> origin;
  std::uint64_t detected = 0;
  std::uint64_t signal_detected = 0;
};

double eve_click_prob(const LinkParams& link, const EveConfig& eve) {
  return eve.bypass_receiver_loss ? eve.replacement_transmission
                                  : eve.replacement_transmission * link.detector.efficiency;
}

PulseModel make_model(const SimConfig& cfg) {
  const auto& link = cfg.link;
  const double t = transmission(link.channel);
  PulseModel m{link.source.mu,
               std::exp(-link.source.mu),
               t * link.detector.efficiency,
               link.detector.dark_prob,
               link.detector.modulation_error,
               cfg.eve.has_value(),
               {}};
  if (cfg.eve) {
    m.survive = eve_click_prob(link, *cfg.eve);
    m.forward = pns_forwarding(link, *cfg.eve);
  }
  return m;
}

// Photon number by inversion of the Poisson CDF.
unsigned draw_photons(const PulseModel& m, Engine& eng) {
  const double u = uniform01(eng);
  double p = m.p_zero;
  double cdf = p;
  unsigned n = 0;
  while (u >= cdf && n < 1000) {
    ++n;
    p *= m.mu / n;
    cdf += p;
  }
  return n;
}

BlockResult simulate_block(const PulseModel& m, std::uint64_t seed, std::uint64_t block,
                           std::uint64_t count) {
  Engine eng = make_engine(seed, block);
  BlockResult r;
  for (std::uint64_t k = 0; k < count; ++k) {
    const unsigned n = draw_photons(m, eng);
    std::uint8_t origin = n >= 2 ? kMultiphoton : 0;
    unsigned forwarded = n;
    if (m.eve && n >= 1) {
      if (n >= 2) {
        const bool pass = m.forward.multi >= 1.0 || uniform01(eng) < m.forward.multi;
        forwarded = pass ? n - 1 : 0;
        if (pass) origin |= kEveHolds;
      } else {
        forwarded = uniform01(eng) < m.forward.single ? 1 : 0;
      }
    }
    bool signal = false;
    for (unsigned i = 0; i < forwarded && !signal; ++i) signal = uniform01(eng) < m.survive;
    const bool dark = uniform01(eng) < m.dark;
    if (!signal && !dark) continue;

    const std::uint64_t bits = eng();
    AliceRecord a{(bits & 1U) != 0, static_cast<Basis>((bits >> 1) & 1U)};
    BobRecord b{true, (bits & 8U) != 0, static_cast<Basis>((bits >> 2) & 1U)};
    if (signal) {
      origin |= kSignal;
      if (a.basis == b.basis) b.bit = a.bit != (uniform01(eng) < m.modulation_error);
      ++r.signal_detected;
    }
    ++r.detected;
    r.alice.push_back(a);
    r.bob.push_back(b);
    r.origin.push_back(origin);
  }
  return r;
}

SessionResult assemble(const SimConfig& cfg, std::vector<BlockResult>& blocks) {
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.alice.size();
  std::vector<AliceRecord> alice;
  std::vector<BobRecord> bob;
  std::vector<std::uint8_t> origin;
  alice.reserve(total);
  bob.reserve(total);
  origin.reserve(total);

  SessionResult s;
  s.n_pulses = cfg.n_pulses;
  s.eve_active = cfg.eve.has_value();
  for (auto& b : blocks) {
    alice.insert(alice.end(), b.alice.begin(), b.alice.end());
    bob.insert(bob.end(), b.bob.begin(), b.bob.end());
    origin.insert(origin.end(), b.origin.begin(), b.origin.end());
    s.detected_count += b.detected;
    s.signal_detected_count += b.signal_detected;
    b = BlockResult{};
  }

  for (std::size_t i = 0; i < alice.size(); ++i) {
    if (alice[i].basis != bob[i].basis) continue;
    const std::uint8_t o = origin[i];
    if (o & kSignal) {
      ++s.sifted_signal_count;
      if (o & kMultiphoton) ++s.sifted_multiphoton_count;
      if (o & kEveHolds) ++s.eve_known_count;
    }
  }

  SiftedKeys keys = sift(alice, bob);
  s.sifted_count = keys.alice.size();
  s.full_errors = keys.alice.hamming_distance(keys.bob);
  s.eve_known_fraction = s.sifted_count ? static_cast<double>(s.eve_known_count) /
                                              static_cast<double>(s.sifted_count)
                                        : 0.0;

  QberEstimate est = estimate_qber(keys.alice, keys.bob, cfg.sample_fraction,
                                   derive_seed(cfg.seed, kSampleStream));
  s.qber_est = est.qber;
  s.qber_low_confidence = est.low_confidence;
  s.sample_disclosed = est.sample_size;
  s.sample_errors = est.sample_errors;
  s.alice_sifted = std::move(est.alice);
  s.bob_sifted = std::move(est.bob);
  return s;
}

std::uint64_t block_count(const SimConfig& cfg) {
  return (cfg.n_pulses + kPulsesPerBlock - 1) / kPulsesPerBlock;
}

std::uint64_t block_size(const SimConfig& cfg, std::uint64_t b) {
  const std::uint64_t begin = b * kPulsesPerBlock;
  return std::min(kPulsesPerBlock, cfg.n_pulses - begin);
}

void validate_eve(const SimConfig& cfg) {
  if (!cfg.eve) return;
  const EveConfig& eve = *cfg.eve;
  const double r = eve.replacement_transmission;
  if (!(r > 0.0 && r <= 1.0)) throw ConfigError("replacement transmission must be in (0, 1]");
  const double t = transmission(cfg.link.channel);
  const double replaced = eve.bypass_receiver_loss ? t * cfg.link.detector.efficiency : t;
  if (r < replaced) {
    throw ConfigError("Eve's replacement channel (" + std::to_string(r) +
                      ") is lossier than the channel it replaces (" + std::to_string(replaced) +
                      ")");
  }
}

}  // namespace

PnsForwarding pns_forwarding(const LinkParams& link, const EveConfig& eve) {
  const double mu = link.source.mu;
  const double s = eve_click_prob(link, eve);
  const double target =
      -std::expm1(-mu * transmission(link.channel) * link.detector.efficiency);
  // Click probability if every multi-photon pulse is forwarded minus one photon:
  // sum over n >= 2 of p(n) (1 - (1 - s)^(n - 1)).
  const double p_one = mu * std::exp(-mu);
  double from_multi = -std::expm1(-mu) - p_one;
  if (s < 1.0) {
    from_multi = -std::expm1(-mu) - std::exp(-mu) * std::expm1(mu * (1.0 - s)) / (1.0 - s);
  }
  PnsForwarding f;
  if (from_multi >= target) {
    f.single = 0.0;
    f.multi = from_multi > 0.0 ? target / from_multi : 0.0;
  } else {
    f.multi = 1.0;
    f.single = p_one > 0.0 ? std::min(1.0, (target - from_multi) / (p_one * s)) : 0.0;
  }
  return f;
}

void SimConfig::validate() const {
  if (n_pulses < 1) throw ConfigError("n_pulses must be >= 1");
  link.validate();
  if (link.source.mu > kMaxMu) throw ConfigError("mu above 100 is not supported");
  if (!(sample_fraction > 0.0 && sample_fraction < 1.0)) {
    throw ConfigError("sample_fraction must be in (0, 1)");
  }
  validate_eve(*this);
}

SiftedKeys sift(std::span<const AliceRecord> alice, std::span<const BobRecord> bob) {
  if (alice.size() != bob.size()) {
    throw StructuralError("sift: record streams differ in length (" +
                          std::to_string(alice.size()) + " vs " + std::to_string(bob.size()) +
                          ")");
  }
  SiftedKeys out;
  for (std::size_t i = 0; i < alice.size(); ++i) {
    if (!bob[i].detected || alice[i].basis != bob[i].basis) continue;
    out.alice.push_back(alice[i].bit);
    out.bob.push_back(bob[i].bit);
  }
  return out;
}

QberEstimate estimate_qber(const BitString& alice, const BitString& bob, double sample_fraction,
                           std::uint64_t seed) {
  if (alice.size() != bob.size()) throw StructuralError("estimate_qber: key length mismatch");
  if (!(sample_fraction > 0.0 && sample_fraction < 1.0)) {
    throw DomainError("sample_fraction must be in (0, 1)");
  }
  const std::size_t n = alice.size();
  const auto k = static_cast<std::size_t>(std::llround(sample_fraction * static_cast<double>(n)));

  // Partial Fisher-Yates: the first k entries form a uniform k-subset.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Engine eng = make_engine(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_below(eng, n - i));
    std::swap(idx[i], idx[j]);
  }
  BitString disclosed(n);
  QberEstimate est;
  for (std::size_t i = 0; i < k; ++i) {
    disclosed.set(idx[i], true);
    if (alice.get(idx[i]) != bob.get(idx[i])) ++est.sample_errors;
  }
  est.sample_size = k;
  est.qber = k ? static_cast<double>(est.sample_errors) / static_cast<double>(k) : 0.0;
  est.low_confidence = k < kMinConfidentSample;
  est.alice.reserve(n - k);
  est.bob.reserve(n - k);
  for (std::size_t i = 0; i < n; ++i) {
    if (disclosed.get(i)) continue;
    est.alice.push_back(alice.get(i));
    est.bob.push_back(bob.get(i));
  }
  return est;
}

SessionResult run_session(const SimConfig& cfg) {
  cfg.validate();
  const PulseModel m = make_model(cfg);
  const std::uint64_t nb = block_count(cfg);
  std::vector<BlockResult> blocks(nb);
  const auto n = static_cast<std::int64_t>(nb);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t b = 0; b < n; ++b) {
    const auto ub = static_cast<std::uint64_t>(b);
    blocks[ub] = simulate_block(m, cfg.seed, ub, block_size(cfg, ub));
  }
  return assemble(cfg, blocks);
}

SessionResult run_session_serial(const SimConfig& cfg) {
  cfg.validate();
  const PulseModel m = make_model(cfg);
  const std::uint64_t nb = block_count(cfg);
  std::vector<BlockResult> blocks;
  blocks.reserve(nb);
  for (std::uint64_t b = 0; b < nb; ++b) {
    blocks.push_back(simulate_block(m, cfg.seed, b, block_size(cfg, b)));
  }
  return assemble(cfg, blocks);
}

SessionResult run_session_with_pns(const SimConfig& cfg) {
  if (!cfg.eve) throw ConfigError("run_session_with_pns needs an Eve configuration");
  if (cfg.eve->strategy != EveStrategy::pns) throw ConfigError("only the PNS strategy is modeled");
  return run_session(cfg);
}

}  // namespace qkd
