#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "qkd/bb84_engine.hpp"
#include "qkd/errors.hpp"
#include "qkd/flux_optimizer.hpp"
#include "qkd/io.hpp"
#include "qkd/pipeline.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#ifndef QKD_VERSION
#define QKD_VERSION "0.0.0"
#endif

namespace qkd::cli {

namespace {

// Accepts 100000000 as well as 1e8, but not fractions.
std::uint64_t parse_count(const std::string& text) {
  std::uint64_t n = 0;
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, n);
  if (ec == std::errc() && p == end) return n;
  double x = 0.0;
  auto [q, ec2] = std::from_chars(text.data(), end, x);
  if (ec2 != std::errc() || q != end || !(x >= 0.0) || x > 1.8e19 || x != std::floor(x)) {
    throw CLI::ValidationError("--n-pulses", "expected a non-negative integer, got '" + text + "'");
  }
  return static_cast<std::uint64_t>(x);
}

using nlohmann::ordered_json;

struct Options {
  std::string params_file;
  std::optional<double> mu;
  double clock_rate = 2.0e6;
  double length_km = 0.0;
  double attenuation = 0.21;
  double efficiency = 0.045;
  double dark_prob = 8.0e-7;
  double modulation_error = 0.03;
  double f_ec = kFigureEfficiency;
  std::string multiphoton = "approx";

  double mu_lo = 1e-5;
  double mu_hi = 1.0;
  double rel_tol = 1e-4;
  int grid_points = 200;

  std::string format = "json";
  std::string output;
  int threads = 0;

  std::string lengths = "0:60:1";
  std::string mu_decades = "1e-4:1";
  int mu_points = 121;
  std::string length_range = "0:60:0.5";

  std::uint64_t n_pulses = 0;  // 0: command default
  std::uint64_t seed = 1;
  double sample_fraction = 0.1;
  std::string eve = "none";
  double eve_transmission = 1.0;
  bool eve_keeps_receiver_loss = false;
  std::string alice_key;
  std::string bob_key;

  std::uint64_t margin = 30;
  std::uint64_t hash_seed = 0x5eed;
  std::string key_out;
  std::string transcript_out;
};

constexpr std::uint64_t kSimulateDefaultPulses = 1'000'000;
constexpr std::uint64_t kPipelineDefaultPulses = 100'000'000;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

MultiphotonModel parse_model(const std::string& s) {
  if (s == "approx") return MultiphotonModel::approx;
  if (s == "exact") return MultiphotonModel::exact_poisson;
  throw UsageError("--multiphoton must be 'approx' or 'exact'");
}

ModelParams model_params(const Options& o) {
  ModelParams p;
  p.detector = {o.efficiency, o.dark_prob, o.modulation_error};
  p.attenuation_db_per_km = o.attenuation;
  p.clock_rate_hz = o.clock_rate;
  p.rate = {o.f_ec, parse_model(o.multiphoton)};
  p.validate();
  return p;
}

OptimizeConfig optimize_config(const Options& o) {
  OptimizeConfig c{o.mu_lo, o.mu_hi, o.rel_tol, o.grid_points};
  c.validate();
  return c;
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("malformed number '" + s + "' in " + what);
  }
  if (used != s.size()) throw UsageError("malformed number '" + s + "' in " + what);
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

// "a:b:step" or "x,y,z".
std::vector<double> parse_lengths(const std::string& spec, const std::string& what) {
  std::vector<double> v;
  if (spec.find(':') != std::string::npos) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) throw UsageError(what + " must be lo:hi:step");
    const double lo = parse_double(parts[0], what);
    const double hi = parse_double(parts[1], what);
    const double step = parse_double(parts[2], what);
    if (!(lo >= 0.0 && hi >= lo && step > 0.0)) throw UsageError(what + ": need 0 <= lo <= hi, step > 0");
    return lin_range(lo, hi, step);
  }
  for (const auto& p : split(spec, ',')) v.push_back(parse_double(p, what));
  if (v.empty()) throw UsageError(what + " is empty");
  for (double l : v) {
    if (!(l >= 0.0)) throw UsageError(what + ": lengths must be >= 0");
  }
  return v;
}

ordered_json link_json(const Options& o) {
  ordered_json j;
  if (o.mu) j["mu"] = *o.mu;
  j["clock_rate_hz"] = o.clock_rate;
  j["attenuation_db_per_km"] = o.attenuation;
  j["efficiency"] = o.efficiency;
  j["dark_prob"] = o.dark_prob;
  j["modulation_error"] = o.modulation_error;
  j["correction_efficiency"] = o.f_ec;
  j["multiphoton"] = o.multiphoton;
  return j;
}

ordered_json optimizer_json(const Options& o) {
  return {{"mu_lo", o.mu_lo}, {"mu_hi", o.mu_hi}, {"rel_tol", o.rel_tol},
          {"grid_points", o.grid_points}};
}

ordered_json manifest(const std::string& command, const std::vector<std::string>& args,
                      const ordered_json& params, std::optional<std::uint64_t> seed) {
  ordered_json m;
  m["tool"] = "qkdsim";
  m["version"] = QKD_VERSION;
  m["command"] = command;
  m["argv"] = args;
  m["params"] = params;
  if (seed) m["seed"] = *seed;
  return m;
}

ordered_json window_json(const SecureWindow& w) {
  return {{"mu_min", w.mu_min}, {"mu_opt", w.mu_opt},   {"mu_max", w.mu_max},
          {"g_max", w.g_max},   {"empty", w.empty()},   {"grid_unimodal", w.grid_unimodal}};
}

// Writes to --output when given, otherwise to out.
class Sink {
 public:
  Sink(const Options& o, std::ostream& out) : out_(&out) {
    if (!o.output.empty()) {
      file_ = std::make_unique<std::ofstream>(o.output, std::ios::binary | std::ios::trunc);
      if (!*file_) throw ConfigError("cannot write '" + o.output + "'");
      out_ = file_.get();
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ostream* out_;
  std::unique_ptr<std::ofstream> file_;
};

void emit_json(const Options& o, std::ostream& out, const ordered_json& j) {
  Sink sink(o, out);
  sink.stream() << j.dump(2) << '\n';
}

// CSV payloads carry no manifest; it goes next to the file or to stderr.
void emit_csv_manifest(const Options& o, std::ostream& err, const ordered_json& m) {
  if (!o.output.empty()) {
    std::ofstream f(o.output + ".manifest.json", std::ios::trunc);
    if (!f) throw ConfigError("cannot write manifest next to '" + o.output + "'");
    f << m.dump(2) << '\n';
  } else {
    err << m.dump() << '\n';
  }
}

int cmd_optimize(const Options& o, const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  const ModelParams params = model_params(o);
  const OptimizeConfig cfg = optimize_config(o);
  ChannelParams{o.length_km, o.attenuation}.validate();
  const SecureWindow w = search_window(o.length_km, params, cfg);
  if (w.empty()) {
    err << "no secure window at " << io::format_number(o.length_km)
        << " km: best gain per cycle " << io::format_number(w.g_max) << " at mu "
        << io::format_number(w.mu_opt) << '\n';
    return kNoSecureWindow;
  }
  const LinkParams link = params.link(o.length_km, w.mu_opt);
  const LinkBudget budget = link_budget(link, params.rate.multiphoton_model);
  const double pns_limit = pns_mu_limit(o.length_km, params, cfg);

  ordered_json p = link_json(o);
  p["length_km"] = o.length_km;
  p["optimizer"] = optimizer_json(o);
  if (o.format == "text") {
    Sink sink(o, out);
    auto& s = sink.stream();
    const auto row = [&](const char* name, double v) {
      s << std::left << std::setw(14) << name << io::format_number(v) << '\n';
    };
    row("length_km", o.length_km);
    row("mu_min", w.mu_min);
    row("mu_opt", w.mu_opt);
    row("mu_max", w.mu_max);
    row("pns_mu_limit", pns_limit);
    row("gain", w.g_max);
    row("secure_bps", gain_to_bps(w.g_max, o.clock_rate));
    row("sifted_bps", gain_to_bps(sifted_gain(budget.detect_prob), o.clock_rate));
    row("qber", budget.qber);
    s << "# manifest " << manifest("optimize", args, p, std::nullopt).dump() << '\n';
    return kOk;
  }
  ordered_json j;
  j["manifest"] = manifest("optimize", args, p, std::nullopt);
  j["length_km"] = o.length_km;
  j["window"] = window_json(w);
  j["pns_mu_limit"] = pns_limit;
  j["secure_bps"] = gain_to_bps(w.g_max, o.clock_rate);
  j["sifted_bps"] = gain_to_bps(sifted_gain(budget.detect_prob), o.clock_rate);
  j["qber"] = budget.qber;
  emit_json(o, out, j);
  return kOk;
}

int cmd_curve(const Options& o, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err) {
  const ModelParams params = model_params(o);
  const OptimizeConfig cfg = optimize_config(o);
  const std::vector<double> lengths = parse_lengths(o.lengths, "--lengths");
  const auto rows = rate_curve(lengths, params, cfg);

  Sink sink(o, out);
  auto& s = sink.stream();
  s << "length_km,mu_opt,sifted_bps,secure_bps,qber\n";
  for (const auto& r : rows) {
    s << io::format_number(r.length_km) << ',';
    if (r.secure()) {
      s << io::format_number(r.mu_opt) << ',' << io::format_number(r.sifted_bps) << ','
        << io::format_number(r.secure_bps) << ',' << io::format_number(r.qber) << '\n';
    } else {
      s << "NA,NA,0,NA\n";
    }
  }
  ordered_json p = link_json(o);
  p["lengths"] = o.lengths;
  p["optimizer"] = optimizer_json(o);
  emit_csv_manifest(o, err, manifest("curve", args, p, std::nullopt));
  return kOk;
}

int cmd_contour(const Options& o, const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
  const ModelParams params = model_params(o);
  const auto decades = split(o.mu_decades, ':');
  if (decades.size() != 2) throw UsageError("--mu-decades must be lo:hi");
  const double mu_lo = parse_double(decades[0], "--mu-decades");
  const double mu_hi = parse_double(decades[1], "--mu-decades");
  if (!(mu_lo > 0.0 && mu_hi > mu_lo)) throw UsageError("--mu-decades needs 0 < lo < hi");
  if (o.mu_points < 2) throw UsageError("--mu-points must be >= 2");
  if (o.length_range.find(':') == std::string::npos) throw UsageError("--length must be lo:hi:step");
  const auto mus = log_space(mu_lo, mu_hi, static_cast<std::size_t>(o.mu_points));
  const auto lengths = parse_lengths(o.length_range, "--length");
  const GainGrid grid = contour_grid(mus, lengths, params);

  Sink sink(o, out);
  auto& s = sink.stream();
  s << "mu,length_km,gain_per_cycle\n";
  for (std::size_t i = 0; i < grid.mu.size(); ++i) {
    for (std::size_t j = 0; j < grid.length_km.size(); ++j) {
      s << io::format_number(grid.mu[i]) << ',' << io::format_number(grid.length_km[j]) << ','
        << io::format_number(grid.at(i, j)) << '\n';
    }
  }
  ordered_json p = link_json(o);
  p["mu_decades"] = o.mu_decades;
  p["mu_points"] = o.mu_points;
  p["length"] = o.length_range;
  emit_csv_manifest(o, err, manifest("contour", args, p, std::nullopt));
  return kOk;
}

struct SessionSetup {
  ModelParams params;
  SimConfig cfg;
  bool mu_defaulted = false;
};

SessionSetup session_setup(const Options& o, std::uint64_t default_pulses) {
  SessionSetup s;
  s.params = model_params(o);
  ChannelParams{o.length_km, o.attenuation}.validate();
  double mu = 0.0;
  if (o.mu) {
    mu = *o.mu;
  } else {
    mu = search_window(o.length_km, s.params, optimize_config(o)).mu_opt;
    s.mu_defaulted = true;
  }
  s.cfg.n_pulses = o.n_pulses ? o.n_pulses : default_pulses;
  s.cfg.seed = o.seed;
  s.cfg.link = s.params.link(o.length_km, mu);
  s.cfg.sample_fraction = o.sample_fraction;
  if (o.eve == "pns") {
    s.cfg.eve = EveConfig{EveStrategy::pns, o.eve_transmission, !o.eve_keeps_receiver_loss};
  } else if (o.eve != "none") {
    throw UsageError("--eve must be 'none' or 'pns'");
  }
  s.cfg.validate();
  return s;
}

ordered_json session_params_json(const Options& o, const SessionSetup& s) {
  ordered_json p = link_json(o);
  p["mu"] = s.cfg.link.source.mu;
  p["mu_source"] = s.mu_defaulted ? "optimal" : "given";
  p["length_km"] = o.length_km;
  p["n_pulses"] = s.cfg.n_pulses;
  p["sample_fraction"] = o.sample_fraction;
  p["eve"] = o.eve;
  if (s.cfg.eve) {
    p["eve_transmission"] = o.eve_transmission;
    p["eve_bypasses_receiver_loss"] = s.cfg.eve->bypass_receiver_loss;
  }
  return p;
}

SessionResult execute_session(const SessionSetup& s) {
  return s.cfg.eve ? run_session_with_pns(s.cfg) : run_session(s.cfg);
}

ordered_json session_json(const SessionResult& r) {
  ordered_json j;
  j["n_pulses"] = r.n_pulses;
  j["detected_count"] = r.detected_count;
  j["signal_detected_count"] = r.signal_detected_count;
  j["sifted_count"] = r.sifted_count;
  j["sifted_signal_count"] = r.sifted_signal_count;
  j["sifted_multiphoton_count"] = r.sifted_multiphoton_count;
  j["sample_disclosed"] = r.sample_disclosed;
  j["sample_errors"] = r.sample_errors;
  j["qber_est"] = r.qber_est;
  j["qber_low_confidence"] = r.qber_low_confidence;
  j["full_key_qber"] = r.full_qber();
  j["key_length_after_sample"] = r.alice_sifted.size();
  j["eve_active"] = r.eve_active;
  j["eve_known_count"] = r.eve_known_count;
  j["eve_known_fraction"] = r.eve_known_fraction;
  j["eve_known_signal_fraction"] = r.eve_known_signal_fraction();
  return j;
}

ordered_json analytic_json(const LinkParams& link, MultiphotonModel model) {
  ordered_json j;
  const double p = detection_prob(link.source, link.channel, link.detector);
  j["detect_prob"] = p;
  j["sifted_prob"] = sifted_gain(p);
  j["multiphoton_prob"] = multiphoton_prob(link.source.mu, model);
  j["qber"] = p > 0.0 ? qber(link.source, link.channel, link.detector) : 0.5;
  return j;
}

int cmd_simulate(const Options& o, const std::vector<std::string>& args, std::ostream& out,
                 std::ostream&) {
  const SessionSetup setup = session_setup(o, kSimulateDefaultPulses);
  const SessionResult r = execute_session(setup);
  if (!o.alice_key.empty()) io::write_packed_key_file(o.alice_key, r.alice_sifted);
  if (!o.bob_key.empty()) io::write_packed_key_file(o.bob_key, r.bob_sifted);

  ordered_json j;
  j["manifest"] = manifest("simulate", args, session_params_json(o, setup), o.seed);
  j["session"] = session_json(r);
  j["analytic"] = analytic_json(setup.cfg.link, setup.params.rate.multiphoton_model);
  emit_json(o, out, j);
  return kOk;
}

std::string hex(const BitString& key) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  for (std::uint8_t b : key.to_bytes_msb_first()) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 15]);
  }
  return s;
}

int cmd_pipeline(const Options& o, const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  const SessionSetup setup = session_setup(o, kPipelineDefaultPulses);
  const SessionResult session = execute_session(setup);
  ordered_json p = session_params_json(o, setup);
  p["security_margin_bits"] = o.margin;
  p["hash_seed"] = o.hash_seed;

  ordered_json j;
  j["manifest"] = manifest("pipeline", args, p, o.seed);
  j["session"] = session_json(session);
  j["analytic"] = analytic_json(setup.cfg.link, setup.params.rate.multiphoton_model);
  const GainBreakdown model = secure_gain(setup.cfg.link, setup.params.rate);
  j["analytic"]["secure_gain"] = model.secure_gain;
  j["analytic"]["secure"] = model.secure;

  if (session.sifted_count == 0) {
    err << "no sifted bits; nothing to reconcile\n";
    j["ledger"] = {{"final_length", 0}, {"note", "no sifted bits"}};
    emit_json(o, out, j);
    return kOk;
  }

  const PaParams pa{o.hash_seed, o.margin};
  const LinkBudget budget =
      measured_budget(session, setup.cfg.link.source, setup.params.rate.multiphoton_model);
  KeyPipelineReport r;
  try {
    r = run_pipeline(session, budget, setup.params.rate, pa, derive_seed(o.seed, 0xca5cade));
  } catch (const ResidualErrors& e) {
    err << "reconciliation failed: " << e.what() << '\n';
    return kReconciliationFailed;
  }

  ordered_json l;
  l["sifted_count"] = r.sifted_count;
  l["sample_disclosed"] = r.sample_disclosed;
  l["reconciled_length"] = r.reconciled_length;
  l["qber_est"] = r.qber_est;
  l["reconciled"] = r.reconciled;
  if (r.reconciliation) {
    const auto& rec = *r.reconciliation;
    l["cascade_error_rate"] = r.cascade_error_rate;
    l["cascade_passes"] = rec.passes;
    l["cascade_first_block"] = rec.first_block_size;
    l["corrections"] = rec.corrections;
    l["parity_bits"] = rec.leakage_bits;
    l["verification_bits"] = rec.verification_bits;
    l["measured_efficiency"] = rec.measured_efficiency;
  }
  l["leakage_bits"] = r.leakage_bits;
  l["model_ec_bits"] = r.model_ec_bits;
  l["measured_detect_prob"] = budget.detect_prob;
  l["multiphoton_prob"] = budget.multiphoton_prob;
  l["pa_fraction"] = r.pa_fraction;
  l["security_margin_bits"] = r.security_margin_bits;
  l["final_length"] = r.final_length;
  l["final_bits_per_pulse"] =
      static_cast<double>(r.final_length) / static_cast<double>(r.n_pulses);
  l["final_key_hex"] = hex(r.final_key);
  if (!r.note.empty()) l["note"] = r.note;
  j["ledger"] = l;

  if (!o.key_out.empty()) {
    io::write_packed_key_file(o.key_out, r.final_key);
    ordered_json meta;
    meta["bits"] = r.final_length;
    meta["sifted_count"] = r.sifted_count;
    meta["reconciled_length"] = r.reconciled_length;
    meta["leakage_bits"] = r.leakage_bits;
    meta["security_margin_bits"] = r.security_margin_bits;
    meta["hash_seed"] = r.hash_seed;
    meta["cascade_seed"] = r.cascade_seed;
    meta["session_seed"] = o.seed;
    std::ofstream f(o.key_out + ".json", std::ios::trunc);
    f << meta.dump(2) << '\n';
  }
  if (!o.transcript_out.empty() && r.reconciliation) {
    std::ofstream f(o.transcript_out, std::ios::trunc);
    if (!f) throw ConfigError("cannot write '" + o.transcript_out + "'");
    write_transcript(f, r.reconciliation->transcript);
  }
  emit_json(o, out, j);
  return kOk;
}

void add_model_options(CLI::App* sub, Options& o) {
  sub->add_option("--params", o.params_file, "key = value parameter file (flags take precedence)");
  sub->add_option("--clock-rate", o.clock_rate, "pulse rate in Hz")->capture_default_str();
  sub->add_option("--alpha,--attenuation", o.attenuation, "fibre loss in dB/km")
      ->capture_default_str();
  sub->add_option("--efficiency", o.efficiency, "Bob's overall detection efficiency")
      ->capture_default_str();
  sub->add_option("--dark-prob", o.dark_prob, "erroneous count probability per gate")
      ->capture_default_str();
  sub->add_option("--modulation-error", o.modulation_error, "wrong-bit fraction of signal clicks")
      ->capture_default_str();
  sub->add_option("--f-ec", o.f_ec, "error-correction efficiency f(e)")->capture_default_str();
  sub->add_option("--multiphoton", o.multiphoton, "approx | exact")->capture_default_str();
  sub->add_option("--threads", o.threads, "OpenMP threads (0 = runtime default)");
}

void add_optimizer_options(CLI::App* sub, Options& o) {
  sub->add_option("--mu-lo", o.mu_lo)->capture_default_str();
  sub->add_option("--mu-hi", o.mu_hi)->capture_default_str();
  sub->add_option("--rel-tol", o.rel_tol)->capture_default_str();
  sub->add_option("--grid-points", o.grid_points)->capture_default_str();
}

void add_session_options(CLI::App* sub, Options& o) {
  sub->add_option("--length-km", o.length_km)->capture_default_str();
  sub->add_option("--mu", o.mu, "mean photon number (default: optimal for the length)");
  sub->add_option_function<std::string>(
         "--n-pulses", [&o](const std::string& v) { o.n_pulses = parse_count(v); },
         "pulses to send; integer or exact scientific form such as 1e8")
      ->type_name("UINT");
  sub->add_option("--seed", o.seed)->capture_default_str();
  sub->add_option("--sample-fraction", o.sample_fraction)->capture_default_str();
  sub->add_option("--eve", o.eve, "none | pns")->capture_default_str();
  sub->add_option("--eve-transmission", o.eve_transmission)->capture_default_str();
  sub->add_flag("--eve-keeps-receiver-loss", o.eve_keeps_receiver_loss,
                "Eve's channel ends at Bob's input; his internal loss still applies");
  sub->add_option("--output,-o", o.output);
}

// Finds --params FILE / --params=FILE before parsing, so its keys can be
// injected ahead of the user's flags.
std::string find_params_file(const std::vector<std::string>& args) {
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--params" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--params=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

std::vector<std::string> with_params_file(const std::vector<std::string>& args, CLI::App& app) {
  if (args.size() < 2) return args;
  const std::string path = find_params_file(args);
  if (path.empty()) return args;
  CLI::App* sub = app.get_subcommand_no_throw(args[1]);
  if (sub == nullptr) return args;

  std::vector<std::string> injected;
  for (const auto& [key, value] : io::read_key_value_file(path)) {
    const std::string flag = "--" + key;
    bool known = false;
    for (CLI::App* s : app.get_subcommands({})) {
      if (s->get_option_no_throw(flag) != nullptr) known = true;
    }
    if (!known) throw UsageError("unknown key '" + key + "' in " + path);
    if (key == "params") throw UsageError("params files cannot nest");
    if (sub->get_option_no_throw(flag) == nullptr) continue;
    CLI::Option* opt = sub->get_option(flag);
    if (opt->get_type_size() == 0) {
      if (value == "true" || value == "1") injected.push_back(flag);
      continue;
    }
    injected.push_back(flag + "=" + value);
  }
  std::vector<std::string> out(args.begin(), args.begin() + 2);
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + 2, args.end());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Weak-pulse BB84 key-rate modeling and simulation"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* optimize = app.add_subcommand("optimize", "optimal intensity and secure window");
  add_model_options(optimize, o);
  add_optimizer_options(optimize, o);
  optimize->add_option("--length-km", o.length_km)->capture_default_str();
  optimize->add_option("--format", o.format, "json | text")->capture_default_str();
  optimize->add_option("--output,-o", o.output);

  auto* curve = app.add_subcommand("curve", "rates versus fibre length (CSV)");
  add_model_options(curve, o);
  add_optimizer_options(curve, o);
  curve->add_option("--lengths", o.lengths, "x,y,... or lo:hi:step")->capture_default_str();
  curve->add_option("--output,-o", o.output);

  auto* contour = app.add_subcommand("contour", "secure gain over (mu, length) (CSV)");
  add_model_options(contour, o);
  contour->add_option("--mu-decades", o.mu_decades, "lo:hi, log-spaced")->capture_default_str();
  contour->add_option("--mu-points", o.mu_points)->capture_default_str();
  contour->add_option("--length", o.length_range, "lo:hi:step in km")->capture_default_str();
  contour->add_option("--output,-o", o.output);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo BB84 session");
  add_model_options(simulate, o);
  add_optimizer_options(simulate, o);
  add_session_options(simulate, o);
  simulate->add_option("--alice-key", o.alice_key, "packed sifted key output");
  simulate->add_option("--bob-key", o.bob_key, "packed sifted key output");

  auto* pipeline = app.add_subcommand("pipeline", "session + Cascade + privacy amplification");
  add_model_options(pipeline, o);
  add_optimizer_options(pipeline, o);
  add_session_options(pipeline, o);
  pipeline->add_option("--margin", o.margin, "security margin in bits")->capture_default_str();
  pipeline->add_option("--hash-seed", o.hash_seed)->capture_default_str();
  pipeline->add_option("--key-out", o.key_out, "packed final key (+ .json metadata)");
  pipeline->add_option("--transcript", o.transcript_out, "Cascade transcript log");

  try {
    const std::vector<std::string> full = with_params_file(args, app);
    std::vector<const char*> argv;
    argv.reserve(full.size());
    for (const auto& a : full) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

#ifdef _OPENMP
  if (o.threads > 0) omp_set_num_threads(o.threads);
#endif

  try {
    if (*optimize) return cmd_optimize(o, args, out, err);
    if (*curve) return cmd_curve(o, args, out, err);
    if (*contour) return cmd_contour(o, args, out, err);
    if (*simulate) return cmd_simulate(o, args, out, err);
    if (*pipeline) return cmd_pipeline(o, args, out, err);
  } catch (const EmptyWindow& e) {
    err << e.what() << '\n';
    return kNoSecureWindow;
  } catch (const ResidualErrors& e) {
    err << "reconciliation failed: " << e.what() << '\n';
    return kReconciliationFailed;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "invalid parameters: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "invalid parameters: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace qkd::cli
