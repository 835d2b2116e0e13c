#include "ddlf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <ostream>
#include <thread>

namespace ddlf {

namespace {

// Sub-stream tags of a trial seed.
constexpr std::uint64_t kChannelStream = 0;
constexpr std::uint64_t kBitStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
// Sub-streams of the master seed.
constexpr std::uint64_t kPilotStream = 0x70696c6f74ULL;
constexpr std::uint64_t kPrecoderStream = 0x707265636fULL;
constexpr std::uint64_t kCalibrationStream = 0x63616c6962ULL;

template <class Fn>
auto staged(const char* stage, Fn&& fn) {
  auto label = [stage](const std::exception& e) { return std::string(stage) + ": " + e.what(); };
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(label(e));
  } catch (const DimensionError& e) {
    throw DimensionError(label(e));
  } catch (const FrameError& e) {
    throw FrameError(label(e));
  } catch (const PilotError& e) {
    throw PilotError(label(e));
  } catch (const SolverError& e) {
    throw SolverError(label(e));
  } catch (const Error& e) {
    throw Error(label(e));
  }
}

Bits random_bits(size_t count, Rng& rng) {
  Bits bits(count);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
  return bits;
}

ChannelConfig channel_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  ChannelConfig cc;
  cc.R = cfg.scatterers;
  cc.tau_max = cfg.resolved_tau_max();
  cc.nu_max = cfg.nu_max();
  cc.power_profile = cfg.power_profile;
  cc.seed = seed;
  cc.fractional = cfg.fractional;
  return cc;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 10);
  if (ec != std::errc()) throw Error("format_number: conversion failed");
  return {buf, end};
}

}  // namespace

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::snr: return "snr";
    case SweepAxis::velocity: return "velocity";
    case SweepAxis::pilots: return "pilots";
  }
  return "snr";
}

SweepAxis parse_sweep_axis(std::string_view name) {
  for (auto a : {SweepAxis::snr, SweepAxis::velocity, SweepAxis::pilots})
    if (to_string(a) == name) return a;
  throw ConfigError("unknown sweep axis '" + std::string(name) + "'");
}

std::uint64_t trial_seed(std::uint64_t master, int index) {
  return derive_seed(master, static_cast<std::uint64_t>(index));
}

DDChannel trial_channel(const ExperimentConfig& cfg, std::uint64_t seed) {
  return generate_channel(channel_config(cfg, derive_seed(seed, kChannelStream)), cfg.grid());
}

double calibrate_sigma_z2(const ExperimentConfig& cfg, int draws) {
  if (draws < 1) throw ConfigError("calibrate_sigma_z2: draws must be positive");
  const auto grid = cfg.grid();
  const auto pulse = default_pulse(grid, cfg.pulse_spread);
  double total = 0.0;
  for (int i = 0; i < draws; ++i) {
    const auto seed = derive_seed(cfg.seed ^ kCalibrationStream, static_cast<std::uint64_t>(i));
    const auto ch = generate_channel(channel_config(cfg, derive_seed(seed, kChannelStream)), grid);
    Rng rng(derive_seed(seed, kBitStream));
    const Frame x = qpsk_modulate(random_bits(2 * static_cast<size_t>(grid.M) * grid.N, rng), grid.M, grid.N);
    total += self_interference_power(x, ch, pulse, pulse, grid);
  }
  return total / draws;
}

struct PointRunner::Slot {
  std::string name;
  bool perfect = false;
  std::unique_ptr<LmmseEstimator> lmmse;
  std::unique_ptr<SrhEstimator> srh;
};

PointRunner::PointRunner(const ExperimentConfig& cfg, double snr_db) : cfg_(cfg) {
  cfg_.snr_db = {snr_db};
  cfg_.validate();
  grid_ = cfg_.grid();
  pulse_ = staged("pulse", [&] { return default_pulse(grid_, cfg_.pulse_spread); });
  placement_ = staged("placement", [&] {
    return accordion_placement(cfg_.data_rows, cfg_.data_cols, cfg_.pilots_per_row);
  });
  pilots_ = qpsk_pilots(placement_.pilot_count(), derive_seed(cfg_.seed, kPilotStream));
  precoder_ = Precoder(cfg_.precoder, cfg_.data_rows, cfg_.data_cols, cfg_.subframes,
                       derive_seed(cfg_.seed, kPrecoderStream));
  grid_k_ = cfg_.reconstruction_grid();
  sigma2_ = std::pow(10.0, -snr_db / 10.0);

  const bool needs_z = std::any_of(cfg_.estimators.begin(), cfg_.estimators.end(),
                                   [](const std::string& e) { return e == "srh-na" || e == "srh-mna"; });
  if (cfg_.sigma_z2) sigma_z2_ = *cfg_.sigma_z2;
  else if (needs_z) sigma_z2_ = staged("calibration", [&] { return calibrate_sigma_z2(cfg_); });

  EstimatorConfig ec;
  ec.sigma2 = sigma2_;
  ec.sigma_z2 = sigma_z2_;
  ec.omega = cfg_.omega;
  ec.grid_k = grid_k_;
  if (cfg_.alpha > 0.0 && cfg_.beta > 0.0) {
    ec.alpha = cfg_.alpha;
    ec.beta = cfg_.beta;
  } else {
    std::tie(ec.alpha, ec.beta) = mode_weights(cfg_.resolved_tau_max(), cfg_.nu_max(), grid_);
  }

  for (const auto& name : cfg_.estimators) {
    auto slot = std::make_shared<Slot>();
    slot->name = name;
    if (name == "perfect") {
      slot->perfect = true;
    } else {
      ec.variant = parse_estimator_variant(name);
      if (ec.variant == EstimatorVariant::lmmse) {
        slot->lmmse = staged("lmmse setup", [&] { return std::make_unique<LmmseEstimator>(placement_, grid_k_, sigma2_); });
      } else {
        slot->srh = staged("srh setup", [&] {
          const auto params = resolve_srh_parameters(ec, placement_.pilot_count(), &pilots_);
          return std::make_unique<SrhEstimator>(placement_, params, cfg_.solver);
        });
      }
    }
    slots_.push_back(std::move(slot));
  }
}

DDChannel PointRunner::channel(std::uint64_t seed) const {
  return generate_channel(channel_config(cfg_, derive_seed(seed, kChannelStream)), grid_);
}

TrialResult PointRunner::run(std::uint64_t seed) const {
  const auto ch = staged("channel", [&] { return channel(seed); });

  Rng bit_rng(derive_seed(seed, kBitStream));
  const size_t capacity = 2 * static_cast<size_t>(cfg_.data_rows) * cfg_.data_cols;
  Bits info;
  Bits bits;
  if (cfg_.coded) {
    info = random_bits(static_cast<size_t>(info_bits_for(static_cast<int>(capacity))), bit_rng);
    bits = conv_code_encode(info);
    const Bits pad = random_bits(capacity - bits.size(), bit_rng);
    bits.insert(bits.end(), pad.begin(), pad.end());
  } else {
    bits = random_bits(capacity, bit_rng);
  }

  const Frame X = qpsk_modulate(bits, cfg_.data_rows, cfg_.data_cols);
  const Frame x = staged("precoding", [&] { return precoder_.encode(X); });
  const Frame frame = staged("multiplexing", [&] { return multiplex(x, pilots_, placement_); });
  Signal rx = staged("synthesis", [&] { return synthesize(frame, pulse_, grid_); });
  rx = staged("channel", [&] { return apply_channel(rx, ch, grid_); });
  Rng noise_rng(derive_seed(seed, kNoiseStream));
  rx = add_noise(rx, sigma2_, noise_rng);
  const Frame y = staged("analysis", [&] { return analyze(rx, pulse_, grid_); });
  const CVector h_pilot = staged("pilot extraction", [&] { return partial_cmd(extract_pilots(y, placement_), pilots_); });

  TrialResult out;
  out.metrics.reserve(slots_.size());
  for (const auto& slot : slots_) {
    const Frame h_tilde = staged(slot->name.c_str(), [&]() -> Frame {
      if (slot->perfect) return true_cmd(ch, pulse_, pulse_, grid_);
      if (slot->lmmse) return slot->lmmse->estimate(h_pilot).h_tilde;
      return slot->srh->estimate(h_pilot).h_tilde;
    });
    const Frame x_hat = staged("equalization", [&] { return mmse_equalize(y, h_tilde, sigma2_); });
    const Frame X_hat = precoder_.decode(demultiplex(x_hat, placement_));
    const Bits received = qpsk_demodulate(X_hat);
    auto m = compute_metrics(X_hat, X, bits, received);
    if (cfg_.coded) {
      const Bits codeword(received.begin(), received.begin() + static_cast<long>(3 * (info.size() + kCodeTail)));
      m.coded_ber = bit_error_rate(info, conv_code_decode_hard(codeword));
    }
    out.metrics.push_back(m);
  }
  return out;
}

TrialResult run_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.snr_db.empty()) throw ConfigError("run_trial: empty snr list");
  return PointRunner(cfg, cfg.snr_db.front()).run(seed);
}

int resolve_threads(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("DDLF_THREADS"); env && *env) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end && *end == '\0' && cap >= 1) n = std::min<long>(n, cap);
  }
  return n;
}

std::vector<TrialResult> run_point(const ExperimentConfig& cfg, double snr_db) {
  const PointRunner runner(cfg, snr_db);
  const int trials = cfg.trials;
  std::vector<TrialResult> results(static_cast<size_t>(trials));
  std::vector<std::exception_ptr> errors(static_cast<size_t>(trials));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < trials; i = next++) {
      try {
        results[static_cast<size_t>(i)] = runner.run(trial_seed(cfg.seed, i));
      } catch (...) {
        errors[static_cast<size_t>(i)] = std::current_exception();
      }
    }
  };
  const int workers = std::min(resolve_threads(cfg.threads), trials);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::vector<ResultRow> summarize_point(const ExperimentConfig& cfg, double snr_db,
                                       const std::vector<TrialResult>& trials) {
  if (trials.empty()) throw ConfigError("summarize_point: no trials");
  const long channel_bits = 2L * cfg.data_rows * cfg.data_cols;
  const long info_bits = info_bits_for(static_cast<int>(channel_bits));
  std::vector<ResultRow> rows;
  for (size_t e = 0; e < cfg.estimators.size(); ++e) {
    std::vector<double> mse, ber, cber, nmsed;
    for (const auto& t : trials) {
      const auto& m = t.metrics.at(e);
      mse.push_back(m.rel_symbol_mse_db);
      ber.push_back(m.uncoded_ber);
      nmsed.push_back(m.nmsed_db);
      if (m.coded_ber) cber.push_back(*m.coded_ber);
    }
    ResultRow r;
    r.snr_db = snr_db;
    r.velocity_kmh = cfg.velocity_kmh;
    r.pilots = cfg.pilot_count();
    r.estimator = cfg.estimators[e];
    r.precoder = std::string(to_string(cfg.precoder));
    r.subframes = cfg.subframes;
    r.trials = static_cast<int>(trials.size());
    r.rel_mse_db = summarize(mse);
    r.uncoded_ber = summarize(ber);
    r.uncoded_ber_db = ber_db(r.uncoded_ber.mean, channel_bits * r.trials);
    r.nmsed_db = summarize(nmsed);
    if (!cber.empty()) {
      r.coded = true;
      r.coded_ber = summarize(cber);
      r.coded_ber_db = ber_db(r.coded_ber.mean, info_bits * r.trials);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

ExperimentConfig at_sweep_value(const ExperimentConfig& cfg, SweepAxis axis, double value) {
  ExperimentConfig c = cfg;
  switch (axis) {
    case SweepAxis::snr:
      c.snr_db = {value};
      break;
    case SweepAxis::velocity:
      if (value < 0.0) throw ConfigError("sweep: negative velocity");
      c.velocity_kmh = value;
      break;
    case SweepAxis::pilots: {
      const long total = std::lround(value);
      if (total < 1 || std::abs(value - static_cast<double>(total)) > 1e-9 || total % cfg.data_rows != 0)
        throw ConfigError("sweep: pilot count " + format_number(value) + " is not a positive multiple of " +
                          std::to_string(cfg.data_rows));
      c.pilots_per_row = static_cast<int>(total / cfg.data_rows);
      break;
    }
  }
  return c;
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep: no values");
  std::vector<ResultRow> rows;
  for (double v : values) {
    const ExperimentConfig c = at_sweep_value(cfg, axis, v);
    for (double snr : c.snr_db) {
      const auto point = summarize_point(c, snr, run_point(c, snr));
      rows.insert(rows.end(), point.begin(), point.end());
    }
  }
  return rows;
}

std::vector<ResultRow> run_simulation(const ExperimentConfig& cfg) {
  return run_sweep(cfg, SweepAxis::snr, cfg.snr_db);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "snr_db,velocity_kmh,pilots,estimator,precoder,subframes,trials,"
         "rel_mse_db_mean,rel_mse_db_std,uncoded_ber_mean,uncoded_ber_std,uncoded_ber_db,"
         "coded_ber_mean,coded_ber_std,coded_ber_db,nmsed_db_mean,nmsed_db_std\r\n";
  for (const auto& r : rows) {
    out << format_number(r.snr_db) << ',' << format_number(r.velocity_kmh) << ',' << r.pilots << ','
        << csv_field(r.estimator) << ',' << csv_field(r.precoder) << ',' << r.subframes << ',' << r.trials << ','
        << format_number(r.rel_mse_db.mean) << ',' << format_number(r.rel_mse_db.std) << ','
        << format_number(r.uncoded_ber.mean) << ',' << format_number(r.uncoded_ber.std) << ','
        << format_number(r.uncoded_ber_db) << ',';
    if (r.coded)
      out << format_number(r.coded_ber.mean) << ',' << format_number(r.coded_ber.std) << ','
          << format_number(r.coded_ber_db) << ',';
    else
      out << ",,,";
    out << format_number(r.nmsed_db.mean) << ',' << format_number(r.nmsed_db.std) << "\r\n";
  }
}

}  // namespace ddlf
