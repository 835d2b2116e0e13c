#include <doctest.h>

#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "ddlf/harness.hpp"

using namespace ddlf;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.data_rows = 8;
  c.data_cols = 8;
  c.trials = 6;
  c.threads = 2;
  c.seed = 11;
  return c;
}

std::string sweep_csv(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<double>& values) {
  std::ostringstream out;
  write_results_csv(out, run_sweep(cfg, axis, values));
  return out.str();
}

}  // namespace

TEST_CASE("clean loopback with perfect CMD") {
  ExperimentConfig c = small_config();
  c.estimators = {"perfect"};
  c.tau_max = 1e-12;
  c.velocity_kmh = 0.0;
  c.scatterers = 1;
  c.snr_db = {300.0};
  for (auto kind : {PrecoderKind::none, PrecoderKind::dsft2d, PrecoderKind::fft1d, PrecoderKind::fft2d,
                    PrecoderKind::fwht1d, PrecoderKind::fwht2d, PrecoderKind::random}) {
    CAPTURE(to_string(kind));
    c.precoder = kind;
    for (int i = 0; i < 3; ++i) {
      const auto r = run_trial(c, trial_seed(c.seed, i));
      REQUIRE(r.metrics.size() == 1);
      CHECK(r.metrics[0].uncoded_ber == 0.0);
      CHECK(r.metrics[0].rel_symbol_mse_db < -60.0);
    }
  }
  c.precoder = PrecoderKind::dsft2d;
  c.coded = true;
  const auto r = run_trial(c, trial_seed(c.seed, 0));
  REQUIRE(r.metrics[0].coded_ber.has_value());
  CHECK(*r.metrics[0].coded_ber == 0.0);
}

TEST_CASE("trials are deterministic") {
  ExperimentConfig c = small_config();
  const auto seed = trial_seed(c.seed, 3);
  const auto a = run_trial(c, seed);
  const auto b = run_trial(c, seed);
  REQUIRE(a.metrics.size() == c.estimators.size());
  for (size_t e = 0; e < a.metrics.size(); ++e) {
    CHECK(a.metrics[e].uncoded_ber == b.metrics[e].uncoded_ber);
    CHECK(a.metrics[e].rel_symbol_mse_db == b.metrics[e].rel_symbol_mse_db);
    CHECK(a.metrics[e].nmsed_db == b.metrics[e].nmsed_db);
  }
}

TEST_CASE("thread count does not change results") {
  ExperimentConfig c = small_config();
  c.threads = 1;
  const auto one = sweep_csv(c, SweepAxis::snr, {10.0});
  c.threads = 4;
  CHECK(sweep_csv(c, SweepAxis::snr, {10.0}) == one);
  CHECK(sweep_csv(c, SweepAxis::snr, {10.0}) == one);
}

TEST_CASE("distinct trial seeds give distinct channels") {
  ExperimentConfig c;
  std::set<size_t> hashes;
  const int n = 300;
  for (int i = 0; i < n; ++i) {
    std::ostringstream dump;
    write_channel_csv(dump, trial_channel(c, trial_seed(c.seed, i)));
    hashes.insert(std::hash<std::string>{}(dump.str()));
  }
  CHECK(hashes.size() == static_cast<size_t>(n));
  CHECK(trial_seed(1, 0) != trial_seed(2, 0));
}

TEST_CASE("sweep row bookkeeping") {
  ExperimentConfig c = small_config();
  c.trials = 1;
  c.estimators = {"lmmse"};
  CHECK(run_sweep(c, SweepAxis::snr, {5.0}).size() == 1);

  c.trials = 2;
  c.estimators = {"perfect", "srh", "srh-mna"};
  const auto rows = run_sweep(c, SweepAxis::velocity, {50.0, 150.0});
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].velocity_kmh == 50.0);
  CHECK(rows[3].velocity_kmh == 150.0);
  CHECK(rows[1].estimator == "srh");
  CHECK(rows[5].estimator == "srh-mna");
  for (const auto& r : rows) CHECK(r.trials == 2);

  c.snr_db = {0.0, 10.0};
  CHECK(run_sweep(c, SweepAxis::velocity, {50.0, 150.0}).size() == 12);
}

TEST_CASE("pilot sweep keeps the data frame") {
  ExperimentConfig c = ExperimentConfig::paper_scale();
  for (int total : {128, 256, 512, 1024}) {
    const auto p = at_sweep_value(c, SweepAxis::pilots, total);
    const int N = p.frame_cols();
    const int M = p.data_rows;
    CHECK(p.data_cols == 64);
    CHECK(p.pilots_per_row == total / 64);
    CHECK(p.pilot_count() == N * M - p.data_cols * p.data_rows);
    CHECK(p.pilot_count() == total);
  }
  CHECK_THROWS_AS(at_sweep_value(c, SweepAxis::pilots, 100), ConfigError);
  CHECK_THROWS_AS(at_sweep_value(c, SweepAxis::pilots, 0), ConfigError);

  ExperimentConfig d = small_config();
  d.trials = 1;
  d.estimators = {"perfect"};
  const auto rows = run_sweep(d, SweepAxis::pilots, {8, 16});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].pilots == 8);
  CHECK(rows[1].pilots == 16);
}

TEST_CASE("sweep CSV is byte identical across runs") {
  ExperimentConfig c = small_config();
  c.coded = true;
  const auto a = sweep_csv(c, SweepAxis::snr, {5.0, 15.0});
  CHECK(a == sweep_csv(c, SweepAxis::snr, {5.0, 15.0}));
  CHECK(a.rfind("snr_db,velocity_kmh,pilots,estimator,", 0) == 0);
  CHECK(a.find("\r\n") != std::string::npos);
  c.seed = 12;
  CHECK(a != sweep_csv(c, SweepAxis::snr, {5.0, 15.0}));
}

TEST_CASE("CSV field quoting") {
  CHECK(csv_field("srh-mna") == "srh-mna");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("summaries") {
  const auto s = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.std == doctest::Approx(1.2909944487358056));
  CHECK(summarize({7.0}).std == 0.0);
}

TEST_CASE("config files") {
  std::istringstream in(
      "# desk run\n"
      "data-rows = 8\n"
      "N' = 8   # data columns\n"
      "estimators = perfect, srh_mna\n"
      "snr = 0, 5, 10\n"
      "sigma-z2 = 0.01\n"
      "precoder = dsft2d\n"
      "coded = true\n"
      "seed = 42\n");
  const auto c = parse_config(in);
  CHECK(c.data_rows == 8);
  CHECK(c.data_cols == 8);
  CHECK(c.estimators == std::vector<std::string>{"perfect", "srh-mna"});
  CHECK(c.snr_db == std::vector<double>{0.0, 5.0, 10.0});
  REQUIRE(c.sigma_z2.has_value());
  CHECK(*c.sigma_z2 == 0.01);
  CHECK(c.precoder == PrecoderKind::dsft2d);
  CHECK(c.coded);
  CHECK(c.seed == 42);

  std::ostringstream out;
  write_config(out, c);
  std::istringstream back(out.str());
  const auto d = parse_config(back);
  CHECK(d.estimators == c.estimators);
  CHECK(d.snr_db == c.snr_db);
  CHECK(d.seed == c.seed);
  CHECK(d.precoder == c.precoder);

  std::istringstream paper("paper-scale = true\ntrials = 3\n");
  const auto p = parse_config(paper);
  CHECK(p.data_rows == 64);
  CHECK(p.trials == 3);

  for (const char* bad : {"bogus = 1\n", "trials = many\n", "trials = 0\n", "snr =\n", "estimators = magic\n",
                          "no equals sign\n"}) {
    CAPTURE(bad);
    std::istringstream b(bad);
    CHECK_THROWS_AS(parse_config(b).validate(), ConfigError);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/ddlf.cfg"), ConfigError);
}

TEST_CASE("velocity to Doppler") {
  CHECK(velocity_to_doppler(0.0, 5.9e9) == 0.0);
  CHECK(velocity_to_doppler(200.0, 5.9e9) == doctest::Approx(200.0 / 3.6 * 5.9e9 / 299792458.0));
  ExperimentConfig c;
  c.velocity_kmh = 100.0;
  CHECK(c.nu_max() == doctest::Approx(546.7).epsilon(1e-3));
}

TEST_CASE("DDLF_THREADS caps the worker count") {
  ::setenv("DDLF_THREADS", "2", 1);
  CHECK(resolve_threads(8) == 2);
  CHECK(resolve_threads(1) == 1);
  CHECK(resolve_threads(0) <= 2);
  ::setenv("DDLF_THREADS", "junk", 1);
  CHECK(resolve_threads(3) == 3);
  ::unsetenv("DDLF_THREADS");
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("SRH-MNA beats LMMSE near the noiseless limit") {
  ExperimentConfig c;
  c.snr_db = {120.0};
  c.estimators = {"lmmse", "srh-mna"};
  PointRunner runner(c, 120.0);
  CHECK(runner.sigma2() == doctest::Approx(1e-12));
  double lmmse = 0.0, mna = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto r = runner.run(trial_seed(c.seed, i));
    lmmse += r.metrics[0].uncoded_ber;
    mna += r.metrics[1].uncoded_ber;
  }
  CHECK(mna < lmmse);
}

TEST_CASE("errors carry the pipeline stage") {
  ExperimentConfig c = small_config();
  c.precoder = PrecoderKind::fwht2d;
  c.data_cols = 6;
  CHECK_THROWS_AS(run_trial(c, 1), Error);
  c = small_config();
  c.estimators = {"nonsense"};
  CHECK_THROWS_AS(run_trial(c, 1), ConfigError);
}
