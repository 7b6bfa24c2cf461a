#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "wva/cli.hpp"
#include "wva/io.hpp"
#include "wva/units.hpp"

using namespace wva;
using namespace wva::cli;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("wva_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int parse_code(const std::vector<std::string>& args) {
  try {
    parse_config(args);
  } catch (const CliError& e) {
    return e.code();
  }
  return 0;
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(WVA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("parsing a sweep") {
  const RunConfig cfg =
      parse_config({"sweep", "--tau-fs", "320", "--nu0-thz", "193.44", "--delay-fs", "53", "--gamma-steps", "361"});
  CHECK(cfg.command == Command::Sweep);
  CHECK(*cfg.tau_fs == 320.0);
  CHECK(*cfg.nu0_thz == 193.44);
  CHECK(cfg.delay_fs() == 53.0);
  CHECK(*cfg.gamma_steps == 361);
}

TEST_CASE("delay specifications") {
  CHECK(parse_config({"sweep", "--tau-fs", "10", "--nu0-thz", "193.44", "--delay-as", "10"}).delay_fs() ==
        doctest::Approx(0.01).epsilon(1e-15));
  const auto arms = parse_config({"sweep", "--tau-fs", "320", "--nu0-thz", "193.44", "--arm1-mm", "0.007945",
                                  "--arm2-mm", "0"});
  CHECK(arms.delay_fs() == doctest::Approx(53.003334726986361).epsilon(1e-14));
  CHECK(arms.delay_source == DelaySource::ArmLengths);
}

TEST_CASE("parse errors have distinct exit codes") {
  const std::vector<std::string> base{"sweep", "--tau-fs", "320", "--nu0-thz", "193.44"};
  auto with = [&](std::initializer_list<std::string> extra) {
    auto a = base;
    a.insert(a.end(), extra);
    return a;
  };
  CHECK(parse_code(base) == kUsage);  // no delay
  CHECK(parse_code(with({"--delay-fs", "1", "--bogus", "3"})) == kUnknownFlag);
  CHECK(parse_code(with({"--delay", "53"})) == kAmbiguousUnit);
  CHECK(parse_code(with({"--delay-fs", "1", "--spectrum-file", "x.csv"})) == kConflictingOptions);
  CHECK(parse_code(with({"--delay-fs", "1", "--delay-as", "3"})) == kConflictingOptions);
  CHECK(parse_code({"sweep", "--tau-fs", "320", "--delay-fs", "1"}) == kUsage);  // centre missing
  CHECK(parse_code({"explode", "--tau-fs", "320", "--nu0-thz", "193.44", "--delay-fs", "1"}) == kUsage);
  CHECK(parse_code(with({"--delay-fs", "1", "--gamma-min-rad", "1", "--gamma-max-rad", "0"})) == kUsage);
  CHECK(parse_code({"fit", "--tau-fs", "320", "--nu0-thz", "193.44"}) == kUsage);  // no data file
  CHECK(parse_code(with({"--delay-fs", "1", "--config", "/nonexistent/wva.cfg"})) == kIoError);
  // The codes are all different.
  const std::vector<int> codes{kUsage, kUnknownFlag, kAmbiguousUnit, kConflictingOptions, kIoError};
  for (std::size_t i = 0; i < codes.size(); ++i)
    for (std::size_t j = i + 1; j < codes.size(); ++j) CHECK(codes[i] != codes[j]);
}

TEST_CASE("config file supplies defaults; flags win") {
  const fs::path dir = fresh_dir("config");
  io::write_text(dir / "run.cfg", "tau-fs = 320\nnu0-thz = 193.44\ndelay-fs = 22\ngamma-steps = 5\n");
  const auto cfg = parse_config({"sweep", "--config", (dir / "run.cfg").string(), "--delay-fs", "53"});
  CHECK(*cfg.tau_fs == 320.0);
  CHECK(cfg.delay_fs() == 53.0);
  CHECK(*cfg.gamma_steps == 5);

  io::write_text(dir / "bad.cfg", "tau = 320\n");
  CHECK(parse_code({"sweep", "--config", (dir / "bad.cfg").string()}) == kAmbiguousUnit);
  io::write_text(dir / "unknown.cfg", "colour = blue\n");
  CHECK(parse_code({"sweep", "--tau-fs", "320", "--nu0-thz", "193.44", "--delay-fs", "1", "--config",
                    (dir / "unknown.cfg").string()}) == kUnknownFlag);
  fs::remove_all(dir);
}

TEST_CASE("regimes report for a 10 fs pulse and a 10 as delay") {
  const fs::path dir = fresh_dir("regimes");
  const auto report = run(parse_config({"regimes", "--tau-fs", "10", "--nu0-thz", "193.44", "--delay-as", "10",
                                        "--budget-db", "12", "--out-dir", dir.string()}));
  const auto& r = report.json["results"];
  CHECK(std::abs(r["budget_point"]["delta_f_thz"].get<double>()) == doctest::Approx(0.085020161066218036).epsilon(1e-9));
  CHECK(r["budget_point"]["regime"] == "low-loss");
  CHECK(std::abs(r["global_max"]["delta_f_thz"].get<double>()) == doctest::Approx(18.739056018463960).epsilon(1e-9));
  CHECK(r["global_max"]["loss_db"].get<double>() == doctest::Approx(61.591748399848225).epsilon(1e-9));
  CHECK(r["global_max"]["regime"] == "high-loss");
  CHECK(fs::exists(dir / "sweep.csv"));
  CHECK(fs::exists(dir / "report.json"));
  fs::remove_all(dir);
}

TEST_CASE("identity configuration reproduces the input spectrum") {
  const fs::path dir = fresh_dir("identity");
  run(parse_config({"simulate", "--tau-fs", "320", "--nu0-thz", "193.44", "--delay-fs", "0", "--gamma-rad",
                    "-1.5707963", "--grid-count", "2048", "--out-dir", dir.string()}));
  const auto in = io::read_spectrum_csv(dir / "input_spectrum.csv").spectrum;
  const auto out = io::read_spectrum_csv(dir / "output_spectrum.csv").spectrum;
  REQUIRE(in.size() == out.size());
  for (std::size_t i = 0; i < in.size(); ++i) REQUIRE(std::abs(out[i] - in[i]) <= 1e-12 * in.peak());
  // spectra.csv reads back by column name too.
  const auto col = io::read_spectrum_csv(dir / "spectra.csv", "out_0").spectrum;
  CHECK(col[1024] == out[1024]);
  fs::remove_all(dir);
}

TEST_CASE("re-runs are byte-identical") {
  const fs::path a = fresh_dir("rerun_a");
  const fs::path b = fresh_dir("rerun_b");
  for (const auto& dir : {a, b}) {
    run(parse_config({"montecarlo", "--tau-fs", "320", "--nu0-thz", "193.44", "--delay-fs", "53", "--gamma-steps",
                      "4", "--jitter-rad", "0.05", "--resolution-nm", "0.02", "--scans", "3", "--samples", "50",
                      "--seed", "7", "--threads", "2", "--grid-count", "1024", "--out-dir", dir.string()}));
    run(parse_config({"sweep", "--tau-fs", "320", "--nu0-thz", "193.44", "--delay-fs", "53", "--svg", "--out-dir",
                      dir.string()}));
  }
  for (const char* f : {"montecarlo.csv", "sweep.csv", "plot.svg", "report.json"}) {
    CHECK(io::read_text(a / f) == io::read_text(b / f));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("sweep output feeds the fitter") {
  const fs::path dir = fresh_dir("roundtrip");
  run(parse_config({"sweep", "--tau-fs", "320", "--nu0-thz", "193.44", "--delay-fs", "22", "--gamma-steps", "30",
                    "--out-dir", dir.string()}));
  const auto report = run(parse_config({"fit", "--tau-fs", "320", "--nu0-thz", "193.44", "--data-file",
                                        (dir / "sweep.csv").string(), "--t-min-fs", "1", "--t-max-fs", "100",
                                        "--svg", "--out-dir", dir.string()}));
  CHECK(report.json["results"]["t_hat_fs"].get<double>() == doctest::Approx(22.0).epsilon(1e-6));
  CHECK(fs::exists(dir / "fit.json"));
  CHECK(fs::exists(dir / "plot.svg"));
  // The fitted curve itself is valid fit data.
  const auto curve = io::read_fit_csv(dir / "fit_curve.csv");
  CHECK(curve.gamma.size() == 30);
  // Monte-Carlo tables lead with the same three columns.
  run(parse_config({"montecarlo", "--tau-fs", "320", "--nu0-thz", "193.44", "--delay-fs", "22", "--gamma-steps", "6",
                    "--samples", "5", "--grid-count", "512", "--out-dir", dir.string()}));
  CHECK(io::read_fit_csv(dir / "montecarlo.csv").gamma.size() == 6);
  fs::remove_all(dir);
}

TEST_CASE("failures remove partial outputs") {
  const fs::path dir = fresh_dir("rollback");
  fs::create_directories(dir / "report.json");  // blocks the final write
  CHECK_THROWS(run(parse_config({"sweep", "--tau-fs", "320", "--nu0-thz", "193.44", "--delay-fs", "53", "--svg",
                                 "--out-dir", dir.string()})));
  CHECK_FALSE(fs::exists(dir / "sweep.csv"));
  CHECK_FALSE(fs::exists(dir / "plot.svg"));
  fs::remove_all(dir);
}

TEST_CASE("binary exit codes") {
  const fs::path dir = fresh_dir("binary");
  const std::string out = " --out-dir " + dir.string();
  CHECK(run_binary("sweep --tau-fs 320 --nu0-thz 193.44 --delay-fs 53" + out) == kOk);
  CHECK(run_binary("--help") == kOk);
  CHECK(run_binary("sweep --tau-fs 320 --nu0-thz 193.44" + out) == kUsage);
  CHECK(run_binary("sweep --tau 320 --nu0-thz 193.44 --delay-fs 1" + out) == kAmbiguousUnit);
  CHECK(run_binary("regimes --tau-fs 320 --nu0-thz 193.44 --delay-fs 53 --budget-db 0.01" + out) == kInfeasibleBudget);
  CHECK(run_binary("sweep --spectrum-file /nonexistent.csv --delay-fs 1" + out) == kIoError);
  io::write_text(dir / "bad.csv", "frequency_thz,density\n190,1\n189,2\n");
  CHECK(run_binary("sweep --spectrum-file " + (dir / "bad.csv").string() + " --delay-fs 1" + out) == kInvalidInput);
  io::write_text(dir / "data.csv", "gamma_rad,delta_f_thz,loss_db\n0,0,3\n1,0,3\n2,0,3\n");
  CHECK(run_binary("fit --tau-fs 320 --nu0-thz 193.44 --data-file " + (dir / "data.csv").string() +
                   " --t-min-fs 5 --t-max-fs 5" + out) == kDegenerateBracket);
  CHECK(run_binary("montecarlo --tau-fs 320 --nu0-thz 193.44 --delay-fs 0 --gamma-rad 1.5707963267948966 "
                   "--samples 3 --grid-count 256" + out) == kAllSamplesSingular);
  fs::remove_all(dir);
}
