#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "wva/error.hpp"
#include "wva/noise.hpp"
#include "wva/units.hpp"

using namespace wva;
using units::kPi;

namespace {

const GaussianPulse kPulse(193.44, 320.0);

MonteCarloOptions small_grid(unsigned threads = 1) {
  MonteCarloOptions o;
  o.threads = threads;
  o.grid_count = 2048;
  return o;
}

}  // namespace

TEST_CASE("noise model validation") {
  CHECK_THROWS_AS((NoiseModel{-0.1, {}, 0, 10}.validate()), InvalidArgument);
  CHECK_THROWS_AS((NoiseModel{0.1, {}, 0, 0}.validate()), InvalidArgument);
  CHECK_NOTHROW((NoiseModel{0.0, {}, 0, 1}.validate()));
}

TEST_CASE("summarize") {
  const auto u = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(u.mean == doctest::Approx(2.5));
  CHECK(u.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(u.sample_count == 4);
  CHECK(summarize({7.0}).std == 0.0);
}

TEST_CASE("sample_gamma") {
  SUBCASE("zero jitter returns the nominal angle") {
    for (double g : sample_gamma(0.7, NoiseModel{0.0, {}, 3, 100})) REQUIRE(g == 0.7);
  }
  SUBCASE("fixed seed is reproducible; other seeds differ") {
    const NoiseModel nm{0.1, {}, 42, 500};
    CHECK(sample_gamma(0.2, nm) == sample_gamma(0.2, nm));
    CHECK(sample_gamma(0.2, nm) != sample_gamma(0.2, NoiseModel{0.1, {}, 43, 500}));
  }
  SUBCASE("sample mean lies within the standard-error bound") {
    const double sigma = 0.05;
    const auto draws = sample_gamma(1.0, NoiseModel{sigma, {}, 2024, 10000});
    const double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / draws.size();
    CHECK(std::abs(mean - 1.0) <= 4.0 * sigma / std::sqrt(10000.0));
    CHECK(summarize(draws).std == doctest::Approx(sigma).epsilon(0.05));
  }
}

TEST_CASE("noiseless Monte Carlo reproduces the deterministic observables") {
  const Spectrum s = gaussian_spectrum(kPulse, kPulse.default_grid(2048));
  const auto r = monte_carlo_observables(s, 53.0, 0.3, NoiseModel{0.0, {}, 1, 20}, small_grid());
  const auto det = observables_numeric(s, InterferometerConfig::from_delay(53.0, 0.3));
  CHECK(r.delta_f.std == 0.0);
  CHECK(r.loss.std == 0.0);
  CHECK(r.delta_f.mean == det.delta_f);
  CHECK(r.loss.mean == det.loss_db);
  CHECK(r.excluded == 0);
  CHECK(r.delta_f.sample_count == 20);
}

TEST_CASE("small jitter propagates linearly near the low-loss zero-shift point") {
  const double t = 53.0;
  const double g0 = post_selection_for_phase(kPulse.center(), t, 0.0);
  const double sigma = 0.01;
  const double h = 1e-5;
  const double slope = (delta_f_gaussian(kPulse, t, g0 + h) - delta_f_gaussian(kPulse, t, g0 - h)) / (2 * h);
  const auto r = monte_carlo_observables(PulseModel{kPulse}, t, g0, NoiseModel{sigma, {}, 11, 4000}, small_grid());
  CHECK(r.delta_f.std == doctest::Approx(std::abs(slope) * sigma).epsilon(0.10));
}

TEST_CASE("standard deviation scales with jitter") {
  const double t = 53.0;
  const double g0 = post_selection_for_phase(kPulse.center(), t, 0.5);
  const auto a = monte_carlo_observables(PulseModel{kPulse}, t, g0, NoiseModel{0.01, {}, 5, 3000}, small_grid());
  const auto b = monte_carlo_observables(PulseModel{kPulse}, t, g0, NoiseModel{0.005, {}, 5, 3000}, small_grid());
  CHECK(a.delta_f.std / b.delta_f.std == doctest::Approx(2.0).epsilon(0.15));
  CHECK(a.loss.std / b.loss.std == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("jitter across the dark fringe excludes singular samples") {
  const Spectrum s = gaussian_spectrum(kPulse, kPulse.default_grid(1024));
  MonteCarloOptions opts = small_grid();
  opts.floor = 1e-4;
  const auto r = monte_carlo_observables(s, 0.0, kPi / 2 + 0.02, NoiseModel{0.01, {}, 9, 400}, opts);
  CHECK(r.excluded > 0);
  CHECK(r.excluded < 400);
  CHECK(r.delta_f.sample_count + r.excluded == 400);

  CHECK_THROWS_AS(monte_carlo_observables(s, 0.0, kPi / 2, NoiseModel{0.0, {}, 9, 10}, opts), AllSamplesSingular);
}

TEST_CASE("instrument smoothing and scan averaging") {
  const Spectrum s = gaussian_spectrum(kPulse, kPulse.default_grid(2048));
  const NoiseModel one{0.02, InstrumentModel{0.0025, 1}, 77, 800};
  const NoiseModel five{0.02, InstrumentModel{0.0025, 5}, 77, 800};
  const auto a = monte_carlo_observables(s, 53.0, 0.4, one, small_grid());
  const auto b = monte_carlo_observables(s, 53.0, 0.4, five, small_grid());
  // Averaging 5 independent scans shrinks the spread by about sqrt(5).
  CHECK(a.delta_f.std / b.delta_f.std == doctest::Approx(std::sqrt(5.0)).epsilon(0.15));
}

TEST_CASE("deterministic and thread-count independent") {
  const Spectrum s = gaussian_spectrum(kPulse, kPulse.default_grid(1024));
  const NoiseModel nm{0.03, InstrumentModel{0.0025, 3}, 123456789, 64};
  const auto serial = monte_carlo_observables(s, 22.0, 1.1, nm, small_grid(1));
  const auto again = monte_carlo_observables(s, 22.0, 1.1, nm, small_grid(1));
  const auto parallel = monte_carlo_observables(s, 22.0, 1.1, nm, small_grid(4));
  CHECK(serial.delta_f.mean == again.delta_f.mean);
  CHECK(serial.delta_f.std == again.delta_f.std);
  CHECK(serial.delta_f.mean == parallel.delta_f.mean);
  CHECK(serial.delta_f.std == parallel.delta_f.std);
  CHECK(serial.loss.mean == parallel.loss.mean);
  CHECK(serial.loss.std == parallel.loss.std);
}
