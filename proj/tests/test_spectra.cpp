#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "wva/error.hpp"
#include "wva/spectra.hpp"

using namespace wva;

namespace {

// Half-maximum points of the sampled density, found by bisection on the
// continuous Gaussian the library samples.
double fwhm_by_bisection(double nu0, double tau) {
  const auto half = [&](double nu) { return static_cast<double>(oracle::gaussian_density(nu, nu0, tau)) - 0.5; };
  const double hi = oracle::bisect(half, nu0, nu0 + 1e3);
  const double lo = oracle::bisect(half, nu0 - 1e3, nu0);
  return hi - lo;
}

}  // namespace

TEST_CASE("frequency grid validation") {
  CHECK_THROWS_AS(FrequencyGrid(100.0, 0.0, 10), InvalidArgument);
  CHECK_THROWS_AS(FrequencyGrid(100.0, -1.0, 10), InvalidArgument);
  CHECK_THROWS_AS(FrequencyGrid(100.0, 1.0, 1), InvalidArgument);
  CHECK_THROWS_AS(FrequencyGrid(-5.0, 1.0, 10), InvalidArgument);
  const FrequencyGrid g(190.0, 0.5, 9);
  CHECK(g.stop() == doctest::Approx(194.0));
  CHECK(g.midpoint() == doctest::Approx(192.0));
}

TEST_CASE("spectrum rejects bad values") {
  const FrequencyGrid g(190.0, 0.5, 3);
  CHECK_THROWS_AS(Spectrum(g, {1.0, 2.0}), InvalidArgument);
  CHECK_THROWS_AS(Spectrum(g, {1.0, -2.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(Spectrum(g, {1.0, NAN, 0.0}), InvalidArgument);
}

TEST_CASE("gaussian spectral width matches half-maximum points") {
  for (double tau : {10.0, 100.0, 320.0}) {
    const GaussianPulse p(193.44, tau);
    const double expected = fwhm_by_bisection(193.44, tau);
    CHECK(std::abs(p.spectral_fwhm() - expected) <= 1e-9 * expected);
  }
  // 10 fs pulse: 2 ln2 / (pi * 0.010 fs*THz) = 44.127... THz
  CHECK(GaussianPulse(375.0, 10.0).spectral_fwhm() == doctest::Approx(44.127120030530319).epsilon(1e-13));
}

TEST_CASE("sampled gaussian energy matches the analytic integral") {
  const GaussianPulse p(193.44, 320.0);
  const Spectrum s = gaussian_spectrum(p, p.default_grid());
  CHECK(std::abs(energy(s) - 1.4678707479682052) <= 1e-10 * 1.4678707479682052);
  CHECK(std::abs(energy(s) - p.analytic_energy()) <= 1e-10 * p.analytic_energy());
  CHECK(std::abs(centroid(s) - 193.44) < 1e-9);
}

TEST_CASE("trapezoid energy converges at second order") {
  // Truncated at +-2 sigma so the endpoint term dominates the error.
  const double nu0 = 200.0;
  const double tau = 50.0;
  const GaussianPulse p(nu0, tau);
  const double sig = p.spectral_sigma();
  const long double exact =
      oracle::simpson([&](long double nu) { return oracle::gaussian_density(nu, nu0, tau); }, nu0 - 2 * sig,
                      nu0 + 2 * sig, 400000);
  std::vector<double> errors;
  for (std::size_t n : {33u, 65u, 129u}) {
    const FrequencyGrid g(nu0 - 2 * sig, 4 * sig / static_cast<double>(n - 1), n);
    errors.push_back(std::abs(energy(gaussian_spectrum(p, g)) - static_cast<double>(exact)));
  }
  CHECK(errors[0] / errors[1] == doctest::Approx(4.0).epsilon(0.02));
  CHECK(errors[1] / errors[2] == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("centroid") {
  const FrequencyGrid g(100.0, 1.0, 5);
  SUBCASE("symmetric") { CHECK(centroid(Spectrum(g, {1, 2, 3, 2, 1})) == doctest::Approx(102.0)); }
  SUBCASE("single line") {
    // Trapezoid weights an interior node by h; centroid sits on the node.
    CHECK(centroid(Spectrum(g, {0, 0, 0, 1, 0})) == doctest::Approx(103.0));
  }
  SUBCASE("zero spectrum") { CHECK_THROWS_AS(centroid(Spectrum(g, {0, 0, 0, 0, 0})), EnergyBelowFloor); }
  SUBCASE("invariant under scaling") {
    const Spectrum s(g, {0.1, 3, 7, 2, 0.5});
    CHECK(centroid(s.scaled(1e-6)) == doctest::Approx(centroid(s)).epsilon(1e-14));
  }
}

TEST_CASE("load_spectrum") {
  SUBCASE("negative densities are clamped and counted") {
    const std::vector<std::pair<double, double>> rows{{190, 1.0}, {191, -0.2}, {192, 2.0}, {193, -1e-9}};
    const auto r = load_spectrum(rows);
    CHECK(r.clamped == 2);
    CHECK(r.spectrum[1] == 0.0);
    CHECK(r.spectrum[3] == 0.0);
  }
  SUBCASE("uniform input is kept bit-exact") {
    std::vector<std::pair<double, double>> rows;
    for (int i = 0; i < 50; ++i) rows.emplace_back(190.0 + 0.125 * i, std::sin(0.3 * i) + 1.1);
    const auto r = load_spectrum(rows);
    REQUIRE(r.spectrum.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(r.spectrum[i] == rows[i].second);
  }
  SUBCASE("non-uniform input is resampled linearly") {
    const std::vector<std::pair<double, double>> rows{{190, 0.0}, {190.5, 1.0}, {192, 4.0}};
    const auto r = load_spectrum(rows);
    CHECK(r.spectrum.grid().step() == doctest::Approx(0.5));
    CHECK(r.spectrum.size() == 5);
    CHECK(r.spectrum[3] == doctest::Approx(3.0));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(load_spectrum(std::vector<std::pair<double, double>>{{190, 1}}), InvalidInput);
    CHECK_THROWS_AS(load_spectrum(std::vector<std::pair<double, double>>{{190, 1}, {190, 2}}), InvalidInput);
    CHECK_THROWS_AS(load_spectrum(std::vector<std::pair<double, double>>{{191, 1}, {190, 2}}), InvalidInput);
    CHECK_THROWS_AS(load_spectrum(std::vector<std::pair<double, double>>{{190, 1}, {191, INFINITY}}), InvalidInput);
  }
}

TEST_CASE("instrument convolution") {
  const GaussianPulse p(193.44, 320.0);
  const Spectrum s = gaussian_spectrum(p, p.default_grid(4096));

  SUBCASE("zero width is the identity") {
    const Spectrum c = convolve_instrument(s, InstrumentModel{0.0, 1});
    for (std::size_t i = 0; i < s.size(); ++i) REQUIRE(c[i] == s[i]);
  }
  SUBCASE("energy is conserved away from the edges") {
    const Spectrum c = convolve_instrument(s, InstrumentModel{0.0025, 1});
    CHECK(energy(c) == doctest::Approx(energy(s)).epsilon(1e-9));
    CHECK(centroid(c) == doctest::Approx(centroid(s)).epsilon(1e-12));
  }
  SUBCASE("a line is broadened to the kernel width") {
    const FrequencyGrid g(190.0, 0.001, 2001);
    std::vector<double> v(g.count(), 0.0);
    v[1000] = 1.0;
    const Spectrum c = convolve_instrument(Spectrum(g, v), InstrumentModel{0.05, 1});
    double second = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double x = g.node(i) - g.node(1000);
      second += x * x * c[i];
      total += c[i];
    }
    const double sigma = 0.05 / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    CHECK(std::sqrt(second / total) == doctest::Approx(sigma).epsilon(1e-3));
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(convolve_instrument(s, InstrumentModel{-1.0, 1}), InvalidArgument);
    CHECK_THROWS_AS(convolve_instrument(s, InstrumentModel{0.0, 0}), InvalidArgument);
  }
}

TEST_CASE("unit conversions") {
  CHECK(wavelength_to_frequency(1549.0) == doctest::Approx(193.53935313105229).epsilon(1e-14));
  CHECK(frequency_to_wavelength(wavelength_to_frequency(1549.0)) == doctest::Approx(1549.0).epsilon(1e-14));
  CHECK(wavelength_width_to_frequency(0.02, 1549.0) * 1e3 == doctest::Approx(2.4988941656688482).epsilon(1e-12));
  CHECK_THROWS_AS(wavelength_to_frequency(0.0), InvalidArgument);
}
