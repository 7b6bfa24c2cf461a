#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "wva/forward.hpp"
#include "wva/regimes.hpp"
#include "wva/spectra.hpp"

namespace wva {

/// Post-selection jitter (temperature drift of the retarder collapsed into a
/// Gaussian spread of Gamma), the analyzer response, and the sample budget.
struct NoiseModel {
  double gamma_jitter_sigma = 0.0;  // rad
  InstrumentModel instrument;
  std::uint64_t seed = 0;
  std::size_t samples = 1;

  void validate() const;
};

struct UncertainValue {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
  std::size_t sample_count = 0;
};

UncertainValue summarize(const std::vector<double>& values);

/// Independent, reproducible random stream for sample `index`.
std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t index);

/// One jittered angle per sample; sample k uses sample_stream(seed, k).
std::vector<double> sample_gamma(double gamma_nominal, const NoiseModel& nm);

struct MonteCarloResult {
  UncertainValue delta_f;  // THz
  UncertainValue loss;     // dB
  std::size_t excluded = 0;
};

struct MonteCarloOptions {
  double floor = kDefaultEnergyFloor;
  unsigned threads = 0;  // 0 = hardware concurrency
  std::size_t grid_count = GaussianPulse::kDefaultGridCount;  // for Gaussian models
};

/// Per sample: scans_to_average jittered output spectra are convolved with
/// the instrument response and averaged; observables are taken against the
/// equally convolved input. Singular samples are excluded and counted.
/// Throws AllSamplesSingular when nothing is left.
MonteCarloResult monte_carlo_observables(const Spectrum& s_in, double delay_fs, double gamma, const NoiseModel& nm,
                                         const MonteCarloOptions& opts = {});
MonteCarloResult monte_carlo_observables(const PulseModel& model, double delay_fs, double gamma,
                                         const NoiseModel& nm, const MonteCarloOptions& opts = {});

/// The averaged, instrument-convolved output spectrum of one sample.
Spectrum simulate_measurement(const Spectrum& s_in, double delay_fs, double gamma, const NoiseModel& nm,
                              std::mt19937_64& rng);

}  // namespace wva
