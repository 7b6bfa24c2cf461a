#include "wva/noise.hpp"

#include <cmath>
#include <optional>

#include "wva/error.hpp"
#include "wva/parallel.hpp"

namespace wva {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double standard_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

}  // namespace

void NoiseModel::validate() const {
  if (!(gamma_jitter_sigma >= 0.0) || !std::isfinite(gamma_jitter_sigma)) {
    throw InvalidArgument("gamma jitter sigma must be finite and >= 0");
  }
  if (samples < 1) throw InvalidArgument("Monte-Carlo samples must be >= 1");
  instrument.validate();
}

UncertainValue summarize(const std::vector<double>& values) {
  UncertainValue u;
  u.sample_count = values.size();
  if (values.empty()) return u;
  double sum = 0.0;
  for (double v : values) sum += v;
  u.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - u.mean) * (v - u.mean);
    u.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return u;
}

std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

std::vector<double> sample_gamma(double gamma_nominal, const NoiseModel& nm) {
  nm.validate();
  std::vector<double> out(nm.samples);
  for (std::size_t k = 0; k < nm.samples; ++k) {
    auto rng = sample_stream(nm.seed, k);
    out[k] = gamma_nominal + nm.gamma_jitter_sigma * standard_normal(rng);
  }
  return out;
}

Spectrum simulate_measurement(const Spectrum& s_in, double delay_fs, double gamma, const NoiseModel& nm,
                              std::mt19937_64& rng) {
  const auto scans = static_cast<std::size_t>(nm.instrument.scans_to_average);
  std::vector<double> avg(s_in.size(), 0.0);
  for (std::size_t j = 0; j < scans; ++j) {
    const double g = gamma + nm.gamma_jitter_sigma * standard_normal(rng);
    const Spectrum out = output_spectrum(s_in, InterferometerConfig::from_delay(delay_fs, g));
    const auto v = out.values();
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += v[i];
  }
  for (double& v : avg) v /= static_cast<double>(scans);
  // Convolution is linear: convolving the average equals averaging the convolved scans.
  return convolve_instrument(Spectrum(s_in.grid(), std::move(avg)), nm.instrument);
}

MonteCarloResult monte_carlo_observables(const Spectrum& s_in, double delay_fs, double gamma, const NoiseModel& nm,
                                         const MonteCarloOptions& opts) {
  nm.validate();
  if (!std::isfinite(delay_fs) || !std::isfinite(gamma)) throw InvalidArgument("delay and angle must be finite");
  const Spectrum reference = convolve_instrument(s_in, nm.instrument);

  std::vector<PointObservables> per_sample(nm.samples);
  parallel_for(nm.samples, opts.threads, [&](std::size_t k) {
    auto rng = sample_stream(nm.seed, k);
    per_sample[k] = try_compare_spectra(reference, simulate_measurement(s_in, delay_fs, gamma, nm, rng), opts.floor);
  });

  std::vector<double> shifts;
  std::vector<double> losses;
  MonteCarloResult r;
  for (const auto& p : per_sample) {
    if (p.singular()) {
      ++r.excluded;
      continue;
    }
    shifts.push_back(*p.delta_f);
    losses.push_back(p.loss_db);
  }
  if (shifts.empty()) throw AllSamplesSingular("every Monte-Carlo sample fell below the energy floor");
  r.delta_f = summarize(shifts);
  r.loss = summarize(losses);
  return r;
}

MonteCarloResult monte_carlo_observables(const PulseModel& model, double delay_fs, double gamma,
                                         const NoiseModel& nm, const MonteCarloOptions& opts) {
  if (const auto* p = std::get_if<GaussianPulse>(&model)) {
    return monte_carlo_observables(gaussian_spectrum(*p, p->default_grid(opts.grid_count)), delay_fs, gamma, nm,
                                   opts);
  }
  return monte_carlo_observables(std::get<Spectrum>(model), delay_fs, gamma, nm, opts);
}

}  // namespace wva
