#include "wva/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wva/error.hpp"
#include "wva/units.hpp"

namespace wva {

using units::kLn2;
using units::kPi;

FrequencyGrid::FrequencyGrid(double start_thz, double step_thz, std::size_t count)
    : start_(start_thz), step_(step_thz), count_(count) {
  if (!std::isfinite(start_thz) || !std::isfinite(step_thz) || !(step_thz > 0.0)) {
    throw InvalidArgument("frequency grid needs a finite positive step");
  }
  if (count < 2) throw InvalidArgument("frequency grid needs at least 2 nodes");
  if (!(start_thz > 0.0)) throw InvalidArgument("frequency grid nodes must be positive");
}

Spectrum::Spectrum(FrequencyGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.count()) {
    std::ostringstream msg;
    msg << "spectrum has " << values_.size() << " values for a grid of " << grid_.count();
    throw InvalidArgument(msg.str());
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidArgument("spectral density must be finite and non-negative");
    }
  }
}

double Spectrum::peak() const noexcept { return *std::max_element(values_.begin(), values_.end()); }

Spectrum Spectrum::scaled(double factor) const {
  if (!(factor >= 0.0) || !std::isfinite(factor)) throw InvalidArgument("scale must be finite and >= 0");
  std::vector<double> out(values_);
  for (double& v : out) v *= factor;
  return {grid_, std::move(out)};
}

GaussianPulse::GaussianPulse(double center_thz, double fwhm_fs) : center_(center_thz), duration_(fwhm_fs) {
  if (!(center_thz > 0.0) || !std::isfinite(center_thz)) throw InvalidArgument("pulse centre must be > 0 THz");
  if (!(fwhm_fs > 0.0) || !std::isfinite(fwhm_fs)) throw InvalidArgument("pulse duration must be > 0 fs");
}

double GaussianPulse::spectral_sigma() const noexcept {
  // exp[-pi^2 tau^2 x^2 / ln2] == exp[-x^2 / (2 sigma^2)]
  return std::sqrt(kLn2) / (std::sqrt(2.0) * kPi * duration_ * units::kThzFs);
}

double GaussianPulse::spectral_fwhm() const noexcept {
  return 2.0 * kLn2 / (kPi * duration_ * units::kThzFs);
}

double GaussianPulse::analytic_energy() const noexcept {
  return std::sqrt(kPi * kLn2) / (kPi * duration_ * units::kThzFs);
}

FrequencyGrid GaussianPulse::default_grid(std::size_t count, double half_width_sigmas) const {
  if (count < 2) throw InvalidArgument("grid count must be >= 2");
  if (!(half_width_sigmas > 0.0)) throw InvalidArgument("grid half width must be > 0");
  const double half = half_width_sigmas * spectral_sigma();
  const double start = center_ - half;
  if (!(start > 0.0)) {
    throw InvalidArgument("pulse too short for a positive-frequency grid of the requested width");
  }
  return {start, 2.0 * half / static_cast<double>(count - 1), count};
}

void InstrumentModel::validate() const {
  if (!(resolution_fwhm >= 0.0) || !std::isfinite(resolution_fwhm)) {
    throw InvalidArgument("instrument resolution must be finite and >= 0");
  }
  if (scans_to_average < 1) throw InvalidArgument("scans_to_average must be >= 1");
}

Spectrum gaussian_spectrum(const GaussianPulse& pulse, const FrequencyGrid& grid) {
  const double width = kPi * pulse.duration() * units::kThzFs;
  std::vector<double> values(grid.count());
  for (std::size_t i = 0; i < grid.count(); ++i) {
    const double x = width * (grid.node(i) - pulse.center());
    values[i] = std::exp(-x * x / kLn2);
  }
  return {grid, std::move(values)};
}

LoadedSpectrum load_spectrum(std::span<const std::pair<double, double>> rows) {
  if (rows.size() < 2) throw InvalidInput("spectrum table needs at least 2 rows");
  for (const auto& [nu, s] : rows) {
    if (!std::isfinite(nu) || !std::isfinite(s)) throw InvalidInput("spectrum table contains NaN or infinity");
  }
  double min_step = rows[1].first - rows[0].first;
  double max_step = min_step;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double d = rows[i].first - rows[i - 1].first;
    if (!(d > 0.0)) throw InvalidInput("spectrum frequencies must be strictly increasing");
    min_step = std::min(min_step, d);
    max_step = std::max(max_step, d);
  }

  std::size_t clamped = 0;
  std::vector<double> density(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    density[i] = rows[i].second;
    if (density[i] < 0.0) {
      density[i] = 0.0;
      ++clamped;
    }
  }

  const double first = rows.front().first;
  const double span = rows.back().first - first;

  // Uniform input (up to decimal round-off in the frequency column): keep the samples.
  if (max_step - min_step <= 1e-9 * max_step) {
    FrequencyGrid grid(first, span / static_cast<double>(rows.size() - 1), rows.size());
    return {Spectrum(grid, std::move(density)), clamped};
  }

  const auto count = static_cast<std::size_t>(std::floor(span / min_step + 1e-9)) + 1;
  FrequencyGrid grid(first, min_step, count);
  std::vector<double> values(count);
  std::size_t j = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double nu = grid.node(i);
    while (j + 2 < rows.size() && rows[j + 1].first <= nu) ++j;
    const double x0 = rows[j].first;
    const double x1 = rows[j + 1].first;
    const double t = std::clamp((nu - x0) / (x1 - x0), 0.0, 1.0);
    values[i] = (1.0 - t) * density[j] + t * density[j + 1];
  }
  return {Spectrum(grid, std::move(values)), clamped};
}

double energy(const Spectrum& s) {
  const auto v = s.values();
  double sum = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < v.size(); ++i) sum += v[i];
  return sum * s.grid().step();
}

double centroid(const Spectrum& s, double floor) {
  const auto& grid = s.grid();
  const auto v = s.values();
  const double ref = grid.midpoint();
  const std::size_t n = v.size();
  double e = 0.5 * (v[0] + v[n - 1]);
  double m = 0.5 * ((grid.node(0) - ref) * v[0] + (grid.node(n - 1) - ref) * v[n - 1]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    e += v[i];
    m += (grid.node(i) - ref) * v[i];
  }
  const double threshold = floor * s.peak() * grid.span();
  if (!(e * grid.step() > threshold)) {
    throw EnergyBelowFloor("spectrum energy below floor; centroid undefined");
  }
  return ref + m / e;
}

Spectrum convolve_instrument(const Spectrum& s, const InstrumentModel& m) {
  m.validate();
  const double step = s.grid().step();
  const double sigma = m.resolution_fwhm / (2.0 * std::sqrt(2.0 * kLn2));
  const auto half = static_cast<std::ptrdiff_t>(std::floor(4.0 * sigma / step));
  if (m.resolution_fwhm == 0.0 || half == 0) return s;

  std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
  double norm = 0.0;
  for (std::ptrdiff_t j = -half; j <= half; ++j) {
    const double x = static_cast<double>(j) * step / sigma;
    kernel[static_cast<std::size_t>(j + half)] = std::exp(-0.5 * x * x);
    norm += kernel[static_cast<std::size_t>(j + half)];
  }
  for (double& k : kernel) k /= norm;

  const auto in = s.values();
  const auto n = static_cast<std::ptrdiff_t>(in.size());
  std::vector<double> out(in.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(-half, -i);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(half, n - 1 - i);
    double acc = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      acc += kernel[static_cast<std::size_t>(j + half)] * in[static_cast<std::size_t>(i + j)];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return {s.grid(), std::move(out)};
}

double wavelength_to_frequency(double wavelength_nm) {
  if (!(wavelength_nm > 0.0)) throw InvalidArgument("wavelength must be > 0");
  return units::kSpeedOfLight / wavelength_nm;
}

double frequency_to_wavelength(double frequency_thz) {
  if (!(frequency_thz > 0.0)) throw InvalidArgument("frequency must be > 0");
  return units::kSpeedOfLight / frequency_thz;
}

double wavelength_width_to_frequency(double width_nm, double wavelength_nm) {
  if (!(wavelength_nm > 0.0)) throw InvalidArgument("wavelength must be > 0");
  if (!(width_nm >= 0.0)) throw InvalidArgument("wavelength width must be >= 0");
  return units::kSpeedOfLight * width_nm / (wavelength_nm * wavelength_nm);
}

}  // namespace wva
