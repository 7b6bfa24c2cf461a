#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace wva {

/// Uniform frequency grid: node(i) = start + i * step, all nodes > 0 THz.
class FrequencyGrid {
 public:
  FrequencyGrid(double start_thz, double step_thz, std::size_t count);

  double start() const noexcept { return start_; }
  double step() const noexcept { return step_; }
  std::size_t count() const noexcept { return count_; }
  double node(std::size_t i) const noexcept { return start_ + static_cast<double>(i) * step_; }
  double stop() const noexcept { return node(count_ - 1); }
  double span() const noexcept { return stop() - start_; }
  double midpoint() const noexcept { return 0.5 * (start_ + stop()); }

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  double start_;
  double step_;
  std::size_t count_;
};

/// Non-negative spectral density sampled on a FrequencyGrid (linear units).
class Spectrum {
 public:
  Spectrum(FrequencyGrid grid, std::vector<double> values);

  const FrequencyGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }
  double peak() const noexcept;

  Spectrum scaled(double factor) const;

 private:
  FrequencyGrid grid_;
  std::vector<double> values_;
};

/// Gaussian-spectrum pulse: S(nu) ~ exp[-pi^2 tau^2 (nu - nu0)^2 / ln2],
/// tau being the FWHM duration.
class GaussianPulse {
 public:
  static constexpr std::size_t kDefaultGridCount = std::size_t{1} << 14;
  static constexpr double kDefaultHalfWidthSigmas = 8.0;

  GaussianPulse(double center_thz, double fwhm_fs);

  double center() const noexcept { return center_; }
  double duration() const noexcept { return duration_; }

  /// Standard deviation of the spectral density in THz.
  double spectral_sigma() const noexcept;
  /// Spectral FWHM in THz (tau * FWHM_nu = 2 ln2 / pi).
  double spectral_fwhm() const noexcept;
  /// Analytic integral of the unit-peak density, THz.
  double analytic_energy() const noexcept;

  /// [nu0 - k sigma, nu0 + k sigma] with `count` nodes.
  FrequencyGrid default_grid(std::size_t count = kDefaultGridCount,
                             double half_width_sigmas = kDefaultHalfWidthSigmas) const;

 private:
  double center_;
  double duration_;
};

/// Optical spectrum analyzer: Gaussian response of the given FWHM (THz) and
/// the number of scans averaged per recorded spectrum.
struct InstrumentModel {
  double resolution_fwhm = 0.0;
  int scans_to_average = 1;

  void validate() const;
};

struct LoadedSpectrum {
  Spectrum spectrum;
  std::size_t clamped = 0;  // negative input densities set to zero
};

Spectrum gaussian_spectrum(const GaussianPulse& pulse, const FrequencyGrid& grid);

/// Resamples (frequency, density) rows onto a uniform grid whose step is the
/// smallest input spacing. Already-uniform rows are copied unchanged.
LoadedSpectrum load_spectrum(std::span<const std::pair<double, double>> rows);

/// Trapezoidal integral over the grid.
double energy(const Spectrum& s);

inline constexpr double kDefaultEnergyFloor = 1e-12;

/// First normalized moment. Throws EnergyBelowFloor when the energy does not
/// exceed floor * peak * span.
double centroid(const Spectrum& s, double floor = kDefaultEnergyFloor);

Spectrum convolve_instrument(const Spectrum& s, const InstrumentModel& m);

double wavelength_to_frequency(double wavelength_nm);
double frequency_to_wavelength(double frequency_thz);
/// Width in THz of a wavelength interval d_lambda around lambda: c * d_lambda / lambda^2.
double wavelength_width_to_frequency(double width_nm, double wavelength_nm);

}  // namespace wva
