#pragma once

#include <complex>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "wva/spectra.hpp"

namespace wva {

/// Arm delays T1, T2 (fs) and post-selection angle Gamma (rad). The input is
/// pre-selected as (x - i y)/sqrt2 and projected onto [x + exp(i Gamma) y]/sqrt2.
class InterferometerConfig {
 public:
  InterferometerConfig(double delay_1_fs, double delay_2_fs, double post_selection_rad);
  /// Convenience: T1 = delay, T2 = 0.
  static InterferometerConfig from_delay(double delay_fs, double post_selection_rad) {
    return {delay_fs, 0.0, post_selection_rad};
  }

  double delay_1() const noexcept { return delay_1_; }
  double delay_2() const noexcept { return delay_2_; }
  double post_selection() const noexcept { return gamma_; }
  /// T = T1 - T2.
  double delay() const noexcept { return delay_1_ - delay_2_; }

 private:
  double delay_1_;
  double delay_2_;
  double gamma_;
};

class ComplexSpectrum {
 public:
  ComplexSpectrum(FrequencyGrid grid, std::vector<std::complex<double>> amplitudes);

  const FrequencyGrid& grid() const noexcept { return grid_; }
  std::span<const std::complex<double>> amplitudes() const noexcept { return amplitudes_; }

 private:
  FrequencyGrid grid_;
  std::vector<std::complex<double>> amplitudes_;
};

struct Observables {
  double delta_f = 0.0;  // THz
  double loss_db = 0.0;
  double f_in = 0.0;
  double f_out = 0.0;
};

/// Observables that tolerate the orthogonal point: shift is empty when the
/// transmitted fraction falls below the floor, and loss is +inf there.
struct PointObservables {
  std::optional<double> delta_f;
  double loss_db = 0.0;
  bool singular() const noexcept { return !delta_f.has_value(); }
};

inline constexpr double kDefaultDenominatorFloor = 1e-12;

ComplexSpectrum output_field(const ComplexSpectrum& e_in, const InterferometerConfig& cfg);

/// |E|^2 per node.
Spectrum spectral_density(const ComplexSpectrum& field);

/// Real, zero-phase field with |E|^2 == S.
ComplexSpectrum field_from_density(const Spectrum& s);

Spectrum output_spectrum(const Spectrum& s_in, const InterferometerConfig& cfg);

/// Centroid shift and insertion loss of `s_out` relative to `s_in` (same grid).
Observables compare_spectra(const Spectrum& s_in, const Spectrum& s_out, double floor = kDefaultEnergyFloor);
PointObservables try_compare_spectra(const Spectrum& s_in, const Spectrum& s_out,
                                     double floor = kDefaultEnergyFloor);

Observables observables_numeric(const Spectrum& s_in, const InterferometerConfig& cfg,
                                double floor = kDefaultEnergyFloor);
PointObservables try_observables_numeric(const Spectrum& s_in, const InterferometerConfig& cfg,
                                         double floor = kDefaultEnergyFloor);

// Closed forms for a Gaussian input spectrum.

double gamma_factor(double delay_fs, double duration_fs);
/// 1 - gamma without cancellation.
double one_minus_gamma(double delay_fs, double duration_fs);

/// theta = 2 pi nu0 T - Gamma - pi/2.
double interference_phase(double center_thz, double delay_fs, double post_selection_rad);
/// Gamma such that interference_phase(...) == theta.
double post_selection_for_phase(double center_thz, double delay_fs, double theta_rad);

double delta_f_gaussian(const GaussianPulse& p, double delay_fs, double post_selection_rad,
                        double floor = kDefaultDenominatorFloor);
double loss_gaussian(const GaussianPulse& p, double delay_fs, double post_selection_rad);
PointObservables observables_gaussian(const GaussianPulse& p, double delay_fs, double post_selection_rad,
                                      double floor = kDefaultDenominatorFloor);

/// T_i = 2 d_i / c, lengths in mm, delays in fs.
std::pair<double, double> delay_from_arm_lengths(double d1_mm, double d2_mm);

/// Trapezoidal moments of a spectrum against exp(i 2 pi nu T) at fixed T.
/// Since S_out is linear in cos(phi - Gamma'), every observable at any Gamma
/// follows from these four numbers; used for fast sweeps and fitting.
class ModulationMoments {
 public:
  ModulationMoments(const Spectrum& s_in, double delay_fs);

  double delay() const noexcept { return delay_; }
  double input_energy() const noexcept { return f_in_; }
  /// |M0| / F_in: the fringe contrast; equals gamma for Gaussian spectra.
  double contrast() const noexcept;
  /// Gamma at which the transmitted energy is maximal.
  double max_transmission_gamma() const noexcept;

  PointObservables evaluate(double post_selection_rad, double floor = kDefaultEnergyFloor) const;

 private:
  double delay_;
  double f_in_;
  double n_in_;  // first moment about ref_
  std::complex<double> m0_;
  std::complex<double> m1_;
};

}  // namespace wva
