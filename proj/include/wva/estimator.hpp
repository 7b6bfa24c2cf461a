#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "wva/noise.hpp"
#include "wva/regimes.hpp"

namespace wva {

/// Gamma-sweep data to fit. Missing cells in a channel are NaN.
struct FitProblem {
  PulseModel model;
  std::vector<double> data_gamma;
  std::optional<std::vector<double>> data_shift;  // THz
  std::optional<std::vector<double>> data_loss;   // dB
  std::optional<std::vector<double>> weights;     // per point, > 0
  double t_min = 0.0;                             // fs
  double t_max = 0.0;                             // fs
  bool fit_gamma_offset = false;

  // Channel normalisers; default to the RMS of each channel's data.
  std::optional<double> shift_scale;
  std::optional<double> loss_scale;

  // Per-point standard deviations in channel units. When present they
  // replace the channel normaliser, turning residuals into chi values.
  std::optional<std::vector<double>> shift_sigma;
  std::optional<std::vector<double>> loss_sigma;

  // Known post-selection jitter (rad). fit_delay then fits twice: the
  // second pass weights every point by the spread the jitter induces in the
  // model at the first-pass estimate (effective variance). Points on the
  // steep flanks of the dark fringe stop dominating the fit. Ignored if
  // per-point sigmas are given.
  std::optional<double> gamma_jitter;

  std::size_t grid_nodes = 512;
  double floor = kDefaultDenominatorFloor;
  unsigned threads = 1;

  void validate() const;
  std::size_t parameter_count() const noexcept { return fit_gamma_offset ? 2 : 1; }
};

/// Stacked weighted residuals: every present shift datum first (in data
/// order), then every present loss datum.
struct ResidualVector {
  std::vector<double> values;
  std::size_t shift_entries = 0;
  std::size_t singular = 0;  // model points excluded (weight 0)

  double norm() const noexcept;
};

struct ChannelRms {
  std::optional<double> shift;  // THz
  std::optional<double> loss;   // dB
};

struct FitResult {
  double t_hat = 0.0;
  double gamma_offset_hat = 0.0;
  double residual_norm = 0.0;
  ChannelRms per_channel_rms;
  std::optional<UncertainValue> uncertainty;
  std::size_t iterations = 0;
  bool converged = false;
  /// Other refined local minima whose norm is within 5% of the best (the
  /// periodic T -> T + k / nu0 ambiguity), ascending in T; excludes t_hat.
  std::vector<double> alternates;
  std::size_t singular_points = 0;
};

inline constexpr double kAlternateTolerance = 0.05;

ResidualVector residuals(const FitProblem& problem, double delay_fs, double gamma_offset);

/// Standard deviation of each model observable when the post-selection angle
/// jitters by `gamma_sigma`, to second order, plus a floor of `relative_floor`
/// times the channel normaliser. Returns {shift sigmas, loss sigmas}; a
/// channel absent from the problem yields an empty vector.
std::pair<std::vector<double>, std::vector<double>> jitter_sigmas(const FitProblem& problem, double delay_fs,
                                                                  double gamma_offset, double gamma_sigma,
                                                                  double relative_floor = 1e-3);

/// Coarse grid over [t_min, t_max] followed by Levenberg-Marquardt refinement
/// with a central finite-difference Jacobian. A run that hits the iteration
/// limit returns its best iterate with converged == false.
FitResult fit_delay(const FitProblem& problem);

/// Spread of t_hat over parametric refits: data regenerated from the fitted
/// model at Gamma_i + N(0, sigma^2) and refitted.
UncertainValue refit_uncertainty(const FitProblem& problem, const FitResult& fit, double gamma_sigma,
                                 std::size_t refits, std::uint64_t seed);

/// Linear low-loss regime inversion of a measured shift. theta is taken from
/// the measured low-loss zero-shift angle: theta = zero_shift_gamma - gamma.
/// The first-order estimate T = -df pi tau^2 / (ln2 tan(theta/2)) is refined
/// self-consistently in gamma(T). Throws NonlinearRegime for |theta| > pi/2
/// or when the refinement moves T by more than 10%.
double invert_small_shift(double delta_f_thz, const GaussianPulse& p, double gamma, double zero_shift_gamma);

}  // namespace wva
