#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "wva/forward.hpp"
#include "wva/spectra.hpp"

namespace wva {

/// Either the analytic Gaussian model or a tabulated input spectrum.
using PulseModel = std::variant<GaussianPulse, Spectrum>;

enum class ModelTag { GaussianClosedForm, NumericSpectrum };
std::string_view to_string(ModelTag tag);

struct SweepResult {
  std::vector<double> gammas;
  std::vector<std::optional<double>> shifts;  // empty at singular angles
  std::vector<double> losses;
  ModelTag model_tag = ModelTag::GaussianClosedForm;

  std::size_t size() const noexcept { return gammas.size(); }
  std::size_t singular_count() const noexcept;
};

enum class Regime { LowLoss, HighLoss };
std::string_view to_string(Regime r);

inline constexpr double kDefaultRegimeThresholdDb = 12.0;

struct WorkingPoint {
  double gamma = 0.0;  // rad, wrapped to (-pi, pi]
  double shift = 0.0;  // THz, signed
  double loss = 0.0;   // dB
  Regime regime = Regime::LowLoss;
};

/// Observables at n equally spaced angles in [gamma_lo, gamma_hi].
SweepResult gamma_sweep(const PulseModel& model, double delay_fs, double gamma_lo, double gamma_hi, std::size_t n,
                        double floor = kDefaultDenominatorFloor);

/// Largest |shift| whose insertion loss stays within the budget (dB). An
/// infinite budget returns the global maximum. Throws InfeasibleBudget when
/// the budget is below the minimum achievable loss.
WorkingPoint max_shift_at_loss_budget(const GaussianPulse& p, double delay_fs, double budget_db);
WorkingPoint max_shift_at_loss_budget(const Spectrum& s, double delay_fs, double budget_db);
WorkingPoint max_shift_at_loss_budget(const PulseModel& model, double delay_fs, double budget_db);

/// Global maximum of |shift| over Gamma.
WorkingPoint global_max_shift(const PulseModel& model, double delay_fs);

Regime classify_regime(double loss_db, double threshold_db = kDefaultRegimeThresholdDb);
inline Regime classify_regime(const WorkingPoint& wp, double threshold_db = kDefaultRegimeThresholdDb) {
  return classify_regime(wp.loss, threshold_db);
}

/// Wraps an angle into (-pi, pi].
double wrap_angle(double rad);

}  // namespace wva
