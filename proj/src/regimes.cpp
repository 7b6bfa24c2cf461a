#include "wva/regimes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wva/error.hpp"
#include "wva/units.hpp"

namespace wva {

using units::kPi;

std::string_view to_string(ModelTag tag) {
  return tag == ModelTag::GaussianClosedForm ? "gaussian-closed-form" : "numeric-spectrum";
}

std::string_view to_string(Regime r) { return r == Regime::LowLoss ? "low-loss" : "high-loss"; }

std::size_t SweepResult::singular_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(shifts.begin(), shifts.end(), [](const auto& s) { return !s; }));
}

double wrap_angle(double rad) {
  double r = std::remainder(rad, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

Regime classify_regime(double loss_db, double threshold_db) {
  return loss_db <= threshold_db ? Regime::LowLoss : Regime::HighLoss;
}

SweepResult gamma_sweep(const PulseModel& model, double delay_fs, double gamma_lo, double gamma_hi, std::size_t n,
                        double floor) {
  if (n < 2) throw InvalidArgument("a sweep needs at least 2 angles");
  if (!std::isfinite(gamma_lo) || !std::isfinite(gamma_hi) || !(gamma_lo < gamma_hi)) {
    throw InvalidArgument("sweep range must be finite and increasing");
  }
  if (!std::isfinite(delay_fs)) throw InvalidArgument("delay must be finite");

  SweepResult out;
  out.gammas.resize(n);
  out.shifts.resize(n);
  out.losses.resize(n);
  out.model_tag = std::holds_alternative<GaussianPulse>(model) ? ModelTag::GaussianClosedForm
                                                               : ModelTag::NumericSpectrum;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    const double gamma = i + 1 == n ? gamma_hi : gamma_lo + (gamma_hi - gamma_lo) * t;
    const PointObservables p = std::visit(
        [&](const auto& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, GaussianPulse>) {
            return observables_gaussian(m, delay_fs, gamma, floor);
          } else {
            return try_observables_numeric(m, InterferometerConfig::from_delay(delay_fs, gamma), floor);
          }
        },
        model);
    out.gammas[i] = gamma;
    out.shifts[i] = p.delta_f;
    out.losses[i] = p.loss_db;
  }
  return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double loss_for_transmission(double den) { return -10.0 * std::log10(0.5 * den); }

void check_budget(double budget_db) {
  if (std::isnan(budget_db)) throw InvalidArgument("loss budget must be a number");
}

}  // namespace

WorkingPoint max_shift_at_loss_budget(const GaussianPulse& p, double delay_fs, double budget_db) {
  check_budget(budget_db);
  const double g = gamma_factor(delay_fs, p.duration());
  const double om = one_minus_gamma(delay_fs, p.duration());
  const double min_loss = loss_for_transmission(2.0 - om);
  if (budget_db < min_loss) {
    throw InfeasibleBudget("loss budget below the minimum achievable loss of " + std::to_string(min_loss) + " dB");
  }

  double theta = 0.0;
  if (om > 0.0) {
    const double max_shift_loss = loss_for_transmission(om * (1.0 + g));
    if (budget_db >= max_shift_loss) {
      theta = std::acos(-g);
    } else {
      const double c = (2.0 * std::pow(10.0, -budget_db / 10.0) - 1.0) / g;
      theta = std::acos(std::clamp(c, -1.0, 1.0));
    }
  }

  const double c2 = std::cos(0.5 * theta);
  const double den = om + 2.0 * g * c2 * c2;
  const double scale = units::kLn2 / kPi * delay_fs / (p.duration() * p.duration()) / units::kThzFs;
  WorkingPoint wp;
  wp.gamma = wrap_angle(post_selection_for_phase(p.center(), delay_fs, theta));
  wp.shift = -scale * g * std::sin(theta) / den;
  wp.loss = loss_for_transmission(den);
  wp.regime = classify_regime(wp.loss);
  return wp;
}

namespace {

// Loss and shift of a tabulated spectrum as a function of the effective
// interference phase theta, measured from the maximum-transmission angle.
struct TabulatedModel {
  ModulationMoments moments;
  double gamma_at_theta(double theta) const { return moments.max_transmission_gamma() - theta; }
  PointObservables at(double theta) const { return moments.evaluate(gamma_at_theta(theta)); }
  double abs_shift(double theta) const {
    const auto o = at(theta);
    return o.delta_f ? std::abs(*o.delta_f) : -1.0;
  }
};

double golden_max(const TabulatedModel& m, double lo, double hi) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo;
  double b = hi;
  double x1 = b - r * (b - a);
  double x2 = a + r * (b - a);
  double f1 = m.abs_shift(x1);
  double f2 = m.abs_shift(x2);
  for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = m.abs_shift(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = m.abs_shift(x1);
    }
  }
  return f1 > f2 ? x1 : x2;
}

}  // namespace

WorkingPoint max_shift_at_loss_budget(const Spectrum& s, double delay_fs, double budget_db) {
  check_budget(budget_db);
  const TabulatedModel model{ModulationMoments(s, delay_fs)};
  const double min_loss = model.at(0.0).loss_db;
  if (budget_db < min_loss) {
    throw InfeasibleBudget("loss budget below the minimum achievable loss of " + std::to_string(min_loss) + " dB");
  }

  // Loss grows monotonically with |theta| on [0, pi]; find the budget edge.
  double edge = kPi;
  if (model.at(kPi).loss_db > budget_db) {
    double lo = 0.0;
    double hi = kPi;
    while (std::cos(lo) - std::cos(hi) > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      (model.at(mid).loss_db <= budget_db ? lo : hi) = mid;
    }
    edge = lo;
  }

  constexpr int kScan = 2048;
  double best_theta = 0.0;
  double best = -1.0;
  int best_k = 0;
  for (int k = -kScan; k <= kScan; ++k) {
    const double theta = edge * static_cast<double>(k) / kScan;
    const double v = model.abs_shift(theta);
    if (v > best) {
      best = v;
      best_theta = theta;
      best_k = k;
    }
  }
  if (best_k != -kScan && best_k != kScan) {
    const double step = edge / kScan;
    const double refined = golden_max(model, best_theta - step, best_theta + step);
    if (model.abs_shift(refined) > best) best_theta = refined;
  }
  if (best < 0.0) throw EnergyBelowFloor("every feasible angle is singular");

  const double gamma = model.gamma_at_theta(best_theta);
  const auto o = try_observables_numeric(s, InterferometerConfig::from_delay(delay_fs, gamma));
  WorkingPoint wp;
  wp.gamma = wrap_angle(gamma);
  wp.shift = o.delta_f.value_or(0.0);
  wp.loss = o.loss_db;
  wp.regime = classify_regime(wp.loss);
  return wp;
}

WorkingPoint max_shift_at_loss_budget(const PulseModel& model, double delay_fs, double budget_db) {
  return std::visit([&](const auto& m) { return max_shift_at_loss_budget(m, delay_fs, budget_db); }, model);
}

WorkingPoint global_max_shift(const PulseModel& model, double delay_fs) {
  return max_shift_at_loss_budget(model, delay_fs, kInf);
}

}  // namespace wva
