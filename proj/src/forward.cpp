#include "wva/forward.hpp"

#include <cmath>
#include <limits>

#include "wva/error.hpp"
#include "wva/units.hpp"

namespace wva {

using units::kLn2;
using units::kPi;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double loss_from_ratio(double ratio) { return ratio > 0.0 ? -10.0 * std::log10(ratio) : kInf; }

struct Moments {
  double energy = 0.0;
  double first = 0.0;  // about the grid midpoint
};

Moments trapezoid_moments(const Spectrum& s) {
  const auto& grid = s.grid();
  const auto v = s.values();
  const double ref = grid.midpoint();
  const std::size_t n = v.size();
  Moments m;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    m.energy += w * v[i];
    m.first += w * (grid.node(i) - ref) * v[i];
  }
  m.energy *= grid.step();
  m.first *= grid.step();
  return m;
}

}  // namespace

InterferometerConfig::InterferometerConfig(double delay_1_fs, double delay_2_fs, double post_selection_rad)
    : delay_1_(delay_1_fs), delay_2_(delay_2_fs), gamma_(post_selection_rad) {
  if (!std::isfinite(delay_1_fs) || !std::isfinite(delay_2_fs) || !std::isfinite(post_selection_rad)) {
    throw InvalidArgument("interferometer delays and post-selection angle must be finite");
  }
}

ComplexSpectrum::ComplexSpectrum(FrequencyGrid grid, std::vector<std::complex<double>> amplitudes)
    : grid_(grid), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != grid_.count()) throw InvalidArgument("field length does not match grid");
  for (const auto& a : amplitudes_) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) throw InvalidArgument("field must be finite");
  }
}

ComplexSpectrum output_field(const ComplexSpectrum& e_in, const InterferometerConfig& cfg) {
  using namespace std::complex_literals;
  const auto& grid = e_in.grid();
  const auto in = e_in.amplitudes();
  std::vector<std::complex<double>> out(in.size());
  // A delay T multiplies the field by exp(-i omega T); with this sign |E_out|^2
  // reproduces the S_in/2 [1 + cos(2 pi nu T - Gamma - pi/2)] transmission.
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double nu = grid.node(i);
    const auto arm_1 = std::polar(1.0, -units::phase(nu, cfg.delay_1()));
    const auto arm_2 = std::polar(1.0, -units::phase(nu, cfg.delay_2()) - cfg.post_selection());
    out[i] = 0.5 * in[i] * (arm_1 - 1i * arm_2);
  }
  return {grid, std::move(out)};
}

Spectrum spectral_density(const ComplexSpectrum& field) {
  const auto a = field.amplitudes();
  std::vector<double> values(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) values[i] = std::norm(a[i]);
  return {field.grid(), std::move(values)};
}

ComplexSpectrum field_from_density(const Spectrum& s) {
  const auto v = s.values();
  std::vector<std::complex<double>> a(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) a[i] = std::sqrt(v[i]);
  return {s.grid(), std::move(a)};
}

Spectrum output_spectrum(const Spectrum& s_in, const InterferometerConfig& cfg) {
  const auto& grid = s_in.grid();
  const auto in = s_in.values();
  const double t = cfg.delay();
  const double offset = cfg.post_selection() + 0.5 * kPi;
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    // (1 + cos x) / 2 == cos^2(x / 2), exact near destructive interference.
    const double c = std::cos(0.5 * (units::phase(grid.node(i), t) - offset));
    out[i] = in[i] * c * c;
  }
  return {grid, std::move(out)};
}

PointObservables try_compare_spectra(const Spectrum& s_in, const Spectrum& s_out, double floor) {
  if (!(s_in.grid() == s_out.grid())) throw InvalidArgument("input and output spectra must share a grid");
  const Moments in = trapezoid_moments(s_in);
  if (!(in.energy > 0.0)) throw InvalidArgument("input spectrum has zero energy");
  const Moments out = trapezoid_moments(s_out);
  const double ratio = out.energy / in.energy;
  if (ratio < floor || !(out.energy > 0.0)) return {std::nullopt, kInf};
  return {out.first / out.energy - in.first / in.energy, loss_from_ratio(ratio)};
}

Observables compare_spectra(const Spectrum& s_in, const Spectrum& s_out, double floor) {
  const auto p = try_compare_spectra(s_in, s_out, floor);
  if (p.singular()) throw EnergyBelowFloor("transmitted energy below floor; centroid shift undefined");
  return {*p.delta_f, p.loss_db, energy(s_in), energy(s_out)};
}

Observables observables_numeric(const Spectrum& s_in, const InterferometerConfig& cfg, double floor) {
  return compare_spectra(s_in, output_spectrum(s_in, cfg), floor);
}

PointObservables try_observables_numeric(const Spectrum& s_in, const InterferometerConfig& cfg, double floor) {
  return try_compare_spectra(s_in, output_spectrum(s_in, cfg), floor);
}

double gamma_factor(double delay_fs, double duration_fs) {
  if (!(duration_fs > 0.0)) throw InvalidArgument("pulse duration must be > 0");
  const double r = delay_fs / duration_fs;
  return std::exp(-kLn2 * r * r);
}

double one_minus_gamma(double delay_fs, double duration_fs) {
  if (!(duration_fs > 0.0)) throw InvalidArgument("pulse duration must be > 0");
  const double r = delay_fs / duration_fs;
  return -std::expm1(-kLn2 * r * r);
}

double interference_phase(double center_thz, double delay_fs, double post_selection_rad) {
  return units::phase(center_thz, delay_fs) - post_selection_rad - 0.5 * kPi;
}

double post_selection_for_phase(double center_thz, double delay_fs, double theta_rad) {
  return units::phase(center_thz, delay_fs) - theta_rad - 0.5 * kPi;
}

namespace {

// 1 + gamma cos(theta) == (1 - gamma) + 2 gamma cos^2(theta / 2)
double transmission_denominator(double gamma, double one_minus, double theta) {
  const double c = std::cos(0.5 * theta);
  return one_minus + 2.0 * gamma * c * c;
}

// (ln2 / pi) T / tau^2 in THz.
double shift_scale(const GaussianPulse& p, double delay_fs) {
  return kLn2 / kPi * delay_fs / (p.duration() * p.duration()) / units::kThzFs;
}

}  // namespace

PointObservables observables_gaussian(const GaussianPulse& p, double delay_fs, double post_selection_rad,
                                      double floor) {
  const double g = gamma_factor(delay_fs, p.duration());
  const double theta = interference_phase(p.center(), delay_fs, post_selection_rad);
  const double den = transmission_denominator(g, one_minus_gamma(delay_fs, p.duration()), theta);
  PointObservables out;
  out.loss_db = loss_from_ratio(0.5 * den);
  if (den >= floor) out.delta_f = -shift_scale(p, delay_fs) * g * std::sin(theta) / den;
  return out;
}

double delta_f_gaussian(const GaussianPulse& p, double delay_fs, double post_selection_rad, double floor) {
  const auto o = observables_gaussian(p, delay_fs, post_selection_rad, floor);
  if (o.singular()) throw DenominatorBelowFloor("1 + gamma cos(theta) below floor near orthogonal post-selection");
  return *o.delta_f;
}

double loss_gaussian(const GaussianPulse& p, double delay_fs, double post_selection_rad) {
  return observables_gaussian(p, delay_fs, post_selection_rad, 0.0).loss_db;
}

std::pair<double, double> delay_from_arm_lengths(double d1_mm, double d2_mm) {
  if (!(d1_mm >= 0.0) || !(d2_mm >= 0.0)) throw InvalidArgument("arm lengths must be >= 0");
  const auto to_delay = [](double d_mm) {
    return 2.0 * d_mm * units::kNmPerMm / units::kSpeedOfLight * units::kFsPerPs;
  };
  return {to_delay(d1_mm), to_delay(d2_mm)};
}

ModulationMoments::ModulationMoments(const Spectrum& s_in, double delay_fs) : delay_(delay_fs) {
  if (!std::isfinite(delay_fs)) throw InvalidArgument("delay must be finite");
  const auto& grid = s_in.grid();
  const auto v = s_in.values();
  const double ref = grid.midpoint();
  const std::size_t n = v.size();
  double f = 0.0;
  double first = 0.0;
  std::complex<double> m0 = 0.0;
  std::complex<double> m1 = 0.0;
  // The phase advances by a constant per node, so e^{i phi} is carried by
  // rotation and re-seeded exactly every kResync nodes to bound drift.
  constexpr std::size_t kResync = 32;
  const auto step_rotation = std::polar(1.0, units::phase(grid.step(), delay_fs));
  std::complex<double> e;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = ((i == 0 || i + 1 == n) ? 0.5 : 1.0) * v[i];
    const double x = grid.node(i) - ref;
    e = i % kResync == 0 ? std::polar(1.0, units::phase(grid.node(i), delay_fs)) : e * step_rotation;
    f += w;
    first += w * x;
    m0 += w * e;
    m1 += w * x * e;
  }
  const double h = grid.step();
  f_in_ = f * h;
  n_in_ = first * h;
  m0_ = m0 * h;
  m1_ = m1 * h;
  if (!(f_in_ > 0.0)) throw InvalidArgument("input spectrum has zero energy");
}

double ModulationMoments::contrast() const noexcept { return std::abs(m0_) / f_in_; }

double ModulationMoments::max_transmission_gamma() const noexcept { return std::arg(m0_) - 0.5 * kPi; }

PointObservables ModulationMoments::evaluate(double post_selection_rad, double floor) const {
  const auto rot = std::polar(1.0, -(post_selection_rad + 0.5 * kPi));
  const double f_out = 0.5 * (f_in_ + (m0_ * rot).real());
  const double n_out = 0.5 * (n_in_ + (m1_ * rot).real());
  const double ratio = f_out / f_in_;
  if (ratio < floor || !(f_out > 0.0)) return {std::nullopt, kInf};
  return {n_out / f_out - n_in_ / f_in_, loss_from_ratio(ratio)};
}

}  // namespace wva
