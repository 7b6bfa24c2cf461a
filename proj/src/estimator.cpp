#include "wva/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wva/error.hpp"
#include "wva/parallel.hpp"
#include "wva/units.hpp"

namespace wva {

namespace {

double channel_rms(const std::vector<double>& v) {
  double ss = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isnan(x)) continue;
    ss += x * x;
    ++n;
  }
  return n == 0 ? 0.0 : std::sqrt(ss / static_cast<double>(n));
}

double scale_or_rms(const std::optional<double>& scale, const std::vector<double>& data) {
  if (scale) return *scale;
  const double rms = channel_rms(data);
  return rms > 0.0 ? rms : 1.0;
}

// Model observables at every data angle for one delay.
std::vector<PointObservables> model_points(const FitProblem& problem, double delay_fs, double gamma_offset) {
  std::vector<PointObservables> out(problem.data_gamma.size());
  if (const auto* p = std::get_if<GaussianPulse>(&problem.model)) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = observables_gaussian(*p, delay_fs, problem.data_gamma[i] + gamma_offset, problem.floor);
    }
  } else {
    const ModulationMoments mm(std::get<Spectrum>(problem.model), delay_fs);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = mm.evaluate(problem.data_gamma[i] + gamma_offset, problem.floor);
    }
  }
  return out;
}

}  // namespace

void FitProblem::validate() const {
  const std::size_t n = data_gamma.size();
  if (!data_shift && !data_loss) throw InvalidArgument("fit needs a shift or a loss channel");
  if (data_shift && data_shift->size() != n) throw InvalidArgument("shift data length mismatch");
  if (data_loss && data_loss->size() != n) throw InvalidArgument("loss data length mismatch");
  if (weights) {
    if (weights->size() != n) throw InvalidArgument("weights length mismatch");
    for (double w : *weights) {
      if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("weights must be positive");
    }
  }
  for (double g : data_gamma) {
    if (!std::isfinite(g)) throw InvalidArgument("data angles must be finite");
  }
  if (!std::isfinite(t_min) || !std::isfinite(t_max)) throw InvalidArgument("delay bracket must be finite");
  if (!(t_min < t_max)) throw DegenerateBracket("delay bracket must satisfy t_min < t_max");
  if (grid_nodes < 2) throw InvalidArgument("coarse grid needs at least 2 nodes");
  for (const auto& s : {shift_scale, loss_scale}) {
    if (s && !(*s > 0.0)) throw InvalidArgument("channel scales must be positive");
  }
  for (const auto* sig : {&shift_sigma, &loss_sigma}) {
    if (!*sig) continue;
    if ((*sig)->size() != n) throw InvalidArgument("per-point sigma length mismatch");
    for (double v : **sig) {
      if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("per-point sigmas must be positive");
    }
  }
  if (gamma_jitter && !(*gamma_jitter > 0.0 && std::isfinite(*gamma_jitter))) {
    throw InvalidArgument("gamma jitter must be positive");
  }
}

double ResidualVector::norm() const noexcept {
  double ss = 0.0;
  for (double r : values) ss += r * r;
  return std::sqrt(ss);
}

ResidualVector residuals(const FitProblem& problem, double delay_fs, double gamma_offset) {
  const auto model = model_points(problem, delay_fs, gamma_offset);
  const std::size_t n = model.size();
  const auto weight = [&](std::size_t i) { return problem.weights ? (*problem.weights)[i] : 1.0; };

  ResidualVector r;
  std::vector<bool> singular(n, false);
  const auto divisor = [](const std::optional<std::vector<double>>& sigma, double scale, std::size_t i) {
    return sigma ? (*sigma)[i] : scale;
  };
  if (problem.data_shift) {
    const double scale = scale_or_rms(problem.shift_scale, *problem.data_shift);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (*problem.data_shift)[i];
      if (std::isnan(d)) continue;
      if (model[i].singular()) {
        singular[i] = true;
        r.values.push_back(0.0);
      } else {
        r.values.push_back(weight(i) / divisor(problem.shift_sigma, scale, i) * (*model[i].delta_f - d));
      }
    }
    r.shift_entries = r.values.size();
  }
  if (problem.data_loss) {
    const double scale = scale_or_rms(problem.loss_scale, *problem.data_loss);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (*problem.data_loss)[i];
      if (std::isnan(d)) continue;
      if (!std::isfinite(model[i].loss_db)) {
        singular[i] = true;
        r.values.push_back(0.0);
      } else {
        r.values.push_back(weight(i) / divisor(problem.loss_sigma, scale, i) * (model[i].loss_db - d));
      }
    }
  }
  r.singular = static_cast<std::size_t>(std::count(singular.begin(), singular.end(), true));
  return r;
}

std::pair<std::vector<double>, std::vector<double>> jitter_sigmas(const FitProblem& problem, double delay_fs,
                                                                  double gamma_offset, double gamma_sigma,
                                                                  double relative_floor) {
  // Central differences in the angle; h is small against any fringe feature
  // the jitter can resolve, yet far above rounding.
  const double h = 1e-4;
  const auto mid = model_points(problem, delay_fs, gamma_offset);
  const auto lo = model_points(problem, delay_fs, gamma_offset - h);
  const auto hi = model_points(problem, delay_fs, gamma_offset + h);
  const std::size_t n = mid.size();

  const auto spread = [&](auto value, double scale) {
    std::vector<double> out(n);
    const double floor = relative_floor * scale;
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = value(lo[i]);
      const auto b = value(mid[i]);
      const auto c = value(hi[i]);
      if (!a || !b || !c || !std::isfinite(*a + *b + *c)) {
        out[i] = scale;  // singular neighbourhood; the point is dropped anyway
        continue;
      }
      const double d1 = (*c - *a) / (2.0 * h) * gamma_sigma;
      const double d2 = (*c - 2.0 * *b + *a) / (h * h) * gamma_sigma * gamma_sigma;
      out[i] = std::sqrt(d1 * d1 + 0.5 * d2 * d2 + floor * floor);
    }
    return out;
  };

  std::pair<std::vector<double>, std::vector<double>> out;
  if (problem.data_shift) {
    out.first = spread([](const PointObservables& o) { return o.delta_f; },
                       scale_or_rms(problem.shift_scale, *problem.data_shift));
  }
  if (problem.data_loss) {
    out.second = spread([](const PointObservables& o) { return std::optional<double>(o.loss_db); },
                        scale_or_rms(problem.loss_scale, *problem.data_loss));
  }
  return out;
}

namespace {

struct Jacobian {
  std::vector<std::vector<double>> columns;
};

Jacobian finite_difference_jacobian(const FitProblem& problem, const std::vector<double>& x) {
  Jacobian jac;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double h = 1e-6 * std::max(std::abs(x[k]), 1.0);
    auto lo = x;
    auto hi = x;
    lo[k] -= h;
    hi[k] += h;
    const auto r_lo = residuals(problem, lo[0], lo.size() > 1 ? lo[1] : 0.0).values;
    const auto r_hi = residuals(problem, hi[0], hi.size() > 1 ? hi[1] : 0.0).values;
    std::vector<double> col(r_lo.size());
    for (std::size_t i = 0; i < col.size(); ++i) col[i] = (r_hi[i] - r_lo[i]) / (2.0 * h);
    jac.columns.push_back(std::move(col));
  }
  return jac;
}

// Solves (A + lambda diag(A)) delta = -b for one or two parameters.
std::vector<double> damped_step(const Jacobian& jac, const std::vector<double>& r, double lambda) {
  const std::size_t p = jac.columns.size();
  double a[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  double b[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t m = 0; m < r.size(); ++m) a[i][j] += jac.columns[i][m] * jac.columns[j][m];
    }
    for (std::size_t m = 0; m < r.size(); ++m) b[i] += jac.columns[i][m] * r[m];
  }
  for (std::size_t i = 0; i < p; ++i) a[i][i] += lambda * (a[i][i] > 0.0 ? a[i][i] : 1.0);
  if (p == 1) return {a[0][0] > 0.0 ? -b[0] / a[0][0] : 0.0};
  const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
  if (det == 0.0) return {0.0, 0.0};
  return {-(a[1][1] * b[0] - a[0][1] * b[1]) / det, -(a[0][0] * b[1] - a[1][0] * b[0]) / det};
}

ChannelRms unweighted_rms(const FitProblem& problem, double delay_fs, double gamma_offset) {
  const auto model = model_points(problem, delay_fs, gamma_offset);
  const auto rms = [&](const std::vector<double>& data, auto value) -> std::optional<double> {
    double ss = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto v = value(model[i]);
      if (std::isnan(data[i]) || !v || !std::isfinite(*v)) continue;
      ss += (*v - data[i]) * (*v - data[i]);
      ++n;
    }
    if (n == 0) return std::nullopt;
    return std::sqrt(ss / static_cast<double>(n));
  };
  ChannelRms out;
  if (problem.data_shift) {
    out.shift = rms(*problem.data_shift, [](const PointObservables& o) { return o.delta_f; });
  }
  if (problem.data_loss) {
    out.loss = rms(*problem.data_loss, [](const PointObservables& o) { return std::optional<double>(o.loss_db); });
  }
  return out;
}

constexpr std::size_t kMaxIterations = 200;
constexpr double kDelayStepTolerance = 1e-4;  // fs
constexpr double kOffsetStepTolerance = 1e-6;  // rad
constexpr double kNormDecreaseTolerance = 1e-10;

// The residual oscillates with the optical carrier, period 1/nu_c in T, and
// near the dark fringe its basins are far narrower than that period. The
// coarse grid is densified to at least this many nodes per carrier period.
constexpr double kNodesPerFringe = 64.0;
constexpr std::size_t kMaxGridNodes = std::size_t{1} << 16;
// Refinement is started from this many of the lowest grid minima.
constexpr std::size_t kRefineStarts = 16;

double carrier_frequency(const PulseModel& model) {
  if (const auto* p = std::get_if<GaussianPulse>(&model)) return p->center();
  return centroid(std::get<Spectrum>(model));
}

struct Refined {
  std::vector<double> x;
  double norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Levenberg-Marquardt from x0.
Refined refine(const FitProblem& problem, std::vector<double> x, double norm) {
  const std::size_t params = x.size();
  const auto eval = [&](const std::vector<double>& p) { return residuals(problem, p[0], p.size() > 1 ? p[1] : 0.0); };
  auto r = eval(x).values;
  double lambda = 1e-3;
  Refined out;

  for (std::size_t it = 0; it < kMaxIterations; ++it) {
    out.iterations = it + 1;
    if (norm == 0.0) {
      out.converged = true;
      break;
    }
    const auto jac = finite_difference_jacobian(problem, x);
    const auto delta = damped_step(jac, r, lambda);
    auto candidate = x;
    for (std::size_t k = 0; k < params; ++k) candidate[k] += delta[k];
    candidate[0] = std::clamp(candidate[0], problem.t_min, problem.t_max);

    const auto r_new = eval(candidate).values;
    double norm_new = 0.0;
    for (double v : r_new) norm_new += v * v;
    norm_new = std::sqrt(norm_new);

    double decrease = 0.0;
    const double step_t = std::abs(candidate[0] - x[0]);
    const double step_g = params > 1 ? std::abs(candidate[1] - x[1]) : 0.0;
    if (norm_new < norm) {
      decrease = (norm - norm_new) / norm;
      x = candidate;
      r = r_new;
      norm = norm_new;
      lambda = std::max(lambda / 10.0, 1e-12);
    } else {
      lambda *= 10.0;
    }
    if (step_t < kDelayStepTolerance && step_g < kOffsetStepTolerance && decrease < kNormDecreaseTolerance) {
      out.converged = true;
      break;
    }
  }
  out.x = std::move(x);
  out.norm = norm;
  return out;
}

bool better(double norm_a, double t_a, double norm_b, double t_b) {
  return norm_a < norm_b || (norm_a == norm_b && std::abs(t_a) < std::abs(t_b));
}

}  // namespace

namespace {

FitResult fit_once(const FitProblem& problem) {
  const std::size_t params = problem.parameter_count();
  if (problem.data_gamma.size() < 3 * params) {
    throw InvalidArgument("fit needs at least 3 data points per fitted parameter");
  }

  // Stage 1: coarse grid over the bracket.
  const double span = problem.t_max - problem.t_min;
  const double fringe_nodes = std::ceil(span * carrier_frequency(problem.model) * units::kThzFs * kNodesPerFringe);
  const std::size_t nodes =
      std::max(problem.grid_nodes, static_cast<std::size_t>(std::min(fringe_nodes, double(kMaxGridNodes))) + 1);
  std::vector<double> grid_t(nodes);
  std::vector<double> grid_norm(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    grid_t[k] = k + 1 == nodes ? problem.t_max
                               : problem.t_min + span * static_cast<double>(k) / static_cast<double>(nodes - 1);
  }
  parallel_for(nodes, problem.threads, [&](std::size_t k) { grid_norm[k] = residuals(problem, grid_t[k], 0.0).norm(); });

  std::vector<std::size_t> minima;
  for (std::size_t k = 0; k < nodes; ++k) {
    const bool left_ok = k == 0 || grid_norm[k] <= grid_norm[k - 1];
    const bool right_ok = k + 1 == nodes || grid_norm[k] <= grid_norm[k + 1];
    if (left_ok && right_ok) minima.push_back(k);
  }
  std::sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) {
    return better(grid_norm[a], grid_t[a], grid_norm[b], grid_t[b]);
  });
  if (minima.size() > kRefineStarts) minima.resize(kRefineStarts);

  // Stage 2: Levenberg-Marquardt from each retained grid minimum.
  std::vector<Refined> refined(minima.size());
  parallel_for(minima.size(), problem.threads, [&](std::size_t i) {
    std::vector<double> x0{grid_t[minima[i]]};
    if (problem.fit_gamma_offset) x0.push_back(0.0);
    refined[i] = refine(problem, x0, grid_norm[minima[i]]);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < refined.size(); ++i) {
    if (better(refined[i].norm, refined[i].x[0], refined[best].norm, refined[best].x[0])) best = i;
  }

  FitResult result;
  const Refined& win = refined[best];
  result.t_hat = win.x[0];
  result.gamma_offset_hat = params > 1 ? win.x[1] : 0.0;
  result.residual_norm = win.norm;
  result.iterations = win.iterations;
  result.converged = win.converged;

  // Other local minima whose refined norm is within tolerance of the best.
  const double limit = win.norm * (1.0 + kAlternateTolerance);
  for (std::size_t i = 0; i < refined.size(); ++i) {
    if (i == best || refined[i].norm > limit) continue;
    const double t = refined[i].x[0];
    const bool duplicate = std::any_of(result.alternates.begin(), result.alternates.end(),
                                       [&](double a) { return std::abs(a - t) < 10.0 * kDelayStepTolerance; });
    if (!duplicate && std::abs(t - result.t_hat) >= 10.0 * kDelayStepTolerance) result.alternates.push_back(t);
  }
  std::sort(result.alternates.begin(), result.alternates.end());

  result.per_channel_rms = unweighted_rms(problem, result.t_hat, result.gamma_offset_hat);
  result.singular_points = residuals(problem, result.t_hat, result.gamma_offset_hat).singular;
  return result;
}

}  // namespace

FitResult fit_delay(const FitProblem& problem) {
  problem.validate();
  if (!problem.gamma_jitter || problem.shift_sigma || problem.loss_sigma) return fit_once(problem);

  const FitResult first = fit_once(problem);
  FitProblem weighted = problem;
  auto [shift_sigma, loss_sigma] =
      jitter_sigmas(problem, first.t_hat, first.gamma_offset_hat, *problem.gamma_jitter);
  if (problem.data_shift) weighted.shift_sigma = std::move(shift_sigma);
  if (problem.data_loss) weighted.loss_sigma = std::move(loss_sigma);
  FitResult second = fit_once(weighted);
  second.iterations += first.iterations;
  return second;
}

UncertainValue refit_uncertainty(const FitProblem& problem, const FitResult& fit, double gamma_sigma,
                                 std::size_t refits, std::uint64_t seed) {
  if (!(gamma_sigma >= 0.0)) throw InvalidArgument("refit jitter must be >= 0");
  if (refits < 2) throw InvalidArgument("uncertainty needs at least 2 refits");
  std::vector<double> t_hats(refits);
  parallel_for(refits, problem.threads, [&](std::size_t k) {
    auto rng = sample_stream(seed, k);
    std::normal_distribution<double> dist(0.0, 1.0);
    FitProblem synthetic = problem;
    synthetic.threads = 1;
    std::vector<double> jittered(problem.data_gamma.size());
    for (std::size_t i = 0; i < jittered.size(); ++i) {
      jittered[i] = problem.data_gamma[i] + fit.gamma_offset_hat + gamma_sigma * dist(rng);
    }
    FitProblem probe = problem;
    probe.data_gamma = jittered;
    const auto model = model_points(probe, fit.t_hat, 0.0);
    const auto regenerate = [&](const std::vector<double>& data, auto value) {
      std::vector<double> out(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) {
        const auto v = value(model[i]);
        out[i] = std::isnan(data[i]) || !v || !std::isfinite(*v) ? std::nan("") : *v;
      }
      return out;
    };
    if (problem.data_shift) {
      synthetic.data_shift = regenerate(*problem.data_shift, [](const PointObservables& o) { return o.delta_f; });
    }
    if (problem.data_loss) {
      synthetic.data_loss =
          regenerate(*problem.data_loss, [](const PointObservables& o) { return std::optional<double>(o.loss_db); });
    }
    t_hats[k] = fit_delay(synthetic).t_hat;
  });
  return summarize(t_hats);
}

double invert_small_shift(double delta_f_thz, const GaussianPulse& p, double gamma, double zero_shift_gamma) {
  if (!std::isfinite(delta_f_thz) || !std::isfinite(gamma) || !std::isfinite(zero_shift_gamma)) {
    throw InvalidArgument("inputs must be finite");
  }
  const double theta = wrap_angle(zero_shift_gamma - gamma);
  if (std::abs(theta) > 0.5 * units::kPi) {
    throw NonlinearRegime("operating angle is outside the linear low-loss regime (|theta| > pi/2)");
  }
  if (theta == 0.0) throw InvalidArgument("the shift carries no delay information at theta = 0");

  const double tau = p.duration();
  // Shift coefficient (ln2 / pi) / tau^2 in THz per fs.
  const double a = units::kLn2 / units::kPi / (tau * tau) / units::kThzFs;
  const double first_order = -delta_f_thz / (a * std::tan(0.5 * theta));

  double t = first_order;
  for (int it = 0; it < 100; ++it) {
    const double g = gamma_factor(t, tau);
    const double next = -delta_f_thz * (1.0 + g * std::cos(theta)) / (a * g * std::sin(theta));
    const bool done = std::abs(next - t) <= 1e-6 * std::abs(next);
    t = next;
    if (done) break;
  }
  if (t != 0.0 && std::abs(t - first_order) > 0.1 * std::abs(t)) {
    throw NonlinearRegime("first-order inversion is off by more than 10%");
  }
  return t;
}

}  // namespace wva
