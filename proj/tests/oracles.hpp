#pragma once

// Test-only reference computations. Nothing here calls into the library's
// numerical routines; they integrate the continuous model directly.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

inline constexpr long double kPi = std::numbers::pi_v<long double>;
inline constexpr long double kLn2 = std::numbers::ln2_v<long double>;

/// Composite Simpson rule in long double with n (even) panels.
inline long double simpson(const std::function<long double(long double)>& f, long double a, long double b,
                           int n = 200000) {
  if (n % 2) ++n;
  const long double h = (b - a) / n;
  long double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + h * i) * (i % 2 ? 4.0L : 2.0L);
  return s * h / 3.0L;
}

/// Gaussian input density exp[-pi^2 tau^2 (nu - nu0)^2 / ln2], nu in THz, tau in fs.
inline long double gaussian_density(long double nu, long double nu0, long double tau_fs) {
  const long double x = kPi * tau_fs * 1e-3L * (nu - nu0);
  return std::exp(-x * x / kLn2);
}

struct Observables {
  long double delta_f;
  long double loss_db;
};

/// Centroid shift and loss of the Gaussian pulse by direct quadrature of
/// S_in (1 + cos(2 pi nu T - Gamma - pi/2)) / 2 over nu0 +- half_width.
inline Observables gaussian_by_quadrature(long double nu0, long double tau_fs, long double t_fs, long double gamma,
                                          long double half_width, int panels = 200000) {
  const auto s_in = [&](long double nu) { return gaussian_density(nu, nu0, tau_fs); };
  const auto s_out = [&](long double nu) {
    return s_in(nu) * 0.5L * (1.0L + std::cos(2.0L * kPi * nu * t_fs * 1e-3L - gamma - kPi / 2));
  };
  const long double a = nu0 - half_width;
  const long double b = nu0 + half_width;
  const long double fi = simpson(s_in, a, b, panels);
  const long double fo = simpson(s_out, a, b, panels);
  const long double ni = simpson([&](long double nu) { return (nu - nu0) * s_in(nu); }, a, b, panels);
  const long double no = simpson([&](long double nu) { return (nu - nu0) * s_out(nu); }, a, b, panels);
  return {no / fo - ni / fi, -10.0L * std::log10(fo / fi)};
}

/// Root of f on [a, b] by bisection (f(a), f(b) of opposite sign).
inline double bisect(const std::function<double(double)>& f, double a, double b, int iters = 200) {
  double fa = f(a);
  for (int i = 0; i < iters; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace oracle
