#pragma once

// Reference solutions computed without the library's PDE machinery.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

/// Composite Simpson rule on [a,b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 200) {
  if (b <= a) return 0.0;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// Classical RK4 for a scalar ODE x' = f(t, x) from t0 to t1 in n steps.
inline double rk4(const std::function<double(double, double)>& f, double t0, double x0, double t1,
                  int n) {
  const double h = (t1 - t0) / n;
  double t = t0, x = x0;
  for (int k = 0; k < n; ++k) {
    const double k1 = f(t, x);
    const double k2 = f(t + h / 2, x + h / 2 * k1);
    const double k3 = f(t + h / 2, x + h / 2 * k2);
    const double k4 = f(t + h, x + h * k3);
    x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    t += h;
  }
  return x;
}

/// For CRRA utility the weighted rate does not depend on y, and with
/// U0'(y) proportional to e^{qy}, q = gamma/(gamma-1), the expectation in the
/// operator is a Gaussian moment. This solves the resulting scalar fixed point
///   phi(t) = [int_t^T dh e^{E} ds + dh(t,T) e^{E(t,T)}] / [same with h]
///   E(t,s) = q (Phi(s) - Phi(t)) - q (r + theta^2/2)(s - t) + q^2 theta^2 (s - t)/2
/// on a uniform time grid of n+1 points by Picard iteration, with Simpson in s.
struct CrraRate {
  double T;
  std::vector<double> t;
  std::vector<double> phi;

  double at(double s) const {
    const double u = s / T * (t.size() - 1);
    auto k = static_cast<std::size_t>(u);
    if (k + 1 >= t.size()) return phi.back();
    const double w = u - k;
    return phi[k] + w * (phi[k + 1] - phi[k]);
  }
};

inline CrraRate crra_rate(double gamma, double r, double theta, double T,
                          const std::function<double(double, double)>& h,
                          const std::function<double(double, double)>& dh, int n = 2000,
                          int sweeps = 40) {
  const double q = gamma / (gamma - 1.0);
  CrraRate out{T, std::vector<double>(n + 1), std::vector<double>(n + 1, 0.0)};
  for (int k = 0; k <= n; ++k) out.t[k] = T * k / n;
  std::vector<double> cum(n + 1);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    // Phi by the trapezoid rule on the fine grid (piecewise-linear phi).
    cum[0] = 0.0;
    for (int k = 1; k <= n; ++k) cum[k] = cum[k - 1] + 0.5 * (T / n) * (out.phi[k] + out.phi[k - 1]);
    auto Phi = [&](double s) {
      const double u = s / T * n;
      auto k = static_cast<int>(u);
      if (k >= n) return cum[n];
      const double w = u - k;
      // exact integral of the linear interpolant inside the cell
      return cum[k] + (T / n) * (w * out.phi[k] + 0.5 * w * w * (out.phi[k + 1] - out.phi[k]));
    };
    std::vector<double> next(n + 1);
    for (int i = 0; i <= n; ++i) {
      const double ti = out.t[i];
      auto E = [&](double s) {
        return std::exp(q * (Phi(s) - Phi(ti)) - q * (r + theta * theta / 2) * (s - ti) +
                        q * q * theta * theta * (s - ti) / 2);
      };
      const int panels = 2 * std::max(1, (n - i) / 2);
      const double num = simpson([&](double s) { return dh(ti, s) * E(s); }, ti, T, panels) +
                         dh(ti, T) * E(T);
      const double den =
          simpson([&](double s) { return h(ti, s) * E(s); }, ti, T, panels) + h(ti, T) * E(T);
      next[i] = num / den;
    }
    out.phi = next;
  }
  return out;
}

/// Annuity A(t) for CRRA with a time-dependent rate: p_bar(t,y) = A(t) e^{y/(gamma-1)},
/// A' = nu(t) A - 1, A(T) = 1, nu = (rho - gamma r - gamma theta^2/(2(1-gamma)))/(1-gamma).
inline double crra_annuity(double gamma, double r, double theta, double T,
                           const std::function<double(double)>& rho, double t, int steps = 4000) {
  auto f = [&](double s, double a) {
    const double nu =
        (rho(s) - gamma * r - gamma * theta * theta / (2.0 * (1.0 - gamma))) / (1.0 - gamma);
    return nu * a - 1.0;
  };
  return rk4(f, T, 1.0, t, steps);
}

/// Standard normal lower tail via erfc.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace oracle
