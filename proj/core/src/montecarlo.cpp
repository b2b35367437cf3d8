#include "tcmerton/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tcmerton/errors.hpp"

namespace tcm {

NoiseSource::NoiseSource(std::uint64_t seed, std::size_t n_steps, std::size_t block)
    : seed_(seed), n_steps_(n_steps), block_(block) {
  if (block == 0) throw ValidationError("mc.block", "must be >= 1");
}

void NoiseSource::reseed(std::size_t block_index) {
  const auto b = static_cast<std::uint64_t>(block_index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  engine_.seed(seq);
  normal_.reset();
}

void NoiseSource::draw(std::size_t u, std::span<double> z) {
  if (!fresh_ || u != next_ || u % block_ == 0) {
    reseed(u / block_);
    for (std::size_t skip = 0; skip < (u % block_) * n_steps_; ++skip) normal_(engine_);
    fresh_ = true;
  }
  for (std::size_t n = 0; n < n_steps_; ++n) z[n] = normal_(engine_);
  next_ = u + 1;
}

std::size_t step_count(double t0, double horizon, double dt) {
  if (!(dt > 0.0)) throw ValidationError("mc.dt", "must be > 0");
  const double span = horizon - t0;
  if (!(span > 0.0)) throw ValidationError("t0", "must be < T");
  const double k = std::round(span / dt);
  if (k < 1.0 || std::abs(k * dt - span) > 1e-9 * horizon)
    throw ValidationError("mc.dt", "must divide T - t0");
  return static_cast<std::size_t>(k);
}

McEstimate summarize(std::span<const double> v, bool antithetic) {
  std::vector<double> s;
  if (antithetic) {
    s.reserve(v.size() / 2);
    for (std::size_t k = 0; k + 1 < v.size(); k += 2) s.push_back(0.5 * (v[k] + v[k + 1]));
  } else {
    s.assign(v.begin(), v.end());
  }
  McEstimate e;
  e.samples = s.size();
  if (s.empty()) return e;
  double mean = 0.0;
  for (double x : s) mean += x;
  mean /= static_cast<double>(s.size());
  double ss = 0.0;
  for (double x : s) ss += (x - mean) * (x - mean);
  e.mean = mean;
  e.se = s.size() > 1 ? std::sqrt(ss / static_cast<double>(s.size() - 1) /
                                  static_cast<double>(s.size()))
                      : 0.0;
  return e;
}

namespace {

void check_paths(const McOptions& o) {
  if (o.n_paths == 0) throw ValidationError("mc.n_paths", "must be >= 1");
  if (o.antithetic && o.n_paths % 2 != 0)
    throw ValidationError("mc.n_paths", "must be even with antithetic sampling");
}

std::size_t draw_count(std::size_t n_paths, bool antithetic) {
  return antithetic ? n_paths / 2 : n_paths;
}

void check_exits(std::size_t exited, std::size_t total, double limit) {
  if (static_cast<double>(exited) > limit * static_cast<double>(total)) {
    std::ostringstream os;
    os << exited << " of " << total
       << " paths left the y-range of the grid; widen [y_min, y_max]";
    throw RangeError(os.str());
  }
}

// Rows of a field blended in t at the given times, evaluated linearly in y.
class TimeRows {
 public:
  TimeRows(const ScalarField2D& f, std::span<const double> times)
      : y0_(f.grid().y_min()), dy_(f.grid().dy()), ny_(f.grid().n_y()), rows_(times.size() * ny_) {
    const Grid& g = f.grid();
    for (std::size_t n = 0; n < times.size(); ++n) {
      const Cell c = locate(times[n], 0.0, g.dt(), g.n_t());
      const auto a = f.row(c.k);
      const auto b = f.row(c.k + 1);
      for (std::size_t k = 0; k < ny_; ++k) rows_[n * ny_ + k] = a[k] + c.s * (b[k] - a[k]);
    }
  }
  double at(std::size_t n, double y) const {
    const Cell c = locate(y, y0_, dy_, ny_);
    const double* r = rows_.data() + n * ny_;
    return r[c.k] + c.s * (r[c.k + 1] - r[c.k]);
  }

 private:
  double y0_;
  double dy_;
  std::size_t ny_;
  std::vector<double> rows_;
};

std::vector<double> midpoints(double t0, double dt, std::size_t n_steps) {
  std::vector<double> t(n_steps);
  for (std::size_t n = 0; n < n_steps; ++n) t[n] = t0 + (static_cast<double>(n) + 0.5) * dt;
  return t;
}

double utility_of(const UtilityModel& u, double x) {
  if (x > 0.0) return u.U(x);
  bool bounded = true;
  for (const auto& term : u.terms()) bounded = bounded && term.gamma > 0.0;
  if (x == 0.0 && bounded) return 0.0;
  throw DomainError("utility of non-positive consumption is not finite");
}

// Trapezoid weights times h(t0, s_n) plus the terminal mass h(t0, T).
struct PathWeights {
  std::vector<double> running;
  double terminal;
  PathWeights(const DiscountModel& d, double t0, double dt, std::size_t n_steps)
      : running(n_steps + 1) {
    const double horizon = d.horizon();
    for (std::size_t n = 0; n <= n_steps; ++n) {
      const double s = n == n_steps ? horizon : t0 + static_cast<double>(n) * dt;
      const double w = (n == 0 || n == n_steps) ? 0.5 * dt : dt;
      running[n] = w * d.h(t0, s);
    }
    terminal = d.h(t0, horizon);
  }
};

// Controls read off p_bar along a wealth path.
class WealthEngine {
 public:
  WealthEngine(const Problem& p, const PBarInterpolator& interp, double t0, double dt,
               std::size_t n_steps)
      : interp_(interp), slices_(n_steps + 1) {
    for (std::size_t n = 0; n <= n_steps; ++n)
      interp.slice_into(n == n_steps ? p.horizon() : t0 + static_cast<double>(n) * dt, slices_[n]);
    ratio_ = p.market.theta() / p.market.sigma();
  }

  struct Controls {
    double y;
    double pi;
    double c;
    bool exited;
  };

  Controls at(std::size_t n, double log_x) const {
    const auto& s = slices_[n];
    Controls out{};
    if (log_x > s.log_p.front()) {
      out.y = interp_.grid().y_min();
      out.exited = true;
    } else if (log_x < s.log_p.back()) {
      out.y = interp_.grid().y_max();
      out.exited = true;
    } else {
      out.y = interp_.invert_log(s, log_x);
    }
    out.pi = -ratio_ * interp_.log_slope(s, out.y);
    out.c = std::exp(interp_.log_I0(out.y) - log_x);
    return out;
  }

  double log_pbar(std::size_t n, double y) const { return interp_.log_pbar(slices_[n], y); }

 private:
  const PBarInterpolator& interp_;
  std::vector<PBarInterpolator::Slice> slices_;
  double ratio_;
};

struct PathOutcome {
  double J = 0.0;
  double gap = 0.0;
  double log_x_T = 0.0;
  double mean_c = 0.0;
  bool exited = false;
};

struct PathRecord {
  double* y;
  double* x;
  double* c;
  double* pi;
};

// One wealth path (and optionally Y_bar alongside it for the identity gap).
PathOutcome run_path(const Problem& p, const WealthEngine& eng, const PathWeights& w,
                     const TimeRows* rho_mid, std::span<const double> z, double sign, double x0,
                     double y0_bar, double dt, const Deviation* dev, double t0,
                     const PathRecord* rec) {
  const double r = p.market.r();
  const double sigma = p.market.sigma();
  const double theta = p.market.theta();
  const double sdt = std::sqrt(dt);
  const std::size_t n_steps = z.size();

  PathOutcome out;
  double log_x = std::log(x0);
  double y_bar = y0_bar;
  double c_sum = 0.0;
  for (std::size_t n = 0;; ++n) {
    const double s = t0 + static_cast<double>(n) * dt;
    const bool deviating = dev && s < dev->until - 1e-12 * dt;
    const auto ctl = eng.at(n, log_x);
    out.exited = out.exited || ctl.exited;
    const double pi = deviating ? dev->pi : ctl.pi;
    const double c = deviating ? dev->c : ctl.c;
    const double x = std::exp(log_x);
    out.J += w.running[n] * utility_of(p.utility, c * x);
    if (rho_mid) out.gap = std::max(out.gap, std::abs(1.0 - std::exp(eng.log_pbar(n, y_bar) - log_x)));
    if (rec) {
      rec->y[n] = rho_mid ? y_bar : ctl.y;
      rec->x[n] = x;
      rec->c[n] = c;
      rec->pi[n] = pi;
    }
    if (n == n_steps) break;
    c_sum += c;
    const double dw = sign * sdt * z[n];
    log_x += (r + sigma * theta * pi - c - 0.5 * sigma * sigma * pi * pi) * dt + sigma * pi * dw;
    if (rho_mid) y_bar += (rho_mid->at(n, y_bar) - 0.5 * theta * theta - r) * dt - theta * dw;
  }
  out.J += w.terminal * utility_of(p.utility, std::exp(log_x));
  out.log_x_T = log_x;
  out.mean_c = c_sum / static_cast<double>(n_steps);
  return out;
}

}  // namespace

PathEnsemble simulate_Y(const Problem& problem, const ScalarField2D& rho_bar, double t0, double y0,
                        const McOptions& o) {
  check_paths(o);
  const Grid& g = rho_bar.grid();
  const std::size_t n_steps = step_count(t0, problem.horizon(), o.dt);
  const double dt = (problem.horizon() - t0) / static_cast<double>(n_steps);
  const double theta = problem.market.theta();
  const double r = problem.market.r();
  const TimeRows rho(rho_bar, midpoints(t0, dt, n_steps));

  PathEnsemble e;
  e.seed = o.seed;
  e.t0 = t0;
  e.y0 = y0;
  e.dt = dt;
  e.n_paths = o.n_paths;
  e.n_steps = n_steps;
  e.antithetic = o.antithetic;
  e.block = o.block;
  e.y.resize(o.n_paths * (n_steps + 1));

  NoiseSource noise(o.seed, n_steps, o.block);
  std::vector<double> z(n_steps);
  const double sdt = std::sqrt(dt);
  const std::size_t per_draw = o.antithetic ? 2 : 1;
  for (std::size_t u = 0; u < draw_count(o.n_paths, o.antithetic); ++u) {
    noise.draw(u, z);
    for (std::size_t a = 0; a < per_draw; ++a) {
      const std::size_t p = u * per_draw + a;
      const double sign = a == 0 ? 1.0 : -1.0;
      double* y = e.y.data() + p * (n_steps + 1);
      y[0] = y0;
      bool exited = !g.contains_y(y0);
      for (std::size_t n = 0; n < n_steps; ++n) {
        y[n + 1] = y[n] + (rho.at(n, y[n]) - 0.5 * theta * theta - r) * dt - theta * sign * sdt * z[n];
        exited = exited || !g.contains_y(y[n + 1]);
      }
      if (exited) ++e.n_exited;
    }
  }
  check_exits(e.n_exited, e.n_paths, o.max_exit_fraction);
  return e;
}

void simulate_wealth(const Problem& problem, const PBarInterpolator& interp, double x0,
                     PathEnsemble& e) {
  if (!(x0 > 0.0)) throw ValidationError("x0", "must be > 0");
  const WealthEngine eng(problem, interp, e.t0, e.dt, e.n_steps);
  const PathWeights w(problem.discount, e.t0, e.dt, e.n_steps);
  // Fails early with RangeError if x0 is not covered.
  interp.invert(interp.slice(e.t0), x0);
  const std::size_t len = e.n_steps + 1;
  e.x.assign(e.n_paths * len, 0.0);
  e.c.assign(e.n_paths * len, 0.0);
  e.pi.assign(e.n_paths * len, 0.0);
  std::vector<double> y_scratch(len);
  NoiseSource noise(e.seed, e.n_steps, e.block);
  std::vector<double> z(e.n_steps);
  const std::size_t per_draw = e.antithetic ? 2 : 1;
  for (std::size_t u = 0; u < draw_count(e.n_paths, e.antithetic); ++u) {
    noise.draw(u, z);
    for (std::size_t a = 0; a < per_draw; ++a) {
      const std::size_t p = u * per_draw + a;
      const PathRecord rec{y_scratch.data(), e.x.data() + p * len, e.c.data() + p * len,
                           e.pi.data() + p * len};
      const auto res = run_path(problem, eng, w, nullptr, z, a == 0 ? 1.0 : -1.0, x0, 0.0, e.dt,
                                nullptr, e.t0, &rec);
      for (std::size_t n = 0; n < len; ++n)
        if (!(e.x[p * len + n] > 0.0) || !std::isfinite(e.x[p * len + n]))
          throw IntegrityError("simulated wealth is not positive and finite");
      (void)res;
    }
  }
}

McEstimate estimate_J(const Problem& problem, const PathEnsemble& e) {
  if (!e.has_wealth()) throw ValidationError("ensemble", "wealth paths were not simulated");
  const PathWeights w(problem.discount, e.t0, e.dt, e.n_steps);
  const std::size_t len = e.n_steps + 1;
  std::vector<double> j(e.n_paths);
  for (std::size_t p = 0; p < e.n_paths; ++p) {
    double acc = 0.0;
    for (std::size_t n = 0; n < len; ++n)
      acc += w.running[n] * utility_of(problem.utility, e.c[p * len + n] * e.x[p * len + n]);
    acc += w.terminal * utility_of(problem.utility, e.x[p * len + e.n_steps]);
    j[p] = acc;
  }
  return summarize(j, e.antithetic);
}

std::vector<double> wealth_identity_gaps(const PathEnsemble& e, const PBarInterpolator& interp) {
  if (!e.has_wealth()) throw ValidationError("ensemble", "wealth paths were not simulated");
  const std::size_t len = e.n_steps + 1;
  std::vector<double> gaps(e.n_paths, 0.0);
  PBarInterpolator::Slice s;
  for (std::size_t n = 0; n < len; ++n) {
    interp.slice_into(n == e.n_steps ? interp.grid().horizon() : e.time(n), s);
    for (std::size_t p = 0; p < e.n_paths; ++p) {
      const double x = e.x[p * len + n];
      const double pb = std::exp(interp.log_pbar(s, e.y[p * len + n]));
      gaps[p] = std::max(gaps[p], std::abs(x - pb) / x);
    }
  }
  return gaps;
}

EquilibriumStats run_equilibrium(const Problem& problem, const ScalarField2D& rho_bar,
                                 const PBarInterpolator& interp, double t0, double x0,
                                 const McOptions& o, bool with_gaps, std::size_t export_paths) {
  check_paths(o);
  const std::size_t n_steps = step_count(t0, problem.horizon(), o.dt);
  const double dt = (problem.horizon() - t0) / static_cast<double>(n_steps);
  const WealthEngine eng(problem, interp, t0, dt, n_steps);
  const PathWeights w(problem.discount, t0, dt, n_steps);
  const double y0 = interp.invert(interp.slice(t0), x0);
  std::optional<TimeRows> rho;
  if (with_gaps) rho.emplace(rho_bar, midpoints(t0, dt, n_steps));
  const std::size_t len = n_steps + 1;

  EquilibriumStats st;
  export_paths = std::min(export_paths, o.n_paths);
  auto& ex = st.exported;
  ex.seed = o.seed;
  ex.t0 = t0;
  ex.y0 = y0;
  ex.dt = dt;
  ex.n_paths = export_paths;
  ex.n_steps = n_steps;
  ex.antithetic = o.antithetic;
  ex.block = o.block;
  ex.y.resize(export_paths * len);
  ex.x.resize(export_paths * len);
  ex.c.resize(export_paths * len);
  ex.pi.resize(export_paths * len);

  std::vector<double> j(o.n_paths);
  st.terminal_wealth.resize(o.n_paths);
  st.mean_consumption.resize(o.n_paths);
  if (with_gaps) st.gaps.resize(o.n_paths);
  NoiseSource noise(o.seed, n_steps, o.block);
  std::vector<double> z(n_steps);
  const std::size_t per_draw = o.antithetic ? 2 : 1;
  for (std::size_t u = 0; u < draw_count(o.n_paths, o.antithetic); ++u) {
    noise.draw(u, z);
    for (std::size_t a = 0; a < per_draw; ++a) {
      const std::size_t p = u * per_draw + a;
      PathRecord rec{};
      if (p < export_paths)
        rec = {ex.y.data() + p * len, ex.x.data() + p * len, ex.c.data() + p * len,
               ex.pi.data() + p * len};
      const auto res = run_path(problem, eng, w, rho ? &*rho : nullptr, z, a == 0 ? 1.0 : -1.0,
                                x0, y0, dt, nullptr, t0, p < export_paths ? &rec : nullptr);
      j[p] = res.J;
      st.terminal_wealth[p] = std::exp(res.log_x_T);
      st.mean_consumption[p] = res.mean_c;
      if (with_gaps) st.gaps[p] = res.gap;
      if (res.exited) ++st.n_exited;
    }
  }
  check_exits(st.n_exited, o.n_paths, o.max_exit_fraction);
  st.J = summarize(j, o.antithetic);
  return st;
}

McEstimate estimate_deviation(const Problem& problem, const PBarInterpolator& interp, double t0,
                              double x0, const Deviation& dev, const McOptions& o) {
  check_paths(o);
  if (!(dev.pi == dev.pi) || !(dev.c >= 0.0))
    throw ValidationError("deviation", "consumption rate must be >= 0");
  const std::size_t n_steps = step_count(t0, problem.horizon(), o.dt);
  const double dt = (problem.horizon() - t0) / static_cast<double>(n_steps);
  const WealthEngine eng(problem, interp, t0, dt, n_steps);
  const PathWeights w(problem.discount, t0, dt, n_steps);
  interp.invert(interp.slice(t0), x0);

  std::vector<double> d(o.n_paths);
  std::size_t exited = 0;
  NoiseSource noise(o.seed, n_steps, o.block);
  std::vector<double> z(n_steps);
  const std::size_t per_draw = o.antithetic ? 2 : 1;
  for (std::size_t u = 0; u < draw_count(o.n_paths, o.antithetic); ++u) {
    noise.draw(u, z);
    for (std::size_t a = 0; a < per_draw; ++a) {
      const std::size_t p = u * per_draw + a;
      const double sign = a == 0 ? 1.0 : -1.0;
      const auto eq = run_path(problem, eng, w, nullptr, z, sign, x0, 0.0, dt, nullptr, t0, nullptr);
      const auto dv = run_path(problem, eng, w, nullptr, z, sign, x0, 0.0, dt, &dev, t0, nullptr);
      d[p] = eq.J - dv.J;
      if (eq.exited || dv.exited) ++exited;
    }
  }
  check_exits(exited, o.n_paths, o.max_exit_fraction);
  return summarize(d, o.antithetic);
}

namespace {

struct RatioSamples {
  std::vector<double> num;
  std::vector<double> den;
};

McEstimate ratio_estimate(const RatioSamples& s, bool antithetic) {
  std::vector<double> a;
  std::vector<double> b;
  const std::size_t n = s.num.size();
  if (antithetic) {
    for (std::size_t k = 0; k + 1 < n; k += 2) {
      a.push_back(0.5 * (s.num[k] + s.num[k + 1]));
      b.push_back(0.5 * (s.den[k] + s.den[k + 1]));
    }
  } else {
    a = s.num;
    b = s.den;
  }
  const auto m = static_cast<double>(a.size());
  double sa = 0.0, sb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sa += a[k];
    sb += b[k];
  }
  const double ratio = sa / sb;
  const double mb = sb / m;
  double ss = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double e = a[k] - ratio * b[k];
    ss += e * e;
  }
  McEstimate out;
  out.mean = ratio;
  out.samples = a.size();
  out.se = a.size() > 1 ? std::sqrt(ss / (m - 1.0) / m) / std::abs(mb) : 0.0;
  return out;
}

}  // namespace

McEstimate estimate_F_mc(const Problem& problem, const ScalarField2D& phi, std::size_t t_index,
                         double y, std::size_t n_paths, std::uint64_t seed, std::size_t substeps) {
  const Grid& g = phi.grid();
  const std::size_t last = g.n_t() - 1;
  if (t_index > last) throw RangeError("probe time index outside the grid");
  if (substeps == 0) throw ValidationError("mc.substeps", "must be >= 1");
  McOptions o;
  o.n_paths = n_paths;
  check_paths(o);

  const double theta = problem.market.theta();
  const double r = problem.market.r();
  const double t = g.t(t_index);
  const std::size_t intervals = last - t_index;
  const std::size_t n_steps = intervals * substeps;
  const double ds = g.dt() / static_cast<double>(substeps);

  std::vector<double> wh(intervals + 1);
  std::vector<double> wdh(intervals + 1);
  for (std::size_t j = 0; j <= intervals; ++j) {
    const double w = operator_weight(g, t_index, t_index + j);
    wh[j] = w * problem.discount.h(t, g.t(t_index + j));
    wdh[j] = w * problem.discount.dh_dt(t, g.t(t_index + j));
  }

  RatioSamples s;
  s.num.resize(n_paths);
  s.den.resize(n_paths);
  if (intervals == 0) {
    const double v = problem.utility.U0p(y);
    std::fill(s.num.begin(), s.num.end(), wdh[0] * v);
    std::fill(s.den.begin(), s.den.end(), wh[0] * v);
    return ratio_estimate(s, true);
  }

  const auto mids = midpoints(t, ds, n_steps);
  const TimeRows phi_mid(phi, mids);
  const TimeRows phi_y_mid(d_dy(phi), mids);
  NoiseSource noise(seed, n_steps, o.block);
  std::vector<double> z(n_steps);
  const double sds = std::sqrt(ds);
  for (std::size_t u = 0; u < n_paths / 2; ++u) {
    noise.draw(u, z);
    for (std::size_t a = 0; a < 2; ++a) {
      const double sign = a == 0 ? 1.0 : -1.0;
      double yy = y;
      double log_z = 0.0;
      double v0 = problem.utility.U0p(yy);
      double num = wdh[0] * v0;
      double den = wh[0] * v0;
      for (std::size_t n = 0; n < n_steps; ++n) {
        const double drift = phi_mid.at(n, yy) - r - 0.5 * theta * theta;
        log_z += phi_y_mid.at(n, yy) * ds;
        yy += drift * ds + theta * sign * sds * z[n];
        if ((n + 1) % substeps == 0) {
          const std::size_t j = (n + 1) / substeps;
          const double v = problem.utility.U0p(yy) * std::exp(log_z);
          num += wdh[j] * v;
          den += wh[j] * v;
        }
      }
      s.num[2 * u + a] = num;
      s.den[2 * u + a] = den;
    }
  }
  return ratio_estimate(s, true);
}

McEstimate estimate_pbar_fk(const Problem& problem, const ScalarField2D& rho_bar,
                            std::size_t t_index, double y, std::size_t n_paths, std::uint64_t seed,
                            std::size_t substeps) {
  const Grid& g = rho_bar.grid();
  const std::size_t last = g.n_t() - 1;
  if (t_index > last) throw RangeError("probe time index outside the grid");
  if (substeps == 0) throw ValidationError("mc.substeps", "must be >= 1");
  McOptions o;
  o.n_paths = n_paths;
  check_paths(o);
  const double theta = problem.market.theta();
  const double r = problem.market.r();
  const double t = g.t(t_index);
  const std::size_t n_steps = (last - t_index) * substeps;
  std::vector<double> v(n_paths);
  if (n_steps == 0) {
    std::fill(v.begin(), v.end(), problem.utility.I0(y));
    return summarize(v, true);
  }
  const double ds = g.dt() / static_cast<double>(substeps);
  const TimeRows rho(rho_bar, midpoints(t, ds, n_steps));
  NoiseSource noise(seed, n_steps, o.block);
  std::vector<double> z(n_steps);
  const double sds = std::sqrt(ds);
  for (std::size_t u = 0; u < n_paths / 2; ++u) {
    noise.draw(u, z);
    for (std::size_t a = 0; a < 2; ++a) {
      const double sign = a == 0 ? 1.0 : -1.0;
      double yy = y;
      double acc = 0.5 * ds * problem.utility.I0(yy);
      for (std::size_t n = 0; n < n_steps; ++n) {
        yy += (rho.at(n, yy) - 0.5 * theta * theta - r) * ds - theta * sign * sds * z[n];
        const double tau = static_cast<double>(n + 1) * ds;
        const double f = std::exp(-r * tau) * problem.utility.I0(yy + theta * theta * tau);
        acc += (n + 1 == n_steps ? 0.5 * ds + 1.0 : ds) * f;
      }
      v[2 * u + a] = acc;
    }
  }
  return summarize(v, true);
}

}  // namespace tcm
