#include "tcmerton/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "tcmerton/errors.hpp"
#include "tcmerton/fixed_point.hpp"

namespace tcm {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double hi = v[mid];
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

// Standard errors below rounding level (exponential discount makes the
// operator ratio exact pathwise) are floored so that z stays meaningful.
double z_score(double estimate, double reference, double se) {
  const double floor = 1e-12 * std::max(1.0, std::abs(reference));
  return std::abs(estimate - reference) / std::max(se, floor);
}

}  // namespace

MertonOracle::MertonOracle(const MarketModel& market, double gamma, double rho0)
    : market_(market), gamma_(gamma), rho0_(rho0) {
  if (!(gamma < 1.0) || gamma == 0.0) throw ValidationError("gamma", "must be < 1 and != 0");
  const double theta = market.theta();
  nu_ = (rho0 - gamma * market.r() - gamma * theta * theta / (2.0 * (1.0 - gamma))) / (1.0 - gamma);
}

double MertonOracle::annuity(double t) const {
  const double tau = market_.horizon() - t;
  if (std::abs(nu_) < 1e-12) return 1.0 + tau;
  return (1.0 + (nu_ - 1.0) * std::exp(-nu_ * tau)) / nu_;
}

double MertonOracle::annuity_rk4(double t, std::size_t steps) const {
  const double h = -(market_.horizon() - t) / static_cast<double>(steps);
  const auto f = [this](double a) { return nu_ * a - 1.0; };
  double a = 1.0;
  for (std::size_t n = 0; n < steps; ++n) {
    const double k1 = f(a);
    const double k2 = f(a + 0.5 * h * k1);
    const double k3 = f(a + 0.5 * h * k2);
    const double k4 = f(a + h * k3);
    a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return a;
}

double MertonOracle::pi() const { return market_.theta() / (market_.sigma() * (1.0 - gamma_)); }

double MertonOracle::value(double t, double x) const {
  return std::pow(annuity(t), 1.0 - gamma_) * std::pow(x, gamma_) / gamma_;
}

double MertonOracle::pbar(double t, double y) const {
  return annuity(t) * std::exp(y / (gamma_ - 1.0));
}

const char* to_string(Status s) {
  switch (s) {
    case Status::kPass:
      return "pass";
    case Status::kFail:
      return "fail";
    case Status::kWarn:
      return "warn";
    case Status::kInfo:
      return "info";
  }
  return "?";
}

void VerificationReport::add(ReportEntry e) {
  if (find(e.name)) throw IntegrityError("duplicate report entry: " + e.name);
  entries_.push_back(std::move(e));
  std::stable_sort(entries_.begin(), entries_.end(),
                   [](const ReportEntry& a, const ReportEntry& b) { return a.name < b.name; });
}

void VerificationReport::merge(const VerificationReport& other) {
  for (const auto& e : other.entries_) add(e);
}

const ReportEntry* VerificationReport::find(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return &e;
  return nullptr;
}

std::size_t VerificationReport::count(Status s) const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [s](const auto& e) { return e.status == s; }));
}

bool VerificationReport::ok(bool strict) const {
  return count(Status::kFail) == 0 && (!strict || count(Status::kWarn) == 0);
}

std::string VerificationReport::to_json() const {
  nlohmann::ordered_json j;
  j["summary"] = {{"pass", count(Status::kPass)},
                  {"fail", count(Status::kFail)},
                  {"warn", count(Status::kWarn)},
                  {"info", count(Status::kInfo)}};
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : entries_) {
    nlohmann::ordered_json o;
    o["name"] = e.name;
    o["status"] = to_string(e.status);
    o["measured"] = std::isfinite(e.measured) ? nlohmann::ordered_json(e.measured) : nullptr;
    o["tolerance"] = e.tolerance;
    o["runtime_s"] = e.seconds;
    o["detail"] = e.detail;
    arr.push_back(std::move(o));
  }
  j["checks"] = std::move(arr);
  return j.dump(2);
}

std::string VerificationReport::to_table() const {
  std::ostringstream os;
  os << std::left << std::setw(34) << "check" << std::setw(6) << "status" << std::right
     << std::setw(14) << "measured" << std::setw(12) << "tolerance" << std::setw(9) << "time[s]"
     << "  detail\n";
  for (const auto& e : entries_) {
    os << std::left << std::setw(34) << e.name << std::setw(6) << to_string(e.status) << std::right
       << std::setw(14) << std::setprecision(4) << e.measured << std::setw(12) << e.tolerance
       << std::setw(9) << std::fixed << std::setprecision(2) << e.seconds << std::defaultfloat
       << "  " << e.detail << "\n";
  }
  return os.str();
}

HjbResidual hjb_residual(const Solution& sol) {
  const Grid& g = sol.grid;
  const std::size_t nt = g.n_t();
  const std::size_t ny = g.n_y();
  const double theta = sol.problem.market.theta();
  const double r = sol.problem.market.r();
  const auto& L = sol.value.g;
  const auto& Ly = sol.value.g_y;
  const auto& K = sol.value.k;
  const auto& P = sol.pbar.pbar;
  const auto& Py = sol.pbar.pbar_y;
  std::vector<double> lyy(ny);
  std::vector<double> pyy(ny);
  const std::size_t k_lo = ny / 4;
  const std::size_t k_hi = ny - 1 - ny / 4;

  HjbResidual out;
  for (std::size_t i = 1; i + 1 < nt; ++i) {
    const bool last_row = i + 2 == nt;
    d2_dy2_row(L.row(i), g.dy(), lyy);
    d2_dy2_row(P.row(i), g.dy(), pyy);
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
      const double x = P(i, k);
      const double gx = Ly(i, k) / Py(i, k);
      const double gxx = (lyy[k] - gx * pyy[k]) / (Py(i, k) * Py(i, k));
      const double lt = (L(i + 1, k) - L(i - 1, k)) / (2.0 * g.dt());
      const double pt = (P(i + 1, k) - P(i - 1, k)) / (2.0 * g.dt());
      const double gt = lt - gx * pt;
      const double cx = sol.problem.utility.I(gx);
      const double hamiltonian = -theta * theta * gx * gx / (2.0 * gxx) + r * x * gx - cx * gx +
                                 sol.problem.utility.U(cx);
      const double res = gt + hamiltonian - K(i, k);
      if (last_row) {
        out.last_row_abs = std::max(out.last_row_abs, std::abs(res));
        continue;
      }
      out.max_abs = std::max(out.max_abs, std::abs(res));
      out.max_gt = std::max(out.max_gt, std::abs(gt));
    }
  }
  out.normalized = out.max_gt > 0.0 ? out.max_abs / out.max_gt : out.max_abs;
  return out;
}

ReportEntry check_hjb_residual(const Solution& sol, const Solution* coarse, double tol,
                               double min_ratio) {
  const auto start = clock_type::now();
  const HjbResidual fine = hjb_residual(sol);
  ReportEntry e{"hjb.residual", Status::kPass, fine.normalized, tol, 0.0, ""};
  std::ostringstream os;
  os << "max|R|=" << fmt(fine.max_abs) << " max|G_t|=" << fmt(fine.max_gt) << " grid "
     << sol.grid.n_t() << "x" << sol.grid.n_y() << " (row next to t=T excluded, max|R| there "
     << fmt(fine.last_row_abs) << ")";
  bool good = fine.normalized < tol;
  if (coarse) {
    const HjbResidual c = hjb_residual(*coarse);
    const double ratio = fine.normalized > 0.0 ? c.normalized / fine.normalized
                                               : std::numeric_limits<double>::infinity();
    os << "; coarse " << coarse->grid.n_t() << "x" << coarse->grid.n_y() << " residual "
       << fmt(c.normalized) << ", contraction " << fmt(ratio) << " (min " << min_ratio << ")";
    good = good && ratio >= min_ratio;
  }
  e.status = good ? Status::kPass : Status::kWarn;
  e.detail = os.str();
  e.seconds = seconds_since(start);
  return e;
}

ReportEntry check_hjb_residual(const Solution& sol, const std::string& coarse_failure,
                               double tol) {
  ReportEntry e = check_hjb_residual(sol, nullptr, tol, 0.0);
  e.status = Status::kWarn;
  e.detail += "; refinement not established, half-resolution solve failed: " + coarse_failure;
  return e;
}

ReportEntry check_first_order_conditions(const Solution& sol, double tol) {
  const auto start = clock_type::now();
  const Grid& g = sol.grid;
  const double theta = sol.problem.market.theta();
  const double sigma = sol.problem.market.sigma();
  double worst = 0.0;
  for (std::size_t i = 0; i < g.n_t(); ++i)
    for (std::size_t k = 0; k < g.n_y(); ++k) {
      const double x = sol.pbar.pbar(i, k);
      const double v = std::exp(g.y(k));
      // v_x = dv/dy / dx/dy
      const double vx = v / sol.pbar.pbar_y(i, k);
      const double pi = -theta * v / (sigma * x * vx);
      const double c = sol.problem.utility.I(v) / x;
      worst = std::max(worst, std::abs(pi / sol.controls.pi_star(i, k) - 1.0));
      worst = std::max(worst, std::abs(c / sol.controls.c_star(i, k) - 1.0));
    }
  ReportEntry e{"foc.identity", worst < tol ? Status::kPass : Status::kFail, worst, tol,
                seconds_since(start), "max relative gap between x-form and y-form controls"};
  return e;
}

ReportEntry check_terminal_value(const Solution& sol, double tol) {
  const auto start = clock_type::now();
  const Grid& g = sol.grid;
  const std::size_t last = g.n_t() - 1;
  double worst = 0.0;
  for (std::size_t k = 0; k < g.n_y(); ++k) {
    const double u = sol.problem.utility.U0(g.y(k));
    worst = std::max(worst, std::abs(sol.value.g(last, k) - u) / std::max(1.0, std::abs(u)));
  }
  return {"value.terminal", worst < tol ? Status::kPass : Status::kFail, worst, tol,
          seconds_since(start), "G(T,x) against U(x) at x = I0(y_k)"};
}

std::vector<ReportEntry> check_merton_reduction(const Solution& sol, const MertonOracle& oracle,
                                                const std::vector<double>& wealth) {
  const auto start = clock_type::now();
  const Grid& g = sol.grid;
  std::vector<ReportEntry> out;
  const auto& d = sol.problem.discount;
  if (!d.constant_rate())
    throw ValidationError("discount", "Merton reduction needs a constant discount rate");
  const double rho0 = d.rho_max();

  double e_rho = 0.0, e_pi = 0.0, e_c = 0.0;
  for (std::size_t i = 0; i < g.n_t(); ++i) {
    const double c_ref = oracle.consumption(g.t(i));
    for (std::size_t k = 0; k < g.n_y(); ++k) {
      e_rho = std::max(e_rho, std::abs(sol.rho.phi(i, k) - rho0));
      e_pi = std::max(e_pi, std::abs(sol.controls.pi_star(i, k) / oracle.pi() - 1.0));
      e_c = std::max(e_c, std::abs(sol.controls.c_star(i, k) / c_ref - 1.0));
    }
  }
  double e_g = 0.0;
  for (double x : wealth)
    e_g = std::max(e_g, std::abs(value_at(sol.value, sol.interp, 0, x) / oracle.value(0.0, x) - 1.0));
  const double secs = seconds_since(start);
  out.push_back({"merton.rho_bar", e_rho < 1e-10 ? Status::kPass : Status::kFail, e_rho, 1e-10, secs,
                 "sup |rho_bar - rho0|"});
  out.push_back({"merton.pi", e_pi < 1e-3 ? Status::kPass : Status::kFail, e_pi, 1e-3, 0.0,
                 "max relative error of pi* against theta/(sigma(1-gamma))"});
  out.push_back({"merton.c", e_c < 1e-3 ? Status::kPass : Status::kFail, e_c, 1e-3, 0.0,
                 "max relative error of c* against 1/A(t)"});
  out.push_back({"merton.value", e_g < 1e-3 ? Status::kPass : Status::kFail, e_g, 1e-3, 0.0,
                 "max relative error of G(0,x) against A(0)^(1-gamma) x^gamma/gamma"});
  return out;
}

namespace {

// Worst relative margins of lower <= value <= upper, split into t < T and t = T.
struct Margins {
  double interior = std::numeric_limits<double>::infinity();
  double terminal = std::numeric_limits<double>::infinity();
  double where_t = 0.0;
  double where_y = 0.0;

  void add(double lower, double value, double upper, bool terminal_row, double t, double y) {
    const double lo = (value - lower) / std::max(std::abs(lower), 1e-300);
    const double hi = (upper - value) / std::max(std::abs(upper), 1e-300);
    const double m = std::min(lo, hi);
    if (terminal_row) {
      terminal = std::min(terminal, m);
    } else if (m < interior) {
      interior = m;
      where_t = t;
      where_y = y;
    }
  }
};

ReportEntry margin_entry(const std::string& name, const Margins& m, const std::string& what) {
  const bool good = m.interior > 0.0 && m.terminal >= -1e-12;
  std::ostringstream os;
  os << what << "; worst margin for t<T " << fmt(m.interior) << " at (t=" << fmt(m.where_t)
     << ", y=" << fmt(m.where_y) << "), at t=T " << fmt(m.terminal);
  return {name, good ? Status::kPass : Status::kFail, m.interior, 0.0, 0.0, os.str()};
}

}  // namespace

std::vector<ReportEntry> check_bounds_suite(const Solution& sol) {
  const auto start = clock_type::now();
  const Grid& g = sol.grid;
  const Problem& p = sol.problem;
  const double theta = p.market.theta();
  const double sigma = p.market.sigma();
  const double kappa = sol.rho.kappa;
  const std::size_t last = g.n_t() - 1;
  std::vector<ReportEntry> out;

  Margins rho, ratio, elast, pi, c, pi_literal;
  double sign_worst = std::numeric_limits<double>::infinity();
  const bool constant = p.discount.constant_rate();
  double rho_dev = 0.0;
  for (std::size_t i = 0; i < g.n_t(); ++i) {
    const double t = g.t(i);
    const bool term = i == last;
    const double r3 = ratio_bound_lower(p, t);
    const double r4 = ratio_bound_upper(p, t);
    const auto [r1t, r2t] = elasticity_bounds(p.utility, kappa, t, p.horizon());
    for (std::size_t k = 0; k < g.n_y(); ++k) {
      const double y = g.y(k);
      const double pb = sol.pbar.pbar(i, k);
      const double pby = sol.pbar.pbar_y(i, k);
      sign_worst = std::min(sign_worst, std::min(pb, -pby));
      if (constant)
        rho_dev = std::max(rho_dev, std::abs(sol.rho.phi(i, k) - p.discount.rho_max()));
      else
        rho.add(p.discount.rho_min(), sol.rho.phi(i, k), p.discount.rho_max(), term, t, y);
      ratio.add(r3, pb / p.utility.I0(y), r4, term, t, y);
      elast.add(1.0 / r2t, -pby / pb, 1.0 / r1t, term, t, y);
      pi.add(theta / (sigma * r2t), sol.controls.pi_star(i, k), theta / (sigma * r1t), term, t, y);
      c.add(1.0 / r4, sol.controls.c_star(i, k), 1.0 / r3, term, t, y);
      pi_literal.add(theta * r1t / sigma, sol.controls.pi_star(i, k),
                   std::numeric_limits<double>::infinity(), term, t, y);
    }
  }
  const double secs = seconds_since(start);
  if (constant) {
    out.push_back({"bounds.rho_range", rho_dev < 1e-10 ? Status::kPass : Status::kFail, rho_dev,
                   1e-10, secs, "constant discount rate: sup |rho_bar - rho0|"});
  } else {
    auto e = margin_entry("bounds.rho_range", rho, "min rho_h <= rho_bar <= max rho_h");
    e.seconds = secs;
    out.push_back(std::move(e));
  }
  out.push_back(margin_entry("bounds.pbar_ratio", ratio, "r3(t) <= p_bar/I0 <= r4(t)"));
  out.push_back(margin_entry("bounds.elasticity", elast,
                             "1/r2(t) <= -p_bar_y/p_bar <= 1/r1(t) with kappa=" + fmt(kappa)));
  out.push_back(margin_entry("bounds.pi", pi, "theta/(sigma r2(t)) <= pi* <= theta/(sigma r1(t))"));
  out.push_back(margin_entry("bounds.c", c, "1/r4(t) <= c* <= 1/r3(t)"));
  out.push_back({"bounds.pbar_sign", sign_worst > 0.0 ? Status::kPass : Status::kFail, sign_worst,
                 0.0, 0.0, "min over nodes of min(p_bar, -p_bar_y)"});
  {
    const double m = std::min(pi_literal.interior, pi_literal.terminal);
    std::ostringstream os;
    os << "pi* >= theta r1(t)/sigma (reported only; not implied by the elasticity bounds "
          "when r1 r2 > 1); worst margin "
       << fmt(m);
    out.push_back({"bounds.pi_lower_r1", Status::kInfo, m, 0.0, 0.0, os.str()});
  }
  {
    std::ostringstream os;
    os << "max |d/dy rho_bar| = " << fmt(sol.rho.max_abs_phi_y) << " against kappa = " << fmt(kappa);
    out.push_back({"bounds.kappa", sol.rho.kappa_respected ? Status::kPass : Status::kWarn,
                   sol.rho.max_abs_phi_y, kappa, 0.0, os.str()});
  }
  return out;
}

ReportEntry check_value_gradient(const Solution& sol, const std::vector<double>& times,
                                 const std::vector<double>& wealth, double tol) {
  const auto start = clock_type::now();
  double worst = 0.0;
  std::ostringstream where;
  for (double t : times) {
    const std::size_t i = sol.grid.t_index(t);
    for (double x : wealth) {
      const double h = 1e-4 * x;
      const double fd = (value_at(sol.value, sol.interp, i, x + h) -
                         value_at(sol.value, sol.interp, i, x - h)) /
                        (2.0 * h);
      const double v = marginal_value(sol.interp, sol.grid.t(i), x);
      const double e = std::abs(fd / v - 1.0);
      if (e > worst) {
        worst = e;
        where.str("");
        where << "worst at (t=" << fmt(sol.grid.t(i)) << ", x=" << fmt(x) << ")";
      }
    }
  }
  return {"value.gradient", worst < tol ? Status::kPass : Status::kFail, worst, tol,
          seconds_since(start), "central difference of G in x against v; " + where.str()};
}

ReportEntry check_value_mc(const Solution& sol, double x0, const McOptions& mc, double max_z) {
  const auto start = clock_type::now();
  const auto st = run_equilibrium(sol.problem, sol.rho.phi, sol.interp, 0.0, x0, mc, false);
  const double g = value_at(sol.value, sol.interp, 0, x0);
  const double z = z_score(st.J.mean, g, st.J.se);
  std::ostringstream os;
  os << "J=" << fmt(st.J.mean) << " +- " << fmt(st.J.se) << " vs G(0," << fmt(x0)
     << ")=" << fmt(g) << " (" << mc.n_paths << " paths, dt=" << mc.dt << ")";
  return {"value.mc_consistency", std::abs(z) <= max_z ? Status::kPass : Status::kWarn,
          std::abs(z), max_z, seconds_since(start), os.str()};
}

WealthIdentityResult wealth_identity_scaling(const Solution& sol, double t0, double x0,
                                             const std::vector<double>& dts, const McOptions& mc) {
  WealthIdentityResult out;
  out.dts = dts;
  for (double dt : dts) {
    McOptions o = mc;
    o.dt = dt;
    const auto st = run_equilibrium(sol.problem, sol.rho.phi, sol.interp, t0, x0, o, true);
    out.median_gap.push_back(median(st.gaps));
  }
  for (std::size_t k = 0; k + 1 < out.median_gap.size(); ++k)
    out.ratios.push_back(out.median_gap[k] / out.median_gap[k + 1]);
  return out;
}

std::vector<ReportEntry> check_wealth_identity(const Solution& sol, double t0, double x0,
                                               const McOptions& mc, const std::vector<double>& dts,
                                               double tol, double lo, double hi) {
  const auto start = clock_type::now();
  const auto res = wealth_identity_scaling(sol, t0, x0, dts, mc);
  const double secs = seconds_since(start);
  std::ostringstream gaps;
  for (std::size_t k = 0; k < dts.size(); ++k)
    gaps << (k ? ", " : "") << "dt=" << dts[k] << ": " << fmt(res.median_gap[k]);
  const std::size_t mid = dts.size() > 1 ? 1 : 0;
  std::vector<ReportEntry> out;
  out.push_back({"wealth.identity", res.median_gap[mid] < tol ? Status::kPass : Status::kFail,
                 res.median_gap[mid], tol, secs,
                 "median over paths of max_s |X - p_bar(s,Y)|/X; " + gaps.str()});
  double worst = 0.0;
  bool inside = true;
  std::ostringstream rs;
  for (std::size_t k = 0; k < res.ratios.size(); ++k) {
    rs << (k ? ", " : "") << fmt(res.ratios[k]);
    inside = inside && res.ratios[k] >= lo && res.ratios[k] <= hi;
    const double dist = res.ratios[k] < lo ? lo - res.ratios[k] : (res.ratios[k] > hi ? res.ratios[k] - hi : 0.0);
    worst = std::max(worst, dist);
  }
  const double shown = res.ratios.empty() ? 0.0 : res.ratios.front();
  out.push_back({"wealth.scaling", inside ? Status::kPass : Status::kWarn, shown, hi, 0.0,
                 "gap ratios under dt/4: " + rs.str() + " (expected within [" + fmt(lo) + ", " +
                     fmt(hi) + "])"});
  return out;
}

std::vector<Probe> default_probes(const Grid& grid) {
  const double yc = 0.5 * (grid.y_min() + grid.y_max());
  const double w = grid.y_max() - grid.y_min();
  const double T = grid.horizon();
  auto snap = [&](double t) { return grid.t(grid.t_index(std::round(t / grid.dt()) * grid.dt())); };
  return {{snap(0.0), yc},
          {snap(0.25 * T), yc + 0.05 * w},
          {snap(0.5 * T), yc - 0.05 * w},
          {snap(0.75 * T), yc + 0.1 * w},
          {snap(0.9 * T), yc - 0.1 * w}};
}

namespace {

double field_at(const ScalarField2D& f, std::size_t i, double y) {
  const Grid& g = f.grid();
  const Cell c = locate(y, g.y_min(), g.dy(), g.n_y());
  return f(i, c.k) + c.s * (f(i, c.k + 1) - f(i, c.k));
}

// Probe y snapped to a node so the PDE side needs no interpolation.
double snap_y(const Grid& g, double y) {
  const double k = std::round((y - g.y_min()) / g.dy());
  return g.y(static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(g.n_y() - 1))));
}

}  // namespace

ReportEntry check_operator_mc(const Solution& sol, const std::vector<Probe>& probes,
                              std::size_t n_paths, std::uint64_t seed, double max_z) {
  const auto start = clock_type::now();
  const ScalarField2D f = apply_F(sol.problem, sol.rho.phi);
  double worst = 0.0;
  std::ostringstream os;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const std::size_t i = sol.grid.t_index(probes[k].t);
    const double y = snap_y(sol.grid, probes[k].y);
    const auto mc = estimate_F_mc(sol.problem, sol.rho.phi, i, y, n_paths, seed + k);
    const double pde = field_at(f, i, y);
    const double z = z_score(mc.mean, pde, mc.se);
    worst = std::max(worst, z);
    os << (k ? "; " : "") << "(t=" << fmt(probes[k].t) << ",y=" << fmt(y) << ") pde " << fmt(pde)
       << " mc " << fmt(mc.mean) << "+-" << fmt(mc.se);
  }
  return {"operator.mc_crosscheck", worst <= max_z ? Status::kPass : Status::kWarn, worst, max_z,
          seconds_since(start), os.str()};
}

ReportEntry check_pbar_mc(const Solution& sol, const std::vector<Probe>& probes,
                          std::size_t n_paths, std::uint64_t seed, double max_z) {
  const auto start = clock_type::now();
  double worst = 0.0;
  std::ostringstream os;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const std::size_t i = sol.grid.t_index(probes[k].t);
    const double y = snap_y(sol.grid, probes[k].y);
    const auto mc = estimate_pbar_fk(sol.problem, sol.rho.phi, i, y, n_paths, seed + k);
    const double pde = field_at(sol.pbar.pbar, i, y);
    const double z = z_score(mc.mean, pde, mc.se);
    worst = std::max(worst, z);
    os << (k ? "; " : "") << "(t=" << fmt(probes[k].t) << ",y=" << fmt(y) << ") pde " << fmt(pde)
       << " mc " << fmt(mc.mean) << "+-" << fmt(mc.se);
  }
  return {"pbar.feynman_kac", worst <= max_z ? Status::kPass : Status::kWarn, worst, max_z,
          seconds_since(start), os.str()};
}

std::vector<PerturbationCase> subgame_perturbations(const Solution& sol, double t0, double x0,
                                                    const std::vector<double>& epsilons,
                                                    const McOptions& mc) {
  const auto slice = sol.interp.slice(t0);
  const double y = sol.interp.invert(slice, x0);
  const double pi_bar = -sol.problem.market.theta() / sol.problem.market.sigma() *
                        sol.interp.log_slope(slice, y);
  const double c_bar = std::exp(sol.interp.log_I0(y)) / x0;
  bool zero_ok = true;
  for (const auto& term : sol.problem.utility.terms()) zero_ok = zero_ok && term.gamma > 0.0;

  struct Dev {
    const char* label;
    double pi;
    double c;
  };
  std::vector<Dev> devs = {{"c=0.5c", pi_bar, 0.5 * c_bar},
                           {"c=1.5c", pi_bar, 1.5 * c_bar},
                           {"pi=0.5pi", 0.5 * pi_bar, c_bar},
                           {"pi=1.5pi", 1.5 * pi_bar, c_bar}};
  if (zero_ok) devs.insert(devs.begin(), Dev{"c=0", pi_bar, 0.0});

  std::vector<PerturbationCase> out;
  for (double eps : epsilons)
    for (const auto& d : devs) {
      const auto est = estimate_deviation(sol.problem, sol.interp, t0, x0,
                                          Deviation{t0 + eps, d.pi, d.c}, mc);
      out.push_back({d.label, eps, d.pi, d.c, est});
    }
  return out;
}

ReportEntry check_subgame_perturbation(const Solution& sol, double t0, double x0,
                                       const std::vector<double>& epsilons, const McOptions& mc,
                                       double max_z) {
  const auto start = clock_type::now();
  const auto cases = subgame_perturbations(sol, t0, x0, epsilons, mc);
  double worst = std::numeric_limits<double>::infinity();
  std::ostringstream os;
  for (const auto& c : cases) {
    const double z = c.d.se > 0.0 ? c.d.mean / c.d.se : (c.d.mean >= 0.0 ? 0.0 : -1e300);
    worst = std::min(worst, z);
    os << c.label << "@eps=" << fmt(c.epsilon) << ": D/eps=" << fmt(c.d.mean / c.epsilon) << "+-"
       << fmt(c.d.se / c.epsilon) << "; ";
  }
  return {"subgame.perturbation", worst >= -max_z ? Status::kPass : Status::kWarn, worst, -max_z,
          seconds_since(start), os.str()};
}

}  // namespace tcm
