#include "tcmerton/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "tcmerton/errors.hpp"

namespace tcm {

namespace {

// e^y is representable for |y| below this.
constexpr double kMaxLogArgument = 700.0;

bool finite(double x) { return std::isfinite(x); }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

MarketModel::MarketModel(double r, double mu, double sigma, double horizon)
    : r_(r), mu_(mu), sigma_(sigma), horizon_(horizon) {
  if (!finite(r) || r <= 0.0) throw ValidationError("market.r", "must be finite and > 0");
  if (!finite(mu)) throw ValidationError("market.mu", "must be finite");
  if (!finite(sigma) || sigma <= 0.0)
    throw ValidationError("market.sigma", "must be finite and > 0");
  if (!finite(horizon) || horizon <= 0.0)
    throw ValidationError("market.T", "must be finite and > 0");
}

// ---------------------------------------------------------------------------
// DiscountModel

DiscountModel::DiscountModel(Spec spec, double horizon) : spec_(std::move(spec)), horizon_(horizon) {
  if (!finite(horizon) || horizon <= 0.0) throw ValidationError("discount.T", "must be > 0");
}

DiscountModel DiscountModel::exponential(double rho0, double horizon) {
  if (!finite(rho0)) throw ValidationError("discount.rho0", "must be finite");
  DiscountModel d(ExponentialDiscount{rho0}, horizon);
  d.rho_min_ = d.rho_max_ = rho0;
  d.rho_norm_ = std::abs(rho0);
  return d;
}

DiscountModel DiscountModel::hyperbolic(double alpha, double beta, double horizon) {
  if (!finite(alpha) || alpha < 0.0) throw ValidationError("discount.alpha", "must be >= 0");
  if (!finite(beta) || beta < 0.0) throw ValidationError("discount.beta", "must be >= 0");
  DiscountModel d(HyperbolicDiscount{alpha, beta}, horizon);
  // rho_h(t,s) = alpha beta / (1 + beta (s - t)), decreasing in s - t.
  d.rho_max_ = alpha * beta;
  d.rho_min_ = alpha * beta / (1.0 + beta * horizon);
  d.rho_norm_ = d.rho_max_;
  return d;
}

DiscountModel DiscountModel::pseudo_exponential(std::vector<double> weights,
                                                std::vector<double> rates, double horizon) {
  if (weights.empty() || weights.size() != rates.size())
    throw ValidationError("discount.weights", "weights and rates must be non-empty and equal length");
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!finite(weights[k]) || weights[k] <= 0.0)
      throw ValidationError("discount.weights", "weights must be > 0");
    if (!finite(rates[k])) throw ValidationError("discount.rates", "rates must be finite");
    total += weights[k];
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError("discount.weights", "weights must sum to 1 so that h(t,t) = 1");
  DiscountModel d(PseudoExponentialDiscount{std::move(weights), std::move(rates)}, horizon);
  // The weighted mean of the rates drifts toward the smallest rate as s - t grows.
  d.rho_max_ = d.rho_h(0.0, 0.0);
  d.rho_min_ = d.rho_h(0.0, horizon);
  if (d.rho_min_ > d.rho_max_) std::swap(d.rho_min_, d.rho_max_);
  d.rho_norm_ = std::max(std::abs(d.rho_min_), std::abs(d.rho_max_));
  return d;
}

DiscountModel DiscountModel::user_defined(std::function<double(double, double)> h,
                                          std::function<double(double, double)> dh_dt,
                                          double horizon, std::size_t samples) {
  if (!h || !dh_dt) throw ValidationError("discount.user", "both h and dh/dt are required");
  if (samples < 2) throw ValidationError("discount.samples", "need at least 2 samples");
  DiscountModel d(UserDiscount{std::move(h), std::move(dh_dt)}, horizon);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const double step = horizon / static_cast<double>(samples - 1);
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) * step;
    const double diag = d.h_unchecked(t, t);
    if (!finite(diag) || std::abs(diag - 1.0) > 1e-12) {
      std::ostringstream os;
      os << "h(t,t) must equal 1; got " << diag << " at t=" << t;
      throw ValidationError("discount.user", os.str());
    }
    for (std::size_t j = i; j < samples; ++j) {
      const double s = static_cast<double>(j) * step;
      const double hv = d.h_unchecked(t, s);
      const double dv = d.dh_dt_unchecked(t, s);
      if (!finite(hv) || hv <= 0.0 || !finite(dv))
        throw ValidationError("discount.user", "h must be finite and positive on D");
      const double rho = dv / hv;
      lo = std::min(lo, rho);
      hi = std::max(hi, rho);
    }
  }
  d.rho_norm_ = 1.05 * std::max(std::abs(lo), std::abs(hi));
  const double pad = 0.05 * d.rho_norm_;
  d.rho_min_ = lo == hi ? lo : lo - pad;
  d.rho_max_ = lo == hi ? hi : hi + pad;
  return d;
}

void DiscountModel::check_domain(double t, double s) const {
  const double eps = 1e-12 * horizon_;
  if (!(t >= -eps && s <= horizon_ + eps && t <= s + eps)) {
    std::ostringstream os;
    os << "discount evaluated outside 0 <= t <= s <= T: t=" << t << " s=" << s
       << " T=" << horizon_;
    throw DomainError(os.str());
  }
}

double DiscountModel::h_unchecked(double t, double s) const {
  const double tau = s - t;
  return std::visit(
      overloaded{[&](const ExponentialDiscount& e) { return std::exp(-e.rho0 * tau); },
                 [&](const HyperbolicDiscount& hd) {
                   return std::pow(1.0 + hd.beta * tau, -hd.alpha);
                 },
                 [&](const PseudoExponentialDiscount& p) {
                   double acc = 0.0;
                   for (std::size_t k = 0; k < p.weights.size(); ++k)
                     acc += p.weights[k] * std::exp(-p.rates[k] * tau);
                   return acc;
                 },
                 [&](const UserDiscount& u) { return u.h(t, s); }},
      spec_);
}

double DiscountModel::dh_dt_unchecked(double t, double s) const {
  const double tau = s - t;
  return std::visit(
      overloaded{[&](const ExponentialDiscount& e) { return e.rho0 * std::exp(-e.rho0 * tau); },
                 [&](const HyperbolicDiscount& hd) {
                   return hd.alpha * hd.beta * std::pow(1.0 + hd.beta * tau, -hd.alpha - 1.0);
                 },
                 [&](const PseudoExponentialDiscount& p) {
                   double acc = 0.0;
                   for (std::size_t k = 0; k < p.weights.size(); ++k)
                     acc += p.weights[k] * p.rates[k] * std::exp(-p.rates[k] * tau);
                   return acc;
                 },
                 [&](const UserDiscount& u) { return u.dh_dt(t, s); }},
      spec_);
}

double DiscountModel::h(double t, double s) const {
  check_domain(t, s);
  return h_unchecked(t, s);
}

double DiscountModel::dh_dt(double t, double s) const {
  check_domain(t, s);
  return dh_dt_unchecked(t, s);
}

double DiscountModel::rho_h(double t, double s) const {
  check_domain(t, s);
  return std::visit(
      overloaded{[&](const ExponentialDiscount& e) { return e.rho0; },
                 [&](const HyperbolicDiscount& hd) {
                   return hd.alpha * hd.beta / (1.0 + hd.beta * (s - t));
                 },
                 [&](const auto&) { return dh_dt_unchecked(t, s) / h_unchecked(t, s); }},
      spec_);
}

std::string DiscountModel::kind() const {
  return std::visit(overloaded{[](const ExponentialDiscount&) { return std::string("exponential"); },
                               [](const HyperbolicDiscount&) { return std::string("hyperbolic"); },
                               [](const PseudoExponentialDiscount&) {
                                 return std::string("pseudo_exponential");
                               },
                               [](const UserDiscount&) { return std::string("user"); }},
                    spec_);
}

// ---------------------------------------------------------------------------
// UtilityModel

UtilityModel::UtilityModel(std::vector<PowerTerm> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw ValidationError("utility", "needs at least one power term");
  r1_ = std::numeric_limits<double>::infinity();
  r2_ = 0.0;
  for (const auto& term : terms_) {
    if (!finite(term.weight) || term.weight <= 0.0)
      throw ValidationError("utility.weight", "power-term weights must be > 0");
    if (!finite(term.gamma) || term.gamma >= 1.0 || term.gamma == 0.0)
      throw ValidationError("utility.gamma", "exponents must satisfy gamma < 1, gamma != 0");
    r1_ = std::min(r1_, 1.0 - term.gamma);
    r2_ = std::max(r2_, 1.0 - term.gamma);
  }
}

UtilityModel UtilityModel::crra(double gamma) { return UtilityModel({{1.0, gamma}}); }

UtilityModel UtilityModel::mixed_power(double alpha, double gamma1, double gamma2) {
  if (!finite(alpha) || alpha <= 0.0 || alpha >= 1.0)
    throw ValidationError("utility.alpha", "mixing weight must lie in (0, 1)");
  return UtilityModel({{alpha, gamma1}, {1.0 - alpha, gamma2}});
}

UtilityModel UtilityModel::power_mixture(std::vector<PowerTerm> terms) {
  return UtilityModel(std::move(terms));
}

UtilityModel UtilityModel::with_risk_aversion_bounds(double r1, double r2) const {
  if (!finite(r1) || r1 <= 0.0) throw ValidationError("utility.r1", "must be > 0");
  if (!finite(r2) || r2 < r1) throw ValidationError("utility.r2", "must be >= r1");
  UtilityModel copy = *this;
  copy.r1_ = r1;
  copy.r2_ = r2;
  return copy;
}

std::string UtilityModel::kind() const { return is_crra() ? "crra" : "power_mixture"; }

double UtilityModel::U(double x) const {
  if (!(x > 0.0)) throw DomainError("utility evaluated at non-positive wealth");
  double acc = 0.0;
  for (const auto& t : terms_) acc += t.weight * std::pow(x, t.gamma) / t.gamma;
  return acc;
}

double UtilityModel::Up(double x) const {
  if (!(x > 0.0)) throw DomainError("marginal utility evaluated at non-positive wealth");
  double acc = 0.0;
  for (const auto& t : terms_) acc += t.weight * std::pow(x, t.gamma - 1.0);
  return acc;
}

double UtilityModel::Upp(double x) const {
  if (!(x > 0.0)) throw DomainError("U'' evaluated at non-positive wealth");
  double acc = 0.0;
  for (const auto& t : terms_) acc += t.weight * (t.gamma - 1.0) * std::pow(x, t.gamma - 2.0);
  return acc;
}

// log U'(e^u) via log-sum-exp.
double UtilityModel::log_marginal(double log_x) const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& t : terms_) m = std::max(m, std::log(t.weight) + (t.gamma - 1.0) * log_x);
  double acc = 0.0;
  for (const auto& t : terms_) acc += std::exp(std::log(t.weight) + (t.gamma - 1.0) * log_x - m);
  return m + std::log(acc);
}

double UtilityModel::risk_aversion(double x) const {
  if (!(x > 0.0)) throw DomainError("risk aversion evaluated at non-positive wealth");
  const double lx = std::log(x);
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& t : terms_) m = std::max(m, std::log(t.weight) + (t.gamma - 1.0) * lx);
  double num = 0.0;
  double den = 0.0;
  for (const auto& t : terms_) {
    const double w = std::exp(std::log(t.weight) + (t.gamma - 1.0) * lx - m);
    num += (1.0 - t.gamma) * w;
    den += w;
  }
  return num / den;
}

double UtilityModel::log_I0(double y) const {
  if (!finite(y) || std::abs(y) > kMaxLogArgument) {
    std::ostringstream os;
    os << "I0 evaluated at y=" << y << ": e^y outside the representable range |y| <= "
       << kMaxLogArgument;
    throw DomainError(os.str());
  }
  if (is_crra()) {
    const auto& t = terms_.front();
    return (y - std::log(t.weight)) / (t.gamma - 1.0);
  }
  // Solve log U'(e^u) = y for u. The left side is strictly decreasing with
  // slope -R(e^u) in [-r2, -r1]; each term alone brackets the root.
  const double n = static_cast<double>(terms_.size());
  double lo = -std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& t : terms_) {
    lo = std::max(lo, (y - std::log(t.weight)) / (t.gamma - 1.0));
    hi = std::max(hi, (y - std::log(n * t.weight)) / (t.gamma - 1.0));
  }
  double u = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = log_marginal(u) - y;
    if (f > 0.0)
      lo = u;
    else
      hi = u;
    const double slope = -risk_aversion(std::exp(u));
    double next = u - f / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - u);
    u = next;
    if (step <= 1e-15 * std::max(1.0, std::abs(u)) || hi - lo <= 1e-15 * std::max(1.0, std::abs(u)))
      break;
  }
  return u;
}

double UtilityModel::I0(double y) const {
  const double li = log_I0(y);
  const double v = std::exp(li);
  if (!finite(v) || v <= 0.0) {
    std::ostringstream os;
    os << "I0(" << y << ") = exp(" << li << ") is not representable";
    throw DomainError(os.str());
  }
  return v;
}

double UtilityModel::I(double z) const {
  if (!(z > 0.0)) throw DomainError("inverse marginal utility needs z > 0");
  return I0(std::log(z));
}

double UtilityModel::I0p(double y) const {
  const double x = I0(y);
  return -x / risk_aversion(x);
}

double UtilityModel::U0(double y) const { return U(I0(y)); }

double UtilityModel::U0p(double y) const {
  const double x = I0(y);
  return -std::exp(y) * x / risk_aversion(x);
}

void UtilityModel::validate() const {
  constexpr std::size_t n = 1000;
  const double lo = std::log(1e-6);
  const double hi = std::log(1e6);
  const double slack = 1e-12;
  for (std::size_t k = 0; k < n; ++k) {
    const double lx = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    const double x = std::exp(lx);
    const double up = Up(x);
    const double upp = Upp(x);
    std::ostringstream where;
    where << " at x=" << x;
    if (!(up > 0.0)) throw ValidationError("utility", "U' must be positive" + where.str());
    if (!(upp < 0.0)) throw ValidationError("utility", "U'' must be negative" + where.str());
    const double ra = -x * upp / up;
    if (ra < r1_ * (1.0 - slack)) {
      std::ostringstream os;
      os << "relative risk aversion " << ra << " below declared r1=" << r1_ << where.str();
      throw ValidationError("utility.r1", os.str());
    }
    if (ra > r2_ * (1.0 + slack)) {
      std::ostringstream os;
      os << "relative risk aversion " << ra << " above declared r2=" << r2_ << where.str();
      throw ValidationError("utility.r2", os.str());
    }
    const double back = Up(I(up));
    if (std::abs(back - up) > 1e-10 * up)
      throw ValidationError("utility", "U'(I(z)) != z" + where.str());
  }
}

Problem::Problem(MarketModel m, DiscountModel d, UtilityModel u)
    : market(std::move(m)), discount(std::move(d)), utility(std::move(u)) {
  if (std::abs(market.horizon() - discount.horizon()) > 1e-12 * market.horizon())
    throw ValidationError("discount.T", "discount horizon must match market horizon");
}

std::pair<double, double> elasticity_bounds(const UtilityModel& u, double kappa, double t,
                                            double horizon) {
  const double grow = std::exp(kappa * (horizon - t));
  return {u.r1() / grow, u.r2() * grow};
}

}  // namespace tcm
