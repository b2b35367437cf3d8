#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace tcm {

/// Constant-coefficient Black-Scholes market with one stock and a savings account.
class MarketModel {
 public:
  MarketModel(double r, double mu, double sigma, double horizon);

  double r() const noexcept { return r_; }
  double mu() const noexcept { return mu_; }
  double sigma() const noexcept { return sigma_; }
  double horizon() const noexcept { return horizon_; }
  /// Market price of risk (mu - r) / sigma.
  double theta() const noexcept { return (mu_ - r_) / sigma_; }

 private:
  double r_;
  double mu_;
  double sigma_;
  double horizon_;
};

struct ExponentialDiscount {
  double rho0;
};

/// h(t,s) = (1 + beta (s - t))^(-alpha)
struct HyperbolicDiscount {
  double alpha;
  double beta;
};

/// h(t,s) = sum_k w_k exp(-rate_k (s - t)), weights summing to one.
struct PseudoExponentialDiscount {
  std::vector<double> weights;
  std::vector<double> rates;
};

/// Arbitrary discount function given with its t-derivative.
struct UserDiscount {
  std::function<double(double, double)> h;
  std::function<double(double, double)> dh_dt;
};

/// Discount function h(t,s) on D = {0 <= t <= s <= T} and its discount rate
/// rho_h = (dh/dt) / h. Immutable after construction.
class DiscountModel {
 public:
  using Spec = std::variant<ExponentialDiscount, HyperbolicDiscount, PseudoExponentialDiscount,
                            UserDiscount>;

  static DiscountModel exponential(double rho0, double horizon);
  static DiscountModel hyperbolic(double alpha, double beta, double horizon);
  static DiscountModel pseudo_exponential(std::vector<double> weights, std::vector<double> rates,
                                          double horizon);
  /// rho range and norm are estimated on a samples x samples lattice of D;
  /// the norm is inflated by 5%.
  static DiscountModel user_defined(std::function<double(double, double)> h,
                                    std::function<double(double, double)> dh_dt, double horizon,
                                    std::size_t samples = 201);

  double h(double t, double s) const;
  double dh_dt(double t, double s) const;
  double rho_h(double t, double s) const;

  double horizon() const noexcept { return horizon_; }
  /// sup over D of |rho_h|.
  double rho_norm() const noexcept { return rho_norm_; }
  double rho_min() const noexcept { return rho_min_; }
  double rho_max() const noexcept { return rho_max_; }
  /// True when rho_h is the same constant on all of D.
  bool constant_rate() const noexcept { return rho_min_ == rho_max_; }

  const Spec& spec() const noexcept { return spec_; }
  std::string kind() const;

 private:
  DiscountModel(Spec spec, double horizon);
  void check_domain(double t, double s) const;
  double h_unchecked(double t, double s) const;
  double dh_dt_unchecked(double t, double s) const;

  Spec spec_;
  double horizon_;
  double rho_norm_ = 0.0;
  double rho_min_ = 0.0;
  double rho_max_ = 0.0;
};

/// One term a * x^gamma / gamma of a power-mixture utility.
struct PowerTerm {
  double weight;
  double gamma;
};

/// Utility U(x) = sum_k a_k x^gamma_k / gamma_k with a_k > 0, gamma_k < 1, gamma_k != 0.
/// CRRA is the one-term case; the two-term case is the mixed-power family.
/// Relative risk aversion -x U''/U' lies in [min(1-gamma_k), max(1-gamma_k)].
class UtilityModel {
 public:
  static UtilityModel crra(double gamma);
  static UtilityModel mixed_power(double alpha, double gamma1, double gamma2);
  static UtilityModel power_mixture(std::vector<PowerTerm> terms);

  /// Replaces the analytic risk-aversion bounds with user-declared ones.
  /// Call validate() to check them against the utility.
  UtilityModel with_risk_aversion_bounds(double r1, double r2) const;

  double U(double x) const;
  double Up(double x) const;
  double Upp(double x) const;
  /// Inverse marginal utility (U')^{-1}(z), z > 0.
  double I(double z) const;
  double risk_aversion(double x) const;

  /// I(e^y), computed in log space.
  double I0(double y) const;
  double log_I0(double y) const;
  /// d/dy I0(y) = -I0(y) / R(I0(y)).
  double I0p(double y) const;
  /// U(I0(y)).
  double U0(double y) const;
  /// d/dy U0(y) = e^y I0'(y) < 0.
  double U0p(double y) const;

  double r1() const noexcept { return r1_; }
  double r2() const noexcept { return r2_; }
  const std::vector<PowerTerm>& terms() const noexcept { return terms_; }
  bool is_crra() const noexcept { return terms_.size() == 1; }
  std::string kind() const;

  /// Samples the model invariants (monotonicity, concavity, risk-aversion
  /// bounds, inverse consistency); throws ValidationError on the first failure.
  void validate() const;

 private:
  explicit UtilityModel(std::vector<PowerTerm> terms);
  double log_marginal(double log_x) const;

  std::vector<PowerTerm> terms_;
  double r1_;
  double r2_;
};

/// Bundle of model inputs shared by every solver stage.
struct Problem {
  MarketModel market;
  DiscountModel discount;
  UtilityModel utility;

  Problem(MarketModel m, DiscountModel d, UtilityModel u);
  double horizon() const noexcept { return market.horizon(); }
};

/// Time-dependent elasticity bounds (r1 e^{-kappa (T-t)}, r2 e^{kappa (T-t)}).
std::pair<double, double> elasticity_bounds(const UtilityModel& u, double kappa, double t,
                                            double horizon);

}  // namespace tcm
